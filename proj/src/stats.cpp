#include "slfv/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace slfv {

void Accumulator::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
}

void Accumulator::merge(const Accumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double delta = o.mean_ - mean_;
    m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    mean_ += delta * static_cast<double>(o.n_) / n;
    n_ += o.n_;
    const double t = sum_ + o.sum_;
    comp_ += o.comp_ + (std::abs(sum_) >= std::abs(o.sum_) ? (sum_ - t) + o.sum_ : (o.sum_ - t) + sum_);
    sum_ = t;
}

double Accumulator::mean() const { return n_ == 0 ? 0.0 : sum() / static_cast<double>(n_); }

double Accumulator::variance() const { return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1); }

double Accumulator::stderr_mean() const { return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_)); }

Estimate estimate(const Accumulator& a) { return {a.mean(), a.stderr_mean(), a.count()}; }

Estimate estimate(const std::vector<double>& xs) {
    Accumulator a;
    for (double x : xs) a.add(x);
    return estimate(a);
}

double covariance(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("covariance: size mismatch");
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double mx = estimate(x).mean;
    const double my = estimate(y).mean;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(n - 1);
}

double z_score(double a, double se_a, double b, double se_b) {
    const double se = std::sqrt(se_a * se_a + se_b * se_b);
    if (se == 0.0) return a == b ? 0.0 : std::copysign(INFINITY, a - b);
    return (a - b) / se;
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double ratio_stderr(const std::vector<double>& x, const std::vector<double>& y) {
    const Estimate ex = estimate(x);
    const Estimate ey = estimate(y);
    const double n = static_cast<double>(x.size());
    const double r = ex.mean / ey.mean;
    const double var = (ex.se * ex.se * n - 2.0 * r * covariance(x, y) +
                        r * r * ey.se * ey.se * n) /
                       (ey.mean * ey.mean);
    return std::sqrt(std::max(var, 0.0) / n);
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

double ks_pvalue(double statistic, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * statistic;
    if (lambda < 1e-3) return 1.0;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        if (std::abs(term) < 1e-16) break;
    }
    return std::clamp(p, 0.0, 1.0);
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1))));
    if (w == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < w; ++k) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next.store(n);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace slfv
