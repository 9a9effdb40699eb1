#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace slfv {

/// Running mean and variance (Welford) with a Neumaier-compensated sum.
class Accumulator {
public:
    void add(double x);
    void merge(const Accumulator& other);

    std::size_t count() const { return n_; }
    double sum() const { return sum_ + comp_; }
    double mean() const;
    /// Unbiased sample variance (zero for fewer than two samples).
    double variance() const;
    double stderr_mean() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct Estimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

Estimate estimate(const Accumulator& a);
Estimate estimate(const std::vector<double>& xs);

/// Sample covariance of paired observations.
double covariance(const std::vector<double>& x, const std::vector<double>& y);

/// (a − b) / sqrt(se_a² + se_b²); zero when both errors vanish and a == b.
double z_score(double a, double se_a, double b, double se_b);

/// Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// Delta-method standard error of mean(x)/mean(y) for paired samples.
double ratio_stderr(const std::vector<double>& x, const std::vector<double>& y);

/// Kolmogorov–Smirnov statistic of a sample against a continuous cdf.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Asymptotic p-value of the one-sample KS statistic.
double ks_pvalue(double statistic, std::size_t n);

/// Runs fn(i) for i in [0, n) on `workers` threads; results are stored by index, so the
/// output does not depend on the worker count.
template <class T>
std::vector<T> run_replicates(std::size_t n, int workers, const std::function<T(std::size_t)>& fn);

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

template <class T>
std::vector<T> run_replicates(std::size_t n, int workers, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(n);
    parallel_for(n, workers, [&](std::size_t i) { out[i] = fn(i); });
    return out;
}

} // namespace slfv
