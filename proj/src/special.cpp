#include "slfv/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "slfv/quadrature.hpp"

namespace slfv {

namespace {

// Σ_{n≥2} (−v)^{n−2} / n! for |v| < 1, in long double.
long double series_over_square(long double v) {
    long double term = 0.5L;
    long double sum = 0.5L;
    for (int n = 3; n < 40; ++n) {
        term *= -v / n;
        sum += term;
        if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
    }
    return sum;
}

// (1 − x + x²/2 − e^{−x}) for x ≥ 0; series Σ_{n≥3} −(−x)^n/n! below 1.
double dawson_a(double x) {
    if (x < 1.0) {
        long double term = static_cast<long double>(x) * x * x / 6.0L;
        long double sum = term;
        for (int n = 4; n < 40; ++n) {
            term *= -static_cast<long double>(x) / n;
            sum += term;
            if (std::fabs(term) < 1e-22L * std::fabs(sum)) break;
        }
        return static_cast<double>(sum);
    }
    const long double lx = x;
    return static_cast<double>(1.0L - lx + 0.5L * lx * lx - std::exp(-lx));
}

} // namespace

double g_signed(double v) {
    const long double lv = v;
    if (std::fabs(lv) < 1.0L) return static_cast<double>(lv * lv * series_over_square(lv));
    return static_cast<double>(std::expm1(-lv) + lv);
}

double g_function(double v) {
    if (v < 0.0) throw std::invalid_argument("g_function requires v >= 0");
    return g_signed(v);
}

double g_over_square(double v) {
    const long double lv = v;
    if (std::fabs(lv) < 1.0L) return static_cast<double>(series_over_square(lv));
    return static_cast<double>((std::expm1(-lv) + lv) / (lv * lv));
}

double stable_exponent_integral(double beta, double tol) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("stable_exponent_integral requires beta in (0,1)");
    // On (0,1]: termwise integration of the Taylor series, Σ_{n≥2} (−1)^n / (n! (n−β−1)).
    long double term = 0.5L;
    long double inner = 0.0L;
    for (int n = 2; n < 40; ++n) {
        if (n > 2) term /= -n;
        inner += term / (n - beta - 1.0L);
    }
    // On [1,∞): the algebraic part integrates to 1/β − 1/(β+1); e^{−υ}υ^{−β−2} is smooth, and its tail
    // beyond υ = 61 is below e^{−60}.
    const double tail = integrate_adaptive(
        [&](double x) { return std::exp(-1.0 - x) * std::pow(1.0 + x, -beta - 2.0); }, 0.0, 60.0, tol);
    const double outer = 1.0 / beta - 1.0 / (beta + 1.0) + tail;
    return static_cast<double>(inner) + outer;
}

BranchingIntegral::BranchingIntegral(double beta) : beta_(beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("BranchingIntegral requires beta in (0,1)");
    total_ = stable_exponent_integral(beta);
    x_lo_ = 1e-3;
    log_x_lo_ = std::log(x_lo_);
    const int per_decade = 128;
    const int decades = 12;
    step_ = std::log(10.0) / per_decade;
    const int n = per_decade * decades + 1;
    values_.resize(n);
    slopes_.resize(n);
    values_[0] = series(x_lo_);
    slopes_[0] = derivative_log(x_lo_);
    const GaussRule& g = gauss_legendre(10);
    for (int k = 1; k < n; ++k) {
        const double t0 = log_x_lo_ + (k - 1) * step_;
        double cell = 0.0;
        for (std::size_t i = 0; i < g.x.size(); ++i) {
            const double t = t0 + 0.5 * step_ * (1.0 + g.x[i]);
            cell += g.w[i] * derivative_log(std::exp(t));
        }
        values_[k] = values_[k - 1] + 0.5 * step_ * cell;
        slopes_[k] = derivative_log(std::exp(log_x_lo_ + k * step_));
    }
}

double BranchingIntegral::series(double x) const {
    // Σ_{n≥2} (−1)^n x^{n−β−1} / (n! (n−β−1)), valid for all x, used only for small x.
    long double term = 1.0L;
    long double sum = 0.0L;
    const long double lx = x;
    for (int n = 2; n < 60; ++n) {
        term = (n == 2) ? 0.5L : term * (-lx) / n;
        const long double add = term / (n - beta_ - 1.0L);
        sum += add;
        if (std::fabs(add) < 1e-22L * std::fabs(sum)) break;
    }
    return static_cast<double>(sum * std::pow(lx, 1.0L - beta_));
}

double BranchingIntegral::derivative_log(double x) const {
    // dG/d(ln x) = g(x) x^{−β−1}
    return g_signed(x) * std::pow(x, -beta_ - 1.0);
}

double BranchingIntegral::operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (x <= x_lo_) return series(x);
    const double t = std::log(x) - log_x_lo_;
    const auto n = static_cast<double>(values_.size() - 1);
    if (t >= n * step_) {
        // g(s) s^{−β−2} = s^{−β−1} − s^{−β−2} + e^{−s}s^{−β−2}; the last term is below 1e−30 here
        return total_ - std::pow(x, -beta_) / beta_ + std::pow(x, -beta_ - 1.0) / (beta_ + 1.0);
    }
    const auto k = std::min(static_cast<std::size_t>(t / step_), values_.size() - 2);
    const double s = (t - k * step_) / step_;
    const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    const double h10 = s * (1.0 - s) * (1.0 - s);
    const double h01 = s * s * (3.0 - 2.0 * s);
    const double h11 = s * s * (s - 1.0);
    return h00 * values_[k] + h10 * step_ * slopes_[k] + h01 * values_[k + 1] + h11 * step_ * slopes_[k + 1];
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
    std::vector<double> g(points);
    const double r = std::log(hi / lo) / (points - 1);
    for (int i = 0; i < points; ++i) g[i] = lo * std::exp(r * i);
    g.back() = hi;
    return g;
}

DawsonReport dawson_inequalities(const std::vector<double>& x_grid, double beta) {
    DawsonReport rep;
    rep.min_a = std::numeric_limits<double>::infinity();
    rep.c1 = dawson_a(2.0) / 2.0;
    rep.c1_argmin = 2.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (double x : x_grid) {
        if (x < 0.0) continue;
        ++rep.points;
        const double a = dawson_a(x);
        rep.min_a = std::min(rep.min_a, a);
        if (!(a >= 0.0)) ++rep.violations_a;
        if (x >= 2.0 && a / x < rep.c1) {
            rep.c1 = a / x;
            rep.c1_argmin = x;
        }
        const double g = g_signed(x);
        if (!(g >= 0.0) || !std::isfinite(g)) ++rep.violations_c;
        if (x > 0.0) {
            const double ratio = g / std::pow(x, 1.0 + beta);
            rep.c2 = std::max(rep.c2, ratio);
            if (x < smallest) {
                smallest = x;
                rep.c2_small_x = ratio;
            }
        }
    }
    return rep;
}

NonSpatialResult lfv_nonspatial_generator(double K, double beta, double X, double theta) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    if (X < 0.0 || X > K || theta < 0.0) throw std::invalid_argument("need 0 <= X <= K and theta >= 0");
    NonSpatialResult res;
    if (X == 0.0 || theta == 0.0) return res;
    const double cb = 1.0 / (std::tgamma(1.0 - beta) * std::tgamma(1.0 + beta));
    const double p = X / K;
    const double a = theta * K * (1.0 - p);
    const double b = theta * X;
    const double q = 1.0 / (1.0 - beta);
    // ρ = s^q removes the ρ^{-β} endpoint singularity; the e^{-θX} factor is applied at the end.
    auto integrand = [&](double s) {
        const double rho = std::pow(s, q);
        return q * std::pow(1.0 - rho, beta) *
               (p * a * a * g_over_square(a * rho) + (1.0 - p) * b * b * g_over_square(-b * rho));
    };
    std::vector<double> cuts{0.0};
    for (double scale : {a, b}) {
        for (double m : {0.1, 1.0, 10.0}) {
            const double rho = m / scale;
            if (rho > 0.0 && rho < 1.0) cuts.push_back(std::pow(rho, 1.0 / q));
        }
    }
    cuts.push_back(1.0);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] > cuts[i]) total += integrate_adaptive(integrand, cuts[i], cuts[i + 1], 1e-10);
    }
    const double damp = std::exp(-theta * X);
    res.numeric = cb * total * damp;
    res.predicted = cb * stable_exponent_integral(beta) * std::pow(K, beta) * X * damp * std::pow(theta, beta + 1.0);
    res.ratio = res.numeric / res.predicted;
    return res;
}

} // namespace slfv
