#include "slfv/test_function.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>

#include "slfv/quadrature.hpp"

namespace slfv {

namespace {

double horner(const std::vector<double>& c, double y) {
    double s = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * y + *it;
    return s;
}

std::vector<double> integrate_poly(const std::vector<double>& c) {
    std::vector<double> out(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) out[k + 1] = c[k] / static_cast<double>(k + 1);
    return out;
}

std::vector<double> differentiate_poly(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> out(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) out[k - 1] = c[k] * static_cast<double>(k);
    return out;
}

double sq_norm(const Point& p, const Point& c, int d) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += (p[i] - c[i]) * (p[i] - c[i]);
    return s;
}

double sup_abs(const ScalarFn& f, double lo, double hi, int samples) {
    double m = 0.0;
    for (int i = 0; i <= samples; ++i) m = std::max(m, std::abs(f(lo + (hi - lo) * i / samples)));
    return m;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

} // namespace

PiecewisePoly::PiecewisePoly(double origin, std::vector<double> breaks, std::vector<std::vector<double>> coeffs)
    : origin_(origin), breaks_(std::move(breaks)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != breaks_.size() + 1) throw std::invalid_argument("PiecewisePoly needs one more piece than breaks");
    if (!std::is_sorted(breaks_.begin(), breaks_.end())) throw std::invalid_argument("PiecewisePoly breaks must be sorted");
}

std::size_t PiecewisePoly::region(double x) const {
    return static_cast<std::size_t>(std::upper_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
}

double PiecewisePoly::operator()(double x) const { return horner(coeffs_[region(x)], x - origin_); }

PiecewisePoly PiecewisePoly::antiderivative() const {
    for (double c : coeffs_.front())
        if (c != 0.0) throw std::logic_error("antiderivative from −∞ needs a zero left tail");
    std::vector<std::vector<double>> out(coeffs_.size());
    out[0] = {0.0};
    for (std::size_t k = 1; k < coeffs_.size(); ++k) {
        out[k] = integrate_poly(coeffs_[k]);
        const double y = breaks_[k - 1] - origin_;
        out[k][0] = horner(out[k - 1], y) - horner(out[k], y);
    }
    return PiecewisePoly(origin_, breaks_, std::move(out));
}

PiecewisePoly PiecewisePoly::derivative() const {
    std::vector<std::vector<double>> out;
    out.reserve(coeffs_.size());
    for (const auto& c : coeffs_) out.push_back(differentiate_poly(c));
    return PiecewisePoly(origin_, breaks_, std::move(out));
}

TestFunction bump_function(int d, const Point& center, double radius, double amplitude) {
    if (!(radius > 0.0)) throw std::invalid_argument("bump radius must be positive");
    TestFunction f;
    f.name = "bump";
    f.dimension = d;
    f.center = center;
    f.support_radius = radius;
    f.extent_lo = center[0] - radius;
    f.extent_hi = center[0] + radius;
    const double r2 = radius * radius;
    f.eval = [=](const Point& p) {
        const double s = sq_norm(p, center, d) / r2;
        if (s >= 1.0) return 0.0;
        const double t = 1.0 - s;
        return amplitude * t * t * t * t;
    };
    f.laplacian = [=](const Point& p) {
        const double s = sq_norm(p, center, d) / r2;
        if (s >= 1.0) return 0.0;
        const double t = 1.0 - s;
        return amplitude / r2 * (-8.0 * d * t * t * t + 48.0 * s * t * t);
    };
    // A (1 − y²/R²)⁴ = A Σ_k C(4,k) (−1)^k y^{2k} / R^{2k}
    std::vector<double> inside(9, 0.0);
    const double binom[5] = {1.0, 4.0, 6.0, 4.0, 1.0};
    for (int k = 0; k <= 4; ++k) inside[2 * k] = amplitude * binom[k] * ((k % 2) ? -1.0 : 1.0) / std::pow(r2, k);
    const PiecewisePoly p0(center[0], {center[0] - radius, center[0] + radius}, {{0.0}, inside, {0.0}});
    auto poly = std::make_shared<std::array<PiecewisePoly, 6>>();
    (*poly)[0] = p0;
    (*poly)[1] = p0.derivative();
    (*poly)[2] = (*poly)[1].derivative();
    (*poly)[3] = p0.antiderivative();
    (*poly)[4] = (*poly)[3].antiderivative();
    (*poly)[5] = (*poly)[4].antiderivative();
    for (int k = 0; k < 3; ++k) {
        f.derivative1d[k] = [poly, k](double x) { return (*poly)[k](x); };
        f.antiderivative1d[k] = [poly, k](double x) { return (*poly)[3 + k](x); };
    }
    const PiecewisePoly third = (*poly)[2].derivative();
    double c3 = 0.0;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double x = f.extent_lo + (f.extent_hi - f.extent_lo) * i / n;
        for (int k = 0; k < 3; ++k) c3 = std::max(c3, std::abs((*poly)[k](x)));
        c3 = std::max(c3, std::abs(third(x)));
    }
    f.c3_norm = c3;
    f.sup_norm = amplitude;
    return f;
}

TestFunction gaussian_function(int d, const Point& center, double sigma, double amplitude) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian sigma must be positive");
    TestFunction f;
    f.name = "gaussian";
    f.dimension = d;
    f.center = center;
    f.extent_lo = center[0] - 40.0 * sigma;
    f.extent_hi = center[0] + 40.0 * sigma;
    const double s2 = sigma * sigma;
    f.eval = [=](const Point& p) { return amplitude * std::exp(-0.5 * sq_norm(p, center, d) / s2); };
    f.laplacian = [=](const Point& p) {
        const double q = sq_norm(p, center, d) / s2;
        return amplitude * std::exp(-0.5 * q) * (q - d) / s2;
    };
    const double c = center[0];
    f.derivative1d[0] = [=](double x) {
        const double z = (x - c) / sigma;
        return amplitude * std::exp(-0.5 * z * z);
    };
    f.derivative1d[1] = [=](double x) {
        const double z = (x - c) / sigma;
        return -amplitude * z / sigma * std::exp(-0.5 * z * z);
    };
    f.derivative1d[2] = [=](double x) {
        const double z = (x - c) / sigma;
        return amplitude * (z * z - 1.0) / s2 * std::exp(-0.5 * z * z);
    };
    const double scale = amplitude * sigma * std::sqrt(2.0 * std::numbers::pi);
    f.antiderivative1d[0] = [=](double x) { return scale * normal_cdf((x - c) / sigma); };
    f.antiderivative1d[1] = [=](double x) {
        const double z = (x - c) / sigma;
        return scale * sigma * (z * normal_cdf(z) + normal_pdf(z));
    };
    f.antiderivative1d[2] = [=](double x) {
        const double z = (x - c) / sigma;
        return scale * s2 * 0.5 * ((z * z + 1.0) * normal_cdf(z) + z * normal_pdf(z));
    };
    auto third = [=](double x) {
        const double z = (x - c) / sigma;
        return amplitude * (3.0 * z - z * z * z) / (s2 * sigma) * std::exp(-0.5 * z * z);
    };
    double c3 = 0.0;
    for (const ScalarFn& g : {f.derivative1d[0], f.derivative1d[1], f.derivative1d[2], ScalarFn(third)}) {
        c3 = std::max(c3, sup_abs(g, c - 6.0 * sigma, c + 6.0 * sigma, 4000));
    }
    f.c3_norm = c3;
    f.sup_norm = amplitude;
    return f;
}

TestFunction constant_function(int d, double value) {
    TestFunction f;
    f.name = "constant";
    f.dimension = d;
    f.eval = [=](const Point&) { return value; };
    f.laplacian = [](const Point&) { return 0.0; };
    f.derivative1d[0] = [=](double) { return value; };
    f.derivative1d[1] = [](double) { return 0.0; };
    f.derivative1d[2] = [](double) { return 0.0; };
    f.antiderivative1d[0] = [=](double x) { return value * x; };
    f.antiderivative1d[1] = [=](double x) { return value * x * x / 2.0; };
    f.antiderivative1d[2] = [=](double x) { return value * x * x * x / 6.0; };
    f.c3_norm = std::abs(value);
    f.sup_norm = std::abs(value);
    return f;
}

TestFunction affine_function(double a, double b) {
    TestFunction f;
    f.name = "affine";
    f.dimension = 1;
    f.eval = [=](const Point& p) { return a + b * p[0]; };
    f.laplacian = [](const Point&) { return 0.0; };
    f.derivative1d[0] = [=](double x) { return a + b * x; };
    f.derivative1d[1] = [=](double) { return b; };
    f.derivative1d[2] = [](double) { return 0.0; };
    f.antiderivative1d[0] = [=](double x) { return a * x + b * x * x / 2.0; };
    f.antiderivative1d[1] = [=](double x) { return a * x * x / 2.0 + b * x * x * x / 6.0; };
    f.antiderivative1d[2] = [=](double x) { return a * x * x * x / 6.0 + b * x * x * x * x / 24.0; };
    f.c3_norm = std::numeric_limits<double>::infinity();
    f.sup_norm = std::numeric_limits<double>::infinity();
    return f;
}

std::vector<TestFunction> default_battery(int d) {
    const Point origin{0.0, 0.0, 0.0};
    std::vector<TestFunction> out;
    out.push_back(bump_function(d, origin, 1.0, 1.0));
    out.push_back(gaussian_function(d, origin, 0.4, 1.0));
    TestFunction scaled = bump_function(d, origin, 0.6, 2.0);
    scaled.name = "scaled_bump";
    out.push_back(std::move(scaled));
    return out;
}

ScalarFn tabulate_antiderivative(const ScalarFn& f, double lo, double hi, int cells) {
    if (!(hi > lo) || cells < 1) throw std::invalid_argument("tabulate_antiderivative needs lo < hi and cells >= 1");
    struct Table {
        double lo, h;
        std::vector<double> F, dF;
    };
    auto t = std::make_shared<Table>();
    t->lo = lo;
    t->h = (hi - lo) / cells;
    t->F.assign(cells + 1, 0.0);
    t->dF.assign(cells + 1, 0.0);
    const GaussRule& g = gauss_legendre(12);
    for (int k = 0; k <= cells; ++k) t->dF[k] = f(lo + k * t->h);
    for (int k = 1; k <= cells; ++k) {
        const double a = lo + (k - 1) * t->h;
        double s = 0.0;
        for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(a + 0.5 * t->h * (1.0 + g.x[i]));
        t->F[k] = t->F[k - 1] + 0.5 * t->h * s;
    }
    return [t](double x) {
        const double u = (x - t->lo) / t->h;
        const auto n = t->F.size() - 1;
        if (u <= 0.0) return 0.0;
        if (u >= static_cast<double>(n)) return t->F[n];
        const auto k = std::min(static_cast<std::size_t>(u), n - 1);
        const double s = u - static_cast<double>(k);
        const double h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        const double h10 = s * (1.0 - s) * (1.0 - s);
        const double h01 = s * s * (3.0 - 2.0 * s);
        const double h11 = s * s * (s - 1.0);
        return h00 * t->F[k] + h10 * t->h * t->dF[k] + h01 * t->F[k + 1] + h11 * t->h * t->dF[k + 1];
    };
}

} // namespace slfv
