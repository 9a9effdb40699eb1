#pragma once

#include <array>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "slfv/geometry.hpp"

namespace slfv {

/// Piecewise polynomial on R with breakpoints b_0 < … < b_{n−1}; region k covers
/// [b_{k−1}, b_k), with region 0 = (−∞, b_0) and region n = [b_{n−1}, ∞).
/// Coefficients are ascending in (x − origin).
class PiecewisePoly {
public:
    PiecewisePoly() = default;
    PiecewisePoly(double origin, std::vector<double> breaks, std::vector<std::vector<double>> coeffs);

    double operator()(double x) const;
    /// Antiderivative vanishing on region 0; requires the region-0 polynomial to be zero.
    PiecewisePoly antiderivative() const;
    PiecewisePoly derivative() const;
    const std::vector<double>& breaks() const { return breaks_; }

private:
    std::size_t region(double x) const;

    double origin_ = 0.0;
    std::vector<double> breaks_;
    std::vector<std::vector<double>> coeffs_;
};

using ScalarFn = std::function<double(double)>;

/// Nonnegative test function with analytic Laplacian; in d = 1 also first to third antiderivatives.
struct TestFunction {
    std::string name;
    int dimension = 1;
    Point center{0.0, 0.0, 0.0};
    std::function<double(const Point&)> eval;
    std::function<double(const Point&)> laplacian;
    double c3_norm = 0.0;
    double sup_norm = 0.0;
    double support_radius = std::numeric_limits<double>::infinity();

    /// d = 1 only: derivatives [0] = φ, [1] = φ′, [2] = φ″ and antiderivatives Φ1..Φ3.
    std::array<ScalarFn, 3> derivative1d;
    std::array<ScalarFn, 3> antiderivative1d;

    double operator()(double x) const { return derivative1d[0](x); }
    double operator()(const Point& p) const { return eval(p); }
    bool has_antiderivatives() const { return static_cast<bool>(antiderivative1d[2]); }
    /// First coordinate range outside which φ vanishes (below 1e−300 for the Gaussian).
    double extent_lo = -std::numeric_limits<double>::infinity();
    double extent_hi = std::numeric_limits<double>::infinity();
};

/// A (1 − |x−c|²/R²)⁴ on |x−c| < R: a C³ bump.
TestFunction bump_function(int d, const Point& center, double radius, double amplitude = 1.0);
/// A exp(−|x−c|²/(2σ²)).
TestFunction gaussian_function(int d, const Point& center, double sigma, double amplitude = 1.0);
/// Constant c (not compactly supported; used by bookkeeping checks).
TestFunction constant_function(int d, double c);
/// a + b x in d = 1 (not compactly supported).
TestFunction affine_function(double a, double b);

/// Default battery: bump, Gaussian, scaled bump, all centred at the origin.
std::vector<TestFunction> default_battery(int d);

/// Antiderivative of f (assumed zero outside [lo, hi]) tabulated with Hermite interpolation.
ScalarFn tabulate_antiderivative(const ScalarFn& f, double lo, double hi, int cells);

} // namespace slfv
