#pragma once

#include <vector>

namespace slfv {

/// e^{-v} + v − 1 for v ≥ 0, with a series branch below v = 1.
double g_function(double v);
/// e^{-v} + v − 1 for any real v.
double g_signed(double v);
/// (e^{-v} + v − 1) / v², continuous at 0 with value 1/2.
double g_over_square(double v);

/// κ₀(β) = ∫₀^∞ (e^{-υ}+υ−1) υ^{-β-2} dυ, β ∈ (0,1).
double stable_exponent_integral(double beta, double tol = 1e-13);

/// G(x) = ∫₀^x (e^{-s}+s−1) s^{-β-2} ds, tabulated once per β.
class BranchingIntegral {
public:
    explicit BranchingIntegral(double beta);
    double operator()(double x) const;
    double total() const { return total_; }
    double beta() const { return beta_; }

private:
    double series(double x) const;
    double derivative_log(double x) const;

    double beta_;
    double x_lo_;
    double log_x_lo_;
    double step_;
    std::vector<double> values_;
    std::vector<double> slopes_;
    double total_;
};

struct DawsonReport {
    int violations_a = 0;
    int violations_c = 0;
    double min_a = 0.0;
    /// inf over x ≥ 2 of (1 − x + x²/2 − e^{-x}) / x, including the boundary x = 2.
    double c1 = 0.0;
    double c1_argmin = 0.0;
    /// sup over the grid of (e^{-x}+x−1) / x^{1+β}.
    double c2 = 0.0;
    /// Ratio at the smallest positive grid point (Taylor regime).
    double c2_small_x = 0.0;
    int points = 0;

    bool ok() const { return violations_a == 0 && violations_c == 0; }
};

DawsonReport dawson_inequalities(const std::vector<double>& x_grid, double beta);
std::vector<double> geometric_grid(double lo, double hi, int points);

struct NonSpatialResult {
    double numeric = 0.0;
    double predicted = 0.0;
    double ratio = 0.0;
};

/// Generator of the rare-allele count X under Λ(dρ) = C(β)ρ^{-β}(1−ρ)^β dρ applied to e^{-θX},
/// with C(β) normalising Λ to a probability measure.
NonSpatialResult lfv_nonspatial_generator(double K, double beta, double X, double theta);

} // namespace slfv
