#pragma once

#include <functional>
#include <vector>

#include "slfv/field.hpp"
#include "slfv/params.hpp"
#include "slfv/special.hpp"
#include "slfv/test_function.hpp"

namespace slfv {

/// Values on the nodes origin + i·h; zero outside the grid.
struct Grid1D {
    double origin = 0.0;
    double h = 1.0;
    std::vector<double> values;

    static Grid1D sample(const std::function<double(double)>& f, double lo, double hi, double h);

    std::size_t size() const { return values.size(); }
    double x(std::size_t i) const { return origin + h * static_cast<double>(i); }
    /// Linear interpolation between nodes.
    double interpolate(double x) const;
    /// Σ values · h.
    double integral() const;
    double sup() const;
    void validate() const;
};

double sup_distance(const Grid1D& a, const Grid1D& b);

/// Antiderivative of the piecewise-linear interpolant, zero left of the grid.
std::function<double(double)> grid_antiderivative(const Grid1D& g);

/// P_t^{(m)}φ(x) = E_x[φ(B_{mt})] by convolution with a normalised discrete Gaussian kernel.
Grid1D heat_semigroup(const Grid1D& phi, double t, double m_diff);

/// Single-lineage jump process behind L^N in d = 1: jumps at total rate `rate` by Z₁ + Z₂ with
/// Z₁, Z₂ uniform on the event ball; `kernel` holds the cell probabilities of one jump at
/// offsets −reach..reach.
struct JumpKernel {
    double rate = 0.0;
    int reach = 0;
    std::vector<double> kernel;
};

JumpKernel lineage_jump_kernel(const EventLaw& law, const ScalingParams& p, double h, int radius_order = 48);

struct TruncationReport {
    double lambda_t = 0.0;
    int terms = 0;
    /// Poisson mass beyond the last retained term.
    double truncation_bound = 0.0;
    int padding = 0;
};

/// S^N_t φ by uniformisation: Σ_{n ≤ n*} Pois(Λt; n) Kⁿφ, evaluated in Fourier space.
Grid1D compound_poisson_semigroup(const Grid1D& phi, double t, const EventLaw& law, const ScalingParams& p,
                                  TruncationReport* report = nullptr, double tol = 1e-14, int max_terms = 2000000);

/// B^N as a function of the pointwise value φ(x) ≥ 0.
class BranchingOperator {
public:
    BranchingOperator(const ScalingParams& p, const EventLaw& law);

    double operator()(double phi) const;
    /// C with B^N(φ) ≤ C φ^{1+β'} for all φ ≥ 0.
    double bound_constant() const;
    /// β' = (α+1)/(γ−d) − 1.
    double exponent() const { return beta_; }
    double prefactor() const { return pref_; }
    double lower_limit() const { return lo_; }
    double upper_limit() const { return hi_; }

private:
    double beta_;
    double pref_;
    double lo_;
    double hi_;
    BranchingIntegral g_;
};

struct VEquationOptions {
    double dt = 1e-3;
    double picard_tol = 1e-8;
    int max_picard = 100;
    /// Also solve at dt/2 and report the sup-norm difference.
    bool richardson = true;
    /// Number of stored snapshots (evenly spaced, including t = 0 and t_end).
    int snapshots = 5;
    /// Switch off the branching term (v = S^N_t φ).
    bool branching = true;
};

struct EvolutionSolution {
    std::vector<double> times;
    std::vector<Grid1D> fields;
    int max_picard_iterations = 0;
    double richardson_gap = 0.0;
    TruncationReport truncation;
};

/// Mild solution of ∂v/∂t = L^N v − B^N v, v(0) = φ, by trapezoidal Picard iteration per step.
EvolutionSolution solve_v_equation(const Grid1D& phi, double t_end, const EventLaw& law, const ScalingParams& p,
                                   double beta, const VEquationOptions& opt = {});

/// ⟨X, −(m/2)Δφ + κφ^{1+β}⟩ e^{−⟨X,φ⟩} with X = K w, using κ = lp.kappa_generator.
double limit_exponential_drift(const Intervals1D& w, double K, const TestFunction& phi, const LimitParams& lp);
double limit_exponential_drift(const Lattice& w, double K, const TestFunction& phi, const LimitParams& lp);

/// Finite-variance pair: drift ⟨X,(m/2)Δφ⟩ and quadratic-variation rate 2κ⟨X,φ²⟩.
struct FiniteVariancePair {
    double drift = 0.0;
    double qv_rate = 0.0;
};
FiniteVariancePair limit_finite_variance_pair(const Intervals1D& w, double K, const TestFunction& phi,
                                              const LimitParams& lp);

} // namespace slfv
