#pragma once

#include <functional>
#include <vector>

namespace slfv {

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

/// Cached rule of the given order (thread-safe).
const GaussRule& gauss_legendre(int order);

/// ∫_a^b f with a fixed Gauss–Legendre rule.
double integrate_gl(const std::function<double(double)>& f, double a, double b, int order);

/// Adaptive Gauss–Kronrod on a finite interval. Refinement stops once the error estimate is below
/// tol times the L1 norm of f; the error estimate is stored when requested.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          double* error = nullptr);

} // namespace slfv
