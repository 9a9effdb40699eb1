#include "slfv/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace slfv {

namespace {
GaussRule build_rule(int n) {
    GaussRule rule;
    const auto zeros = boost::math::legendre_p_zeros<double>(n);
    for (double z : zeros) {
        const double dp = boost::math::legendre_p_prime(n, z);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        if (z == 0.0) {
            rule.x.push_back(0.0);
            rule.w.push_back(w);
        } else {
            rule.x.push_back(-z);
            rule.w.push_back(w);
            rule.x.push_back(z);
            rule.w.push_back(w);
        }
    }
    return rule;
}
} // namespace

const GaussRule& gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<GaussRule>(build_rule(order));
    return *slot;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int order) {
    const GaussRule& g = gauss_legendre(order);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(mid + half * g.x[i]);
    return s * half;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                          double* error) {
    double err = 0.0;
    double l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 30, tol, &err, &l1);
    if (error) *error = err;
    return v;
}

} // namespace slfv
