#include "slfv/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace slfv {

namespace {
void check_dimension(int d) {
    if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
}
} // namespace

double Domain::delta(double a, double b) const {
    double v = b - a;
    if (periodic()) {
        v -= period * std::round(v / period);
    }
    return v;
}

double Domain::distance(const Point& a, const Point& b) const {
    double s = 0.0;
    for (int i = 0; i < dimension; ++i) {
        const double v = delta(a[i], b[i]);
        s += v * v;
    }
    return std::sqrt(s);
}

double Domain::wrap(double x) const {
    if (!periodic()) return x;
    double y = std::fmod(x, period);
    if (y < 0.0) y += period;
    if (y >= period) y = 0.0;
    return y;
}

Point Domain::wrap(const Point& p) const {
    Point q = p;
    for (int i = 0; i < dimension; ++i) q[i] = wrap(p[i]);
    return q;
}

double unit_ball_volume(int d) {
    check_dimension(d);
    switch (d) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    default: return 4.0 * std::numbers::pi / 3.0;
    }
}

double ball_volume(int d, double radius) { return unit_ball_volume(d) * std::pow(radius, d); }

double unit_ball_second_moment(int d) {
    check_dimension(d);
    switch (d) {
    case 1: return 2.0 / 3.0;
    case 2: return std::numbers::pi / 2.0;
    default: return 4.0 * std::numbers::pi / 5.0;
    }
}

double unit_ball_coordinate_moment(int d) { return unit_ball_second_moment(d) / d; }

double lens_volume(int d, double rho, double s) {
    check_dimension(d);
    s = std::abs(s);
    if (s >= 2.0 * rho) return 0.0;
    switch (d) {
    case 1: return 2.0 * rho - s;
    case 2: return 2.0 * rho * rho * std::acos(s / (2.0 * rho)) - 0.5 * s * std::sqrt(4.0 * rho * rho - s * s);
    default: return std::numbers::pi / 12.0 * (4.0 * rho + s) * (2.0 * rho - s) * (2.0 * rho - s);
    }
}

Point uniform_in_ball(const Domain& dom, const Point& center, double radius, Rng& rng) {
    Point p{0.0, 0.0, 0.0};
    if (dom.dimension == 1) {
        p[0] = center[0] + radius * (2.0 * rng.uniform() - 1.0);
        return dom.wrap(p);
    }
    for (;;) {
        double s = 0.0;
        for (int i = 0; i < dom.dimension; ++i) {
            p[i] = 2.0 * rng.uniform() - 1.0;
            s += p[i] * p[i];
        }
        if (s <= 1.0) break;
    }
    for (int i = 0; i < dom.dimension; ++i) p[i] = center[i] + radius * p[i];
    return dom.wrap(p);
}

} // namespace slfv
