#pragma once

#include <array>

#include "slfv/rng.hpp"

namespace slfv {

/// Point in R^d, d ≤ 3; unused trailing coordinates are zero.
using Point = std::array<double, 3>;

/// Spatial domain: all of R^d, or the flat torus [0, period)^d when period > 0.
struct Domain {
    int dimension = 1;
    double period = 0.0;

    bool periodic() const { return period > 0.0; }
    /// Signed coordinate difference b − a, wrapped to (−period/2, period/2] on the torus.
    double delta(double a, double b) const;
    double distance(const Point& a, const Point& b) const;
    double wrap(double x) const;
    Point wrap(const Point& p) const;
};

double unit_ball_volume(int d);
double ball_volume(int d, double radius);
/// ∫_{B_1(0)} |x|² dx.
double unit_ball_second_moment(int d);
/// ∫_{B_1(0)} x_1² dx = unit_ball_second_moment(d) / d.
double unit_ball_coordinate_moment(int d);
/// Volume of B_ρ(a) ∩ B_ρ(b) with |a − b| = s.
double lens_volume(int d, double rho, double s);

Point uniform_in_ball(const Domain& dom, const Point& center, double radius, Rng& rng);

} // namespace slfv
