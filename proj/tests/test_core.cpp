#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include "slfv/geometry.hpp"
#include "slfv/params.hpp"
#include "slfv/quadrature.hpp"
#include "slfv/rng.hpp"
#include "slfv/special.hpp"
#include "slfv/stats.hpp"

using namespace slfv;

TEST_CASE("rng streams are reproducible and distinct") {
    Rng a(42, 0), b(42, 0), c(42, 1), d(43, 0);
    int same_c = 0, same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        same_c += x == c.next_u64();
        same_d += x == d.next_u64();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);

    Rng u(7, 3);
    Accumulator mean, expo, norm2;
    for (int i = 0; i < 200000; ++i) {
        const double x = u.uniform();
        REQUIRE(x > 0.0);
        REQUIRE(x < 1.0);
        mean.add(x);
        expo.add(u.exponential(2.0));
        const double z = u.normal();
        norm2.add(z * z);
    }
    CHECK(std::abs(mean.mean() - 0.5) < 4 * mean.stderr_mean());
    CHECK(std::abs(expo.mean() - 0.5) < 4 * expo.stderr_mean());
    CHECK(std::abs(norm2.mean() - 1.0) < 4 * norm2.stderr_mean());

    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto k = u.below(5);
        REQUIRE(k < 5);
        seen.insert(k);
    }
    CHECK(seen.size() == 5);
}

TEST_CASE("unit ball volumes and second moments") {
    CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
    CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
    CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
    CHECK(ball_volume(2, 0.5) == doctest::Approx(std::numbers::pi / 4.0));

    // Radial integration: ∫_0^1 r² · S_{d−1} r^{d−1} dr = S_{d−1}/(d+2).
    const double surface[4] = {0.0, 2.0, 2.0 * std::numbers::pi, 4.0 * std::numbers::pi};
    for (int d = 1; d <= 3; ++d) {
        const double closed = surface[d] / (d + 2.0);
        CHECK(unit_ball_second_moment(d) == doctest::Approx(closed).epsilon(1e-14));
        CHECK(unit_ball_coordinate_moment(d) == doctest::Approx(closed / d).epsilon(1e-14));
    }
    CHECK(unit_ball_second_moment(1) == doctest::Approx(2.0 / 3.0));
    CHECK(unit_ball_second_moment(2) == doctest::Approx(std::numbers::pi / 2.0));
    CHECK(unit_ball_second_moment(3) == doctest::Approx(4.0 * std::numbers::pi / 5.0));

    // Monte Carlo over the enclosing cube.
    Rng rng(11, 0);
    for (int d = 1; d <= 3; ++d) {
        Accumulator acc;
        const double cube = std::pow(2.0, d);
        for (int i = 0; i < 400000; ++i) {
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double x = rng.uniform(-1.0, 1.0);
                r2 += x * x;
            }
            acc.add(r2 <= 1.0 ? cube * r2 : 0.0);
        }
        CHECK(std::abs(acc.mean() - unit_ball_second_moment(d)) < 3.0 * acc.stderr_mean());
    }
}

TEST_CASE("lens volume closed forms and Monte Carlo") {
    const double rho = 0.7;
    for (double s : {0.0, 0.3, 0.9, 1.4, 2.0}) {
        CHECK(lens_volume(1, rho, s) == doctest::Approx(std::max(0.0, 2 * rho - s)));
        const double h = s / 2.0;
        const double lens2 = s >= 2 * rho ? 0.0 : 2 * rho * rho * std::acos(h / rho) - 2 * h * std::sqrt(rho * rho - h * h);
        CHECK(lens_volume(2, rho, s) == doctest::Approx(lens2).epsilon(1e-12));
        const double lens3 = s >= 2 * rho ? 0.0 : std::numbers::pi * (4 * rho + s) * std::pow(2 * rho - s, 2) / 12.0;
        CHECK(lens_volume(3, rho, s) == doctest::Approx(lens3).epsilon(1e-12));
    }
    CHECK(lens_volume(3, rho, 0.0) == doctest::Approx(ball_volume(3, rho)));

    Rng rng(5, 1);
    Domain dom{3, 0.0};
    const double s = 0.5;
    Accumulator hit;
    for (int i = 0; i < 200000; ++i) {
        const Point x = uniform_in_ball(dom, {0, 0, 0}, rho, rng);
        REQUIRE(dom.distance(x, {0, 0, 0}) <= rho);
        hit.add(dom.distance(x, {s, 0, 0}) <= rho ? 1.0 : 0.0);
    }
    const double expected = lens_volume(3, rho, s) / ball_volume(3, rho);
    CHECK(std::abs(hit.mean() - expected) < 4 * hit.stderr_mean());
}

TEST_CASE("torus wrapping") {
    Domain dom{2, 2.0};
    CHECK(dom.wrap(-0.5) == doctest::Approx(1.5));
    CHECK(dom.wrap(4.25) == doctest::Approx(0.25));
    CHECK(dom.delta(0.1, 1.9) == doctest::Approx(-0.2));
    CHECK(dom.distance({0.1, 0.1, 0}, {1.9, 1.9, 0}) == doctest::Approx(std::sqrt(0.08)));
    Domain line{1, 0.0};
    CHECK(line.delta(0.1, 1.9) == doctest::Approx(1.8));
}

TEST_CASE("scaling parameter validation") {
    ScalingParams p{1000, 10, 100, 50, 2};
    CHECK_NOTHROW(p.validate());
    CHECK(p.drift_ratio() == doctest::Approx(1000.0 / (100 * 100)));
    CHECK(p.variance_ratio() == doctest::Approx(50.0 * 1000 / (1e4 * 100)));
    for (auto bad : {ScalingParams{0, 1, 1, 1, 1}, ScalingParams{1, -1, 1, 1, 1}, ScalingParams{1, 1, 1, 1, 4},
                     ScalingParams{INFINITY, 1, 1, 1, 1}})
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    CHECK_NOTHROW(EventLaw::fixed(1.0, 0.5).validate(p));
    CHECK_THROWS_AS(EventLaw::fixed(1.0, 0.0).validate(p), std::invalid_argument);
    CHECK_THROWS_AS(EventLaw::fixed(1.0, 1.5).validate(p), std::invalid_argument);
    CHECK_THROWS_AS(EventLaw::fixed(0.0, 0.5).validate(p), std::invalid_argument);
    ScalingParams j1{1, 1, 1, 1, 1};
    CHECK_THROWS_AS(EventLaw::variable(2.0, 3.0).validate(j1), std::invalid_argument);

    const auto law = EventLaw::variable(2.5, 3.0);
    ScalingParams q{1, 2, 8, 1, 1};
    CHECK(law.lower_radius(q) == doctest::Approx(0.5));
    CHECK(law.upper_radius() == 1.0);
    CHECK(law.impact(0.5, q) == doctest::Approx(1.0));
    for (double r : {0.5, 0.6, 0.8, 1.0}) {
        CHECK(law.impact(r, q) <= 1.0 + 1e-15);
        CHECK(law.impact(r, q) > 0.0);
    }
    CHECK(law.mu_total(q) == doctest::Approx((1.0 - std::pow(0.5, 3.5)) / 3.5));
}

TEST_CASE("fixed-radius condition report") {
    const double M = 10.0;
    ScalingParams p{std::pow(M, 5), M, M * M, std::pow(M, 4), 3};
    const auto rep = validate_fixed_radius_conditions(p, EventLaw::fixed(1.0, 1.0), 0);
    CHECK(rep.at("N/(JM^2)").value == doctest::Approx(10.0));
    CHECK(rep.at("KN/(J^2M^d)").value == doctest::Approx(100.0));
    CHECK(rep.at("sparsity").value == doctest::Approx(0.01));
    CHECK(rep.ok());
    CHECK_THROWS_AS(rep.at("missing"), std::out_of_range);

    ConditionBands bands;
    bands.c1 = 5.0;
    const auto off = validate_fixed_radius_conditions(p, EventLaw::fixed(1.0, 1.0), 0, bands);
    CHECK_FALSE(off.at("N/(JM^2)").ok);
    CHECK_FALSE(off.ok());

    ScalingParams base{1, 1, 1, 1, 1};
    const auto degenerate = validate_fixed_radius_conditions(base, EventLaw::fixed(1.0, 1.0), 0);
    REQUIRE_FALSE(degenerate.warnings.empty());
    CHECK(degenerate.warnings.front().find("M → ∞ not satisfiable at ladder base") != std::string::npos);

    const double J = 3.0;
    ScalingParams sparse2{1, std::exp(J), J, 1, 2};
    const auto ns = validate_fixed_radius_conditions(sparse2, EventLaw::fixed(1.0, 1.0), 0);
    CHECK(ns.at("sparsity").value == doctest::Approx(1.0));
    CHECK_FALSE(ns.at("sparsity").ok);
}

TEST_CASE("variable-radius condition report") {
    ScalingParams p{1e6, 4, 4096, 1e6, 1};
    const auto ok = validate_variable_radius_conditions(p, EventLaw::variable(2.5, 3.0), 0.75);
    CHECK(std::abs(ok.at("exponent identity").value) < 1e-12);
    CHECK(ok.at("N/(JM^2)").value == doctest::Approx(p.drift_ratio()));
    CHECK(ok.at("(N/J)(K/(JM^d))^beta").value == doctest::Approx(stable_variance_ratio(p, 0.75)));

    CHECK_THROWS_WITH_AS(validate_variable_radius_conditions(p, EventLaw::variable(2.5, 2.0), 0.75),
                         doctest::Contains("γ>2 if d=1"), std::invalid_argument);

    ScalingParams p2{1e6, 4, 4096, 1e6, 2};
    for (double beta : {0.2, 0.5, 0.9}) {
        CHECK_NOTHROW(validate_variable_radius_conditions(p2, EventLaw::variable(beta, 3.0), beta));
        CHECK_THROWS_AS(validate_variable_radius_conditions(p2, EventLaw::variable(beta + 0.1, 3.0), beta),
                        std::invalid_argument);
    }
    CHECK_THROWS_AS(validate_variable_radius_conditions(p2, EventLaw::variable(0.5, 2.0), 0.5), std::invalid_argument);
    CHECK_THROWS_AS(validate_variable_radius_conditions(p2, EventLaw::variable(0.5, 5.0), 0.5), std::invalid_argument);
}

TEST_CASE("limit parameters") {
    const auto fixed = limit_params_fixed(EventLaw::fixed(1.0, 0.5), 1, 1.0, 1.0);
    CHECK(fixed.m_diff == doctest::Approx(2.0 / 3.0));
    CHECK(fixed.kappa == doctest::Approx(0.5));
    CHECK(fixed.kappa_generator == fixed.kappa);
    CHECK(fixed.beta == 1.0);

    const auto var = limit_params_variable(EventLaw::variable(2.5, 3.0), 1, 0.75, 1.0, 1.0);
    CHECK(var.m_diff == doctest::Approx(8.0 / 21.0));

    const auto half = limit_params_variable(EventLaw::variable(2.0, 3.0), 1, 0.5, 1.0, 1.0);
    const double kappa0 = 4.0 * std::sqrt(std::numbers::pi) / 3.0;
    CHECK(kappa0 == doctest::Approx(2.36327).epsilon(1e-5));
    boost::math::quadrature::tanh_sinh<double> ts;
    const double oracle = ts.integrate(
        [](double v) {
            if (!std::isfinite(v)) return 0.0;
            if (v < 1e-3) return (0.5 - v / 6.0 + v * v / 24.0) * std::pow(v, -0.5);
            return (std::expm1(-v) + v) * std::pow(v, -2.5);
        },
        0.0, std::numeric_limits<double>::infinity());
    CHECK(oracle == doctest::Approx(kappa0).epsilon(1e-8));
    CHECK(half.kappa == doctest::Approx(kappa0 / 2.0).epsilon(1e-10));

    // Homogeneity in the constants.
    for (const auto& law : {EventLaw::fixed(0.7, 0.3)}) {
        const auto a = limit_params_fixed(law, 2, 1.3, 0.4);
        const auto b = limit_params_fixed(law, 2, 2.6, 0.8);
        CHECK(b.m_diff == 2.0 * a.m_diff);
        CHECK(b.kappa == 2.0 * a.kappa);
    }
    const auto a = limit_params_variable(EventLaw::variable(2.0, 3.0), 1, 0.5, 1.3, 0.4);
    const auto b = limit_params_variable(EventLaw::variable(2.0, 3.0), 1, 0.5, 2.6, 0.8);
    CHECK(b.m_diff == 2.0 * a.m_diff);
    CHECK(b.kappa == 2.0 * a.kappa);

    // Rung form uses the exact ratios.
    ScalingParams p{2000, 10, 100, 5e4, 1};
    const auto rung = limit_params_fixed(p, EventLaw::fixed(1.0, 0.5));
    const auto explicit_c = limit_params_fixed(EventLaw::fixed(1.0, 0.5), 1, p.drift_ratio(), p.variance_ratio());
    CHECK(rung.m_diff == doctest::Approx(explicit_c.m_diff));
    CHECK(rung.kappa == doctest::Approx(explicit_c.kappa));
}

TEST_CASE("ladders hit their constants") {
    FixedLadder fl{3, {10, 20}, 2.0, 10.0, 100.0};
    for (std::size_t i = 0; i < fl.size(); ++i) {
        const auto p = fl.rung(i);
        CHECK(p.j_impact == doctest::Approx(fl.m_values[i] * fl.m_values[i]));
        CHECK(p.drift_ratio() == doctest::Approx(10.0));
        CHECK(p.variance_ratio() == doctest::Approx(100.0));
    }
    StableLadder sl{1, {2, 3, 4}, 4.5, 0.75, 1.5, 2.0};
    for (std::size_t i = 0; i < sl.size(); ++i) {
        const auto p = sl.rung(i);
        CHECK(p.j_impact == doctest::Approx(std::pow(sl.m_values[i], 4.5)));
        CHECK(p.drift_ratio() == doctest::Approx(1.5));
        CHECK(stable_variance_ratio(p, 0.75) == doctest::Approx(2.0));
    }
}

TEST_CASE("radius quadrature integrates the power law") {
    ScalingParams p{1, 2, 1000, 1, 1};
    const auto law = EventLaw::variable(2.5, 3.0);
    const double a = law.lower_radius(p);
    const auto nodes = radius_quadrature(law, p, 24);
    double mass = 0.0, moment = 0.0;
    for (const auto& n : nodes) {
        REQUIRE(n.r > a);
        REQUIRE(n.r < 1.0);
        mass += n.weight;
        moment += n.weight * std::pow(n.r, -1.7);
    }
    CHECK(mass == doctest::Approx(law.mu_total(p)).epsilon(1e-12));
    CHECK(moment == doctest::Approx((1.0 - std::pow(a, 1.8)) / 1.8).epsilon(1e-10));
    const auto fixed = radius_quadrature(EventLaw::fixed(0.4, 0.5), p, 24);
    REQUIRE(fixed.size() == 1);
    CHECK(fixed[0].r == 0.4);
    CHECK(fixed[0].weight == 1.0);
}

TEST_CASE("Gauss-Legendre and adaptive quadrature") {
    for (int order : {2, 5, 10, 20}) {
        const auto& rule = gauss_legendre(order);
        REQUIRE(rule.x.size() == static_cast<std::size_t>(order));
        double s = 0.0;
        for (double w : rule.w) s += w;
        CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
        // Exact for degree 2n − 1.
        const int deg = 2 * order - 1;
        const double got = integrate_gl([deg](double x) { return std::pow(x, deg - 1) * (x + 1.0); }, 0.0, 1.0, order);
        CHECK(got == doctest::Approx(1.0 / (deg + 1) + 1.0 / deg).epsilon(1e-13));
    }
    CHECK(integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 4.0, 1e-12) ==
          doctest::Approx(4.0).epsilon(1e-6));
    double err = 1.0;
    const double v = integrate_adaptive([](double x) { return std::exp(-x * x); }, -3.0, 3.0, 1e-12, &err);
    CHECK(v == doctest::Approx(std::sqrt(std::numbers::pi) * std::erf(3.0)).epsilon(1e-13));
    CHECK(err < 1e-10);
    CHECK(integrate_adaptive([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-13) ==
          doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("statistics helpers") {
    Accumulator a, b, all;
    for (int i = 0; i < 100; ++i) {
        const double x = std::sin(i * 1.3);
        (i < 40 ? a : b).add(x);
        all.add(x);
    }
    a.merge(b);
    CHECK(a.count() == all.count());
    CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-14));
    CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));

    // Wilson closed form at x = 0 is [0, z²/(n+z²)].
    const auto [lo, hi] = wilson_interval(0, 100);
    CHECK(lo == doctest::Approx(0.0));
    const double z2 = 1.959963984540054 * 1.959963984540054;
    CHECK(hi == doctest::Approx(z2 / (100 + z2)));
    const auto [lo2, hi2] = wilson_interval(50, 100);
    CHECK(lo2 < 0.5);
    CHECK(hi2 > 0.5);
    CHECK(lo2 + hi2 == doctest::Approx(1.0));

    CHECK(z_score(1.0, 0.0, 1.0, 0.0) == 0.0);
    CHECK(z_score(2.0, 0.3, 1.0, 0.4) == doctest::Approx(2.0));
    CHECK(ks_pvalue(0.0, 100) == doctest::Approx(1.0));
    CHECK(ks_pvalue(1.36 / std::sqrt(1e4), 10000) == doctest::Approx(0.05).epsilon(0.05));

    std::vector<int> seq(1000, 0);
    parallel_for(seq.size(), 4, [&](std::size_t i) { seq[i] = static_cast<int>(i * i % 7); });
    for (std::size_t i = 0; i < seq.size(); ++i) CHECK(seq[i] == static_cast<int>(i * i % 7));
    CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
        if (i == 5) throw std::runtime_error("boom");
    }));
}
