#include <cmath>
#include <numbers>
#include <stdexcept>

#include <doctest.h>

#include "slfv/events.hpp"
#include "slfv/quadrature.hpp"
#include "slfv/semigroup.hpp"
#include "slfv/stats.hpp"

using namespace slfv;

namespace {

double gaussian_density(double x, double var) {
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// e^{-v} + v − 1 without the library's branch logic.
double g_plain(double v) { return v < 1e-4 ? v * v * (0.5 - v / 6.0 + v * v / 24.0) : std::expm1(-v) + v; }

ScalingParams stable_rung(double M) {
    StableLadder ladder{1, {M}, 4.5, 0.75, 1.0, 1.0};
    return ladder.rung(0);
}

} // namespace

TEST_CASE("heat semigroup on a Gaussian") {
    const double var0 = 0.04, m = 0.5, t = 0.3;
    const auto phi = Grid1D::sample([&](double x) { return gaussian_density(x, var0); }, -4.0, 4.0, 1e-3);
    const auto same = heat_semigroup(phi, 0.0, m);
    CHECK(same.values == phi.values);
    const auto out = heat_semigroup(phi, t, m);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i)
        worst = std::max(worst, std::abs(out.values[i] - gaussian_density(out.x(i), var0 + m * t)));
    CHECK(worst < 1e-6);
    CHECK(std::abs(out.integral() - phi.integral()) < 1e-10);

    const auto two_steps = heat_semigroup(heat_semigroup(phi, 0.1, m), 0.2, m);
    CHECK(sup_distance(two_steps, out) < 1e-6);
}

TEST_CASE("single-lineage jump kernel") {
    const ScalingParams p{200, 4, 2, 1, 1};
    const auto law = EventLaw::fixed(1.0, 0.8);
    const double h = 1e-3;
    const auto jk = lineage_jump_kernel(law, p, h);
    double mass = 0.0, var = 0.0;
    for (std::size_t i = 0; i < jk.kernel.size(); ++i) {
        const double y = (static_cast<double>(i) - jk.reach) * h;
        mass += jk.kernel[i];
        var += jk.kernel[i] * y * y;
        CHECK(jk.kernel[i] >= 0.0);
        CHECK(jk.kernel[i] == doctest::Approx(jk.kernel[jk.kernel.size() - 1 - i]).epsilon(1e-12));
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    // Z₁ + Z₂ with Z uniform on [−ρ, ρ] has variance 2ρ²/3; binning adds h²/12.
    const double rho = 0.25;
    CHECK(var == doctest::Approx(2 * rho * rho / 3 + h * h / 12).epsilon(1e-6));
    // The jump rate is the rate at which the lineage is marked.
    const MarkingEventStream ms(p, law, 0, 0);
    CHECK(jk.rate == doctest::Approx(ms.per_lineage_rate()).epsilon(1e-12));
    // Generator matching: rate · jump variance = m.
    CHECK(jk.rate * 2 * rho * rho / 3 == doctest::Approx(limit_params_fixed(p, law).m_diff).epsilon(1e-12));

    const ScalingParams pv = stable_rung(2.0);
    const auto var_law = EventLaw::variable(2.5, 3.0);
    const auto jv = lineage_jump_kernel(var_law, pv, 1e-3);
    const MarkingEventStream mv(pv, var_law, 0, 0);
    CHECK(jv.rate == doctest::Approx(mv.per_lineage_rate()).epsilon(1e-9));
}

TEST_CASE("compound Poisson semigroup") {
    const ScalingParams p{200, 4, 2, 1, 1};
    const auto law = EventLaw::fixed(1.0, 0.8);
    const auto phi = Grid1D::sample([](double x) { return std::exp(-8.0 * x * x); }, -12.0, 12.0, 2e-3);
    CHECK(compound_poisson_semigroup(phi, 0.0, law, p).values == phi.values);

    TruncationReport rep;
    const auto out = compound_poisson_semigroup(phi, 0.4, law, p, &rep);
    CHECK(std::abs(out.integral() - phi.integral()) < 1e-8);
    CHECK(rep.truncation_bound < 1e-13);
    CHECK(rep.terms > 0);
    CHECK(rep.lambda_t == doctest::Approx(0.4 * 200 * 0.4 * 2));
    for (double v : out.values) CHECK(v >= -1e-12);

    const auto composed = compound_poisson_semigroup(compound_poisson_semigroup(phi, 0.15, law, p), 0.25, law, p);
    CHECK(sup_distance(composed, out) < 1e-8);

    // Monte Carlo oracle: x + Σ (Z₁ + Z₂) over a Poisson number of jumps.
    const auto jk = lineage_jump_kernel(law, p, phi.h);
    Rng rng(4, 0);
    for (double x0 : {0.0, 0.3}) {
        Accumulator acc;
        for (int i = 0; i < 100000; ++i) {
            double x = x0;
            for (double t = rng.exponential(jk.rate); t < 0.4; t += rng.exponential(jk.rate))
                x += rng.uniform(-0.25, 0.25) + rng.uniform(-0.25, 0.25);
            acc.add(std::exp(-8.0 * x * x));
        }
        const double grid_value = out.interpolate(x0);
        CHECK(std::abs(grid_value - acc.mean()) < 4 * acc.stderr_mean() + 1e-4);
    }
}

TEST_CASE("compound Poisson semigroup approaches the heat semigroup along a ladder") {
    const auto phi = Grid1D::sample([](double x) { return std::exp(-8.0 * x * x); }, -3.0, 3.0, 2e-3);
    FixedLadder ladder{1, {2, 4, 8}, 2.0, 1.0, 1.0};
    const auto law = EventLaw::fixed(1.0, 1.0);
    double prev = INFINITY;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const auto p = ladder.rung(i);
        const double m = limit_params_fixed(p, law).m_diff;
        const double gap = sup_distance(compound_poisson_semigroup(phi, 0.5, law, p), heat_semigroup(phi, 0.5, m));
        CHECK(gap < prev);
        prev = gap;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("branching operator") {
    const auto law = EventLaw::variable(2.5, 3.0);
    for (double M : {2.0, 3.0}) {
        const auto p = stable_rung(M);
        const BranchingOperator B(p, law);
        CHECK(B.exponent() == doctest::Approx(0.75));
        CHECK(B(0.0) == 0.0);
        const double c = p.k_density * 2.0 / (p.j_impact * p.m_space);
        CHECK(B.lower_limit() == doctest::Approx(c));
        CHECK(B.upper_limit() == doctest::Approx(c * std::pow(p.j_impact, 2.0 / 3.0)));
        const double a = law.lower_radius(p);
        double prev = 0.0;
        for (double phi : {1e-3, 0.01, 0.1, 0.5, 1.0, 3.0}) {
            // Direct radius integral (N M / K) ∫ r^α g(K |B^M_r| u(r) φ / J) dr.
            const double oracle =
                p.n_rate * p.m_space / p.k_density *
                integrate_adaptive(
                    [&](double r) {
                        return std::pow(r, 2.5) *
                               g_plain(p.k_density * 2.0 * r / p.m_space * std::pow(r, -3.0) * phi / p.j_impact);
                    },
                    a, 1.0, 1e-12);
            const double b = B(phi);
            CHECK(b == doctest::Approx(oracle).epsilon(1e-7));
            CHECK(b <= B.bound_constant() * std::pow(phi, 1.75) * (1 + 1e-12));
            CHECK(b > prev);
            prev = b;
        }
    }
    CHECK_THROWS_AS(BranchingOperator(stable_rung(2.0), EventLaw::fixed(1.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(BranchingOperator(stable_rung(2.0), EventLaw::variable(1.0, 3.0)), std::invalid_argument);
}

TEST_CASE("v equation") {
    const auto law = EventLaw::variable(2.5, 3.0);
    const auto p = stable_rung(2.0);
    const auto zero = Grid1D::sample([](double) { return 0.0; }, -2.0, 2.0, 4e-3);
    VEquationOptions opt;
    opt.dt = 1e-2;
    const auto z = solve_v_equation(zero, 0.2, law, p, 0.75, opt);
    for (const auto& f : z.fields) CHECK(f.sup() == 0.0);

    const auto phi = Grid1D::sample([](double x) { return 0.8 * std::exp(-4.0 * x * x); }, -8.0, 8.0, 4e-3);
    const auto sol = solve_v_equation(phi, 0.3, law, p, 0.75, opt);
    REQUIRE(sol.fields.size() == 5);
    CHECK(sol.times.front() == 0.0);
    CHECK(sol.times.back() == doctest::Approx(0.3));
    const auto plain = compound_poisson_semigroup(phi, 0.3, law, p);
    for (const auto& f : sol.fields)
        for (double v : f.values) {
            CHECK(v >= -1e-12);
            CHECK(v <= phi.sup() + 1e-12);
        }
    for (std::size_t i = 0; i < plain.size(); ++i) CHECK(sol.fields.back().values[i] <= plain.values[i] + 1e-12);
    CHECK(sol.richardson_gap < 1e-5);
    CHECK(sol.max_picard_iterations >= 1);
    CHECK(sol.max_picard_iterations < opt.max_picard);

    opt.branching = false;
    opt.richardson = false;
    const auto linear = solve_v_equation(phi, 0.3, law, p, 0.75, opt);
    CHECK(linear.max_picard_iterations == 0);
    CHECK(sup_distance(linear.fields.back(), plain) < 1e-10);

    CHECK_THROWS_AS(solve_v_equation(phi, 0.3, law, p, 0.5), std::invalid_argument);
    auto negative = phi;
    negative.values[10] = -0.1;
    CHECK_THROWS_AS(solve_v_equation(negative, 0.3, law, p, 0.75), std::invalid_argument);
}

TEST_CASE("limit exponential drift") {
    LimitParams lp;
    lp.m_diff = 0.7;
    lp.beta = 0.5;
    lp.kappa = 1.3;
    lp.kappa_generator = 1.9;
    const auto bump = bump_function(1, {0, 0, 0}, 1.0);
    CHECK(limit_exponential_drift(Intervals1D{}, 10.0, bump, lp) == 0.0);

    // Affine φ on the support of X: only the branching term remains.
    const auto aff = affine_function(1.0, 0.5);
    const auto w = Intervals1D::indicator(-0.5, 0.5, 0.4);
    const double K = 3.0;
    const double mass = K * 0.4 * 1.0;
    const double branch = K * 0.4 *
                          integrate_adaptive([](double x) { return std::pow(1.0 + 0.5 * x, 1.5); }, -0.5, 0.5, 1e-13);
    CHECK(limit_exponential_drift(w, K, aff, lp) == doctest::Approx(lp.kappa_generator * branch * std::exp(-mass)).epsilon(1e-6));

    // Bump: direct quadrature of the definition.
    const auto v = Intervals1D::pieces({-0.6, 0.1, 0.4}, {0.3, 0.9});
    auto integrand = [&](const std::function<double(double)>& f) {
        return K * (0.3 * integrate_adaptive(f, -0.6, 0.1, 1e-13) + 0.9 * integrate_adaptive(f, 0.1, 0.4, 1e-13));
    };
    const double value = integrand([&](double x) { return bump(x); });
    const double lap = integrand([&](double x) { return bump.derivative1d[2](x); });
    const double pw = integrand([&](double x) { return std::pow(bump(x), 1.5); });
    const double expected = (-0.5 * lp.m_diff * lap + lp.kappa_generator * pw) * std::exp(-value);
    CHECK(limit_exponential_drift(v, K, bump, lp) == doctest::Approx(expected).epsilon(1e-6));

    // Lattice version on a fine grid.
    Lattice lat(1, {-1.0, 0, 0}, 1e-4, {20000, 1, 1});
    lat.fill([&](const Point& x) { return v.value_at(x[0]); });
    CHECK(limit_exponential_drift(lat, K, bump, lp) == doctest::Approx(expected).epsilon(1e-3));

    lp.beta = 1.0;
    const auto pair = limit_finite_variance_pair(v, K, bump, lp);
    CHECK(pair.drift == doctest::Approx(0.5 * lp.m_diff * lap).epsilon(1e-8));
    const double sq = integrand([&](double x) { return bump(x) * bump(x); });
    CHECK(pair.qv_rate == doctest::Approx(2 * lp.kappa * sq).epsilon(1e-6));
}
