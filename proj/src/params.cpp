#include "slfv/params.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "slfv/geometry.hpp"
#include "slfv/quadrature.hpp"
#include "slfv/special.hpp"

namespace slfv {

void ScalingParams::validate() const {
    if (!(n_rate > 0.0) || !(m_space > 0.0) || !(j_impact > 0.0) || !(k_density > 0.0)) {
        throw std::invalid_argument("scaling parameters N, M, J, K must be strictly positive");
    }
    if (dimension < 1 || dimension > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
    if (!std::isfinite(n_rate) || !std::isfinite(m_space) || !std::isfinite(j_impact) || !std::isfinite(k_density)) {
        throw std::invalid_argument("scaling parameters must be finite");
    }
}

double ScalingParams::drift_ratio() const { return n_rate / (j_impact * m_space * m_space); }

double ScalingParams::variance_ratio() const {
    return k_density * n_rate / (j_impact * j_impact * std::pow(m_space, dimension));
}

void EventLaw::validate(const ScalingParams& p) const {
    if (is_fixed()) {
        const auto& f = fixed_radius();
        if (!(f.r > 0.0)) throw std::invalid_argument("fixed radius must be positive");
        if (!(f.u > 0.0) || f.u > 1.0) throw std::invalid_argument("fixed impact must lie in (0,1]");
        if (f.u / p.j_impact > 1.0) throw std::invalid_argument("scaled impact exceeds 1");
    } else {
        const auto& v = variable_radius();
        if (!(v.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
        if (!(p.j_impact > 1.0)) throw std::invalid_argument("variable radius law needs J > 1");
    }
}

double EventLaw::lower_radius(const ScalingParams& p) const {
    if (is_fixed()) return fixed_radius().r;
    return std::pow(p.j_impact, -1.0 / variable_radius().gamma);
}

double EventLaw::upper_radius() const { return is_fixed() ? fixed_radius().r : 1.0; }

double EventLaw::mu_total(const ScalingParams& p) const {
    if (is_fixed()) return 1.0;
    const auto& v = variable_radius();
    const double a = lower_radius(p);
    if (std::abs(v.alpha + 1.0) < 1e-14) return -std::log(a);
    return (1.0 - std::pow(a, v.alpha + 1.0)) / (v.alpha + 1.0);
}

double EventLaw::impact_unscaled(double r) const {
    if (is_fixed()) return fixed_radius().u;
    return std::pow(r, -variable_radius().gamma);
}

double EventLaw::impact(double r, const ScalingParams& p) const {
    return std::min(1.0, impact_unscaled(r) / p.j_impact);
}

std::vector<RadiusNode> radius_quadrature(const EventLaw& law, const ScalingParams& p, int order) {
    if (law.is_fixed()) return {{law.fixed_radius().r, 1.0}};
    const double a = law.lower_radius(p);
    const double alpha = law.variable_radius().alpha;
    const GaussRule& g = gauss_legendre(order);
    std::vector<RadiusNode> nodes;
    nodes.reserve(g.x.size());
    // Gauss–Legendre in s = ln r: power-law integrands stay smooth when a ≪ 1.
    const double half = -0.5 * std::log(a);
    const double mid = 0.5 * std::log(a);
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double r = std::exp(mid + half * g.x[i]);
        nodes.push_back({r, half * g.w[i] * std::pow(r, alpha + 1.0)});
    }
    return nodes;
}

bool ConditionReport::ok() const {
    for (const auto& e : entries)
        if (!e.ok) return false;
    return true;
}

const ConditionEntry& ConditionReport::at(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    throw std::out_of_range("no condition named " + name);
}

namespace {
bool within_band(double value, double target, double band) {
    if (std::isnan(target)) return true;
    return std::abs(value - target) <= band * std::abs(target);
}

void common_warnings(const ScalingParams& p, ConditionReport& rep) {
    if (p.m_space <= 1.0) rep.warnings.push_back("M → ∞ not satisfiable at ladder base (M ≤ 1)");
}
} // namespace

ConditionReport validate_fixed_radius_conditions(const ScalingParams& p, const EventLaw& law, int ladder_index,
                                                 const ConditionBands& bands) {
    p.validate();
    if (!law.is_fixed()) throw std::invalid_argument("fixed-radius conditions need a FixedRadius law");
    law.validate(p);
    ConditionReport rep;
    common_warnings(p, rep);
    if (ladder_index < 0) rep.warnings.push_back("negative ladder index");
    const double c1 = p.drift_ratio();
    const double c2 = p.variance_ratio();
    rep.entries.push_back({"N/(JM^2)", c1, bands.c1, within_band(c1, bands.c1, bands.relative_band)});
    rep.entries.push_back({"KN/(J^2M^d)", c2, bands.c2, within_band(c2, bands.c2, bands.relative_band)});
    double sparsity = 0.0;
    switch (p.dimension) {
    case 1: sparsity = p.m_space / p.j_impact; break;
    case 2: sparsity = std::log(p.m_space) / p.j_impact; break;
    default: sparsity = 1.0 / p.j_impact; break;
    }
    rep.entries.push_back({"sparsity", sparsity, 0.0, sparsity <= bands.sparsity_max});
    if (sparsity > bands.sparsity_max) rep.warnings.push_back("sparsity ratio too large: non-sparse rung");
    return rep;
}

double stable_variance_ratio(const ScalingParams& p, double beta) {
    return p.n_rate / p.j_impact * std::pow(p.k_density / (p.j_impact * std::pow(p.m_space, p.dimension)), beta);
}

ConditionReport validate_variable_radius_conditions(const ScalingParams& p, const EventLaw& law, double beta,
                                                    const ConditionBands& bands) {
    p.validate();
    if (law.is_fixed()) throw std::invalid_argument("variable-radius conditions need a VariableRadius law");
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0,1)");
    const auto& v = law.variable_radius();
    const int d = p.dimension;
    const double gd = v.gamma - d;
    if (!(gd > 0.0)) throw std::invalid_argument("condition violated: 0 < γ−d");
    if (!(gd < 1.0 / (1.0 - beta))) throw std::invalid_argument("condition violated: γ−d < 1/(1−β)");
    if (d == 1 && !(v.gamma > 2.0)) throw std::invalid_argument("condition violated: γ>2 if d=1");
    const double defect = v.alpha + 1.0 - (beta + 1.0) * gd;
    if (std::abs(defect) > 1e-12) {
        std::ostringstream os;
        os << "condition violated: α+1=(β+1)(γ−d) (defect " << defect << ")";
        throw std::invalid_argument(os.str());
    }
    law.validate(p);

    ConditionReport rep;
    common_warnings(p, rep);
    rep.entries.push_back({"exponent identity", defect, 0.0, true});
    const double c1 = p.drift_ratio();
    const double c2 = stable_variance_ratio(p, beta);
    rep.entries.push_back({"N/(JM^2)", c1, bands.c1, within_band(c1, bands.c1, bands.relative_band)});
    rep.entries.push_back({"(N/J)(K/(JM^d))^beta", c2, bands.c2, within_band(c2, bands.c2, bands.relative_band)});
    const double upper = std::pow(p.j_impact, gd / v.gamma) * std::pow(p.m_space, -2.0 / beta);
    rep.entries.push_back({"J^((γ-d)/γ) M^(-2/β)", upper, 0.0, upper > 1.0});
    const double kupper = std::pow(p.j_impact, gd / v.gamma) * p.k_density / (p.j_impact * std::pow(p.m_space, d));
    rep.entries.push_back({"upper integration limit", kupper, 0.0, kupper > 1.0});
    rep.entries.push_back({"K", p.k_density, 0.0, p.k_density > 1.0});
    double sparsity = 0.0;
    const double m = p.m_space;
    const double j = p.j_impact;
    switch (d) {
    case 1:
        sparsity = std::pow(1.0 / (m * m), (1.0 - beta) / beta) *
                   std::pow(j, 2.0 * (1.0 - beta) * (v.gamma - 1.0) / v.gamma) * m * m / j;
        break;
    case 2: sparsity = std::log(m) / j; break;
    default: sparsity = 1.0 / j; break;
    }
    rep.entries.push_back({"sparsity", sparsity, 0.0, sparsity <= bands.sparsity_max});
    if (sparsity > bands.sparsity_max) rep.warnings.push_back("sparsity quantity too large: non-sparse rung");
    return rep;
}

LimitParams limit_params_fixed(const EventLaw& law, int d, double c1, double c2) {
    const auto& f = law.fixed_radius();
    LimitParams lp;
    lp.beta = 1.0;
    lp.m_diff = 2.0 * c1 * f.u * std::pow(f.r, d + 2) * unit_ball_coordinate_moment(d);
    const double vol = ball_volume(d, f.r);
    lp.kappa = 0.5 * c2 * f.u * f.u * vol * vol;
    lp.kappa_generator = lp.kappa;
    return lp;
}

LimitParams limit_params_fixed(const ScalingParams& p, const EventLaw& law) {
    if (!law.is_fixed()) throw std::invalid_argument("limit_params_fixed needs a FixedRadius law");
    return limit_params_fixed(law, p.dimension, p.drift_ratio(), p.variance_ratio());
}

LimitParams limit_params_variable(const EventLaw& law, int d, double beta, double c1, double c2) {
    const auto& v = law.variable_radius();
    const double e = v.alpha + d + 2.0 - v.gamma;
    if (!(e > -1.0)) throw std::invalid_argument("radius integral diverges: α+d+2−γ ≤ −1");
    LimitParams lp;
    lp.beta = beta;
    lp.m_diff = 2.0 * c1 * unit_ball_coordinate_moment(d) / (e + 1.0);
    lp.kappa = c2 / (v.gamma - d) * stable_exponent_integral(beta);
    lp.kappa_generator = lp.kappa * std::pow(unit_ball_volume(d), beta + 1.0);
    return lp;
}

LimitParams limit_params_variable(const ScalingParams& p, const EventLaw& law, double beta) {
    if (law.is_fixed()) throw std::invalid_argument("limit_params_variable needs a VariableRadius law");
    return limit_params_variable(law, p.dimension, beta, p.drift_ratio(), stable_variance_ratio(p, beta));
}

ScalingParams FixedLadder::rung(std::size_t index) const {
    const double m = m_values.at(index);
    ScalingParams p;
    p.dimension = dimension;
    p.m_space = m;
    p.j_impact = std::pow(m, j_exponent);
    p.n_rate = c1 * p.j_impact * m * m;
    p.k_density = c2 * p.j_impact * p.j_impact * std::pow(m, dimension) / p.n_rate;
    return p;
}

ScalingParams StableLadder::rung(std::size_t index) const {
    const double m = m_values.at(index);
    ScalingParams p;
    p.dimension = dimension;
    p.m_space = m;
    p.j_impact = std::pow(m, eta);
    p.n_rate = c1 * p.j_impact * m * m;
    p.k_density = std::pow(c2, 1.0 / beta) * p.j_impact * std::pow(m, dimension) *
                  std::pow(p.j_impact / p.n_rate, 1.0 / beta);
    return p;
}

} // namespace slfv
