#pragma once

#include <string>
#include <variant>
#include <vector>

namespace slfv {

/// Scaling quadruple (N, M, J, K) in dimension d.
struct ScalingParams {
    double n_rate = 1.0;
    double m_space = 1.0;
    double j_impact = 1.0;
    double k_density = 1.0;
    int dimension = 1;

    void validate() const;
    /// N / (J M²).
    double drift_ratio() const;
    /// K N / (J² M^d).
    double variance_ratio() const;
};

struct FixedRadius {
    double r = 1.0;
    double u = 1.0;
};

/// μ^N(dr) = r^α dr on (J^{-1/γ}, 1), impact u(r) = r^{-γ}.
struct VariableRadius {
    double alpha = 0.0;
    double gamma = 1.0;
};

struct EventLaw {
    std::variant<FixedRadius, VariableRadius> kind;

    static EventLaw fixed(double r, double u) { return EventLaw{FixedRadius{r, u}}; }
    static EventLaw variable(double alpha, double gamma) { return EventLaw{VariableRadius{alpha, gamma}}; }

    bool is_fixed() const { return std::holds_alternative<FixedRadius>(kind); }
    const FixedRadius& fixed_radius() const { return std::get<FixedRadius>(kind); }
    const VariableRadius& variable_radius() const { return std::get<VariableRadius>(kind); }

    void validate(const ScalingParams& p) const;
    /// Smallest unscaled radius (r for a fixed law, J^{-1/γ} otherwise).
    double lower_radius(const ScalingParams& p) const;
    /// Largest unscaled radius.
    double upper_radius() const;
    /// Total mass of μ^N.
    double mu_total(const ScalingParams& p) const;
    /// Unscaled impact u(r).
    double impact_unscaled(double r) const;
    /// Scaled impact u(r)/J.
    double impact(double r, const ScalingParams& p) const;
};

/// One node of a quadrature rule for ∫ f(r) μ^N(dr).
struct RadiusNode {
    double r;
    double weight;
};

/// Gauss–Legendre rule in ln r on (a, 1) against r^α dr; a single unit node for fixed radius.
std::vector<RadiusNode> radius_quadrature(const EventLaw& law, const ScalingParams& p, int order);

struct LimitParams {
    double m_diff = 0.0;
    double kappa = 0.0;
    double beta = 1.0;
    /// κ implied by the branching operator's own normalisation; equals kappa for fixed radius.
    double kappa_generator = 0.0;
};

struct ConditionEntry {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    bool ok = true;
};

struct ConditionReport {
    std::vector<ConditionEntry> entries;
    std::vector<std::string> warnings;

    bool ok() const;
    const ConditionEntry& at(const std::string& name) const;
};

/// Targets for condition flags. A NaN target disables that flag.
struct ConditionBands {
    double c1 = 0.0 / 0.0;
    double c2 = 0.0 / 0.0;
    double relative_band = 0.25;
    double sparsity_max = 0.5;
};

ConditionReport validate_fixed_radius_conditions(const ScalingParams& p, const EventLaw& law, int ladder_index,
                                                 const ConditionBands& bands = {});
ConditionReport validate_variable_radius_conditions(const ScalingParams& p, const EventLaw& law, double beta,
                                                    const ConditionBands& bands = {});

/// C1 and C2 are the exact ratios of the rung.
LimitParams limit_params_fixed(const ScalingParams& p, const EventLaw& law);
LimitParams limit_params_variable(const ScalingParams& p, const EventLaw& law, double beta);
/// Variants with explicit constants.
LimitParams limit_params_fixed(const EventLaw& law, int d, double c1, double c2);
LimitParams limit_params_variable(const EventLaw& law, int d, double beta, double c1, double c2);

/// Exact C2 of a variable-radius rung: (N/J)(K/(JM^d))^β.
double stable_variance_ratio(const ScalingParams& p, double beta);

/// J = M^j_exponent, N = C1 J M², K = C2 J² M^d / N.
struct FixedLadder {
    int dimension = 1;
    std::vector<double> m_values;
    double j_exponent = 2.0;
    double c1 = 1.0;
    double c2 = 1.0;

    std::size_t size() const { return m_values.size(); }
    ScalingParams rung(std::size_t index) const;
};

/// J = M^η, N = C1 J M², K = C2^{1/β} J M^d (J/N)^{1/β}.
struct StableLadder {
    int dimension = 1;
    std::vector<double> m_values;
    double eta = 4.5;
    double beta = 0.75;
    double c1 = 1.0;
    double c2 = 1.0;

    std::size_t size() const { return m_values.size(); }
    ScalingParams rung(std::size_t index) const;
};

} // namespace slfv
