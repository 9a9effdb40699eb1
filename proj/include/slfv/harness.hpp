#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slfv/dual.hpp"
#include "slfv/forward.hpp"
#include "slfv/io.hpp"
#include "slfv/params.hpp"
#include "slfv/semigroup.hpp"
#include "slfv/stats.hpp"
#include "slfv/test_function.hpp"

namespace slfv {

enum class ExperimentKind {
    duality_test,
    coalescence_scan,
    forward_ladder,
    exponential_martingale_ladder,
    oracle_compare,
    analytic_checks,
};

ExperimentKind experiment_kind_from_string(const std::string& s);
std::string to_string(ExperimentKind k);

struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::analytic_checks;
    std::vector<ScalingParams> ladder;
    EventLaw law = EventLaw::fixed(1.0, 1.0);
    std::vector<std::string> battery{"bump", "gaussian", "scaled_bump"};
    std::vector<double> t_grid{1.0};
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    /// θ ∈ (0, β) for moment diagnostics.
    double moment_exponent = 0.5;
    double beta = 1.0;
    int workers = 1;
    double budget_events = 5e7;
    /// Kind-specific settings (initial field, points, radii, ...).
    Json options = Json::object();
    /// Declared tolerances, echoed into the report.
    Json tolerances = Json::object();

    void validate() const;
};

ExperimentSpec parse_spec(const Json& j);

struct StatCheck {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double z = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

struct StatReport {
    std::string title;
    std::vector<StatCheck> checks;
    Json tolerances = Json::object();

    bool pass() const;
    /// Adds a check whose confidence interval is estimate ± 1.96 se.
    StatCheck& add(const std::string& name, double estimate, double se, double z, double tolerance, bool pass,
                   const std::string& note = "");
    Json to_json() const;
};

/// Ladder trend with CI-overlap allowance: the last value is below the first, and no step rises
/// by more than 1.96 pooled standard errors.
bool ladder_improves(const std::vector<double>& values, const std::vector<double>& ses);

/// Dispatches to the owning module, writes CSV tables and report.json into out_dir.
StatReport run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir);

TestFunction battery_function(const std::string& name, int d);

/// ⟨K w, f⟩ for f given on a grid.
double pair_with_grid(const Intervals1D& w, double K, const Grid1D& g);

/// Samples φ on [extent − margin, extent + margin] with spacing h.
Grid1D sample_test_function(const TestFunction& phi, double margin, double h);

struct ForwardRungConfig {
    ScalingParams params;
    EventLaw law = EventLaw::fixed(1.0, 1.0);
    Intervals1D initial;
    std::vector<TestFunction> battery;
    double t_end = 1.0;
    int grid_points = 4;
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    int qv_samples = 4;
    bool track_qv = true;
    double event_budget = 5e7;
    /// Deterministic predictions need a grid spacing for φ.
    double grid_h = 2e-3;
    bool predictions = true;
};

struct ObservableStats {
    std::string name;
    std::vector<Estimate> value;
    std::vector<Estimate> martingale;
    std::vector<Estimate> martingale_sq;
    std::vector<Estimate> qv_compensator;
    std::vector<Estimate> realized_qv;
    /// E[M²]/E[∫qv] and its delta-method standard error.
    std::vector<double> qv_ratio;
    std::vector<double> qv_ratio_se;
    /// ⟨X₀, P_t^{(m)} φ⟩ and ⟨X₀, S^N_t φ⟩.
    std::vector<double> heat_prediction;
    std::vector<double> semigroup_prediction;
};

struct ForwardRungStats {
    ScalingParams params;
    LimitParams limit;
    std::vector<double> times;
    std::vector<ObservableStats> observables;
    std::vector<Estimate> mass;
    std::vector<double> mass_variance;
    std::vector<double> mass_variance_se;
    double mean_events = 0.0;
};

ForwardRungStats forward_rung(const ForwardRungConfig& config);

/// Adds the three extras (⟨X,φ⟩, ⟨X,φ″⟩, ⟨X,φ^{1+β}⟩) and the drift integrand of the
/// exponential martingale for φ; returns the index of the integrand.
std::size_t configure_exponential_martingale(ForwardConfig& config, const TestFunction& phi, const LimitParams& lp);

/// e^{−⟨X_t,φ⟩} − e^{−⟨X_s,φ⟩} − ∫ₛᵗ drift per path, with s and t grid indices.
StatCheck exponential_martingale_test(const std::vector<ForwardResult>& paths, std::size_t integrand,
                                      std::size_t s_index, std::size_t t_index, const std::string& name);

/// E[sup_{s≤T}⟨X_s,φ⟩^{1+θ}] per rung; passes when max/min across rungs is at most ratio_bound.
StatReport moment_diagnostic(const std::vector<std::vector<double>>& sup_values_per_rung, double theta, double beta,
                             double ratio_bound = 4.0);

struct ExpRungConfig {
    ScalingParams params;
    EventLaw law = EventLaw::variable(2.5, 3.0);
    double beta = 0.75;
    Intervals1D initial;
    TestFunction phi;
    double t_end = 1.0;
    int grid_points = 2;
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    int workers = 1;
    double event_budget = 5e7;
    double grid_h = 2e-3;
    VEquationOptions v_options;
    bool solve_v = true;
};

struct ExpRungStats {
    ScalingParams params;
    LimitParams limit;
    StatCheck exp_martingale;
    Estimate laplace;
    double v_prediction = 0.0;
    double duality_residual = 0.0;
    double richardson_gap = 0.0;
    std::vector<double> sup_values;
    double mean_events = 0.0;
};

ExpRungStats exponential_rung(const ExpRungConfig& config);

} // namespace slfv
