#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "slfv/events.hpp"
#include "slfv/field.hpp"
#include "slfv/lineage.hpp"
#include "slfv/params.hpp"
#include "slfv/rng.hpp"

namespace slfv {

/// Marks each covered lineage with probability e.impact, then merges the marked ones.
/// Returns the number of marked lineages.
std::size_t step_dual(LineageSet& lineages, const Event& e, const std::vector<std::size_t>& covered, Rng& rng,
                      double time);

/// Replaces the marked lineages (indices) by a single lineage at a uniform point of the ball.
/// The survivor keeps the smallest id; merges of two or more lineages are logged.
void merge_marked(LineageSet& lineages, const Event& e, std::vector<std::size_t> marked, Rng& rng, double time);

enum class DualDriver {
    /// Covering events, marks drawn by step_dual.
    covering,
    /// Only the events that mark at least one lineage.
    marking,
};

struct DualConfig {
    ScalingParams params;
    EventLaw law = EventLaw::fixed(1.0, 1.0);
    double period = 0.0;
    double t_end = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    DualDriver driver = DualDriver::marking;
    /// Stop at the first merge.
    bool stop_at_merge = false;
    /// Upper bound on processed events per path.
    double event_budget = 5e7;
};

struct DualResult {
    LineageSet lineages;
    std::size_t events = 0;
    double first_merge = std::numeric_limits<double>::infinity();
};

DualResult run_dual(const std::vector<Point>& start, const DualConfig& config);

struct GapReport {
    double forward_mean = 0.0;
    double forward_se = 0.0;
    double dual_mean = 0.0;
    double dual_se = 0.0;
    double gap = 0.0;
    double pooled_se = 0.0;
    double z = 0.0;
    std::size_t replicates = 0;
};

struct GapConfig {
    ScalingParams params;
    EventLaw law = EventLaw::fixed(1.0, 1.0);
    double t = 1.0;
    std::size_t replicates = 10000;
    std::uint64_t seed = 0;
    int workers = 1;
    double event_budget = 5e7;
    /// Drive each dual path by the time-reversed events of its forward path (torus only). The gap
    /// standard error is then that of the paired differences.
    bool shared_events = false;
};

/// Both sides of E[∏ w_t(x_j)] = E[∏ w₀(ξ_t^j)]; the torus period is taken from w0.
GapReport duality_gap(const Intervals1D& w0, const std::vector<double>& points, const GapConfig& config);

struct CoalescenceRung {
    ScalingParams params;
    EventLaw law = EventLaw::fixed(1.0, 1.0);
    /// Unscaled radius of the ball the two start points are drawn from (default: largest event radius).
    double start_radius = std::numeric_limits<double>::quiet_NaN();
    /// Branching index entering the d = 1 bound shape (1 for fixed radius).
    double beta = 1.0;
};

struct CoalescenceRow {
    double j = 0.0, m = 0.0, n = 0.0, k = 0.0;
    std::size_t replicates = 0;
    std::size_t merges = 0;
    double p_hat = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    /// Conditional estimator 1 − E exp(−∫ h), h the pair coalescence hazard.
    double p_rb = 0.0;
    double p_rb_se = 0.0;
    double bound_shape = 0.0;
    double mean_events = 0.0;
};

/// Instantaneous rate at which two lineages at distance s coalesce.
double pair_coalescence_hazard(const ScalingParams& p, const EventLaw& law, double s, int radius_order = 32);

/// J^{(1−β)(γ−1)/γ} M²/J (d=1), log M / J (d=2), 1/J (d≥3).
double coalescence_bound_shape(const ScalingParams& p, const EventLaw& law, double beta);

CoalescenceRow coalescence_probability(const CoalescenceRung& rung, double T, std::size_t replicates,
                                       std::uint64_t seed, int workers = 1);

/// h(r₀) = C (M²/J) (r₀ ∨ J^{−1/γ})^{−(γ−β(γ−d))}.
double hazard_bound(double separation, const ScalingParams& p, const EventLaw& law, double beta, double C = 1.0);

} // namespace slfv
