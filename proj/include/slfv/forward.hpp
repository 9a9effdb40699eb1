#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "slfv/events.hpp"
#include "slfv/field.hpp"
#include "slfv/params.hpp"
#include "slfv/rng.hpp"
#include "slfv/test_function.hpp"

namespace slfv {

/// One radius class of the event law: events of scaled radius `radius` and impact `impact`
/// fall at rate `rate` per unit volume per unit time.
struct RadiusClass {
    double radius;
    double impact;
    double rate;
};

/// Radius classes of the scaled event law (Gauss–Legendre in r for a variable law).
std::vector<RadiusClass> radius_classes(const EventLaw& law, const ScalingParams& p, int order);

/// Draws the parent location, applies the event and returns the parental type (0 or 1).
double apply_event(Intervals1D& field, const Event& e, Rng& rng, std::vector<ChangedPiece>* changed = nullptr);
double apply_event(Lattice& field, const Event& e, Rng& rng,
                   std::vector<std::pair<std::size_t, double>>* changed = nullptr);
double apply_event(FrequencyField& field, const Event& e, Rng& rng);

struct GeneratorOptions {
    /// Gauss–Legendre order for the radius integral of a variable law.
    int radius_order = 24;
    /// Gauss–Legendre order per spatial segment for quadratic-variation and exponential integrands.
    int space_order = 10;
};

/// L^N(φ)(X) with X = K w.
double evaluate_generator(const Intervals1D& w, const TestFunction& phi, const EventLaw& law, const ScalingParams& p,
                          const GeneratorOptions& opt = {});
double evaluate_generator(const Lattice& w, const TestFunction& phi, const EventLaw& law, const ScalingParams& p,
                          const GeneratorOptions& opt = {});
/// L_{exp(−·)}(φ)(X).
double exponential_generator(const Intervals1D& w, const TestFunction& phi, const EventLaw& law,
                             const ScalingParams& p, const GeneratorOptions& opt = {});
/// Rate of the predictable quadratic variation of ⟨X,φ⟩ at the current state.
double qv_formula(const Intervals1D& w, const TestFunction& phi, const EventLaw& law, const ScalingParams& p,
                  const GeneratorOptions& opt = {});
double qv_formula(const Lattice& w, const TestFunction& phi, const EventLaw& law, const ScalingParams& p,
                  const GeneratorOptions& opt = {});

/// An antiderivative H with L^N(φ)(X) = K ∫ w dH, so the generator is a linear functional of w.
ScalarFn generator_antiderivative(const TestFunction& phi, const EventLaw& law, const ScalingParams& p,
                                  const GeneratorOptions& opt = {});

/// Time series of one observable along a path.
struct MartingaleLedger {
    std::string name;
    double initial = 0.0;
    double value = 0.0;
    double compensator = 0.0;
    double realized_qv = 0.0;
    /// Largest value seen along the path (initial value included).
    double sup_value = 0.0;
    /// Estimate of ∫ qv_formula ds (exact or stratified, see ForwardConfig::qv_samples).
    double qv_compensator = 0.0;
    std::vector<double> grid_values;
    std::vector<double> grid_compensator;
    std::vector<double> grid_realized_qv;
    std::vector<double> grid_qv_compensator;
    /// Value after every event (optional).
    std::vector<double> event_values;

    double martingale() const { return value - initial - compensator; }
};

struct MassPath {
    std::vector<double> times;
    std::vector<double> mass;
    double sup = 0.0;
};

struct ForwardConfig {
    ScalingParams params;
    EventLaw law = EventLaw::fixed(1.0, 1.0);
    /// Torus mode when period > 0 (d = 1 intervals or periodic lattice).
    double period = 0.0;
    double t_end = 1.0;
    /// Output grid: t_end · k / grid_points for k = 0..grid_points.
    int grid_points = 4;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    /// Fail when the expected event count exceeds this.
    double event_budget = 5e7;
    GeneratorOptions generator;
    /// Quadratic-variation compensator: 0 evaluates qv_formula after every event; S > 0 uses
    /// S stratified uniform times per output interval.
    int qv_samples = 0;
    bool track_qv = true;
    bool record_event_values = false;
    bool record_events = false;
    /// Additional linear functionals recorded on the grid (no generator bookkeeping).
    std::vector<ScalarFn> extra_antiderivatives;
    /// Functions f(extras) whose integrals ∫₀ᵗ f ds are accumulated exactly (extras are constant
    /// between events).
    std::vector<std::function<double(const std::vector<double>&)>> path_integrands;
};

struct ForwardResult {
    FrequencyField field;
    std::vector<MartingaleLedger> ledgers;
    MassPath mass;
    std::vector<double> grid_times;
    /// grid_extra[k][j]: extra functional k at grid time j.
    std::vector<std::vector<double>> grid_extra;
    /// grid_path_integral[k][j]: ∫₀^{t_j} path_integrands[k] ds.
    std::vector<std::vector<double>> grid_path_integral;
    std::size_t events = 0;
    std::size_t active_events = 0;
    std::vector<Event> event_log;
};

ForwardResult run_forward(const ForwardConfig& config, const FrequencyField& initial,
                          const std::vector<TestFunction>& observables);

/// Replays a recorded event stream (parent choices still use the rng).
ForwardResult replay_forward(const ForwardConfig& config, const FrequencyField& initial,
                             const std::vector<TestFunction>& observables, const std::vector<Event>& events);

} // namespace slfv
