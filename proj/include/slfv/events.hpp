#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "slfv/geometry.hpp"
#include "slfv/lineage.hpp"
#include "slfv/params.hpp"
#include "slfv/rng.hpp"

namespace slfv {

/// Scaled reproduction event (x/M, t/N, r/M, u(r)/J).
struct Event {
    Point center{0.0, 0.0, 0.0};
    double time = 0.0;
    double radius = 0.0;
    double impact = 0.0;
};

struct Box {
    Point lo{0.0, 0.0, 0.0};
    Point hi{0.0, 0.0, 0.0};
};

/// Truncated power law r^α on (a, 1].
class RadiusSampler {
public:
    RadiusSampler(double alpha, double lower, double upper = 1.0);
    /// μ^N for a variable law; `exponent_shift` tilts the density by r^shift.
    static RadiusSampler for_law(const EventLaw& law, const ScalingParams& p, double exponent_shift = 0.0);

    double sample(double uniform) const;
    double cdf(double r) const;
    double alpha() const { return alpha_; }
    double lower() const { return lower_; }
    double upper() const { return upper_; }
    /// ∫_a^upper r^α dr.
    double normalizer() const { return normalizer_; }

private:
    double alpha_;
    double lower_;
    double upper_;
    double normalizer_;
    bool logarithmic_;
};

struct EventStreamConfig {
    ScalingParams params;
    EventLaw law = EventLaw::fixed(1.0, 1.0);
    Box window;
    /// Torus mode when domain.period > 0; the window is then the whole torus.
    Domain domain;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    /// Largest admissible total event rate (events per unit time).
    double rate_budget = std::numeric_limits<double>::infinity();
};

/// Scaled Poisson stream of all events whose centres fall in the dilated window.
class EventStream {
public:
    explicit EventStream(const EventStreamConfig& config, double start_time = 0.0);

    Event next();
    double total_rate() const { return rate_; }
    double time() const { return time_; }
    /// Restricting to a new window restarts the exponential clock; exact by memorylessness.
    void set_window(const Box& window);
    Rng& rng() { return rng_; }
    const EventStreamConfig& config() const { return config_; }

private:
    void recompute_rate();
    double sample_radius();

    EventStreamConfig config_;
    Rng rng_;
    double time_;
    double rate_ = 0.0;
    Box proposal_;
    double r_max_scaled_;
    RadiusSampler sampler_;
};

/// Events covering at least one lineage, by thinning per-lineage proposals with acceptance 1/k(x).
class CoveringEventStream {
public:
    CoveringEventStream(const ScalingParams& p, const EventLaw& law, std::uint64_t seed, std::uint64_t stream,
                        double start_time = 0.0);

    struct Result {
        Event event;
        std::vector<std::size_t> covered;
        std::size_t proposals = 0;
    };
    Result next(const LineageSet& lineages);
    /// Rate at which one lineage proposes events.
    double per_lineage_rate() const { return lambda_; }
    Rng& rng() { return rng_; }
    double time() const { return time_; }

private:
    ScalingParams p_;
    EventLaw law_;
    Rng rng_;
    double time_;
    double lambda_;
    RadiusSampler sampler_;
};

/// Events that mark at least one lineage: lineage i proposes events marking itself, the other
/// covered lineages are marked with probability equal to the impact, and the proposal is kept
/// with probability 1/|marked|.
class MarkingEventStream {
public:
    MarkingEventStream(const ScalingParams& p, const EventLaw& law, std::uint64_t seed, std::uint64_t stream,
                       double start_time = 0.0);

    struct Result {
        Event event;
        std::vector<std::size_t> marked;
    };
    /// Next accepted marking event strictly before t_end, or false once t_end is reached.
    bool next(const LineageSet& lineages, double t_end, Result& out);
    /// Rate at which one lineage is marked.
    double per_lineage_rate() const { return lambda_; }
    Rng& rng() { return rng_; }
    double time() const { return time_; }
    void set_time(double t) { time_ = t; }

private:
    ScalingParams p_;
    EventLaw law_;
    Rng rng_;
    double time_;
    double lambda_;
    RadiusSampler sampler_;
};

void write_event_log(const std::string& path, const std::vector<Event>& events, int d);
std::vector<Event> read_event_log(const std::string& path, int d);

} // namespace slfv
