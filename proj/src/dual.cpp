#include "slfv/dual.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slfv/forward.hpp"
#include "slfv/quadrature.hpp"
#include "slfv/stats.hpp"

namespace slfv {

void merge_marked(LineageSet& ls, const Event& e, std::vector<std::size_t> marked, Rng& rng, double time) {
    if (marked.empty()) return;
    std::sort(marked.begin(), marked.end());
    const Point target = uniform_in_ball(ls.domain, e.center, e.radius, rng);
    if (marked.size() == 1) {
        ls.positions[marked[0]] = target;
        return;
    }
    MergeRecord rec;
    rec.time = time;
    rec.position = target;
    std::size_t keep = marked[0];
    for (std::size_t i : marked) {
        rec.merged.push_back(ls.ids[i]);
        if (ls.ids[i] < ls.ids[keep]) keep = i;
    }
    rec.survivor = ls.ids[keep];
    ls.positions[keep] = target;
    for (auto it = marked.rbegin(); it != marked.rend(); ++it) {
        if (*it == keep) continue;
        ls.positions.erase(ls.positions.begin() + static_cast<std::ptrdiff_t>(*it));
        ls.ids.erase(ls.ids.begin() + static_cast<std::ptrdiff_t>(*it));
    }
    ls.merge_log.push_back(std::move(rec));
}

std::size_t step_dual(LineageSet& ls, const Event& e, const std::vector<std::size_t>& covered, Rng& rng,
                      double time) {
    std::vector<std::size_t> marked;
    for (std::size_t i : covered)
        if (rng.uniform() < e.impact) marked.push_back(i);
    const std::size_t n = marked.size();
    merge_marked(ls, e, std::move(marked), rng, time);
    return n;
}

DualResult run_dual(const std::vector<Point>& start, const DualConfig& cfg) {
    if (start.empty()) throw std::invalid_argument("run_dual needs at least one lineage");
    cfg.params.validate();
    cfg.law.validate(cfg.params);
    DualResult res;
    res.lineages = LineageSet(Domain{cfg.params.dimension, cfg.period}, start);
    auto& ls = res.lineages;
    auto note_merge = [&](double t) {
        if (!ls.merge_log.empty() && !std::isfinite(res.first_merge)) res.first_merge = t;
    };
    auto over_budget = [&]() {
        if (static_cast<double>(res.events) > cfg.event_budget)
            throw std::runtime_error("rung too large: dual event budget exceeded");
    };
    if (cfg.driver == DualDriver::covering) {
        CoveringEventStream cs(cfg.params, cfg.law, cfg.seed, cfg.stream);
        for (;;) {
            auto ev = cs.next(ls);
            res.events += ev.proposals;
            over_budget();
            if (!(ev.event.time < cfg.t_end)) break;
            step_dual(ls, ev.event, ev.covered, cs.rng(), ev.event.time);
            note_merge(ev.event.time);
            if (cfg.stop_at_merge && !ls.merge_log.empty()) break;
        }
    } else {
        MarkingEventStream ms(cfg.params, cfg.law, cfg.seed, cfg.stream);
        MarkingEventStream::Result ev;
        while (ms.next(ls, cfg.t_end, ev)) {
            ++res.events;
            over_budget();
            merge_marked(ls, ev.event, ev.marked, ms.rng(), ev.event.time);
            note_merge(ev.event.time);
            if (cfg.stop_at_merge && !ls.merge_log.empty()) break;
        }
    }
    return res;
}

GapReport duality_gap(const Intervals1D& w0, const std::vector<double>& points, const GapConfig& cfg) {
    if (cfg.params.dimension != 1) throw std::invalid_argument("duality_gap runs the exact d=1 forward mode");
    const double period = w0.period();
    std::vector<double> fwd(cfg.replicates), dual(cfg.replicates);
    std::vector<Point> start;
    for (double x : points) start.push_back({x, 0.0, 0.0});

    ForwardConfig fc;
    fc.params = cfg.params;
    fc.law = cfg.law;
    fc.period = period;
    fc.t_end = cfg.t;
    fc.grid_points = 1;
    fc.seed = cfg.seed;
    fc.track_qv = false;
    fc.event_budget = cfg.event_budget;
    fc.record_events = cfg.shared_events;
    if (cfg.shared_events && !(period > 0.0))
        throw std::invalid_argument("shared-event duality needs a torus field (all events are materialised)");
    const Domain dom{1, period};
    parallel_for(cfg.replicates, cfg.workers, [&](std::size_t i) {
        ForwardConfig c = fc;
        c.stream = i;
        const auto res = run_forward(c, w0, {});
        const auto& w = std::get<Intervals1D>(res.field);
        double prod = 1.0;
        for (double x : points) prod *= w.value_at(x);
        fwd[i] = prod;
        if (!cfg.shared_events) return;
        LineageSet ls(dom, start);
        Rng rng(cfg.seed ^ 0x5bd1e995u, i);
        for (auto it = res.event_log.rbegin(); it != res.event_log.rend(); ++it) {
            Event e = *it;
            e.time = cfg.t - it->time;
            step_dual(ls, e, ls.covered(e.center, e.radius), rng, e.time);
        }
        double dprod = 1.0;
        for (const auto& x : ls.positions) dprod *= w0.value_at(x[0]);
        dual[i] = dprod;
    });

    DualConfig dc;
    dc.params = cfg.params;
    dc.law = cfg.law;
    dc.period = period;
    dc.t_end = cfg.t;
    dc.seed = cfg.seed ^ 0x5bd1e995u;
    dc.event_budget = cfg.event_budget;
    if (!cfg.shared_events) parallel_for(cfg.replicates, cfg.workers, [&](std::size_t i) {
        DualConfig c = dc;
        c.stream = i;
        const auto res = run_dual(start, c);
        double prod = 1.0;
        for (const auto& x : res.lineages.positions) prod *= w0.value_at(x[0]);
        dual[i] = prod;
    });

    GapReport r;
    const Estimate ef = estimate(fwd);
    const Estimate ed = estimate(dual);
    r.forward_mean = ef.mean;
    r.forward_se = ef.se;
    r.dual_mean = ed.mean;
    r.dual_se = ed.se;
    r.gap = ef.mean - ed.mean;
    if (cfg.shared_events) {
        std::vector<double> diff(cfg.replicates);
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = fwd[i] - dual[i];
        r.pooled_se = estimate(diff).se;
        r.z = r.pooled_se > 0.0 ? r.gap / r.pooled_se : (r.gap == 0.0 ? 0.0 : std::copysign(INFINITY, r.gap));
    } else {
        r.pooled_se = std::sqrt(ef.se * ef.se + ed.se * ed.se);
        r.z = z_score(ef.mean, ef.se, ed.mean, ed.se);
    }
    r.replicates = cfg.replicates;
    return r;
}

double pair_coalescence_hazard(const ScalingParams& p, const EventLaw& law, double s, int radius_order) {
    const int d = p.dimension;
    const double scale = p.n_rate * std::pow(p.m_space, d);
    if (law.is_fixed()) {
        const double r = law.fixed_radius().r;
        const double u = law.impact(r, p);
        return scale * u * u * lens_volume(d, r / p.m_space, s);
    }
    // Lens volume vanishes below r = sM/2; integrate in ln r over the remaining range.
    const double alpha = law.variable_radius().alpha;
    const double lo = std::max(law.lower_radius(p), 0.5 * s * p.m_space);
    const double hi = law.upper_radius();
    if (!(lo < hi)) return 0.0;
    const GaussRule& g = gauss_legendre(radius_order);
    const double a = std::log(lo), b = std::log(hi);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t q = 0; q < g.x.size(); ++q) {
        const double r = std::exp(mid + half * g.x[q]);
        const double u = law.impact(r, p);
        sum += g.w[q] * std::pow(r, alpha + 1.0) * u * u * lens_volume(d, r / p.m_space, s);
    }
    return scale * half * sum;
}

double coalescence_bound_shape(const ScalingParams& p, const EventLaw& law, double beta) {
    const double J = p.j_impact, M = p.m_space;
    if (p.dimension == 1) {
        if (law.is_fixed()) return M * M / J;
        const double g = law.variable_radius().gamma;
        return std::pow(J, (1.0 - beta) * (g - 1.0) / g) * M * M / J;
    }
    if (p.dimension == 2) return std::log(M) / J;
    return 1.0 / J;
}

CoalescenceRow coalescence_probability(const CoalescenceRung& rung, double T, std::size_t replicates,
                                       std::uint64_t seed, int workers) {
    const ScalingParams& p = rung.params;
    p.validate();
    rung.law.validate(p);
    const double r0 = std::isnan(rung.start_radius)
                          ? (rung.law.is_fixed() ? rung.law.fixed_radius().r : rung.law.upper_radius())
                          : rung.start_radius;
    const Domain dom{p.dimension, 0.0};
    struct Sample {
        bool merged = false;
        double survival = 1.0;
        std::size_t events = 0;
    };
    std::vector<Sample> out(replicates);
    parallel_for(replicates, workers, [&](std::size_t i) {
        Rng start_rng(seed, 2 * i);
        const Point origin{0.0, 0.0, 0.0};
        LineageSet ls(dom, {uniform_in_ball(dom, origin, r0 / p.m_space, start_rng),
                            uniform_in_ball(dom, origin, r0 / p.m_space, start_rng)});
        // Killed process: events marking both lineages are dropped and their rate integrated.
        MarkingEventStream ms(p, rung.law, seed, 2 * i + 1);
        MarkingEventStream::Result ev;
        Sample s;
        double t_last = 0.0, integral = 0.0;
        double h = pair_coalescence_hazard(p, rung.law, dom.distance(ls.positions[0], ls.positions[1]));
        while (ms.next(ls, T, ev)) {
            ++s.events;
            if (ev.marked.size() >= 2) {
                s.merged = true;
                continue;
            }
            integral += h * (ev.event.time - t_last);
            t_last = ev.event.time;
            merge_marked(ls, ev.event, ev.marked, ms.rng(), ev.event.time);
            h = pair_coalescence_hazard(p, rung.law, dom.distance(ls.positions[0], ls.positions[1]));
        }
        integral += h * (T - t_last);
        s.survival = std::exp(-integral);
        out[i] = s;
    });
    CoalescenceRow row;
    row.j = p.j_impact;
    row.m = p.m_space;
    row.n = p.n_rate;
    row.k = p.k_density;
    row.replicates = replicates;
    Accumulator rb, events;
    for (const auto& s : out) {
        row.merges += s.merged ? 1 : 0;
        rb.add(1.0 - s.survival);
        events.add(static_cast<double>(s.events));
    }
    row.p_hat = replicates ? static_cast<double>(row.merges) / static_cast<double>(replicates) : 0.0;
    std::tie(row.ci_lo, row.ci_hi) = wilson_interval(row.merges, replicates);
    row.p_rb = rb.mean();
    row.p_rb_se = rb.stderr_mean();
    row.bound_shape = coalescence_bound_shape(p, rung.law, rung.beta);
    row.mean_events = events.mean();
    return row;
}

double hazard_bound(double separation, const ScalingParams& p, const EventLaw& law, double beta, double C) {
    if (law.is_fixed()) throw std::invalid_argument("hazard_bound needs a variable-radius law");
    const double g = law.variable_radius().gamma;
    const double J = p.j_impact, M = p.m_space;
    const double base = std::max(separation, std::pow(J, -1.0 / g));
    return C * M * M / J * std::pow(base, -(g - beta * (g - p.dimension)));
}

} // namespace slfv
