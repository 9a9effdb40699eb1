#include "slfv/forward.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "slfv/geometry.hpp"
#include "slfv/quadrature.hpp"

namespace slfv {

std::vector<RadiusClass> radius_classes(const EventLaw& law, const ScalingParams& p, int order) {
    const double base = p.n_rate * std::pow(p.m_space, p.dimension);
    std::vector<RadiusClass> out;
    for (const auto& node : radius_quadrature(law, p, order)) {
        out.push_back({node.r / p.m_space, law.impact(node.r, p), base * node.weight});
    }
    return out;
}

double apply_event(Intervals1D& field, const Event& e, Rng& rng, std::vector<ChangedPiece>* changed) {
    const double z = e.center[0] + e.radius * (2.0 * rng.uniform() - 1.0);
    const double wz = field.value_at(z);
    const double parent = (wz > 0.0 && rng.uniform() < wz) ? 1.0 : 0.0;
    field.update_ball(e.center[0], e.radius, e.impact, parent, changed);
    return parent;
}

double apply_event(Lattice& field, const Event& e, Rng& rng, std::vector<std::pair<std::size_t, double>>* changed) {
    const Point z = uniform_in_ball(field.domain(), e.center, e.radius, rng);
    const double wz = field.value_at(z);
    const double parent = (wz > 0.0 && rng.uniform() < wz) ? 1.0 : 0.0;
    field.update_ball(e.center, e.radius, e.impact, parent, changed);
    return parent;
}

double apply_event(FrequencyField& field, const Event& e, Rng& rng) {
    return std::visit([&](auto& f) { return apply_event(f, e, rng); }, field);
}

namespace {

void require_antiderivatives(const TestFunction& phi) {
    if (phi.dimension != 1 || !phi.has_antiderivatives())
        throw std::invalid_argument("interval generators need a d=1 test function with antiderivatives");
}

/// Cumulative integrals of w and φw along the interval partition.
class Cumulative {
public:
    Cumulative(const Intervals1D& w, const ScalarFn& Phi1) : w_(w), Phi1_(Phi1) {
        const auto& b = w.breaks();
        const auto& v = w.values();
        p0_.assign(b.size(), 0.0);
        p1_.assign(b.size(), 0.0);
        f1_.assign(b.size(), 0.0);
        for (std::size_t i = 0; i < b.size(); ++i) f1_[i] = Phi1(b[i]);
        for (std::size_t i = 0; i < v.size(); ++i) {
            p0_[i + 1] = p0_[i] + v[i] * (b[i + 1] - b[i]);
            p1_[i + 1] = p1_[i] + v[i] * (f1_[i + 1] - f1_[i]);
        }
    }

    /// (∫_{−∞}^y w, ∫_{−∞}^y φ w)
    std::pair<double, double> at(double y) const {
        const auto& b = w_.breaks();
        if (y <= b.front()) return {0.0, 0.0};
        if (y >= b.back()) return {p0_.back(), p1_.back()};
        const auto i = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), y) - b.begin()) - 1;
        const double v = w_.values()[i];
        return {p0_[i] + v * (y - b[i]), p1_[i] + v * (Phi1_(y) - f1_[i])};
    }

private:
    const Intervals1D& w_;
    const ScalarFn& Phi1_;
    std::vector<double> p0_, p1_, f1_;
};

/// ∫ dx f(W(x), ∫_{B(x)} φw, ∫_{B(x)} φ) over x, with B(x) = [x−ρ, x+ρ].
template <class F>
double sweep(const Intervals1D& w, const TestFunction& phi, double rho, int order, F&& f) {
    if (w.empty()) return 0.0;
    if (w.periodic()) throw std::invalid_argument("spatial sweeps support the non-periodic interval field only");
    const ScalarFn& Phi1 = phi.antiderivative1d[0];
    const Cumulative cum(w, Phi1);
    const auto& b = w.breaks();
    const double lo = b.front() - rho;
    const double hi = b.back() + rho;
    std::vector<double> cuts;
    cuts.reserve(2 * b.size() + 6);
    for (double x : b) {
        cuts.push_back(x - rho);
        cuts.push_back(x + rho);
    }
    for (double x : {phi.extent_lo, phi.extent_hi}) {
        if (std::isfinite(x)) {
            for (double s : {x - rho, x + rho})
                if (s > lo && s < hi) cuts.push_back(s);
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const GaussRule& g = gauss_legendre(order);
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        const double a = cuts[j];
        const double c = cuts[j + 1];
        if (!(c > a)) continue;
        const double half = 0.5 * (c - a);
        const double mid = 0.5 * (a + c);
        double s = 0.0;
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            const double x = mid + half * g.x[q];
            const auto [w_hi, pw_hi] = cum.at(x + rho);
            const auto [w_lo, pw_lo] = cum.at(x - rho);
            s += g.w[q] * f(w_hi - w_lo, pw_hi - pw_lo, Phi1(x + rho) - Phi1(x - rho));
        }
        total += half * s;
    }
    return total;
}

} // namespace

ScalarFn generator_antiderivative(const TestFunction& phi, const EventLaw& law, const ScalingParams& p,
                                  const GeneratorOptions& opt) {
    require_antiderivatives(phi);
    if (p.dimension != 1) throw std::invalid_argument("generator antiderivative is defined in d=1");
    struct Term {
        double rho;
        double weight;
    };
    auto terms = std::make_shared<std::vector<Term>>();
    for (const auto& c : radius_classes(law, p, opt.radius_order)) {
        const double vol = 2.0 * c.radius;
        terms->push_back({c.radius, c.rate * c.impact / vol * p.k_density});
    }
    const ScalarFn Phi1 = phi.antiderivative1d[0];
    const ScalarFn Phi3 = phi.antiderivative1d[2];
    return [terms, Phi1, Phi3](double z) {
        const double f1 = Phi1(z);
        const double f3 = Phi3(z);
        double s = 0.0;
        for (const auto& t : *terms) {
            const double two = 2.0 * t.rho;
            s += t.weight * ((Phi3(z + two) - 2.0 * f3 + Phi3(z - two)) - two * two * f1);
        }
        return s;
    };
}

double evaluate_generator(const Intervals1D& w, const TestFunction& phi, const EventLaw& law, const ScalingParams& p,
                          const GeneratorOptions& opt) {
    if (w.empty()) return 0.0;
    if (w.periodic()) throw std::invalid_argument("evaluate_generator supports the non-periodic interval field only");
    return w.integrate(generator_antiderivative(phi, law, p, opt));
}

double qv_formula(const Intervals1D& w, const TestFunction& phi, const EventLaw& law, const ScalingParams& p,
                  const GeneratorOptions& opt) {
    require_antiderivatives(phi);
    const double K = p.k_density;
    double total = 0.0;
    for (const auto& c : radius_classes(law, p, opt.radius_order)) {
        const double vol = 2.0 * c.radius;
        const double pr = c.impact;
        const double s = sweep(w, phi, c.radius, opt.space_order, [&](double W, double pw, double phiB) {
            const double psi = K * pw;
            const double up = K * phiB - psi;
            return W * up * up + (vol - W) * psi * psi;
        });
        total += c.rate * pr * pr / vol * s;
    }
    return total;
}

double exponential_generator(const Intervals1D& w, const TestFunction& phi, const EventLaw& law,
                             const ScalingParams& p, const GeneratorOptions& opt) {
    require_antiderivatives(phi);
    if (w.empty()) return 0.0;
    const double K = p.k_density;
    double total = 0.0;
    for (const auto& c : radius_classes(law, p, opt.radius_order)) {
        const double vol = 2.0 * c.radius;
        const double pr = c.impact;
        const double s = sweep(w, phi, c.radius, opt.space_order, [&](double W, double pw, double phiB) {
            const double psi = K * pw;
            const double frac = W / vol;
            return frac * std::expm1(-pr * (K * phiB - psi)) + (1.0 - frac) * std::expm1(pr * psi);
        });
        total += c.rate * s;
    }
    const double value = K * w.integrate(phi.antiderivative1d[0]);
    return total * std::exp(-value);
}

namespace {

struct Stencil {
    std::vector<std::array<long, 3>> offsets;
    std::vector<double> weights;
    double total = 0.0;
};

Stencil lens_stencil(const Lattice& lat, double rho) {
    const int d = lat.dimension();
    const double h = lat.h();
    const long reach = static_cast<long>(std::ceil(2.0 * rho / h));
    Stencil st;
    const double cell = lat.cell_volume();
    for (long k2 = (d > 2 ? -reach : 0); k2 <= (d > 2 ? reach : 0); ++k2)
        for (long k1 = (d > 1 ? -reach : 0); k1 <= (d > 1 ? reach : 0); ++k1)
            for (long k0 = -reach; k0 <= reach; ++k0) {
                const double s = h * std::sqrt(static_cast<double>(k0 * k0 + k1 * k1 + k2 * k2));
                const double v = lens_volume(d, rho, s);
                if (v > 0.0) {
                    st.offsets.push_back({k0, k1, k2});
                    st.weights.push_back(v * cell);
                    st.total += v * cell;
                }
            }
    return st;
}

/// Cell index after shifting by an offset; returns false outside a non-periodic lattice.
bool shifted(const Lattice& lat, std::size_t idx, const std::array<long, 3>& off, std::size_t& out) {
    const auto& n = lat.shape();
    std::size_t result = 0, stride = 1;
    for (int i = 0; i < 3; ++i) {
        long k = static_cast<long>(idx % static_cast<std::size_t>(n[i]));
        idx /= static_cast<std::size_t>(n[i]);
        k += off[i];
        if (lat.periodic()) {
            k %= n[i];
            if (k < 0) k += n[i];
        } else if (k < 0 || k >= n[i]) {
            return false;
        }
        result += static_cast<std::size_t>(k) * stride;
        stride *= static_cast<std::size_t>(n[i]);
    }
    out = result;
    return true;
}

std::vector<double> lattice_generator_weights(const Lattice& lat, const TestFunction& phi, const EventLaw& law,
                                              const ScalingParams& p, const GeneratorOptions& opt) {
    std::vector<double> phi_cells(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) phi_cells[i] = phi.eval(lat.cell_center(i));
    std::vector<double> g(lat.size(), 0.0);
    const double cell = lat.cell_volume();
    for (const auto& c : radius_classes(law, p, opt.radius_order)) {
        const Stencil st = lens_stencil(lat, c.radius);
        const double coef = c.rate * c.impact / ball_volume(p.dimension, c.radius) * p.k_density * cell;
        for (std::size_t i = 0; i < lat.size(); ++i) {
            double tphi = 0.0;
            for (std::size_t k = 0; k < st.offsets.size(); ++k) {
                std::size_t j;
                if (shifted(lat, i, st.offsets[k], j)) tphi += phi_cells[j] * st.weights[k];
            }
            g[i] += coef * (tphi - st.total * phi_cells[i]);
        }
    }
    return g;
}

} // namespace

double evaluate_generator(const Lattice& w, const TestFunction& phi, const EventLaw& law, const ScalingParams& p,
                          const GeneratorOptions& opt) {
    const auto g = lattice_generator_weights(w, phi, law, p, opt);
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * g[i];
    return s;
}

double qv_formula(const Lattice& w, const TestFunction& phi, const EventLaw& law, const ScalingParams& p,
                  const GeneratorOptions& opt) {
    const double K = p.k_density;
    const double cell = w.cell_volume();
    const Domain dom = w.domain();
    double total = 0.0;
    for (const auto& c : radius_classes(law, p, opt.radius_order)) {
        double s = 0.0;
        for (std::size_t x = 0; x < w.size(); ++x) {
            const auto cells = w.cells_in_ball(w.cell_center(x), c.radius);
            double W = 0.0, pw = 0.0, phiB = 0.0;
            for (std::size_t j : cells) {
                const double f = phi.eval(w.cell_center(j));
                W += w[j] * cell;
                pw += f * w[j] * cell;
                phiB += f * cell;
            }
            const double vol = static_cast<double>(cells.size()) * cell;
            if (vol <= 0.0) continue;
            const double psi = K * pw;
            const double up = K * phiB - psi;
            s += cell * (W * up * up + (vol - W) * psi * psi) / vol;
        }
        (void)dom;
        total += c.rate * c.impact * c.impact * s;
    }
    return total;
}

namespace {

using EventSource = std::function<bool(Event&)>;

void check_budget(double rate, double t_now, double t_end, std::size_t so_far, double budget) {
    const double expected = static_cast<double>(so_far) + rate * (t_end - t_now);
    if (expected > budget) {
        std::ostringstream os;
        os << "rung too large: expected event count " << expected << " exceeds budget " << budget;
        throw std::runtime_error(os.str());
    }
}

struct Clock {
    std::vector<double> grid;
    std::size_t next_grid = 0;
    std::vector<double> samples;
    std::size_t next_sample = 0;
};

ForwardResult run_intervals(const ForwardConfig& cfg, const Intervals1D& initial,
                            const std::vector<TestFunction>& observables, EventStream* stream,
                            const std::vector<Event>* replay) {
    const ScalingParams& p = cfg.params;
    const double K = p.k_density;
    Intervals1D w = initial;
    Rng parent_rng(cfg.seed, cfg.stream * 2 + 1);
    Rng qv_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL, cfg.stream);

    ForwardResult res;
    const int G = std::max(cfg.grid_points, 1);
    Clock clock;
    for (int k = 0; k <= G; ++k) clock.grid.push_back(cfg.t_end * k / G);
    res.grid_times = clock.grid;
    if (cfg.track_qv && cfg.qv_samples > 0) {
        for (int k = 0; k < G; ++k) {
            const double a = cfg.t_end * k / G;
            const double width = cfg.t_end / G / cfg.qv_samples;
            for (int s = 0; s < cfg.qv_samples; ++s) clock.samples.push_back(a + width * (s + qv_rng.uniform()));
        }
    }
    const double sample_weight = cfg.qv_samples > 0 ? cfg.t_end / G / cfg.qv_samples : 0.0;

    const std::size_t nobs = observables.size();
    std::vector<ScalarFn> value_F(nobs), gen_F(nobs);
    std::vector<double> gen_rate(nobs, 0.0), qv_rate(nobs, 0.0);
    res.ledgers.resize(nobs);
    for (std::size_t k = 0; k < nobs; ++k) {
        require_antiderivatives(observables[k]);
        value_F[k] = observables[k].antiderivative1d[0];
        gen_F[k] = generator_antiderivative(observables[k], cfg.law, p, cfg.generator);
        auto& L = res.ledgers[k];
        L.name = observables[k].name;
        L.initial = L.value = L.sup_value = K * w.integrate(value_F[k]);
        gen_rate[k] = w.empty() ? 0.0 : w.integrate(gen_F[k]);
        if (cfg.track_qv && cfg.qv_samples == 0) qv_rate[k] = qv_formula(w, observables[k], cfg.law, p, cfg.generator);
    }
    const ScalarFn identity = [](double x) { return x; };
    double mass = K * w.integrate(identity);
    res.mass.sup = mass;
    std::vector<double> extra(cfg.extra_antiderivatives.size());
    for (std::size_t k = 0; k < extra.size(); ++k) extra[k] = K * w.integrate(cfg.extra_antiderivatives[k]);
    res.grid_extra.assign(extra.size(), {});

    double t_last = 0.0;
    std::vector<double> path_integral(cfg.path_integrands.size(), 0.0);
    res.grid_path_integral.assign(cfg.path_integrands.size(), {});
    auto accrue = [&](double t) {
        const double dt = t - t_last;
        if (dt > 0.0) {
            for (std::size_t k = 0; k < path_integral.size(); ++k) path_integral[k] += cfg.path_integrands[k](extra) * dt;
            for (std::size_t k = 0; k < nobs; ++k) {
                res.ledgers[k].compensator += gen_rate[k] * dt;
                if (cfg.track_qv && cfg.qv_samples == 0) res.ledgers[k].qv_compensator += qv_rate[k] * dt;
            }
        }
        t_last = t;
    };
    auto record_grid = [&]() {
        for (std::size_t k = 0; k < nobs; ++k) {
            auto& L = res.ledgers[k];
            L.grid_values.push_back(L.value);
            L.grid_compensator.push_back(L.compensator);
            L.grid_realized_qv.push_back(L.realized_qv);
            L.grid_qv_compensator.push_back(L.qv_compensator);
        }
        res.mass.times.push_back(clock.grid[clock.next_grid]);
        res.mass.mass.push_back(mass);
        for (std::size_t k = 0; k < extra.size(); ++k) res.grid_extra[k].push_back(extra[k]);
        for (std::size_t k = 0; k < path_integral.size(); ++k) res.grid_path_integral[k].push_back(path_integral[k]);
    };
    // Moves the clock to time t (exclusive of an event at t), flushing grid points and qv samples.
    auto advance = [&](double t, bool inclusive) {
        for (;;) {
            const double tg = clock.next_grid < clock.grid.size() ? clock.grid[clock.next_grid] : INFINITY;
            const double ts = clock.next_sample < clock.samples.size() ? clock.samples[clock.next_sample] : INFINITY;
            const double tn = std::min(tg, ts);
            if (!(tn < t || (inclusive && tn <= t))) break;
            accrue(tn);
            if (ts <= tg) {
                for (std::size_t k = 0; k < nobs; ++k)
                    res.ledgers[k].qv_compensator +=
                        sample_weight * qv_formula(w, observables[k], cfg.law, p, cfg.generator);
                ++clock.next_sample;
            } else {
                record_grid();
                ++clock.next_grid;
            }
        }
        accrue(t);
    };

    auto hull_box = [&]() {
        Box b;
        b.lo[0] = w.hull_lo();
        b.hi[0] = w.hull_hi();
        return b;
    };
    if (stream && !w.periodic()) {
        if (w.empty()) {
            advance(cfg.t_end, true);
            res.field = w;
            return res;
        }
        stream->set_window(hull_box());
    }
    if (stream) check_budget(stream->total_rate(), 0.0, cfg.t_end, 0, cfg.event_budget);

    // Column layout of the break cache: values, generators, identity, extras.
    std::vector<const ScalarFn*> cached;
    for (const auto& F : value_F) cached.push_back(&F);
    for (const auto& F : gen_F) cached.push_back(&F);
    cached.push_back(&identity);
    for (const auto& F : cfg.extra_antiderivatives) cached.push_back(&F);
    w.attach_cache([&cached](double x, double* out) {
        for (std::size_t j = 0; j < cached.size(); ++j) out[j] = (*cached[j])(x);
    }, cached.size());
    const std::vector<double>& delta = w.cache_delta();

    std::size_t replay_index = 0;
    for (;;) {
        Event e;
        if (stream) {
            e = stream->next();
        } else {
            if (replay_index >= replay->size()) break;
            e = (*replay)[replay_index++];
        }
        if (!(e.time < cfg.t_end)) break;
        advance(e.time, false);
        ++res.events;
        if (cfg.record_events) res.event_log.push_back(e);
        const double old_lo = w.hull_lo(), old_hi = w.hull_hi();
        const bool was_empty = w.empty();
        apply_event(w, e, parent_rng);
        if (w.last_touched() > 0) {
            ++res.active_events;
            for (std::size_t k = 0; k < nobs; ++k) {
                auto& L = res.ledgers[k];
                const double dv = K * delta[k];
                L.value += dv;
                L.sup_value = std::max(L.sup_value, L.value);
                L.realized_qv += dv * dv;
                gen_rate[k] += delta[nobs + k];
                if (cfg.track_qv && cfg.qv_samples == 0)
                    qv_rate[k] = qv_formula(w, observables[k], cfg.law, p, cfg.generator);
            }
            mass += K * delta[2 * nobs];
            res.mass.sup = std::max(res.mass.sup, mass);
            for (std::size_t k = 0; k < extra.size(); ++k) extra[k] += K * delta[2 * nobs + 1 + k];
        }
        if (cfg.record_event_values)
            for (auto& L : res.ledgers) L.event_values.push_back(L.value);
        if (stream && !w.periodic()) {
            if (w.empty()) break;
            if (was_empty || w.hull_lo() != old_lo || w.hull_hi() != old_hi) {
                stream->set_window(hull_box());
                check_budget(stream->total_rate(), e.time, cfg.t_end, res.events, cfg.event_budget);
            }
        }
    }
    advance(cfg.t_end, true);
    w.detach_cache();
    res.field = w;
    return res;
}

ForwardResult run_lattice(const ForwardConfig& cfg, const Lattice& initial,
                          const std::vector<TestFunction>& observables, EventStream* stream,
                          const std::vector<Event>* replay) {
    const ScalingParams& p = cfg.params;
    const double K = p.k_density;
    Lattice w = initial;
    Rng parent_rng(cfg.seed, cfg.stream * 2 + 1);
    const double cell = w.cell_volume();
    ForwardResult res;
    const int G = std::max(cfg.grid_points, 1);
    std::vector<double> grid;
    for (int k = 0; k <= G; ++k) grid.push_back(cfg.t_end * k / G);
    res.grid_times = grid;
    const std::size_t nobs = observables.size();
    std::vector<std::vector<double>> value_w(nobs), gen_w(nobs);
    std::vector<double> gen_rate(nobs, 0.0), qv_rate(nobs, 0.0);
    res.ledgers.resize(nobs);
    for (std::size_t k = 0; k < nobs; ++k) {
        value_w[k].resize(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) value_w[k][i] = K * cell * observables[k].eval(w.cell_center(i));
        gen_w[k] = lattice_generator_weights(w, observables[k], cfg.law, p, cfg.generator);
        auto& L = res.ledgers[k];
        L.name = observables[k].name;
        for (std::size_t i = 0; i < w.size(); ++i) {
            L.value += w[i] * value_w[k][i];
            gen_rate[k] += w[i] * gen_w[k][i];
        }
        L.initial = L.sup_value = L.value;
        if (cfg.track_qv) qv_rate[k] = qv_formula(w, observables[k], cfg.law, p, cfg.generator);
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) mass += K * cell * w[i];
    res.mass.sup = mass;
    std::size_t next_grid = 0;
    double t_last = 0.0;
    auto advance = [&](double t, bool inclusive) {
        while (next_grid < grid.size() && (grid[next_grid] < t || (inclusive && grid[next_grid] <= t))) {
            const double dt = grid[next_grid] - t_last;
            for (std::size_t k = 0; k < nobs; ++k) {
                res.ledgers[k].compensator += gen_rate[k] * dt;
                if (cfg.track_qv) res.ledgers[k].qv_compensator += qv_rate[k] * dt;
            }
            t_last = grid[next_grid];
            for (auto& L : res.ledgers) {
                L.grid_values.push_back(L.value);
                L.grid_compensator.push_back(L.compensator);
                L.grid_realized_qv.push_back(L.realized_qv);
                L.grid_qv_compensator.push_back(L.qv_compensator);
            }
            res.mass.times.push_back(grid[next_grid]);
            res.mass.mass.push_back(mass);
            ++next_grid;
        }
        const double dt = t - t_last;
        for (std::size_t k = 0; k < nobs; ++k) {
            res.ledgers[k].compensator += gen_rate[k] * dt;
            if (cfg.track_qv) res.ledgers[k].qv_compensator += qv_rate[k] * dt;
        }
        t_last = t;
    };
    if (stream) check_budget(stream->total_rate(), 0.0, cfg.t_end, 0, cfg.event_budget);
    std::vector<std::pair<std::size_t, double>> changed;
    std::size_t replay_index = 0;
    for (;;) {
        Event e;
        if (stream) {
            e = stream->next();
        } else {
            if (replay_index >= replay->size()) break;
            e = (*replay)[replay_index++];
        }
        if (!(e.time < cfg.t_end)) break;
        advance(e.time, false);
        ++res.events;
        if (cfg.record_events) res.event_log.push_back(e);
        changed.clear();
        const double parent = apply_event(w, e, parent_rng, &changed);
        bool any = false;
        for (std::size_t k = 0; k < nobs; ++k) {
            double dv = 0.0, dg = 0.0;
            for (const auto& [idx, old] : changed) {
                const double dw = w[idx] - old;
                dv += dw * value_w[k][idx];
                dg += dw * gen_w[k][idx];
            }
            auto& L = res.ledgers[k];
            L.value += dv;
            L.sup_value = std::max(L.sup_value, L.value);
            L.realized_qv += dv * dv;
            gen_rate[k] += dg;
            any = any || dv != 0.0;
        }
        double dm = 0.0;
        for (const auto& [idx, old] : changed) dm += (w[idx] - old) * K * cell;
        mass += dm;
        res.mass.sup = std::max(res.mass.sup, mass);
        if ((any || dm != 0.0) && cfg.track_qv)
            for (std::size_t k = 0; k < nobs; ++k) qv_rate[k] = qv_formula(w, observables[k], cfg.law, p, cfg.generator);
        if (dm != 0.0 || any) ++res.active_events;
        (void)parent;
        if (cfg.record_event_values)
            for (auto& L : res.ledgers) L.event_values.push_back(L.value);
    }
    advance(cfg.t_end, true);
    res.field = w;
    return res;
}

EventStreamConfig stream_config(const ForwardConfig& cfg, const FrequencyField& initial) {
    EventStreamConfig sc;
    sc.params = cfg.params;
    sc.law = cfg.law;
    sc.seed = cfg.seed;
    sc.stream = cfg.stream * 2;
    sc.domain.dimension = cfg.params.dimension;
    sc.domain.period = cfg.period;
    if (const auto* lat = std::get_if<Lattice>(&initial)) {
        const Point lo = lat->cell_center(0);
        const Point hi = lat->cell_center(lat->size() - 1);
        for (int i = 0; i < cfg.params.dimension; ++i) {
            sc.window.lo[i] = lo[i] - 0.5 * lat->h();
            sc.window.hi[i] = hi[i] + 0.5 * lat->h();
        }
        if (lat->periodic()) sc.domain.period = lat->shape()[0] * lat->h();
    } else {
        const auto& iv = std::get<Intervals1D>(initial);
        if (iv.periodic()) sc.domain.period = iv.period();
        sc.window.lo[0] = iv.hull_lo();
        sc.window.hi[0] = iv.hull_hi();
    }
    return sc;
}

} // namespace

ForwardResult run_forward(const ForwardConfig& config, const FrequencyField& initial,
                          const std::vector<TestFunction>& observables) {
    config.params.validate();
    config.law.validate(config.params);
    EventStream stream(stream_config(config, initial));
    if (const auto* iv = std::get_if<Intervals1D>(&initial)) {
        if (config.params.dimension != 1) throw std::invalid_argument("interval fields need d=1");
        return run_intervals(config, *iv, observables, &stream, nullptr);
    }
    return run_lattice(config, std::get<Lattice>(initial), observables, &stream, nullptr);
}

ForwardResult replay_forward(const ForwardConfig& config, const FrequencyField& initial,
                             const std::vector<TestFunction>& observables, const std::vector<Event>& events) {
    if (const auto* iv = std::get_if<Intervals1D>(&initial)) return run_intervals(config, *iv, observables, nullptr, &events);
    return run_lattice(config, std::get<Lattice>(initial), observables, nullptr, &events);
}

} // namespace slfv
