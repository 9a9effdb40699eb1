#include "slfv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "slfv/sbm.hpp"
#include "slfv/special.hpp"

namespace slfv {

namespace {

const std::pair<ExperimentKind, const char*> kind_names[] = {
    {ExperimentKind::duality_test, "DualityTest"},
    {ExperimentKind::coalescence_scan, "CoalescenceScan"},
    {ExperimentKind::forward_ladder, "ForwardLadder"},
    {ExperimentKind::exponential_martingale_ladder, "ExponentialMartingaleLadder"},
    {ExperimentKind::oracle_compare, "OracleCompare"},
    {ExperimentKind::analytic_checks, "AnalyticChecks"},
};

double tolerance(const ExperimentSpec& spec, const char* name, double fallback) {
    return spec.tolerances.contains(name) ? spec.tolerances.at(name).get<double>() : fallback;
}

Intervals1D initial_field(const Json& o) {
    if (o.contains("period")) {
        return Intervals1D::torus(o.at("period").get<double>(), o.value("breaks", std::vector<double>{}),
                                  o.at("values").get<std::vector<double>>());
    }
    return Intervals1D::indicator(o.value("lo", -0.5), o.value("hi", 0.5), o.value("value", 0.5));
}

double beta_of(const EventLaw& law, int d) {
    if (law.is_fixed()) return 1.0;
    const auto& v = law.variable_radius();
    return (v.alpha + 1.0) / (v.gamma - d) - 1.0;
}

LimitParams limit_of(const ScalingParams& p, const EventLaw& law) {
    return law.is_fixed() ? limit_params_fixed(p, law) : limit_params_variable(p, law, beta_of(law, p.dimension));
}

double largest_scaled_radius(const EventLaw& law, const ScalingParams& p) {
    return (law.is_fixed() ? law.fixed_radius().r : law.upper_radius()) / p.m_space;
}

/// Sample variance and the standard error of that variance estimate.
std::pair<double, double> variance_with_se(const std::vector<double>& xs) {
    const Estimate e = estimate(xs);
    const double n = static_cast<double>(xs.size());
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - e.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m4 /= n;
    const double var = m2 * n / std::max(n - 1.0, 1.0);
    return {var, std::sqrt(std::max(m4 - m2 * m2, 0.0) / n)};
}

} // namespace

ExperimentKind experiment_kind_from_string(const std::string& s) {
    for (const auto& [k, n] : kind_names)
        if (s == n) return k;
    throw std::invalid_argument("unknown experiment kind: " + s);
}

std::string to_string(ExperimentKind k) {
    for (const auto& [kind, n] : kind_names)
        if (k == kind) return n;
    return "unknown";
}

void ExperimentSpec::validate() const {
    if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i].m_space > ladder[i - 1].m_space))
            throw std::invalid_argument("ladder rungs must be strictly increasing in M");
    for (const auto& p : ladder) {
        p.validate();
        law.validate(p);
    }
    if (kind == ExperimentKind::exponential_martingale_ladder && !(moment_exponent > 0.0 && moment_exponent < beta))
        throw std::invalid_argument("moment exponent θ must lie in (0, β)");
}

ExperimentSpec parse_spec(const Json& j) {
    ExperimentSpec s;
    s.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("ladder"))
        for (const auto& r : j.at("ladder")) s.ladder.push_back(scaling_from_json(r));
    if (j.contains("law")) s.law = law_from_json(j.at("law"));
    s.battery = j.value("battery", s.battery);
    s.t_grid = j.value("t_grid", s.t_grid);
    s.replicates = j.value("replicates", s.replicates);
    s.seed = j.value("seed", s.seed);
    s.moment_exponent = j.value("moment_exponent", s.moment_exponent);
    s.beta = j.value("beta", beta_of(s.law, s.ladder.empty() ? 1 : s.ladder.front().dimension));
    s.workers = j.value("workers", s.workers);
    s.budget_events = j.value("budget_events", s.budget_events);
    if (j.contains("options")) s.options = j.at("options");
    if (j.contains("tolerances")) s.tolerances = j.at("tolerances");
    return s;
}

bool StatReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const StatCheck& c) { return c.pass; });
}

StatCheck& StatReport::add(const std::string& name, double est, double se, double z, double tol, bool pass,
                           const std::string& note) {
    StatCheck c;
    c.name = name;
    c.estimate = est;
    c.se = se;
    c.ci_lo = est - 1.959963984540054 * se;
    c.ci_hi = est + 1.959963984540054 * se;
    c.z = z;
    c.tolerance = tol;
    c.pass = pass;
    c.note = note;
    checks.push_back(c);
    return checks.back();
}

Json StatReport::to_json() const {
    Json j;
    j["title"] = title;
    j["pass"] = pass();
    j["tolerances"] = tolerances;
    Json arr = Json::array();
    for (const auto& c : checks) {
        arr.push_back(Json{{"name", c.name},
                           {"estimate", c.estimate},
                           {"stderr", c.se},
                           {"ci", {c.ci_lo, c.ci_hi}},
                           {"z", c.z},
                           {"tolerance", c.tolerance},
                           {"pass", c.pass},
                           {"note", c.note}});
    }
    j["checks"] = arr;
    return j;
}

bool ladder_improves(const std::vector<double>& v, const std::vector<double>& se) {
    if (v.size() < 2 || se.size() != v.size()) return false;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[i - 1] + 1.959963984540054 * std::hypot(se[i], se[i - 1])) return false;
    return v.back() < v.front();
}

TestFunction battery_function(const std::string& name, int d) {
    for (auto& f : default_battery(d))
        if (f.name == name) return f;
    throw std::invalid_argument("unknown battery function: " + name);
}

double pair_with_grid(const Intervals1D& w, double K, const Grid1D& g) {
    if (w.empty()) return 0.0;
    return K * w.integrate(grid_antiderivative(g));
}

Grid1D sample_test_function(const TestFunction& phi, double margin, double h) {
    const double lo = (std::isfinite(phi.extent_lo) ? phi.extent_lo : -20.0) - margin;
    const double hi = (std::isfinite(phi.extent_hi) ? phi.extent_hi : 20.0) + margin;
    return Grid1D::sample([&](double x) { return phi(x); }, lo, hi, h);
}

ForwardRungStats forward_rung(const ForwardRungConfig& cfg) {
    ForwardRungStats st;
    st.params = cfg.params;
    st.limit = limit_of(cfg.params, cfg.law);
    ForwardConfig fc;
    fc.params = cfg.params;
    fc.law = cfg.law;
    fc.t_end = cfg.t_end;
    fc.grid_points = cfg.grid_points;
    fc.seed = cfg.seed;
    fc.event_budget = cfg.event_budget;
    fc.qv_samples = cfg.qv_samples;
    fc.track_qv = cfg.track_qv;

    struct PathSummary {
        std::vector<std::vector<double>> value, mart, qv, realized;
        std::vector<double> mass;
        std::size_t events = 0;
    };
    std::vector<PathSummary> paths(cfg.replicates);
    parallel_for(cfg.replicates, cfg.workers, [&](std::size_t i) {
        ForwardConfig c = fc;
        c.stream = i;
        const ForwardResult r = run_forward(c, cfg.initial, cfg.battery);
        PathSummary s;
        for (const auto& L : r.ledgers) {
            std::vector<double> mart(L.grid_values.size());
            for (std::size_t j = 0; j < mart.size(); ++j) mart[j] = L.grid_values[j] - L.initial - L.grid_compensator[j];
            s.value.push_back(L.grid_values);
            s.mart.push_back(std::move(mart));
            s.qv.push_back(L.grid_qv_compensator);
            s.realized.push_back(L.grid_realized_qv);
        }
        s.mass = r.mass.mass;
        s.events = r.events;
        paths[i] = std::move(s);
    });

    const std::size_t G = static_cast<std::size_t>(std::max(cfg.grid_points, 1)) + 1;
    for (std::size_t j = 0; j < G; ++j) st.times.push_back(cfg.t_end * static_cast<double>(j) / static_cast<double>(G - 1));
    Accumulator ev;
    for (const auto& p : paths) ev.add(static_cast<double>(p.events));
    st.mean_events = ev.mean();

    for (std::size_t j = 0; j < G; ++j) {
        std::vector<double> m;
        for (const auto& p : paths) m.push_back(p.mass[j]);
        st.mass.push_back(estimate(m));
        const auto [v, se] = variance_with_se(m);
        st.mass_variance.push_back(v);
        st.mass_variance_se.push_back(se);
    }

    for (std::size_t k = 0; k < cfg.battery.size(); ++k) {
        ObservableStats os;
        os.name = cfg.battery[k].name;
        for (std::size_t j = 0; j < G; ++j) {
            std::vector<double> val, mart, m2, qv, real;
            for (const auto& p : paths) {
                val.push_back(p.value[k][j]);
                mart.push_back(p.mart[k][j]);
                m2.push_back(p.mart[k][j] * p.mart[k][j]);
                qv.push_back(p.qv[k][j]);
                real.push_back(p.realized[k][j]);
            }
            os.value.push_back(estimate(val));
            os.martingale.push_back(estimate(mart));
            os.martingale_sq.push_back(estimate(m2));
            os.qv_compensator.push_back(estimate(qv));
            os.realized_qv.push_back(estimate(real));
            const double denom = os.qv_compensator.back().mean;
            os.qv_ratio.push_back(denom > 0.0 ? os.martingale_sq.back().mean / denom : 0.0);
            os.qv_ratio_se.push_back(denom > 0.0 ? ratio_stderr(m2, qv) : 0.0);
        }
        if (cfg.predictions && cfg.params.dimension == 1) {
            const double spread = std::sqrt(st.limit.m_diff * cfg.t_end);
            const double margin = 12.0 * spread + 4.0 * largest_scaled_radius(cfg.law, cfg.params) + 0.5;
            const Grid1D g = sample_test_function(cfg.battery[k], margin, cfg.grid_h);
            for (double t : st.times) {
                os.heat_prediction.push_back(pair_with_grid(cfg.initial, cfg.params.k_density, heat_semigroup(g, t, st.limit.m_diff)));
                os.semigroup_prediction.push_back(
                    pair_with_grid(cfg.initial, cfg.params.k_density, compound_poisson_semigroup(g, t, cfg.law, cfg.params)));
            }
        }
        st.observables.push_back(std::move(os));
    }
    return st;
}

std::size_t configure_exponential_martingale(ForwardConfig& cfg, const TestFunction& phi, const LimitParams& lp) {
    if (!phi.has_antiderivatives()) throw std::invalid_argument("exponential martingale needs a d=1 test function");
    const std::size_t base = cfg.extra_antiderivatives.size();
    cfg.extra_antiderivatives.push_back(phi.antiderivative1d[0]);
    cfg.extra_antiderivatives.push_back(phi.derivative1d[1]);
    const double lo = std::isfinite(phi.extent_lo) ? phi.extent_lo : -50.0;
    const double hi = std::isfinite(phi.extent_hi) ? phi.extent_hi : 50.0;
    const ScalarFn f = phi.derivative1d[0];
    const double e = 1.0 + lp.beta;
    cfg.extra_antiderivatives.push_back(
        tabulate_antiderivative([f, e](double x) { return std::pow(std::max(f(x), 0.0), e); }, lo, hi, 4096));
    const double half_m = 0.5 * lp.m_diff, kappa = lp.kappa_generator;
    cfg.path_integrands.push_back([base, half_m, kappa](const std::vector<double>& x) {
        return (-half_m * x[base + 1] + kappa * x[base + 2]) * std::exp(-x[base]);
    });
    return cfg.path_integrands.size() - 1;
}

StatCheck exponential_martingale_test(const std::vector<ForwardResult>& paths, std::size_t integrand,
                                      std::size_t s, std::size_t t, const std::string& name) {
    Accumulator a;
    for (const auto& r : paths) {
        // Extras of integrand k start at 3k when configured by configure_exponential_martingale.
        const auto& V = r.grid_extra.at(3 * integrand);
        const auto& I = r.grid_path_integral.at(integrand);
        a.add(std::exp(-V.at(t)) - std::exp(-V.at(s)) - (I.at(t) - I.at(s)));
    }
    StatCheck c;
    c.name = name;
    c.estimate = a.mean();
    c.se = a.stderr_mean();
    c.ci_lo = c.estimate - 1.959963984540054 * c.se;
    c.ci_hi = c.estimate + 1.959963984540054 * c.se;
    c.z = c.se > 0.0 ? c.estimate / c.se : (c.estimate == 0.0 ? 0.0 : INFINITY);
    c.tolerance = 3.0;
    c.pass = std::abs(c.z) < 3.0;
    return c;
}

StatReport moment_diagnostic(const std::vector<std::vector<double>>& sups, double theta, double beta,
                             double ratio_bound) {
    if (!(theta > 0.0 && theta < beta)) throw std::invalid_argument("moment_diagnostic needs θ in (0, β)");
    StatReport rep;
    rep.title = "moment_diagnostic";
    rep.tolerances["ratio_bound"] = ratio_bound;
    double lo = INFINITY, hi = 0.0;
    std::vector<double> means;
    for (std::size_t r = 0; r < sups.size(); ++r) {
        Accumulator a;
        for (double x : sups[r]) a.add(std::pow(std::max(x, 0.0), 1.0 + theta));
        means.push_back(a.mean());
        lo = std::min(lo, a.mean());
        hi = std::max(hi, a.mean());
        rep.add("sup_moment_rung_" + std::to_string(r), a.mean(), a.stderr_mean(), 0.0, 0.0, true);
    }
    bool increasing = means.size() >= 2;
    for (std::size_t r = 1; r < means.size(); ++r) increasing = increasing && means[r] > means[r - 1];
    const double ratio = lo > 0.0 ? hi / lo : INFINITY;
    rep.add("max_min_ratio", ratio, 0.0, 0.0, ratio_bound, ratio <= ratio_bound,
            increasing ? "monotone increasing across rungs" : "");
    return rep;
}

ExpRungStats exponential_rung(const ExpRungConfig& cfg) {
    ExpRungStats st;
    st.params = cfg.params;
    st.limit = limit_params_variable(cfg.params, cfg.law, cfg.beta);
    ForwardConfig fc;
    fc.params = cfg.params;
    fc.law = cfg.law;
    fc.t_end = cfg.t_end;
    fc.grid_points = cfg.grid_points;
    fc.seed = cfg.seed;
    fc.event_budget = cfg.event_budget;
    fc.track_qv = false;
    const std::size_t idx = configure_exponential_martingale(fc, cfg.phi, st.limit);
    std::vector<ForwardResult> paths(cfg.replicates);
    parallel_for(cfg.replicates, cfg.workers, [&](std::size_t i) {
        ForwardConfig c = fc;
        c.stream = i;
        ForwardResult r = run_forward(c, cfg.initial, {cfg.phi});
        r.field = Intervals1D();
        paths[i] = std::move(r);
    });
    const std::size_t last = static_cast<std::size_t>(std::max(cfg.grid_points, 1));
    st.exp_martingale = exponential_martingale_test(paths, idx, 0, last, "exp_martingale_" + cfg.phi.name);
    Accumulator lap, ev;
    for (const auto& r : paths) {
        lap.add(std::exp(-r.grid_extra[3 * idx][last]));
        st.sup_values.push_back(r.ledgers[0].sup_value);
        ev.add(static_cast<double>(r.events));
    }
    st.laplace = estimate(lap);
    st.mean_events = ev.mean();
    if (cfg.solve_v) {
        const double margin = 12.0 * std::sqrt(st.limit.m_diff * cfg.t_end) + 4.0 / cfg.params.m_space + 0.5;
        const Grid1D g = sample_test_function(cfg.phi, margin, cfg.grid_h);
        const EvolutionSolution sol = solve_v_equation(g, cfg.t_end, cfg.law, cfg.params, cfg.beta, cfg.v_options);
        st.v_prediction = std::exp(-pair_with_grid(cfg.initial, cfg.params.k_density, sol.fields.back()));
        st.duality_residual = std::abs(st.laplace.mean - st.v_prediction);
        st.richardson_gap = sol.richardson_gap;
    }
    return st;
}

namespace {

StatReport run_duality(const ExperimentSpec& spec, const std::filesystem::path& out) {
    StatReport rep;
    rep.title = "DualityTest";
    const double zmax = tolerance(spec, "z_max", 3.0);
    rep.tolerances["z_max"] = zmax;
    const Json& o = spec.options;
    const Intervals1D w0 = initial_field(o.value("initial", Json{{"period", 2.0}, {"breaks", {1.0}}, {"values", {0.8, 0.2}}}));
    const auto points = o.value("points", std::vector<double>{0.9, 1.1});
    CsvWriter csv(out / "duality.csv", {"rung", "t", "k", "forward_mean", "forward_se", "dual_mean", "dual_se", "gap",
                                        "pooled_se", "z"});
    for (std::size_t r = 0; r < spec.ladder.size(); ++r) {
        for (double t : spec.t_grid) {
            GapConfig gc;
            gc.params = spec.ladder[r];
            gc.law = spec.law;
            gc.t = t;
            gc.replicates = spec.replicates;
            gc.seed = spec.seed;
            gc.workers = spec.workers;
            gc.event_budget = spec.budget_events;
            const GapReport g = duality_gap(w0, points, gc);
            csv.cell(r).cell(t).cell(points.size()).cell(g.forward_mean).cell(g.forward_se).cell(g.dual_mean);
            csv.cell(g.dual_se).cell(g.gap).cell(g.pooled_se).cell(g.z);
            csv.end_row();
            rep.add("gap_rung" + std::to_string(r) + "_t" + format_real(t), g.gap, g.pooled_se, g.z, zmax,
                    std::abs(g.z) < zmax);
        }
    }
    return rep;
}

StatReport run_coalescence(const ExperimentSpec& spec, const std::filesystem::path& out) {
    StatReport rep;
    rep.title = "CoalescenceScan";
    const double band = tolerance(spec, "band", 2.0);
    rep.tolerances["band"] = band;
    const double T = spec.options.value("T", spec.t_grid.front());
    CsvWriter csv(out / "coalescence.csv", {"rung", "J", "M", "N", "K", "p_hat", "ci_lo", "ci_hi", "p_rb", "p_rb_se",
                                            "bound_shape_value"});
    double lo = INFINITY, hi = 0.0;
    for (std::size_t r = 0; r < spec.ladder.size(); ++r) {
        CoalescenceRung rung;
        rung.params = spec.ladder[r];
        rung.law = spec.law;
        rung.beta = spec.beta;
        if (spec.options.contains("start_radius")) rung.start_radius = spec.options.at("start_radius").get<double>();
        const CoalescenceRow row = coalescence_probability(rung, T, spec.replicates, spec.seed + r, spec.workers);
        csv.cell(r).cell(row.j).cell(row.m).cell(row.n).cell(row.k).cell(row.p_hat).cell(row.ci_lo).cell(row.ci_hi);
        csv.cell(row.p_rb).cell(row.p_rb_se).cell(row.bound_shape);
        csv.end_row();
        const double normalised = row.p_rb / row.bound_shape;
        lo = std::min(lo, normalised);
        hi = std::max(hi, normalised);
        rep.add("p_over_shape_rung" + std::to_string(r), normalised, row.p_rb_se / row.bound_shape, 0.0, 0.0, true);
    }
    rep.add("band_ratio", hi / lo, 0.0, 0.0, band, hi / lo <= band);
    return rep;
}

StatReport run_forward_ladder(const ExperimentSpec& spec, const std::filesystem::path& out) {
    StatReport rep;
    rep.title = "ForwardLadder";
    const double zmax = tolerance(spec, "z_max", 3.0);
    const double qlo = tolerance(spec, "qv_ratio_lo", 0.95), qhi = tolerance(spec, "qv_ratio_hi", 1.05);
    rep.tolerances = Json{{"z_max", zmax}, {"qv_ratio_lo", qlo}, {"qv_ratio_hi", qhi}};
    const Json& o = spec.options;
    ForwardRungConfig base;
    base.law = spec.law;
    base.initial = initial_field(o.value("initial", Json::object()));
    for (const auto& n : spec.battery) base.battery.push_back(battery_function(n, 1));
    base.t_end = spec.t_grid.back();
    base.grid_points = o.value("grid_points", 4);
    base.replicates = spec.replicates;
    base.seed = spec.seed;
    base.workers = spec.workers;
    base.qv_samples = o.value("qv_samples", 4);
    base.event_budget = spec.budget_events;
    base.grid_h = o.value("grid_h", 2e-3);
    CsvWriter csv(out / "forward_ladder.csv",
                  {"rung", "M", "N", "J", "K", "observable", "t", "value_mean", "value_se", "heat_prediction",
                   "semigroup_prediction", "martingale_mean", "martingale_se", "qv_ratio", "qv_ratio_se"});
    std::vector<std::vector<double>> gaps(base.battery.size());
    for (std::size_t r = 0; r < spec.ladder.size(); ++r) {
        ForwardRungConfig c = base;
        c.params = spec.ladder[r];
        c.seed = spec.seed + 1000003 * r;
        const ForwardRungStats st = forward_rung(c);
        const std::size_t last = st.times.size() - 1;
        for (std::size_t k = 0; k < st.observables.size(); ++k) {
            const auto& os = st.observables[k];
            for (std::size_t j = 0; j < st.times.size(); ++j) {
                csv.cell(r).cell(c.params.m_space).cell(c.params.n_rate).cell(c.params.j_impact).cell(c.params.k_density);
                csv.cell(os.name).cell(st.times[j]).cell(os.value[j].mean).cell(os.value[j].se);
                csv.cell(os.heat_prediction[j]).cell(os.semigroup_prediction[j]);
                csv.cell(os.martingale[j].mean).cell(os.martingale[j].se).cell(os.qv_ratio[j]).cell(os.qv_ratio_se[j]);
                csv.end_row();
            }
            gaps[k].push_back(std::abs(os.semigroup_prediction[last] - os.heat_prediction[last]));
            if (r + 1 == spec.ladder.size()) {
                const auto& M = os.martingale[last];
                const double z = M.se > 0.0 ? M.mean / M.se : 0.0;
                rep.add("martingale_mean_" + os.name, M.mean, M.se, z, zmax, std::abs(z) < zmax);
                const double q = os.qv_ratio[last];
                rep.add("qv_ratio_" + os.name, q, os.qv_ratio_se[last], 0.0, qhi, q >= qlo && q <= qhi);
            }
        }
    }
    for (std::size_t k = 0; k < gaps.size(); ++k) {
        bool decreasing = gaps[k].size() >= 2;
        for (std::size_t r = 1; r < gaps[k].size(); ++r) decreasing = decreasing && gaps[k][r] < gaps[k][r - 1];
        rep.add("heat_gap_decreasing_" + base.battery[k].name, gaps[k].empty() ? 0.0 : gaps[k].back(), 0.0, 0.0, 0.0,
                decreasing);
    }
    return rep;
}

StatReport run_exp_ladder(const ExperimentSpec& spec, const std::filesystem::path& out) {
    StatReport rep;
    rep.title = "ExponentialMartingaleLadder";
    const Json& o = spec.options;
    ExpRungConfig base;
    base.law = spec.law;
    base.beta = spec.beta;
    base.initial = initial_field(o.value("initial", Json::object()));
    base.phi = battery_function(spec.battery.front(), 1);
    base.t_end = spec.t_grid.back();
    base.replicates = spec.replicates;
    base.workers = spec.workers;
    base.event_budget = spec.budget_events;
    base.grid_h = o.value("grid_h", 2e-3);
    base.v_options.dt = o.value("v_dt", 1e-3);
    CsvWriter csv(out / "exp_martingale.csv", {"rung", "M", "N", "J", "K", "exp_mart_mean", "exp_mart_se", "z",
                                               "laplace_mean", "laplace_se", "v_prediction", "residual"});
    std::vector<double> zs, zs_se, residuals, residual_se;
    std::vector<std::vector<double>> sups;
    for (std::size_t r = 0; r < spec.ladder.size(); ++r) {
        ExpRungConfig c = base;
        c.params = spec.ladder[r];
        c.seed = spec.seed + 1000003 * r;
        const ExpRungStats st = exponential_rung(c);
        csv.cell(r).cell(c.params.m_space).cell(c.params.n_rate).cell(c.params.j_impact).cell(c.params.k_density);
        csv.cell(st.exp_martingale.estimate).cell(st.exp_martingale.se).cell(st.exp_martingale.z);
        csv.cell(st.laplace.mean).cell(st.laplace.se).cell(st.v_prediction).cell(st.duality_residual);
        csv.end_row();
        zs.push_back(std::abs(st.exp_martingale.z));
        zs_se.push_back(1.0);
        residuals.push_back(st.duality_residual);
        residual_se.push_back(st.laplace.se);
        sups.push_back(st.sup_values);
        rep.add("abs_z_rung" + std::to_string(r), zs.back(), 0.0, st.exp_martingale.z, 0.0, true);
        rep.add("residual_rung" + std::to_string(r), residuals.back(), st.laplace.se, 0.0, 0.0, true);
    }
    rep.add("z_improves", zs.empty() ? 0.0 : zs.back(), 0.0, 0.0, 0.0, ladder_improves(zs, zs_se));
    rep.add("residual_decreases", residuals.empty() ? 0.0 : residuals.back(), 0.0, 0.0, 0.0,
            ladder_improves(residuals, residual_se));
    const StatReport moments = moment_diagnostic(sups, spec.moment_exponent, spec.beta, tolerance(spec, "moment_ratio", 4.0));
    for (const auto& c : moments.checks) rep.checks.push_back(c);
    return rep;
}

StatReport run_oracle(const ExperimentSpec& spec, const std::filesystem::path& out) {
    StatReport rep;
    rep.title = "OracleCompare";
    const double zmax = tolerance(spec, "z_max", 3.0);
    rep.tolerances["z_max"] = zmax;
    const Json& o = spec.options;
    const double beta = o.value("beta", 0.5), kappa = o.value("kappa", 1.0), z0 = o.value("z0", 1.0);
    const double theta = o.value("theta", 1.0), t = o.value("t", 1.0), eps = o.value("eps", 0.01);
    const auto k_max = o.value("k_max", std::size_t{1000000});
    const CsbpReference ref =
        stable_total_mass_reference(beta, kappa, z0, theta, t, spec.replicates, eps, spec.seed, spec.workers, k_max);
    CsvWriter csv(out / "oracle.csv", {"beta", "kappa", "z0", "theta", "t", "eps", "k_max", "reference", "mc_mean",
                                       "mc_se", "z"});
    csv.cell(beta).cell(kappa).cell(z0).cell(theta).cell(t).cell(eps).cell(k_max).cell(ref.reference);
    csv.cell(ref.mc.mean).cell(ref.mc.se).cell(ref.z);
    csv.end_row();
    rep.add("stable_laplace", ref.mc.mean, ref.mc.se, ref.z, zmax, std::abs(ref.z) < zmax);
    return rep;
}

StatReport run_analytic(const ExperimentSpec& spec, const std::filesystem::path& out) {
    StatReport rep;
    rep.title = "AnalyticChecks";
    const double tol = tolerance(spec, "kappa0_abs", 1e-6);
    rep.tolerances["kappa0_abs"] = tol;
    CsvWriter csv(out / "analytic.csv", {"check", "parameter", "value", "reference", "error"});
    for (double b : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        const double k0 = stable_exponent_integral(b);
        const double ref = std::tgamma(1.0 - b) / (b * (b + 1.0));
        csv.cell("kappa0").cell(b).cell(k0).cell(ref).cell(std::abs(k0 - ref));
        csv.end_row();
        rep.add("kappa0_beta_" + format_real(b), k0, 0.0, 0.0, tol, std::abs(k0 - ref) <= tol);
    }
    const DawsonReport dr = dawson_inequalities(geometric_grid(1e-8, 1e3, 2000), spec.beta < 1.0 ? spec.beta : 0.5);
    csv.cell("dawson_c1").cell(spec.beta).cell(dr.c1).cell(0.43).cell(0.0);
    csv.end_row();
    rep.add("dawson_violations", dr.violations_a + dr.violations_c, 0.0, 0.0, 0.0, dr.ok());
    rep.add("dawson_c1", dr.c1, 0.0, 0.0, 0.43, dr.c1 >= 0.43);
    const Grid1D g = Grid1D::sample([](double x) { return std::exp(-0.5 * x * x / 0.04) / std::sqrt(2.0 * M_PI * 0.04); },
                                    -4.0, 4.0, 1e-3);
    const Grid1D h = heat_semigroup(g, 0.5, 0.2);
    double err = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = h.x(i);
        err = std::max(err, std::abs(h.values[i] - std::exp(-0.5 * x * x / 0.14) / std::sqrt(2.0 * M_PI * 0.14)));
    }
    csv.cell("heat_gaussian").cell(0.5).cell(err).cell(0.0).cell(err);
    csv.end_row();
    rep.add("heat_gaussian_sup_error", err, 0.0, 0.0, 1e-6, err <= 1e-6);
    return rep;
}

} // namespace

StatReport run_experiment(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
    spec.validate();
    std::filesystem::create_directories(out_dir);
    StatReport rep;
    try {
        switch (spec.kind) {
        case ExperimentKind::duality_test: rep = run_duality(spec, out_dir); break;
        case ExperimentKind::coalescence_scan: rep = run_coalescence(spec, out_dir); break;
        case ExperimentKind::forward_ladder: rep = run_forward_ladder(spec, out_dir); break;
        case ExperimentKind::exponential_martingale_ladder: rep = run_exp_ladder(spec, out_dir); break;
        case ExperimentKind::oracle_compare: rep = run_oracle(spec, out_dir); break;
        case ExperimentKind::analytic_checks: rep = run_analytic(spec, out_dir); break;
        }
    } catch (const std::exception& e) {
        throw std::runtime_error(to_string(spec.kind) + ": " + e.what());
    }
    for (auto& [k, v] : spec.tolerances.items()) rep.tolerances[k] = v;
    Json j = rep.to_json();
    j["kind"] = to_string(spec.kind);
    j["seed"] = spec.seed;
    j["replicates"] = spec.replicates;
    write_json(out_dir / "report.json", j);
    return rep;
}

} // namespace slfv
