#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "slfv/harness.hpp"

using namespace slfv;

namespace {

struct Common {
    std::string spec_path;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::optional<int> workers;
    std::optional<double> budget;
};

Json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spec file " + path);
    return Json::parse(in);
}

ExperimentSpec load_spec(const Common& c, std::optional<ExperimentKind> kind) {
    Json j = load_json(c.spec_path);
    if (kind) j["kind"] = to_string(*kind);
    ExperimentSpec s = parse_spec(j);
    if (c.seed) s.seed = *c.seed;
    if (c.workers) s.workers = *c.workers;
    if (c.budget) s.budget_events = *c.budget;
    return s;
}

void add_common(CLI::App* app, Common& c) {
    app->add_option("--spec", c.spec_path, "experiment spec (JSON)")->required()->check(CLI::ExistingFile);
    app->add_option("--seed", c.seed, "master seed");
    app->add_option("--out", c.out, "output directory");
    app->add_option("--workers", c.workers, "replicate worker threads");
    app->add_option("--budget-events", c.budget, "expected event budget per path");
}

int run(const Common& c, ExperimentKind kind) {
    const ExperimentSpec s = load_spec(c, kind);
    std::ifstream in(c.spec_path);
    std::stringstream text;
    text << in.rdbuf();
    const StatReport rep = run_experiment(s, c.out);
    Json manifest{{"spec", c.spec_path}, {"spec_hash", content_hash(text.str())}, {"seed", s.seed},
                  {"workers", s.workers}, {"pass", rep.pass()}};
    write_json(std::filesystem::path(c.out) / "manifest.json", manifest);
    for (const auto& ch : rep.checks)
        std::cout << (ch.pass ? "PASS " : "FAIL ") << ch.name << " estimate=" << format_real(ch.estimate)
                  << " se=" << format_real(ch.se) << " z=" << format_real(ch.z) << '\n';
    return rep.pass() ? 0 : 1;
}

int validate(const Common& c) {
    const Json j = load_json(c.spec_path);
    const ExperimentSpec s = parse_spec(j);
    s.validate();
    Json out = Json::array();
    bool ok = true;
    for (std::size_t i = 0; i < s.ladder.size(); ++i) {
        const ScalingParams& p = s.ladder[i];
        const ConditionReport rep = s.law.is_fixed() ? validate_fixed_radius_conditions(p, s.law, static_cast<int>(i))
                                                     : validate_variable_radius_conditions(p, s.law, s.beta);
        Json entries = Json::array();
        for (const auto& e : rep.entries)
            entries.push_back(Json{{"name", e.name}, {"value", e.value}, {"target", e.target}, {"ok", e.ok}});
        out.push_back(Json{{"rung", i}, {"params", to_json(p)}, {"entries", entries}, {"warnings", rep.warnings},
                           {"limit", to_json(s.law.is_fixed() ? limit_params_fixed(p, s.law)
                                                              : limit_params_variable(p, s.law, s.beta))}});
        ok = ok && rep.ok();
    }
    std::filesystem::create_directories(c.out);
    write_json(std::filesystem::path(c.out) / "report.json", Json{{"kind", "validate"}, {"pass", ok}, {"rungs", out}});
    std::cout << out.dump(2) << '\n';
    return ok ? 0 : 1;
}

int replay(const Common& c, const std::string& log_path) {
    const Json j = load_json(c.spec_path);
    const ExperimentSpec s = parse_spec(j);
    if (s.ladder.empty()) throw std::runtime_error("replay needs at least one ladder rung");
    ForwardConfig fc;
    fc.params = s.ladder.front();
    fc.law = s.law;
    fc.t_end = s.t_grid.back();
    fc.seed = c.seed.value_or(s.seed);
    fc.track_qv = false;
    const Json o = s.options.value("initial", Json::object());
    const Intervals1D w0 = o.contains("period") ? Intervals1D::torus(o.at("period").get<double>(),
                                                                     o.value("breaks", std::vector<double>{}),
                                                                     o.at("values").get<std::vector<double>>())
                                                : Intervals1D::indicator(o.value("lo", -0.5), o.value("hi", 0.5),
                                                                         o.value("value", 0.5));
    fc.period = w0.period();
    const auto events = read_event_log(log_path, fc.params.dimension);
    const ForwardResult r = replay_forward(fc, w0, {}, events);
    std::filesystem::create_directories(c.out);
    CsvWriter csv(std::filesystem::path(c.out) / "replay_field.csv", {"lo", "hi", "value"});
    const auto& w = std::get<Intervals1D>(r.field);
    for (std::size_t i = 0; i < w.pieces_count(); ++i) {
        csv.cell(w.breaks()[i]).cell(w.breaks()[i + 1]).cell(w.values()[i]);
        csv.end_row();
    }
    std::cout << "replayed " << r.events << " events\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"slfv: spatial Lambda-Fleming-Viot experiments"};
    app.require_subcommand(1);
    Common c;
    std::string log_path;
    struct Sub {
        const char* name;
        const char* help;
        std::optional<ExperimentKind> kind;
    };
    const Sub subs[] = {
        {"validate", "check scaling conditions for every rung", std::nullopt},
        {"duality", "forward/dual moment duality test", ExperimentKind::duality_test},
        {"coalescence", "two-lineage coalescence probability scan", ExperimentKind::coalescence_scan},
        {"forward-ladder", "forward martingale and heat-flow ladder", ExperimentKind::forward_ladder},
        {"exp-martingale", "exponential martingale ladder (stable branching)", ExperimentKind::exponential_martingale_ladder},
        {"oracle", "particle oracle against the stable CSBP Laplace transform", ExperimentKind::oracle_compare},
        {"analytic", "deterministic numerical checks", ExperimentKind::analytic_checks},
        {"replay", "replay a binary event log on the first ladder rung", std::nullopt},
    };
    std::vector<std::pair<CLI::App*, const Sub*>> apps;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        add_common(sub, c);
        if (std::string(s.name) == "replay") sub->add_option("--events", log_path, "event log")->required();
        apps.emplace_back(sub, &s);
    }
    CLI11_PARSE(app, argc, argv);
    try {
        for (const auto& [sub, s] : apps) {
            if (!sub->parsed()) continue;
            const std::string name = s->name;
            if (name == "validate") return validate(c);
            if (name == "replay") return replay(c, log_path);
            return run(c, *s->kind);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
