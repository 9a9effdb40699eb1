#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <doctest.h>

#include "slfv/harness.hpp"

using namespace slfv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "slfv_tests" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Json duality_json() {
    return Json{{"kind", "DualityTest"},
                {"ladder", {{{"N", 4.0}, {"M", 4.0}, {"J", 1.0}, {"K", 1.0}}}},
                {"law", {{"kind", "fixed"}, {"r", 1.0}, {"u", 0.8}}},
                {"t_grid", {0.5}},
                {"replicates", 2000},
                {"seed", 11},
                {"options", {{"initial", {{"period", 2.0}, {"breaks", Json::array()}, {"values", {0.3}}}},
                             {"points", {0.9, 1.1}}}}};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SLFV_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("spec parsing and validation errors") {
    CHECK_THROWS(parse_spec(Json::object()));
    CHECK_THROWS_AS(parse_spec(Json{{"kind", "Nonsense"}}), std::invalid_argument);
    Json bad_law = duality_json();
    bad_law["law"] = Json{{"kind", "gamma"}};
    CHECK_THROWS_AS(parse_spec(bad_law), std::invalid_argument);
    Json bad_rung = duality_json();
    bad_rung["ladder"][0]["N"] = -1.0;
    CHECK_THROWS_AS(parse_spec(bad_rung), std::invalid_argument);

    Json unordered = duality_json();
    unordered["ladder"].push_back(Json{{"N", 4.0}, {"M", 2.0}, {"J", 1.0}, {"K", 1.0}});
    CHECK_THROWS_AS(parse_spec(unordered).validate(), std::invalid_argument);

    Json exp = duality_json();
    exp["kind"] = "ExponentialMartingaleLadder";
    exp["law"] = Json{{"kind", "variable"}, {"alpha", 2.5}, {"gamma", 3.0}};
    exp["moment_exponent"] = 0.9;
    const ExperimentSpec s = parse_spec(exp);
    CHECK(s.beta == doctest::Approx(0.75));
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    for (auto k : {ExperimentKind::duality_test, ExperimentKind::coalescence_scan, ExperimentKind::forward_ladder,
                   ExperimentKind::exponential_martingale_ladder, ExperimentKind::oracle_compare,
                   ExperimentKind::analytic_checks})
        CHECK(experiment_kind_from_string(to_string(k)) == k);
}

TEST_CASE("ladder trend rule") {
    CHECK(ladder_improves({1.0, 0.5, 0.2}, {0.01, 0.01, 0.01}));
    CHECK(ladder_improves({1.0, 0.51, 0.52, 0.2}, {0.01, 0.01, 0.01, 0.01}));
    CHECK_FALSE(ladder_improves({1.0, 0.5, 0.9, 0.2}, {0.01, 0.01, 0.01, 0.01}));
    CHECK_FALSE(ladder_improves({0.5, 0.6}, {0.01, 0.01}));
    CHECK_FALSE(ladder_improves({1.0}, {0.01}));
    CHECK_FALSE(ladder_improves({1.0, 0.5}, {0.01}));
}

TEST_CASE("report bookkeeping") {
    StatReport rep;
    rep.title = "t";
    const auto& c = rep.add("a", 2.0, 0.5, 1.0, 3.0, true);
    CHECK(c.ci_lo == doctest::Approx(2.0 - 1.959963984540054 * 0.5));
    CHECK(c.ci_hi == doctest::Approx(2.0 + 1.959963984540054 * 0.5));
    CHECK(rep.pass());
    rep.add("b", 0.0, 0.0, 0.0, 0.0, false);
    CHECK_FALSE(rep.pass());
    const Json j = rep.to_json();
    CHECK(j.at("checks").size() == 2);
    CHECK(j.at("pass") == false);
}

TEST_CASE("duality experiment on a constant torus field is worker invariant") {
    ExperimentSpec s = parse_spec(duality_json());
    const fs::path a = scratch("duality_w1"), b = scratch("duality_w2");
    s.workers = 1;
    const StatReport ra = run_experiment(s, a);
    s.workers = 2;
    const StatReport rb = run_experiment(s, b);
    CHECK(ra.pass());
    REQUIRE(ra.checks.size() == 1);
    CHECK(ra.checks[0].estimate == rb.checks[0].estimate);
    CHECK(slurp(a / "duality.csv") == slurp(b / "duality.csv"));
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(fs::file_size(a / "duality.csv") > 0);
}

TEST_CASE("analytic experiment passes and honours tolerances") {
    ExperimentSpec s = parse_spec(Json{{"kind", "AnalyticChecks"}, {"beta", 0.5}});
    const fs::path out = scratch("analytic");
    CHECK(run_experiment(s, out).pass());
    const Json j = Json::parse(slurp(out / "report.json"));
    CHECK(j.at("kind") == "AnalyticChecks");
    CHECK(j.at("tolerances").at("kappa0_abs") == 1e-6);
    s.tolerances["kappa0_abs"] = -1.0;
    CHECK_FALSE(run_experiment(s, out).pass());
}

TEST_CASE("command-line exit codes") {
    const fs::path dir = scratch("cli");
    auto write = [&](const std::string& name, const Json& j) {
        std::ofstream(dir / name) << j.dump(2);
        return (dir / name).string();
    };
    const std::string good = write("analytic.json", Json{{"kind", "AnalyticChecks"}, {"beta", 0.5}});
    const std::string failing =
        write("failing.json", Json{{"kind", "AnalyticChecks"}, {"tolerances", {{"kappa0_abs", -1.0}}}});
    const std::string broken = write(
        "broken.json", Json{{"kind", "AnalyticChecks"}, {"ladder", {{{"N", -1.0}, {"M", 2.0}, {"J", 1.0}, {"K", 1.0}}}}});
    const std::string ladder = write("ladder.json", Json{{"kind", "ForwardLadder"},
                                                         {"ladder", {{{"N", 32.0}, {"M", 4.0}, {"J", 2.0}, {"K", 4.0}}}},
                                                         {"law", {{"kind", "fixed"}, {"r", 1.0}, {"u", 0.5}}}});
    const std::string out = (dir / "out").string();
    CHECK(run_cli("analytic --spec " + good + " --out " + out) == 0);
    CHECK(fs::exists(dir / "out" / "manifest.json"));
    CHECK(run_cli("analytic --spec " + failing + " --out " + out) == 1);
    CHECK(run_cli("analytic --spec " + broken + " --out " + out) == 2);
    CHECK(run_cli("analytic --out " + out) != 0);
    CHECK(run_cli("validate --spec " + ladder + " --out " + out) <= 1);
    CHECK(fs::exists(dir / "out" / "report.json"));
}
