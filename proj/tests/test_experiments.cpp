#include <cmath>
#include <sstream>

#include "doctest.h"
#include "greenlab/experiments.hpp"
#include "greenlab/green.hpp"
#include "greenlab/parallel.hpp"

using namespace greenlab;
using nlohmann::json;

namespace {

const std::string& artifact(const cli::RunResult& r, const std::string& name) {
    for (const auto& a : r.artifacts) {
        if (a.name == name) return a.content;
    }
    FAIL("missing artifact " << name);
    static const std::string empty;
    return empty;
}

std::string config_error_path(const std::string& kind, const json& config) {
    try {
        (void)cli::run_experiment(kind, config, 1);
    } catch (const cli::ConfigError& e) {
        return e.path();
    }
    return "";
}

}  // namespace

TEST_CASE("number formatting keeps 17 significant digits") {
    CHECK(cli::format_number(0.1) == "0.10000000000000001");
    CHECK(cli::format_number(2.0) == "2");
    CHECK(std::stod(cli::format_number(std::log(3.0))) == std::log(3.0));
}

TEST_CASE("green-grid spot value matches green_potential") {
    const json config{{"map", {{"family", "power"}, {"k", 1}, {"d", 2}}}, {"green-grid", {{"nx", 5}, {"ny", 5}}}};
    const auto r = cli::run_experiment("green-grid", config, 1);
    const auto& csv = artifact(r, "green_grid.csv");
    const auto pos = csv.find("\n0,2,0,");
    REQUIRE(pos != std::string::npos);
    std::istringstream line(csv.substr(pos + 7));
    double g = 0.0;
    line >> g;
    const auto f = make_power_map(1, 2);
    CHECK(std::abs(g - green_potential(f, projective_point({1.0, 2.0}), 1e-10).value) < 1e-9);
    CHECK(std::abs(g - (std::log(2.0) - 0.5 * std::log(5.0))) < 1e-9);

    const auto& pgm = artifact(r, "green_grid.pgm");
    CHECK(pgm.rfind("P2\n", 0) == 0);
}

TEST_CASE("validation names the offending field") {
    const json power2{{"family", "power"}, {"k", 2}, {"d", 2}};
    const json lelong{{"map", power2},
                      {"lelong", {{"r_max", 0.5}, {"center", {0, 1, 0.5}}, {"hypersurface", {{"kind", "coordinate"}, {"index", 0}}}}}};
    CHECK(config_error_path("lelong", lelong) == "lelong.r_max");

    CHECK(config_error_path("green-grid", json{{"map", {{"family", "cubic"}}}}) == "map.family");
    CHECK(config_error_path("green-grid", json{{"map", {{"family", "power"}, {"k", 0}, {"d", 2}}}}) == "map.k");
    CHECK(config_error_path("henon-green", json{{"map", power2}}) == "map.family");
    CHECK(config_error_path("pullback-converge", json{{"map", power2}, {"pullback-converge", {{"samples", 10}, {"hypersurface", {{"kind", "coordinate"}, {"index", 0}}}}}}) ==
          "pullback-converge.samples");
    CHECK(config_error_path("backward-sample", json{{"map", power2}, {"backward-sample", {{"a", {1, 0}}, {"n", 3}}}}) ==
          "backward-sample.a");
    CHECK(config_error_path("contraction-probe", json{{"map", power2}, {"contraction-probe", {{"center", {1, 0, 0}}, {"N", 30}}}}) ==
          "contraction-probe.N");
    CHECK(config_error_path("not-an-experiment", json{{"map", power2}}) == "experiment");
}

TEST_CASE("seed resolution prefers GREENLAB_SEED") {
    const json config{{"seed", 12}};
    CHECK(cli::resolve_seed(config, std::nullopt).value == 12);
    CHECK(cli::resolve_seed(config, std::nullopt).source == "config");
    const auto env = cli::resolve_seed(config, std::string("99"));
    CHECK(env.value == 99);
    CHECK(env.source == "GREENLAB_SEED");
    CHECK(cli::resolve_seed(json::object(), std::nullopt).source == "default");
    CHECK_THROWS_AS((void)cli::resolve_seed(config, std::string("-3")), cli::ConfigError);
    CHECK_THROWS_AS((void)cli::resolve_seed(json{{"seed", "x"}}, std::nullopt), cli::ConfigError);
}

TEST_CASE("pullback-converge is reproducible across runs and workers") {
    const json config{{"map", {{"family", "power"}, {"k", 2}, {"d", 2}}},
                      {"pullback-converge", {{"hypersurface", {{"kind", "random_line"}, {"seed", 3}}}, {"samples", 500}}}};
    const unsigned saved = parallel::workers();
    parallel::set_workers(1);
    const auto a = artifact(cli::run_experiment("pullback-converge", config, 5), "pullback_converge.csv");
    parallel::set_workers(4);
    const auto b = artifact(cli::run_experiment("pullback-converge", config, 5), "pullback_converge.csv");
    const auto c = artifact(cli::run_experiment("pullback-converge", config, 5), "pullback_converge.csv");
    parallel::set_workers(saved);
    CHECK(a == b);
    CHECK(b == c);
    CHECK(a != artifact(cli::run_experiment("pullback-converge", config, 6), "pullback_converge.csv"));
}

TEST_CASE("degenerate Henon pullback exits normally with a flag") {
    const json config{{"map", {{"family", "henon"}, {"a", 1}, {"c", 0}}},
                      {"henon-pullback", {{"q", "z1"}, {"samples", 50}, {"region", {{"r_max", 0.5}, {"real_slice", true}}}}}};
    const auto r = cli::run_experiment("henon-pullback", config, 1);
    CHECK(r.report["degenerate"].get<bool>());
    CHECK(r.report["escaping_samples"].get<std::size_t>() == 0);
}
