// Acceptance gate: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "greenlab/equidist.hpp"
#include "greenlab/experiments.hpp"
#include "greenlab/green.hpp"
#include "greenlab/invariant_sets.hpp"
#include "greenlab/parallel.hpp"

using namespace greenlab;
using nlohmann::json;

namespace {

// Pinned tolerances.
constexpr double kGreenTol = 1e-10;
constexpr double kInvariantHyperplaneTol = 1e-9;
constexpr double kRateTolerance = 0.25;
constexpr double kFinalOverInitial = 0.01;
constexpr double kLelongLo = 0.9, kLelongHi = 1.1, kLelongOffH = 0.05;
constexpr double kKsTol = 0.02;
constexpr double kMeasureResidualTol = 0.03;
constexpr double kForwardResidualFloor = 1e-3;
constexpr double kEnvelopeFactor = 10.0;
constexpr double kHenonInvarianceTol = 1e-6;
constexpr double kHenonPullbackFinal = 0.02;
constexpr unsigned kMainWorkers = 4;

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> csvs;  // artifacts compared by the determinism criterion

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

struct Criterion {
    int id;
    double budget_seconds;
    std::function<Outcome()> run;
};

using Table = std::vector<std::vector<std::string>>;

Table parse_csv(const std::string& text) {
    Table t;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        t.push_back(cells);
    }
    return t;
}

double num(const std::string& s) { return std::stod(s); }

const std::string& artifact(const cli::RunResult& r, const std::string& name) {
    for (const auto& a : r.artifacts) {
        if (a.name == name) return a.content;
    }
    throw std::runtime_error("missing artifact " + name);
}

std::string fmt(double x) { return cli::format_number(x); }

std::string fixed(double x, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

// ---- 1 ----------------------------------------------------------------------
Outcome power_map_green_oracle() {
    Outcome o;
    std::ostringstream csv;
    double worst_excess = -1.0, worst_bound = 0.0;
    for (int k : {1, 2}) {
        for (int d : {2, 3}) {
            const auto f = make_power_map(k, d);
            struct Row {
                double g, oracle, bound;
            };
            auto rows = parallel::map_indices<Row>(1000, [&](std::size_t i) {
                // FS-uniform direction with a random modulus: a genuine lift.
                CVec z = fs_uniform_point(100 + static_cast<std::uint64_t>(10 * k + d), i, k).coords();
                SplitMix64 rng(7, i);
                const double scale = std::exp(6.0 * rng.uniform() - 3.0);
                for (auto& c : z) c *= scale;
                double oracle = -std::numeric_limits<double>::infinity();
                for (const auto& c : z) oracle = std::max(oracle, std::log(std::abs(c)));
                const auto g = green_lift(f, z, kGreenTol);
                return Row{g.value, oracle, g.error_bound};
            });
            for (const auto& r : rows) {
                worst_excess = std::max(worst_excess, std::abs(r.g - r.oracle) - r.bound);
                worst_bound = std::max(worst_bound, r.bound);
                csv << k << ',' << d << ',' << fmt(r.g) << ',' << fmt(r.bound) << '\n';
            }
        }
    }
    o.require(worst_excess <= 0.0, "|G - max log|z_i|| <= error_bound");
    o.require(worst_bound <= kGreenTol, "error_bound <= 1e-10");
    o.note("max(|G-oracle|-bound)=" + fixed(worst_excess) + ", max bound=" + fixed(worst_bound));
    o.csvs.push_back(csv.str());
    return o;
}

// ---- 2 ----------------------------------------------------------------------
Outcome functional_equation() {
    Outcome o;
    std::ostringstream csv;
    double worst_ratio = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto f = make_perturbed_power_map(2, 2, 0.05, seed);
        auto ratios = parallel::map_indices<double>(1000, [&](std::size_t i) {
            const CVec z = fs_uniform_point(200 + seed, i, 2).coords();
            const auto g = green_lift(f, z, kGreenTol);
            const auto gf = green_lift(f, f.evaluate(z), kGreenTol);
            const double bound = std::max(g.error_bound, gf.error_bound);
            return std::abs(gf.value - f.degree() * g.value) / (3.0 * bound);
        });
        for (double r : ratios) {
            worst_ratio = std::max(worst_ratio, r);
            csv << seed << ',' << fmt(r) << '\n';
        }
    }
    o.require(worst_ratio <= 1.0, "|G o F - d G| <= 3 error_bound");
    o.note("max |G o F - dG| / (3 bound) = " + fixed(worst_ratio));
    o.csvs.push_back(csv.str());
    return o;
}

json power_config(int k, int d) { return {{"family", "power"}, {"k", k}, {"d", d}}; }

// ---- 3 ----------------------------------------------------------------------
Outcome generic_convergence() {
    Outcome o;
    double worst_rate_err = 0.0, worst_ratio = 0.0;
    for (int line = 1; line <= 5; ++line) {
        const json config{{"map", power_config(2, 2)},
                          {"pullback-converge",
                           {{"hypersurface", {{"kind", "random_line"}, {"seed", line}}}, {"samples", 10000}, {"n_list", json::array({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12})}}}};
        const auto r = cli::run_experiment("pullback-converge", config, 31);
        const auto& text = artifact(r, "pullback_converge.csv");
        o.csvs.push_back(text);
        const auto t = parse_csv(text);
        std::vector<double> mean;
        double rate = 0.0;
        for (const auto& row : t) {
            if (row[0] == "fitted_rate") rate = num(row[1]);
            else mean.push_back(num(row[1]));
        }
        for (std::size_t n = 3; n < mean.size(); ++n)
            o.require(mean[n] <= mean[n - 1], "line " + std::to_string(line) + " mean|u_n| nonincreasing at n=" + std::to_string(n));
        const double rate_err = std::abs(rate + std::log(2.0)) / std::log(2.0);
        worst_rate_err = std::max(worst_rate_err, rate_err);
        worst_ratio = std::max(worst_ratio, mean.back() / mean.front());
        o.require(rate_err <= kRateTolerance, "line " + std::to_string(line) + " fitted rate " + fixed(rate));
        o.require(mean.back() < kFinalOverInitial * mean.front(), "line " + std::to_string(line) + " final < 0.01 initial");
    }
    o.note("worst relative rate error " + fixed(worst_rate_err) + ", worst final/initial " + fixed(worst_ratio));
    return o;
}

// ---- 4 ----------------------------------------------------------------------
Outcome exceptional_nonconvergence() {
    Outcome o;
    double worst = 0.0;
    for (int index = 0; index <= 2; ++index) {
        const json config{{"map", power_config(2, 2)},
                          {"pullback-converge", {{"hypersurface", {{"kind", "coordinate"}, {"index", index}}}, {"samples", 10000}}}};
        const auto r = cli::run_experiment("pullback-converge", config, 41);
        const auto& text = artifact(r, "pullback_converge.csv");
        o.csvs.push_back(text);
        const auto t = parse_csv(text);
        const double m0 = num(t.front()[1]);
        for (const auto& row : t) {
            if (row[0] != "fitted_rate") worst = std::max(worst, std::abs(num(row[1]) - m0));
        }
    }
    o.require(worst < kInvariantHyperplaneTol, "max_n |mean|u_n| - mean|u_0|| < 1e-9");
    o.note("max deviation " + fixed(worst));
    return o;
}

// ---- 5 ----------------------------------------------------------------------
Outcome lelong_calibration() {
    Outcome o;
    auto run = [&](const json& center) {
        const json config{{"map", power_config(2, 2)},
                          {"lelong", {{"center", center}, {"hypersurface", {{"kind", "coordinate"}, {"index", 0}}}}}};
        const auto r = cli::run_experiment("lelong", config, 51);
        o.csvs.push_back(artifact(r, "lelong.csv"));
        return r.report;
    };
    const auto on = run(json::array({0.0, 1.0, 0.5}));
    const auto off = run(json::array({1.0, 0.5, 0.3}));
    const double s_on = on["slope"], s_off = off["slope"];
    o.require(s_on >= kLelongLo && s_on <= kLelongHi, "slope on H in [0.9, 1.1]");
    o.require(std::abs(s_off) <= kLelongOffH, "|slope| off H <= 0.05");
    o.require(on["convex"].get<bool>() && off["convex"].get<bool>(), "convexity diagnostic within 0.05");
    o.note("slope on H " + fixed(s_on, 4) + ", off H " + fixed(s_off, 3) + ", min second differences " +
           fixed(on["min_second_difference"].get<double>()) + " / " + fixed(off["min_second_difference"].get<double>()));
    return o;
}

// ---- 6 ----------------------------------------------------------------------
Outcome backward_orbit_dichotomy() {
    Outcome o;
    json tests = json::array();
    for (int j = 0; j < 20; ++j) {
        const double r = 2.0 + 0.1 * j, th = 2.0 * std::numbers::pi * j / 20.0;
        tests.push_back(json::array({1.0, json::array({r * std::cos(th), r * std::sin(th)})}));
    }
    const json config{{"map", power_config(1, 2)},
                      {"backward-sample", {{"a", json::array({1.0, 2.0})}, {"n", 14}, {"max_atoms", 1 << 14}, {"test_points", tests}}}};
    const auto r = cli::run_experiment("backward-sample", config, 61);
    o.csvs.push_back(artifact(r, "backward_sample.csv"));
    o.csvs.push_back(artifact(r, "measure_test.csv"));
    const double ks = r.report["ks_distance"];
    const double residual = r.report["potential_residual"];
    o.require(ks < kKsTol, "KS distance < 0.02");
    o.require(residual < kMeasureResidualTol, "potential residual < 0.03");
    o.require(r.report["excluded_test_points"].get<std::size_t>() == 0, "all 20 test points evaluated");

    bool delta = true;
    for (int n = 1; n <= 14; ++n) {
        const json c0{{"map", power_config(1, 2)}, {"backward-sample", {{"a", json::array({1.0, 0.0})}, {"n", n}}}};
        const auto r0 = cli::run_experiment("backward-sample", c0, 61);
        const auto& text = artifact(r0, "backward_sample.csv");
        o.csvs.push_back(text);
        const auto t = parse_csv(text);
        // [1:0] is affine 0 in the chart x = z1/z0.
        delta = delta && t.size() == 1 && num(t[0][2]) == 0.0 && num(t[0][3]) == 0.0 && num(t[0][4]) == 1.0;
    }
    o.require(delta, "a = 0 gives delta_0 for n = 1..14");
    o.note("KS " + fixed(ks) + ", residual " + fixed(residual));
    return o;
}

// ---- 7 ----------------------------------------------------------------------
Outcome restricted_degree() {
    Outcome o;
    const auto f = make_power_map(2, 2);
    const auto line = restricted_topological_degree(f, CoordinateSubspace({0}), 100, 71, PreimageSolver::PowerMap);
    const auto ambient = restricted_topological_degree(f, CoordinateSubspace{}, 100, 71, PreimageSolver::PowerMap);
    std::ostringstream csv;
    for (const auto& [c, n] : line.histogram) csv << "z0," << c << ',' << n << '\n';
    for (const auto& [c, n] : ambient.histogram) csv << "ambient," << c << ',' << n << '\n';
    o.csvs.push_back(csv.str());
    o.require(line.histogram.size() == 1 && line.histogram.count(2) && line.histogram.at(2) == 100, "100/100 trials give 2 on {z0=0}");
    o.require(ambient.histogram.size() == 1 && ambient.histogram.count(4) && ambient.histogram.at(4) == 100, "100/100 ambient trials give 4");
    o.note("nongeneric redraws " + std::to_string(line.nongeneric_resamples + ambient.nongeneric_resamples));
    return o;
}

// ---- 8 ----------------------------------------------------------------------
Outcome subspace_enumeration() {
    Outcome o;
    auto run = [&](const json& map) {
        const json config{{"map", map}, {"invariance-check", {{"max_codim", 2}, {"sample_count", 200}}}};
        const auto r = cli::run_experiment("invariance-check", config, 81);
        const auto& text = artifact(r, "invariance_check.csv");
        o.csvs.push_back(text);
        return parse_csv(text);
    };
    const auto power = run(power_config(2, 2));
    std::vector<std::string> minimal;
    bool all_invariant = power.size() == 6;
    for (const auto& row : power) {
        all_invariant = all_invariant && row[1] == "true" && row[2] == "true" && row[6] == "true";
        if (row[7] == "true") minimal.push_back(row[0]);
    }
    o.require(all_invariant, "all 6 proper coordinate subspaces totally invariant");
    o.require(minimal == std::vector<std::string>{"0;1", "0;2", "1;2"}, "minimal sets are the 3 coordinate points");

    const auto perturbed = run({{"family", "perturbed"}, {"k", 2}, {"d", 2}, {"epsilon", 0.05}, {"seed", 1}});
    bool none = perturbed.size() == 6;
    double smallest = std::numeric_limits<double>::infinity();
    for (const auto& row : perturbed) {
        none = none && row[1] == "false" && row[7] == "false";
        smallest = std::min(smallest, num(row[4]));
    }
    o.require(none, "perturbed map has no invariant coordinate subspace");
    o.require(smallest > kForwardResidualFloor, "forward residual > 1e-3 everywhere");
    o.note("smallest perturbed forward residual " + fixed(smallest));
    return o;
}

// ---- 9 ----------------------------------------------------------------------
Outcome contraction_shape() {
    Outcome o;
    constexpr double r = 0.1;
    const json config{{"map", power_config(1, 2)},
                      {"contraction-probe", {{"center", json::array({1.0, 2.0})}, {"r", r}, {"N", 15}}}};
    const auto res = cli::run_experiment("contraction-probe", config, 91);
    const auto& text = artifact(res, "contraction_probe.csv");
    o.csvs.push_back(text);
    double lowest = std::numeric_limits<double>::infinity();
    std::vector<double> normalized;
    for (const auto& row : parse_csv(text)) {
        if (row[0] == "c_fit" || row[0] == "stable") continue;
        normalized.push_back(num(row[3]));
        lowest = std::min(lowest, normalized.back());
    }
    o.require(normalized.size() == 16, "16 rows");
    o.require(lowest > -kEnvelopeFactor / (r * r), "normalized >= -10 r^-2");
    // c_n = -normalized r^2 over the last five rows.
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0.0;
    for (std::size_t i = normalized.size() - 5; i < normalized.size(); ++i) {
        const double c = -normalized[i] * r * r;
        lo = std::min(lo, c);
        hi = std::max(hi, c);
        mean += c / 5.0;
    }
    const double variation = (hi - lo) / std::abs(mean);
    o.require(variation < 0.2, "last-5-row variation < 20%");
    o.note("min normalized " + fixed(lowest) + ", variation " + fixed(variation));
    return o;
}

// ---- 10 ---------------------------------------------------------------------
Outcome henon() {
    Outcome o;
    const json map{{"family", "henon"}, {"a", 1.0}, {"c", 0.0}};
    const json annulus{{"r_min", 5.0}, {"r_max", 10.0}};

    const auto esc = cli::run_experiment("henon-green", {{"map", map}, {"henon-green", {{"region", annulus}, {"samples", 1000}, {"N", 200}}}}, 101);
    o.csvs.push_back(artifact(esc, "henon_green.csv"));
    const std::size_t escaped = esc.report["escaped"];
    const double inv = esc.report["max_invariance_residual"];
    o.require(escaped == 1000, "1000 escaping samples");
    o.require(inv < kHenonInvarianceTol, "|G+ o f - 2 G+| < 1e-6");

    // Real slice of the 0.5 ball: the complex ball contains escaping points.
    const json ball{{"r_min", 0.0}, {"r_max", 0.5}, {"real_slice", true}};
    const auto bnd = cli::run_experiment("henon-green", {{"map", map}, {"henon-green", {{"region", ball}, {"samples", 1000}, {"N", 200}}}}, 102);
    const auto& bt = artifact(bnd, "henon_green.csv");
    o.csvs.push_back(bt);
    bool zero = true;
    for (const auto& row : parse_csv(bt)) zero = zero && row[6] == "false" && num(row[5]) == 0.0;
    o.require(zero, "G+ flag-zero on 1000 samples in the 0.5 ball");

    auto pullback = [&](const std::string& q) {
        const auto r = cli::run_experiment(
            "henon-pullback", {{"map", map}, {"henon-pullback", {{"q", q}, {"region", annulus}, {"samples", 1000}}}}, 103);
        const auto& text = artifact(r, "henon_pullback.csv");
        o.csvs.push_back(text);
        std::vector<double> mean;
        for (const auto& row : parse_csv(text)) {
            if (row[0] != "fitted_rate") mean.push_back(num(row[1]));
        }
        return mean;
    };
    const auto qx = pullback("z0");
    bool decreasing = true;
    for (std::size_t n = 1; n < qx.size(); ++n) decreasing = decreasing && qx[n] <= qx[n - 1];
    o.require(decreasing, "Q = x residual decreasing in n");
    o.require(qx.back() < kHenonPullbackFinal, "Q = x final residual < 0.02 (got " + fixed(qx.back()) + ")");
    const auto qy = pullback("z1");
    o.note("escaped " + std::to_string(escaped) + ", invariance " + fixed(inv) + ", Q=y final residual " + fixed(qy.back()) +
           " (informational)");
    return o;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, 5.0, power_map_green_oracle},  {2, 30.0, functional_equation},      {3, 120.0, generic_convergence},
        {4, 60.0, exceptional_nonconvergence}, {5, 60.0, lelong_calibration}, {6, 60.0, backward_orbit_dichotomy},
        {7, 30.0, restricted_degree},      {8, 30.0, subspace_enumeration},     {9, 10.0, contraction_shape},
        {10, 60.0, henon}};

    int failures = 0;
    std::vector<std::vector<std::string>> first_run;
    parallel::set_workers(kMainWorkers);
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const double dt = seconds_since(t0);
        o.require(dt < c.budget_seconds, "runtime budget " + fixed(c.budget_seconds) + " s");
        if (!o.pass) ++failures;
        std::printf("CRITERION %2d %s (%.2f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", dt, o.detail.c_str());
        std::fflush(stdout);
        first_run.push_back(o.csvs);
    }

    // 11: same config twice at 4 workers, and once at 1 worker.
    const auto t0 = std::chrono::steady_clock::now();
    bool identical = true;
    std::string mismatches;
    for (unsigned workers : {kMainWorkers, 1u}) {
        parallel::set_workers(workers);
        for (std::size_t i = 0; i < criteria.size(); ++i) {
            std::vector<std::string> again;
            try {
                again = criteria[i].run().csvs;
            } catch (const std::exception&) {
            }
            if (again != first_run[i] || again.empty()) {
                identical = false;
                mismatches += " " + std::to_string(criteria[i].id) + "@workers=" + std::to_string(workers);
            }
        }
    }
    parallel::set_workers(kMainWorkers);
    if (!identical) ++failures;
    std::printf("CRITERION 11 %s (%.2f s) %s\n", identical ? "PASS" : "FAIL", seconds_since(t0),
                identical ? "CSVs bit-identical across repeat runs and workers 1 vs 4" : ("mismatch:" + mismatches).c_str());
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
