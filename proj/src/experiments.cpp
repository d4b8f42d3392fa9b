#include "greenlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "greenlab/contraction.hpp"
#include "greenlab/equidist.hpp"
#include "greenlab/green.hpp"
#include "greenlab/invariant_sets.hpp"
#include "greenlab/lelong.hpp"
#include "greenlab/parallel.hpp"
#include "greenlab/pullback.hpp"

namespace greenlab::cli {

using nlohmann::json;

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

const std::vector<std::string>& experiment_kinds() {
    static const std::vector<std::string> kinds{"green-grid",        "pullback-converge", "lelong",      "backward-sample",
                                                "invariance-check",  "contraction-probe", "henon-green", "henon-pullback"};
    return kinds;
}

namespace {

// Typed access to one JSON object; every error carries the dotted field path.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_null() && !j_.is_object()) throw ConfigError(path_.empty() ? "config" : path_, "expected an object");
    }

    [[nodiscard]] std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    [[nodiscard]] bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
    [[nodiscard]] const json& raw(const std::string& key) const {
        if (!has(key)) throw ConfigError(path(key), "required field is missing");
        return j_.at(key);
    }

    [[nodiscard]] double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(path(key), "required field is missing");
        }
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ConfigError(path(key), "expected a number");
        return v.get<double>();
    }

    [[nodiscard]] long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(path(key), "required field is missing");
        }
        const auto& v = j_.at(key);
        if (!v.is_number_integer()) throw ConfigError(path(key), "expected an integer");
        return v.get<long long>();
    }

    [[nodiscard]] long long integer_in(const std::string& key, long long lo, long long hi,
                                       std::optional<long long> fallback = std::nullopt) const {
        const auto v = integer(key, fallback);
        if (v < lo || v > hi)
            throw ConfigError(path(key), "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    }

    [[nodiscard]] bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
        return v.get<bool>();
    }

    [[nodiscard]] std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(path(key), "required field is missing");
        }
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ConfigError(path(key), "expected a string");
        return v.get<std::string>();
    }

    [[nodiscard]] Section child(const std::string& key) const {
        static const json kEmpty = json::object();
        return Section(has(key) ? j_.at(key) : kEmpty, path(key));
    }

private:
    json j_;
    std::string path_;
};

Complex parse_complex(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(path, "expected a number or [re, im]");
}

CVec parse_complex_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array");
    CVec out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(parse_complex(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

ProjectivePoint parse_point(const json& v, const std::string& path, int k) {
    const CVec z = parse_complex_list(v, path);
    if (z.size() != static_cast<std::size_t>(k) + 1)
        throw ConfigError(path, "expected " + std::to_string(k + 1) + " homogeneous coordinates");
    try {
        return projective_point(z);
    } catch (const std::domain_error&) {
        throw ConfigError(path, "the zero vector is not a point of P^k");
    }
}

std::vector<int> parse_n_list(const Section& s, const std::string& key, int max_n, std::vector<int> fallback) {
    if (!s.has(key)) return fallback;
    const auto& v = s.raw(key);
    if (!v.is_array() || v.empty()) throw ConfigError(s.path(key), "expected a non-empty array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) throw ConfigError(s.path(key), "expected integers");
        const auto n = e.get<long long>();
        if (n < 0 || n > max_n) throw ConfigError(s.path(key), "entries must be in [0, " + std::to_string(max_n) + "]");
        if (!out.empty() && n <= out.back()) throw ConfigError(s.path(key), "entries must be strictly increasing");
        out.push_back(static_cast<int>(n));
    }
    return out;
}

std::vector<int> range_list(int lo, int hi) {
    std::vector<int> out;
    for (int n = lo; n <= hi; ++n) out.push_back(n);
    return out;
}

double positive(const Section& s, const std::string& key, double fallback) {
    const double v = s.number(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(s.path(key), "must be positive");
    return v;
}

// ---- maps -------------------------------------------------------------------

struct MapSpec {
    std::optional<LiftedEndomorphism> endo;
    std::optional<RegularAutomorphism> henon;
};

MapSpec parse_map(const json& config) {
    const Section m(config.contains("map") ? config.at("map") : json(), "map");
    const auto family = m.string("family");
    MapSpec spec;
    try {
        if (family == "power") {
            spec.endo = make_power_map(static_cast<int>(m.integer_in("k", 1, 6)), static_cast<int>(m.integer_in("d", 2, 12)));
        } else if (family == "perturbed") {
            const double eps = m.number("epsilon");
            if (!(eps >= 0.0 && eps < 1.0)) throw ConfigError(m.path("epsilon"), "must be in [0, 1)");
            spec.endo = make_perturbed_power_map(static_cast<int>(m.integer_in("k", 1, 6)),
                                                 static_cast<int>(m.integer_in("d", 2, 12)), eps,
                                                 static_cast<std::uint64_t>(m.integer_in("seed", 0, std::numeric_limits<long long>::max(), 1)));
        } else if (family == "ueda") {
            UnivariateRational h;
            h.numerator = parse_complex_list(m.raw("numerator"), m.path("numerator"));
            if (m.has("denominator")) h.denominator = parse_complex_list(m.raw("denominator"), m.path("denominator"));
            spec.endo = make_ueda_map(h, static_cast<int>(m.integer_in("k", 1, 4)));
        } else if (family == "polynomial") {
            const auto& comps = m.raw("components");
            if (!comps.is_array() || comps.size() < 2) throw ConfigError(m.path("components"), "expected at least 2 strings");
            std::vector<HomogeneousPolynomial> polys;
            for (std::size_t i = 0; i < comps.size(); ++i) {
                const auto path = m.path("components") + "[" + std::to_string(i) + "]";
                if (!comps[i].is_string()) throw ConfigError(path, "expected a string");
                try {
                    polys.push_back(HomogeneousPolynomial::parse(comps[i].get<std::string>(), comps.size()));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(path, e.what());
                }
            }
            spec.endo = LiftedEndomorphism(std::move(polys));
        } else if (family == "henon") {
            spec.henon = make_henon(parse_complex(m.raw("a"), m.path("a")), parse_complex(m.raw("c"), m.path("c")));
        } else {
            throw ConfigError(m.path("family"), "unknown family '" + family + "'");
        }
    } catch (const NondegeneracyError& e) {
        throw ConfigError("map", e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError("map", e.what());
    }
    return spec;
}

const LiftedEndomorphism& need_endo(const MapSpec& spec) {
    if (!spec.endo) throw ConfigError("map.family", "this experiment needs an endomorphism of P^k");
    return *spec.endo;
}

const RegularAutomorphism& need_henon(const MapSpec& spec) {
    if (!spec.henon) throw ConfigError("map.family", "this experiment needs a Henon map");
    return *spec.henon;
}

HypersurfaceCurrent parse_hypersurface(const Section& s, int k) {
    const auto kind = s.string("kind");
    try {
        if (kind == "random_line")
            return HypersurfaceCurrent::random_hyperplane(k, static_cast<std::uint64_t>(s.integer_in("seed", 0, std::numeric_limits<long long>::max())));
        if (kind == "coordinate") return HypersurfaceCurrent::coordinate_hyperplane(k, static_cast<int>(s.integer_in("index", 0, k)));
        if (kind == "hyperplane") {
            const CVec c = parse_complex_list(s.raw("coefficients"), s.path("coefficients"));
            if (c.size() != static_cast<std::size_t>(k) + 1)
                throw ConfigError(s.path("coefficients"), "expected " + std::to_string(k + 1) + " coefficients");
            return HypersurfaceCurrent::hyperplane(c, s.string("id", "H"));
        }
        if (kind == "polynomial") {
            return HypersurfaceCurrent(HomogeneousPolynomial::parse(s.string("text"), static_cast<std::size_t>(k) + 1),
                                       s.string("id", "H"));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(s.path("kind"), e.what());
    }
    throw ConfigError(s.path("kind"), "unknown hypersurface kind '" + kind + "'");
}

AffineRegion parse_region(const Section& s) {
    AffineRegion r;
    r.r_min = s.number("r_min", 0.0);
    r.r_max = s.number("r_max", 1.0);
    r.real_slice = s.boolean("real_slice", false);
    if (!(r.r_min >= 0.0)) throw ConfigError(s.path("r_min"), "must be >= 0");
    if (!(r.r_max > r.r_min)) throw ConfigError(s.path("r_max"), "must exceed r_min");
    return r;
}

// ---- CSV --------------------------------------------------------------------

class Csv {
public:
    explicit Csv(const std::vector<std::string>& header) { row_strings(header); }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }
    template <typename... Cells>
    void row(const Cells&... cells) {
        std::vector<std::string> v{cell(cells)...};
        row_strings(v);
    }
    [[nodiscard]] std::string str() const { return out_.str(); }

private:
    static std::string cell(double x) { return format_number(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(std::size_t x) { return std::to_string(x); }
    static std::string cell(bool x) { return x ? "true" : "false"; }
    static std::string cell(const std::string& x) { return x; }
    static std::string cell(const char* x) { return x; }

    std::ostringstream out_;
};

std::vector<std::string> coord_header(int k) {
    std::vector<std::string> h;
    for (int i = 0; i <= k; ++i) {
        h.push_back("re_" + std::to_string(i));
        h.push_back("im_" + std::to_string(i));
    }
    return h;
}

void append_coords(std::vector<std::string>& cells, std::span<const Complex> z) {
    for (const auto& c : z) {
        cells.push_back(format_number(c.real()));
        cells.push_back(format_number(c.imag()));
    }
}

json map_report(const MapSpec& spec) {
    if (spec.endo) {
        return {{"map_id", spec.endo->id()}, {"k", spec.endo->k()}, {"degree", spec.endo->degree()}, {"c_bound", spec.endo->c_bound()}};
    }
    return {{"map_id", spec.henon->id()}, {"filtration_radius", spec.henon->filtration_radius()}, {"d_plus", spec.henon->d_plus()}};
}

// ---- experiments ------------------------------------------------------------

RunResult green_grid(const MapSpec& spec, const Section& s) {
    const auto& f = need_endo(spec);
    const int k = f.k();
    const auto chart = static_cast<std::size_t>(s.integer_in("chart", 0, k, 0));
    const auto axis = static_cast<std::size_t>(s.integer_in("axis", 0, k - 1, 0));
    auto range = [&](const std::string& key) {
        if (!s.has(key)) return std::pair{-2.0, 2.0};
        const auto& v = s.raw(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number() || !(v[0].get<double>() < v[1].get<double>()))
            throw ConfigError(s.path(key), "expected [lo, hi] with lo < hi");
        return std::pair{v[0].get<double>(), v[1].get<double>()};
    };
    const auto xr = range("x_range");
    const auto yr = range("y_range");
    const auto nx = static_cast<std::size_t>(s.integer_in("nx", 2, 4096, 101));
    const auto ny = static_cast<std::size_t>(s.integer_in("ny", 2, 4096, 101));
    const double tol = positive(s, "tol", 1e-10);
    const bool raster = s.boolean("raster", true);
    CVec base(static_cast<std::size_t>(k), 0.0);
    if (s.has("base")) {
        base = parse_complex_list(s.raw("base"), s.path("base"));
        if (base.size() != static_cast<std::size_t>(k)) throw ConfigError(s.path("base"), "expected " + std::to_string(k) + " affine coordinates");
    }

    struct Cell {
        double x, y;
        GreenValue g;
    };
    auto cells = parallel::map_indices<Cell>(nx * ny, [&](std::size_t idx) {
        const std::size_t iy = idx / nx, ix = idx % nx;
        const double x = xr.first + (xr.second - xr.first) * static_cast<double>(ix) / static_cast<double>(nx - 1);
        const double y = yr.first + (yr.second - yr.first) * static_cast<double>(iy) / static_cast<double>(ny - 1);
        CVec zeta = base;
        zeta[axis] = Complex(x, y);
        return Cell{x, y, green_potential(f, from_affine(chart, zeta), tol)};
    });

    Csv csv({"chart", "x", "y", "g_value", "error_bound"});
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t unconverged = 0;
    for (const auto& c : cells) {
        csv.row(chart, c.x, c.y, c.g.value, c.g.error_bound);
        lo = std::min(lo, c.g.value);
        hi = std::max(hi, c.g.value);
        if (!c.g.converged) ++unconverged;
    }
    RunResult r;
    r.artifacts.push_back({"green_grid.csv", csv.str()});
    if (raster) {
        std::ostringstream pgm;
        pgm << "P2\n# g over the chart slice, black = " << format_number(lo) << ", white = " << format_number(hi) << '\n'
            << nx << ' ' << ny << "\n255\n";
        const double span = hi > lo ? hi - lo : 1.0;
        for (std::size_t iy = ny; iy-- > 0;) {  // top row is the largest y
            for (std::size_t ix = 0; ix < nx; ++ix) {
                const double g = cells[iy * nx + ix].g.value;
                pgm << (ix ? (ix % 16 == 0 ? "\n" : " ") : "") << std::lround(255.0 * (g - lo) / span);
            }
            pgm << '\n';
        }
        r.artifacts.push_back({"green_grid.pgm", pgm.str()});
    }
    r.report = {{"g_min", lo}, {"g_max", hi}, {"unconverged", unconverged}};
    return r;
}

RunResult pullback_converge(const MapSpec& spec, const Section& s, std::uint64_t seed) {
    const auto& f = need_endo(spec);
    const auto h = parse_hypersurface(s.child("hypersurface"), f.k());
    const auto ns = parse_n_list(s, "n_list", 60, range_list(0, 12));
    const auto samples = static_cast<std::size_t>(s.integer_in("samples", 100, 10'000'000, 10'000));
    const double tol = positive(s, "tol", kDefaultPotentialTol);

    const auto rep = convergence_report(h, f, ns, samples, seed, tol);
    Csv csv({"n", "mean_abs_u", "max_abs_u", "clipped_count", "samples_used"});
    for (const auto& row : rep.rows) csv.row(row.n, row.mean_abs_u, row.max_abs_u, row.clipped_count, row.samples_used);
    csv.row("fitted_rate", rep.fitted_rate);
    RunResult r;
    r.artifacts.push_back({"pullback_converge.csv", csv.str()});
    r.report = {{"hypersurface_id", rep.hypersurface_id}, {"fitted_rate", rep.fitted_rate}, {"degenerate", rep.degenerate}};
    return r;
}

LelongOptions parse_lelong_options(const Section& s, std::uint64_t seed) {
    LelongOptions o;
    o.r_max = s.number("r_max", 0.1);
    if (!(o.r_max > 0.0 && o.r_max <= 0.25)) throw ConfigError(s.path("r_max"), "must be in (0, 0.25]");
    o.levels = static_cast<int>(s.integer_in("levels", 4, 40, 8));
    o.samples_per_radius = static_cast<std::size_t>(s.integer_in("samples_per_radius", 500, 10'000'000, 2000));
    o.seed = seed;
    return o;
}

RunResult lelong(const MapSpec& spec, const Section& s, std::uint64_t seed) {
    const auto& f = need_endo(spec);
    const auto h = parse_hypersurface(s.child("hypersurface"), f.k());
    const auto center = parse_point(s.raw("center"), s.path("center"), f.k());
    const int n = static_cast<int>(s.integer_in("n", 0, 30, 0));
    const auto options = parse_lelong_options(s, seed);
    const double tol = positive(s, "tol", kDefaultPotentialTol);
    const bool compare = s.boolean("compare", false);

    const Potential v = [&](const ProjectivePoint& p) {
        const auto u = pullback_potential(h, f, p, n, tol);
        return PotentialValue{u.u_n, u.clipped, u.error_bound};
    };
    const auto est = lelong_estimate(v, center, options);
    Csv csv({"log_r", "sup_u"});
    for (std::size_t j = 0; j < est.radii.size(); ++j) csv.row(std::log(est.radii[j]), est.sups[j]);
    csv.row("slope", est.slope);
    csv.row("r_squared", est.r_squared);
    RunResult r;
    r.artifacts.push_back({"lelong.csv", csv.str()});
    r.report = {{"slope", est.slope},
                {"r_squared", est.r_squared},
                {"infinite", est.infinite},
                {"convex", est.convex()},
                {"min_second_difference", est.min_second_difference},
                {"rejection_rate", est.rejection_rate}};
    if (compare) {
        const auto cmp = lelong_pullback_comparison(h, f, center, std::max(n, 1), options, tol);
        Csv c({"nu_down", "nu_up", "local_degree", "sandwich_holds", "inconclusive"});
        c.row(cmp.nu_down, cmp.nu_up, cmp.local_degree, cmp.sandwich_holds, cmp.inconclusive);
        r.artifacts.push_back({"lelong_compare.csv", c.str()});
    }
    return r;
}

RunResult backward_sample(const MapSpec& spec, const Section& s, std::uint64_t seed) {
    const auto& f = need_endo(spec);
    const int k = f.k();
    const auto a = parse_point(s.raw("a"), s.path("a"), k);
    const int n = static_cast<int>(s.integer_in("n", 1, 40));
    const auto max_atoms = static_cast<std::size_t>(s.integer_in("max_atoms", 1000, 1 << 22, static_cast<long long>(kDefaultMaxAtoms)));
    PreimageSolver solver{};
    try {
        solver = s.has("solver") ? parse_preimage_solver(s.string("solver")) : default_solver(f);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(s.path("solver"), e.what());
    }
    const double tol = positive(s, "tol", kDefaultPotentialTol);
    std::vector<ProjectivePoint> tests;
    if (s.has("test_points")) {
        const auto& tp = s.raw("test_points");
        if (!tp.is_array()) throw ConfigError(s.path("test_points"), "expected an array of points");
        for (std::size_t i = 0; i < tp.size(); ++i)
            tests.push_back(parse_point(tp[i], s.path("test_points") + "[" + std::to_string(i) + "]", k));
        if (k == 1) {
            const CVec at_infinity = f.evaluate(CVec{0.0, 1.0});
            if (std::abs(at_infinity[0]) > 1e-14 * std::abs(at_infinity[1]))
                throw ConfigError(s.path("test_points"), "k = 1 residuals need a polynomial map");
        } else if (!f.diagonal_power_structure()) {
            throw ConfigError(s.path("test_points"), "k >= 2 residuals need a power map");
        }
    }

    const auto m = backward_orbit_measure(f, a, n, max_atoms, seed, solver);
    auto header = coord_header(k);
    header.push_back("weight");
    Csv atoms(header);
    for (const auto& at : m.atoms) {
        std::vector<std::string> cells;
        append_coords(cells, at.point.coords());
        cells.push_back(format_number(at.weight));
        atoms.row_strings(cells);
    }
    RunResult r;
    r.artifacts.push_back({"backward_sample.csv", atoms.str()});
    r.report = {{"atoms", m.atoms.size()}, {"total", m.total}, {"resampled_levels", m.resampled_levels}, {"solver", to_string(solver)}};
    if (k == 1) r.report["ks_distance"] = ks_angle_distance(m);
    if (!tests.empty()) {
        const auto res = potential_residual(m, f, tests, tol);
        auto th = coord_header(k);
        th.insert(th.begin(), "index");
        th.push_back("residual");
        Csv mt(th);
        for (std::size_t i = 0; i < tests.size(); ++i) {
            std::vector<std::string> cells{std::to_string(i)};
            append_coords(cells, tests[i].coords());
            const double v = i < res.per_point.size() ? res.per_point[i] : std::numeric_limits<double>::quiet_NaN();
            cells.push_back(std::isnan(v) ? "excluded" : format_number(v));
            mt.row_strings(cells);
        }
        mt.row("max_residual", res.residual);
        r.artifacts.push_back({"measure_test.csv", mt.str()});
        r.report["potential_residual"] = res.residual;
        r.report["excluded_test_points"] = res.excluded;
    }
    return r;
}

RunResult invariance_check(const MapSpec& spec, const Section& s, std::uint64_t seed) {
    const auto& f = need_endo(spec);
    const int max_codim = static_cast<int>(s.integer_in("max_codim", 1, f.k(), f.k()));
    const auto samples = static_cast<std::size_t>(s.integer_in("sample_count", 1, 1'000'000, 200));
    const auto trials = static_cast<std::size_t>(s.integer_in("degree_trials", 0, 1'000'000, 0));

    const auto all = enumerate_invariant_coordinate_subspaces(f, max_codim, samples, seed);
    Csv csv({"indices", "forward", "backward", "method", "forward_residual", "backward_residual", "backward_tested", "minimal"});
    std::size_t minimal = 0;
    for (const auto& e : all) {
        std::string idx;
        for (auto i : e.report.subspace.zero_set) idx += (idx.empty() ? "" : ";") + std::to_string(i);
        csv.row(idx, e.report.forward_invariant, e.report.backward_invariant, std::string(to_string(e.report.method)),
                e.report.forward_residual, e.report.backward_residual, e.report.backward_tested, e.minimal);
        if (e.minimal) ++minimal;
    }
    RunResult r;
    r.artifacts.push_back({"invariance_check.csv", csv.str()});
    r.report = {{"subspaces", all.size()}, {"minimal", minimal}};
    if (trials > 0) {
        PreimageSolver solver{};
        try {
            solver = default_solver(f);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(s.path("degree_trials"), e.what());
        }
        Csv deg({"indices", "expected", "preimage_count", "trials"});
        std::vector<CoordinateSubspace> subs{CoordinateSubspace{}};
        for (const auto& e : all) {
            if (e.report.totally_invariant()) subs.push_back(e.report.subspace);
        }
        for (const auto& sub : subs) {
            const auto st = restricted_topological_degree(f, sub, trials, seed, solver);
            std::string idx;
            for (auto i : sub.zero_set) idx += (idx.empty() ? "" : ";") + std::to_string(i);
            for (const auto& [count, t] : st.histogram) deg.row(idx.empty() ? std::string("ambient") : idx, st.expected, count, t);
        }
        r.artifacts.push_back({"restricted_degree.csv", deg.str()});
    }
    return r;
}

RunResult contraction_probe(const MapSpec& spec, const Section& s, std::uint64_t seed) {
    const auto& f = need_endo(spec);
    const auto center = parse_point(s.raw("center"), s.path("center"), f.k());
    const double rad = s.number("r", 0.1);
    if (!(rad > 0.0 && rad < 0.25)) throw ConfigError(s.path("r"), "must be in (0, 0.25)");
    const int n_max = static_cast<int>(s.integer_in("N", 0, 25, 15));

    struct VolumeParams {
        ProjectivePoint center;
        double radius;
        std::size_t samples;
        int n;
        double h;
    };
    std::optional<VolumeParams> vol;
    if (s.has("volume")) {
        const auto v = s.child("volume");
        if (f.k() > 2) throw ConfigError(v.path("center"), "the volume probe needs k <= 2");
        VolumeParams p{parse_point(v.raw("center"), v.path("center"), f.k()), v.number("radius"),
                       static_cast<std::size_t>(v.integer_in("samples", 10'000, 10'000'000, 100'000)),
                       static_cast<int>(v.integer_in("n", 0, 10, 5)), positive(v, "h", 0.01)};
        if (!(p.radius > 0.0 && p.radius <= std::numbers::pi / 2)) throw ConfigError(v.path("radius"), "must be in (0, pi/2]");
        vol = p;
    }

    const auto rep = orbit_inradius_estimate(f, center, rad, n_max);
    Csv csv({"n", "log_rn_estimate", "log_sigma_min_product", "normalized", "flagged"});
    for (const auto& row : rep.rows) csv.row(row.n, row.log_rn_estimate, row.log_sigma_min_product, row.normalized, row.flagged);
    csv.row("c_fit", rep.c_fit);
    csv.row("stable", rep.stable);
    RunResult r;
    r.artifacts.push_back({"contraction_probe.csv", csv.str()});
    r.report = {{"c_fit", rep.c_fit}, {"stable", rep.stable}, {"note", "log_rn_estimate is a first-order ESTIMATE of the inradius"}};
    if (vol) {
        const auto pts = sample_fs_ball_uniform(vol->center, vol->radius, vol->samples, seed);
        const double source = std::pow(std::sin(vol->radius), 2 * f.k());
        const auto vr = volume_image_probe(f, pts, source, vol->n, vol->h);
        Csv vc({"n", "volume", "occupied_cells", "h", "normalized_log_volume", "c_n", "feasible"});
        for (const auto& row : vr.rows) vc.row(row.n, row.volume, row.occupied_cells, row.h, row.normalized_log_volume, row.c_n, row.feasible);
        r.artifacts.push_back({"volume_probe.csv", vc.str()});
        r.report["volume"] = {{"source_volume", source}, {"fitted_c", vr.fitted_c}, {"annotation", vr.annotation}};
    }
    return r;
}

RunResult henon_green(const MapSpec& spec, const Section& s, std::uint64_t seed) {
    const auto& a = need_henon(spec);
    const auto region = parse_region(s.child("region"));
    const auto samples = static_cast<std::size_t>(s.integer_in("samples", 1, 10'000'000, 1000));
    const int n_max = static_cast<int>(s.integer_in("N", 1, 100'000, 200));

    struct Row {
        CVec z;
        HenonGreenValue g;
        double invariance;
    };
    auto rows = parallel::map_indices<Row>(samples, [&](std::size_t i) {
        const CVec z = sample_affine_region(region, a.k(), seed, i);
        const auto g = henon_green_plus(a, z, n_max);
        double inv = 0.0;
        if (g.escaped) {
            const auto gf = henon_green_plus(a, a.apply(z), n_max);
            inv = std::abs(gf.value - a.d_plus() * g.value);
        }
        return Row{z, g, inv};
    });
    Csv csv({"index", "re_x", "im_x", "re_y", "im_y", "g_plus", "escaped", "escape_step", "steps", "error_bound", "invariance_residual"});
    std::size_t escaped = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& w = rows[i];
        csv.row(i, w.z[0].real(), w.z[0].imag(), w.z[1].real(), w.z[1].imag(), w.g.value, w.g.escaped, w.g.escape_step,
                w.g.steps, w.g.error_bound, w.invariance);
        if (w.g.escaped) ++escaped;
        worst = std::max(worst, w.invariance);
    }
    RunResult r;
    r.artifacts.push_back({"henon_green.csv", csv.str()});
    r.report = {{"escaped", escaped}, {"bounded_up_to_N", samples - escaped}, {"max_invariance_residual", worst}};
    return r;
}

RunResult henon_pullback(const MapSpec& spec, const Section& s, std::uint64_t seed) {
    const auto& a = need_henon(spec);
    Polynomial q;
    try {
        q = Polynomial::parse(s.string("q"), 2);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(s.path("q"), e.what());
    }
    if (q.total_degree() < 1) throw ConfigError(s.path("q"), "must be non-constant");
    const auto ns = parse_n_list(s, "n_list", 60, range_list(0, 12));
    const auto region = parse_region(s.child("region"));
    const auto samples = static_cast<std::size_t>(s.integer_in("samples", 1, 10'000'000, 1000));

    const auto rep = henon_pullback_report(a, q, ns, region, samples, seed);
    Csv csv({"n", "mean_abs_u", "max_abs_u", "clipped_count", "samples_used", "bounded_mean_abs"});
    for (const auto& row : rep.rows)
        csv.row(row.n, row.mean_abs_u, row.max_abs_u, row.clipped_count, row.samples_used, row.bounded_mean_abs);
    csv.row("fitted_rate", rep.fitted_rate);
    RunResult r;
    r.artifacts.push_back({"henon_pullback.csv", csv.str()});
    r.report = {{"escaping_samples", rep.escaping_samples},
                {"bounded_samples", rep.bounded_samples},
                {"degenerate", rep.degenerate},
                {"fitted_rate", rep.fitted_rate}};
    return r;
}

}  // namespace

ResolvedSeed resolve_seed(const json& config, const std::optional<std::string>& env_seed) {
    ResolvedSeed out;
    if (config.contains("seed")) {
        const auto& v = config.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError("seed", "expected a non-negative integer");
        out.value = v.get<std::uint64_t>();
        out.source = "config";
    }
    if (env_seed) {
        try {
            std::size_t used = 0;
            if (env_seed->empty() || (*env_seed)[0] == '-') throw std::invalid_argument("sign");
            out.value = std::stoull(*env_seed, &used);
            if (used != env_seed->size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("GREENLAB_SEED", "expected a non-negative integer");
        }
        out.source = "GREENLAB_SEED";
    }
    return out;
}

RunResult run_experiment(const std::string& kind, const json& config, std::uint64_t seed) {
    if (!config.is_object()) throw ConfigError("config", "expected a JSON object");
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) throw ConfigError("experiment", "unknown experiment '" + kind + "'");
    const auto spec = parse_map(config);
    const Section s(config.contains(kind) ? config.at(kind) : json::object(), kind);

    RunResult r;
    if (kind == "green-grid") r = green_grid(spec, s);
    else if (kind == "pullback-converge") r = pullback_converge(spec, s, seed);
    else if (kind == "lelong") r = lelong(spec, s, seed);
    else if (kind == "backward-sample") r = backward_sample(spec, s, seed);
    else if (kind == "invariance-check") r = invariance_check(spec, s, seed);
    else if (kind == "contraction-probe") r = contraction_probe(spec, s, seed);
    else if (kind == "henon-green") r = henon_green(spec, s, seed);
    else r = henon_pullback(spec, s, seed);
    r.report["map"] = map_report(spec);
    return r;
}

}  // namespace greenlab::cli
