#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "greenlab/equidist.hpp"
#include "greenlab/parallel.hpp"

using namespace greenlab;

namespace {

int total_multiplicity(const std::vector<Preimage>& ps) {
    int s = 0;
    for (const auto& p : ps) s += p.multiplicity;
    return s;
}

bool contains(const std::vector<Preimage>& ps, const ProjectivePoint& q, double tol = 1e-9) {
    return std::any_of(ps.begin(), ps.end(), [&](const Preimage& p) { return fs_distance(p.point, q) < tol; });
}

LiftedEndomorphism quadratic_polynomial(Complex c) {
    // z^2 + c homogenized: (z0^2, z1^2 + c z0^2).
    std::vector<HomogeneousPolynomial> comps{
        HomogeneousPolynomial(Polynomial(2, {{{2, 0}, 1.0}}), 2),
        HomogeneousPolynomial(Polynomial(2, {{{0, 2}, 1.0}, {{2, 0}, c}}), 2)};
    return LiftedEndomorphism(std::move(comps), false, MapFamily::Custom, "z^2+c");
}

std::vector<ProjectivePoint> circle_test_points(std::size_t count, double radius) {
    std::vector<ProjectivePoint> out;
    for (std::size_t i = 0; i < count; ++i) {
        const double r = radius * (1.0 + 0.1 * static_cast<double>(i));
        out.push_back(projective_point({1.0, std::polar(r, 0.7 + 2.0 * std::numbers::pi * i / count)}));
    }
    return out;
}

}  // namespace

TEST_CASE("binary form roots") {
    // (z1 - 2 z0)(z1 + 2 z0) = z1^2 - 4 z0^2
    auto r = binary_form_roots(CVec{-4.0, 0.0, 1.0});
    CHECK(total_multiplicity(r) == 2);
    CHECK(contains(r, projective_point({1.0, 2.0})));
    CHECK(contains(r, projective_point({1.0, -2.0})));

    // Degree deficiency: z0 * z1 has roots [1:0] and [0:1].
    auto inf = binary_form_roots(CVec{0.0, 1.0, 0.0});
    CHECK(total_multiplicity(inf) == 2);
    CHECK(contains(inf, projective_point({0.0, 1.0})));
    CHECK(contains(inf, projective_point({1.0, 0.0})));

    // Repeated root (z1 - z0)^3.
    auto triple = binary_form_roots(CVec{-1.0, 3.0, -3.0, 1.0});
    CHECK(triple.size() == 1);
    CHECK(triple.front().multiplicity == 3);

    // Huge and tiny roots: (z1 - 1e8 z0)(z1 - 1e-8 z0).
    auto spread = binary_form_roots(CVec{1.0, -(1e8 + 1e-8), 1e-0});
    CHECK(contains(spread, projective_point({1.0, 1e8}), 1e-14));
    CHECK(contains(spread, projective_point({1.0, 1e-8}), 1e-14));

    CHECK_THROWS_AS((void)binary_form_roots(CVec{0.0, 0.0}), std::domain_error);
}

TEST_CASE("power map preimages") {
    const auto f1 = make_power_map(1, 2);
    auto a = preimages(f1, projective_point({1.0, 4.0}), PreimageSolver::PowerMap);
    CHECK(total_multiplicity(a) == 2);
    CHECK(contains(a, projective_point({1.0, 2.0})));
    CHECK(contains(a, projective_point({1.0, -2.0})));
    auto a_uni = preimages(f1, projective_point({1.0, 4.0}), PreimageSolver::Univariate);
    CHECK(contains(a_uni, projective_point({1.0, 2.0})));
    CHECK(contains(a_uni, projective_point({1.0, -2.0})));

    const auto f2 = make_power_map(2, 2);
    auto b = preimages(f2, projective_point({1.0, 1.0, 1.0}), PreimageSolver::PowerMap);
    CHECK(b.size() == 4);
    for (double s1 : {1.0, -1.0}) {
        for (double s2 : {1.0, -1.0}) CHECK(contains(b, projective_point({1.0, s1, s2})));
    }

    // On an invariant line: [0:1:1] has 2 distinct preimages of multiplicity 2.
    auto c = preimages(f2, projective_point({0.0, 1.0, 1.0}), PreimageSolver::PowerMap);
    CHECK(c.size() == 2);
    CHECK(total_multiplicity(c) == 4);
    auto e = preimages(f2, projective_point({1.0, 0.0, 0.0}), PreimageSolver::PowerMap);
    CHECK(e.size() == 1);
    CHECK(e.front().multiplicity == 4);

    CHECK_THROWS_AS((void)preimages(make_perturbed_power_map(2, 2, 0.05, 1), projective_point({1.0, 1.0, 1.0}),
                                    PreimageSolver::PowerMap),
                    std::invalid_argument);
}

TEST_CASE("univariate solver on z^2 - 1") {
    const auto f = quadratic_polynomial(-1.0);
    auto r = preimages(f, projective_point({1.0, 3.0}), PreimageSolver::Univariate);
    // Quadratic formula: z^2 - 1 = 3.
    CHECK(total_multiplicity(r) == 2);
    CHECK(contains(r, projective_point({1.0, 2.0})));
    CHECK(contains(r, projective_point({1.0, -2.0})));
    // Infinity is totally invariant with multiplicity d.
    auto inf = preimages(f, projective_point({0.0, 1.0}), PreimageSolver::Univariate);
    CHECK(inf.size() == 1);
    CHECK(inf.front().multiplicity == 2);
}

TEST_CASE("solvers return d^k preimages with small residual") {
    struct Case {
        LiftedEndomorphism f;
        PreimageSolver solver;
    };
    std::vector<Case> cases;
    cases.push_back({make_perturbed_power_map(1, 3, 0.2, 5), PreimageSolver::Univariate});
    cases.push_back({make_ueda_map(UnivariateRational{{0.0, 0.0, 1.0}, {1.0}}, 1), PreimageSolver::Univariate});
    cases.push_back({make_power_map(3, 2), PreimageSolver::PowerMap});
    cases.push_back({make_ueda_map(UnivariateRational{{-1.0, 0.0, 1.0}}, 2), PreimageSolver::UedaProduct});
    cases.push_back({make_ueda_map(UnivariateRational{{0.5, 0.0, 1.0}, {1.0, 0.0, 0.3}}, 2), PreimageSolver::UedaProduct});
    cases.push_back({make_ueda_map(UnivariateRational{{0.0, 1.0, 0.0, 1.0}}, 3), PreimageSolver::UedaProduct});
    for (const auto& c : cases) {
        CAPTURE(c.f.id());
        CHECK(default_solver(c.f) == c.solver);
        const int expected = static_cast<int>(std::lround(std::pow(c.f.degree(), c.f.k())));
        for (std::uint64_t i = 0; i < 20; ++i) {
            const auto w = fs_uniform_point(41, i, c.f.k());
            auto ps = preimages(c.f, w, c.solver);
            REQUIRE(total_multiplicity(ps) == expected);
            REQUIRE(static_cast<int>(ps.size()) == expected);
            for (const auto& p : ps) {
                REQUIRE(wedge_norm(normalize(c.f.evaluate(p.point.coords())).point.coords(), w.coords()) < 1e-9);
            }
        }
    }
}

TEST_CASE("backward orbit of z^2 from affine 2 equidistributes on the circle") {
    const auto f = make_power_map(1, 2);
    auto m = backward_orbit_measure(f, projective_point({1.0, 2.0}), 14, kDefaultMaxAtoms, 1, PreimageSolver::Univariate);
    CHECK(m.atoms.size() == 16384);
    CHECK(m.resampled_levels == 0);
    CHECK(std::abs(m.total - 1.0) < 1e-9);
    CHECK(ks_angle_distance(m) < 0.02);

    auto tests = circle_test_points(20, 2.0);
    auto res = potential_residual(m, f, tests, 1e-12);
    CHECK(res.excluded == 0);
    CHECK(res.residual < 0.03);

    // Push forward returns delta_a.
    for (std::size_t i = 0; i < m.atoms.size(); i += 97) {
        CVec z = m.atoms[i].point.coords();
        for (int j = 0; j < 14; ++j) z = normalize(f.evaluate(z)).point.coords();
        REQUIRE(fs_distance(projective_point(z), projective_point({1.0, 2.0})) < 1e-6);
    }
}

TEST_CASE("exceptional point stays a Dirac mass") {
    const auto f = make_power_map(1, 2);
    for (int n : {1, 5, 14, 20}) {
        auto m = backward_orbit_measure(f, projective_point({1.0, 0.0}), n, kDefaultMaxAtoms, 1, PreimageSolver::Univariate);
        REQUIRE(m.atoms.size() == 1);
        CHECK(m.atoms.front().weight == 1.0);
        CHECK(m.atoms.front().point[1] == Complex(0.0));
    }
    // delta_0 against mu: log|t| at an interior point t = 0.3 differs from log+|t| = 0.
    auto delta = backward_orbit_measure(f, projective_point({1.0, 0.0}), 3, kDefaultMaxAtoms, 1, PreimageSolver::Univariate);
    const ProjectivePoint t[] = {projective_point({1.0, 0.3})};
    auto res = potential_residual(delta, f, t, 1e-12);
    CHECK(res.residual == doctest::Approx(-std::log(0.3)));
    CHECK(res.residual > 0.5);
}

TEST_CASE("power map k = 2 torus moments") {
    const auto f = make_power_map(2, 2);
    auto m = backward_orbit_measure(f, projective_point({1.0, 1.0, 1.0}), 6, kDefaultMaxAtoms, 1, PreimageSolver::PowerMap);
    CHECK(std::abs(m.total - 1.0) < 1e-9);
    auto res = potential_residual(m, f, {}, 1e-10);
    CHECK(res.per_point.size() == 10);
    CHECK(res.residual < 0.02);

    // Starting on the invariant line z0 = 0 the measure stays on that line.
    auto line = backward_orbit_measure(f, projective_point({0.0, 1.0, 2.0}), 5, kDefaultMaxAtoms, 1, PreimageSolver::PowerMap);
    for (const auto& a : line.atoms) REQUIRE(a.point[0] == Complex(0.0));
    CHECK(potential_residual(line, f, {}, 1e-10).residual > 0.3);
}

TEST_CASE("resampling keeps mass and is unbiased across seeds") {
    const auto f = quadratic_polynomial(-1.0);
    const auto a = projective_point({1.0, Complex(0.3, 0.2)});
    const auto tests = circle_test_points(8, 3.0);
    const std::size_t atoms = 4096;
    auto m1 = backward_orbit_measure(f, a, 16, atoms, 11, PreimageSolver::Univariate);
    auto m2 = backward_orbit_measure(f, a, 16, atoms, 12, PreimageSolver::Univariate);
    CHECK(m1.resampled_levels > 0);
    CHECK(std::abs(m1.total - 1.0) < 1e-9);
    CHECK(std::abs(m2.total - 1.0) < 1e-9);
    auto r1 = potential_residual(m1, f, tests, 1e-12);
    auto r2 = potential_residual(m2, f, tests, 1e-12);
    // Monte Carlo standard error of sum w log|t - x| from the atom spread at the first test point.
    const Complex t = tests[0][1] / tests[0][0];
    double mean = 0.0, sq = 0.0;
    for (const auto& atom : m1.atoms) {
        const double v = std::log(std::abs(t - atom.point[1] / atom.point[0]));
        mean += atom.weight * v;
        sq += atom.weight * v * v;
    }
    const double se = std::sqrt(std::max(sq - mean * mean, 0.0) / static_cast<double>(atoms));
    CHECK(std::abs(r1.per_point[0] - r2.per_point[0]) <= 3.0 * std::sqrt(2.0) * se + 1e-12);
    CHECK(r1.residual < 0.03);
}

TEST_CASE("backward orbit is deterministic and worker independent") {
    const auto f = quadratic_polynomial(Complex(-0.12, 0.75));
    const auto a = projective_point({1.0, 0.5});
    auto m1 = backward_orbit_measure(f, a, 13, 1000, 5, PreimageSolver::Univariate);
    parallel::set_workers(4);
    auto m2 = backward_orbit_measure(f, a, 13, 1000, 5, PreimageSolver::Univariate);
    parallel::set_workers(1);
    REQUIRE(m1.atoms.size() == m2.atoms.size());
    for (std::size_t i = 0; i < m1.atoms.size(); ++i) {
        REQUIRE(m1.atoms[i].point.coords() == m2.atoms[i].point.coords());
        REQUIRE(m1.atoms[i].weight == m2.atoms[i].weight);
    }
    CHECK_THROWS_AS((void)backward_orbit_measure(f, a, 0, 1000, 5, PreimageSolver::Univariate), std::invalid_argument);
    CHECK_THROWS_AS((void)backward_orbit_measure(f, a, 3, 999, 5, PreimageSolver::Univariate), std::invalid_argument);
}

TEST_CASE("local degree estimate") {
    const auto f = make_power_map(1, 2);
    CHECK(local_degree_estimate(f, projective_point({0.0, 1.0}), 1, PreimageSolver::Univariate) == 2);
    CHECK(local_degree_estimate(f, projective_point({0.0, 1.0}), 2, PreimageSolver::Univariate) == 4);
    CHECK(local_degree_estimate(f, projective_point({1.0, 1.5}), 1, PreimageSolver::Univariate) == 1);
    CHECK(local_degree_estimate(f, projective_point({1.0, 1.5}), 3, PreimageSolver::Univariate) == 1);
}
