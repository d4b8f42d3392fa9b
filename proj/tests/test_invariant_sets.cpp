#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "greenlab/invariant_sets.hpp"

using namespace greenlab;

namespace {

LiftedEndomorphism swapped_power_map(int d) {
    // Components z1^d, z0^d, z2^d.
    std::vector<HomogeneousPolynomial> comps{
        HomogeneousPolynomial(Polynomial(3, {{{0, d, 0}, 1.0}}), d),
        HomogeneousPolynomial(Polynomial(3, {{{d, 0, 0}, 1.0}}), d),
        HomogeneousPolynomial(Polynomial(3, {{{0, 0, d}, 1.0}}), d)};
    return LiftedEndomorphism(std::move(comps), true, MapFamily::Custom, "swap");
}

std::vector<CoordinateSubspace> proper_subspaces(int k) {
    std::vector<CoordinateSubspace> out;
    const auto n = static_cast<std::size_t>(k) + 1;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> z;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) z.push_back(i);
        }
        if (z.size() <= static_cast<std::size_t>(k)) out.emplace_back(z);
    }
    return out;
}

}  // namespace

TEST_CASE("coordinate subspace basics") {
    CoordinateSubspace s({2, 0});
    CHECK(s.zero_set == std::vector<std::size_t>{0, 2});
    CHECK(s.dimension(2) == 0);
    CHECK(s.inside(CoordinateSubspace({0})));
    CHECK_FALSE(CoordinateSubspace({0}).inside(s));
    CHECK(s.to_string() == "{z0=0,z2=0}");
    CHECK_THROWS_AS(CoordinateSubspace({1, 1}), std::invalid_argument);
}

TEST_CASE("power map coordinate hyperplanes and points are totally invariant") {
    const auto f1 = make_power_map(1, 2);
    auto r = check_total_invariance(f1, CoordinateSubspace({0}), 100, 1);
    CHECK(r.method == InvarianceMethod::Symbolic);
    CHECK(r.totally_invariant());

    const auto f2 = make_power_map(2, 2);
    CHECK(check_total_invariance(f2, CoordinateSubspace({0, 1}), 100, 1).totally_invariant());
    CHECK_THROWS_AS((void)check_total_invariance(f2, CoordinateSubspace({0, 1, 2}), 100, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)check_total_invariance(f2, CoordinateSubspace({3}), 100, 1), std::invalid_argument);
}

TEST_CASE("perturbed power map has no invariant coordinate hyperplane") {
    const auto f = make_perturbed_power_map(2, 2, 0.05, 1);
    auto r = check_total_invariance(f, CoordinateSubspace({0}), 200, 1);
    CHECK(r.method == InvarianceMethod::Sampled);
    CHECK(r.forward_residual > 1e-3);
    CHECK_FALSE(r.totally_invariant());
    CHECK_FALSE(r.backward_tested);
}

TEST_CASE("symbolic and sampled paths agree on monomial maps") {
    std::vector<LiftedEndomorphism> maps;
    maps.push_back(make_power_map(2, 2));
    maps.push_back(make_power_map(3, 3));
    maps.push_back(swapped_power_map(2));
    for (const auto& f : maps) {
        CAPTURE(f.id());
        for (const auto& s : proper_subspaces(f.k())) {
            CAPTURE(s.to_string());
            auto sym = check_total_invariance(f, s, 100, 3);
            auto smp = check_total_invariance(f, s, 100, 3, true);
            CHECK(smp.method == InvarianceMethod::Sampled);
            CHECK(sym.forward_invariant == smp.forward_invariant);
            CHECK(sym.forward_invariant == (smp.forward_residual < 1e-10));
            CHECK(sym.backward_invariant == smp.backward_invariant);
        }
    }
}

TEST_CASE("restricted topological degree is d^p") {
    const auto f = make_power_map(2, 2);
    auto line = restricted_topological_degree(f, CoordinateSubspace({0}), 100, 7, PreimageSolver::PowerMap);
    CHECK(line.expected == 2);
    CHECK(line.histogram.size() == 1);
    CHECK(line.histogram[2] == 100);

    auto point = restricted_topological_degree(f, CoordinateSubspace({0, 1}), 20, 7, PreimageSolver::PowerMap);
    CHECK(point.expected == 1);
    CHECK(point.histogram[1] == 20);

    auto ambient = restricted_topological_degree(f, CoordinateSubspace{}, 100, 7, PreimageSolver::PowerMap);
    CHECK(ambient.expected == 4);
    CHECK(ambient.histogram[4] == 100);

    // Coordinatewise root count on P^3 with d = 3.
    auto cubic = restricted_topological_degree(make_power_map(3, 3), CoordinateSubspace({1}), 30, 7, PreimageSolver::PowerMap);
    CHECK(cubic.histogram[9] == 30);
}

TEST_CASE("enumeration of invariant coordinate subspaces") {
    auto p1 = enumerate_invariant_coordinate_subspaces(make_power_map(1, 2), 1);
    REQUIRE(p1.size() == 2);
    for (const auto& e : p1) {
        CHECK(e.report.totally_invariant());
        CHECK(e.minimal);
    }

    auto p2 = enumerate_invariant_coordinate_subspaces(make_power_map(2, 2), 2);
    CHECK(p2.size() == 6);
    std::size_t minimal = 0;
    for (const auto& e : p2) {
        CHECK(e.report.totally_invariant());
        if (e.minimal) {
            ++minimal;
            CHECK(e.report.subspace.zero_set.size() == 2);
        }
    }
    CHECK(minimal == 3);

    // Coordinates 0 and 1 swapped: invariant iff the zero set is swap-stable.
    auto swap = enumerate_invariant_coordinate_subspaces(swapped_power_map(2), 2);
    for (const auto& e : swap) {
        const auto& z = e.report.subspace.zero_set;
        const bool stable = z == std::vector<std::size_t>{2} || z == std::vector<std::size_t>{0, 1};
        CHECK(e.report.totally_invariant() == stable);
        CHECK(e.minimal == stable);
    }

    auto perturbed = enumerate_invariant_coordinate_subspaces(make_perturbed_power_map(2, 2, 0.05, 1), 2);
    CHECK(perturbed.size() == 6);
    for (const auto& e : perturbed) {
        CHECK_FALSE(e.report.totally_invariant());
        CHECK(e.report.forward_residual > 1e-3);
    }
}

TEST_CASE("minimal subspaces are never nested") {
    auto all = enumerate_invariant_coordinate_subspaces(make_power_map(3, 2), 3);
    for (const auto& a : all) {
        for (const auto& b : all) {
            if (a.minimal && b.minimal && a.report.subspace != b.report.subspace) {
                CHECK_FALSE(a.report.subspace.inside(b.report.subspace));
            }
        }
    }
}
