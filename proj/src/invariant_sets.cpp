#include "greenlab/invariant_sets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "greenlab/parallel.hpp"

namespace greenlab {

CoordinateSubspace::CoordinateSubspace(std::vector<std::size_t> zeros) : zero_set(std::move(zeros)) {
    std::sort(zero_set.begin(), zero_set.end());
    if (std::adjacent_find(zero_set.begin(), zero_set.end()) != zero_set.end())
        throw std::invalid_argument("coordinate subspace: repeated index");
}

bool CoordinateSubspace::contains_index(std::size_t i) const {
    return std::binary_search(zero_set.begin(), zero_set.end(), i);
}

bool CoordinateSubspace::inside(const CoordinateSubspace& other) const {
    return std::includes(zero_set.begin(), zero_set.end(), other.zero_set.begin(), other.zero_set.end());
}

std::string CoordinateSubspace::to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < zero_set.size(); ++i) {
        if (i > 0) out += ",";
        out += "z" + std::to_string(zero_set[i]) + "=0";
    }
    return out + "}";
}

const char* to_string(InvarianceMethod m) { return m == InvarianceMethod::Symbolic ? "symbolic" : "sampled"; }

namespace {

void validate(const LiftedEndomorphism& f, const CoordinateSubspace& sub) {
    for (auto i : sub.zero_set) {
        if (i >= f.k_plus_1()) throw std::invalid_argument("coordinate subspace index out of range");
    }
    if (sub.zero_set.size() > static_cast<std::size_t>(f.k())) throw std::invalid_argument("coordinate subspace is empty");
}

// Supports of the single-monomial components.
std::vector<std::vector<std::size_t>> supports(const LiftedEndomorphism& f) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto& c : f.components()) {
        std::vector<std::size_t> s;
        const auto& e = c.terms().front().exponents;
        for (std::size_t j = 0; j < e.size(); ++j) {
            if (e[j] > 0) s.push_back(j);
        }
        out.push_back(std::move(s));
    }
    return out;
}

InvarianceReport symbolic_check(const LiftedEndomorphism& f, const CoordinateSubspace& sub) {
    const auto supp = supports(f);
    InvarianceReport r;
    r.subspace = sub;
    r.method = InvarianceMethod::Symbolic;
    auto meets = [&](std::size_t i) {
        return std::any_of(supp[i].begin(), supp[i].end(), [&](std::size_t j) { return sub.contains_index(j); });
    };
    // At a generic point of S, F_i vanishes exactly when its monomial involves a zero coordinate.
    r.forward_invariant = std::all_of(sub.zero_set.begin(), sub.zero_set.end(), meets);
    // f^-1(S) is the union over choices j_i in supp(F_i), i in Z, of {z_j = 0 : j chosen};
    // it lies in S iff every choice covers Z.
    std::vector<std::size_t> pick(sub.zero_set.size(), 0);
    bool inside = true;
    while (inside) {
        std::vector<std::size_t> chosen;
        for (std::size_t t = 0; t < pick.size(); ++t) chosen.push_back(supp[sub.zero_set[t]][pick[t]]);
        std::sort(chosen.begin(), chosen.end());
        inside = std::includes(chosen.begin(), chosen.end(), sub.zero_set.begin(), sub.zero_set.end());
        std::size_t t = 0;
        while (t < pick.size() && ++pick[t] == supp[sub.zero_set[t]].size()) pick[t++] = 0;
        if (t == pick.size()) break;
    }
    r.backward_invariant = inside;
    return r;
}

}  // namespace

ProjectivePoint sample_on_subspace(const CoordinateSubspace& sub, int k, std::uint64_t seed, std::uint64_t index) {
    const auto n = static_cast<std::size_t>(k) + 1;
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < n; ++i) {
        if (!sub.contains_index(i)) free.push_back(i);
    }
    if (free.empty()) throw std::invalid_argument("coordinate subspace is empty");
    SplitMix64 rng(seed, index);
    const CVec u = unit_sphere_vector(rng, free.size());
    CVec z(n, 0.0);
    for (std::size_t t = 0; t < free.size(); ++t) z[free[t]] = u[t];
    return ProjectivePoint::from_unit(std::move(z));
}

InvarianceReport check_total_invariance(const LiftedEndomorphism& f, const CoordinateSubspace& sub,
                                        std::size_t sample_count, std::uint64_t seed, bool force_sampled) {
    validate(f, sub);
    if (f.is_monomial() && !force_sampled) return symbolic_check(f, sub);
    if (sample_count == 0) throw std::invalid_argument("check_total_invariance: sample_count must be >= 1");

    InvarianceReport r;
    r.subspace = sub;
    r.method = InvarianceMethod::Sampled;
    r.samples = sample_count;
    const int k = f.k();
    auto forward = parallel::map_indices<double>(sample_count, [&](std::size_t i) {
        const auto p = sample_on_subspace(sub, k, seed, i);
        return distance_to_coordinate_subspace(projective_point(f.evaluate(p.coords())), sub.zero_set);
    });
    for (double v : forward) r.forward_residual = std::max(r.forward_residual, v);
    r.forward_invariant = r.forward_residual < kSampledInvarianceTol;

    PreimageSolver solver{};
    try {
        solver = default_solver(f);
    } catch (const std::invalid_argument&) {
        r.backward_tested = false;
        return r;
    }
    auto backward = parallel::map_indices<double>(sample_count, [&](std::size_t i) {
        const auto p = sample_on_subspace(sub, k, seed ^ 0xB0C4ULL, i);
        double worst = 0.0;
        for (const auto& q : preimages(f, p, solver)) worst = std::max(worst, distance_to_coordinate_subspace(q.point, sub.zero_set));
        return worst;
    });
    for (double v : backward) r.backward_residual = std::max(r.backward_residual, v);
    r.backward_invariant = r.backward_residual < kSampledInvarianceTol;
    return r;
}

DegreeStatistics restricted_topological_degree(const LiftedEndomorphism& f, const CoordinateSubspace& sub,
                                               std::size_t trial_points, std::uint64_t seed, PreimageSolver solver) {
    for (auto i : sub.zero_set) {
        if (i >= f.k_plus_1()) throw std::invalid_argument("coordinate subspace index out of range");
    }
    if (sub.zero_set.size() > static_cast<std::size_t>(f.k())) throw std::invalid_argument("coordinate subspace is empty");
    const int k = f.k();
    const int p = sub.dimension(k);
    DegreeStatistics stats;
    stats.trials = trial_points;
    stats.expected = static_cast<int>(std::lround(std::pow(f.degree(), p)));

    constexpr double kOnSubspace = 1e-8;
    constexpr double kNearMultiple = 1e-4;
    constexpr int kMaxRedraws = 16;
    struct Trial {
        int count;
        std::size_t redraws;
    };
    auto trials = parallel::map_indices<Trial>(trial_points, [&](std::size_t t) {
        Trial out{0, 0};
        for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
            const auto x = sample_on_subspace(sub, k, seed, t * kMaxRedraws + static_cast<std::size_t>(attempt));
            std::vector<ProjectivePoint> on_sub;
            for (const auto& q : preimages(f, x, solver)) {
                if (distance_to_coordinate_subspace(q.point, sub.zero_set) < kOnSubspace) on_sub.push_back(q.point);
            }
            bool nongeneric = false;
            for (std::size_t a = 0; a < on_sub.size() && !nongeneric; ++a) {
                for (std::size_t b = a + 1; b < on_sub.size(); ++b) {
                    if (fs_distance(on_sub[a], on_sub[b]) < kNearMultiple) {
                        nongeneric = true;
                        break;
                    }
                }
            }
            out.count = static_cast<int>(on_sub.size());
            if (!nongeneric) break;
            ++out.redraws;
        }
        return out;
    });
    for (const auto& t : trials) {
        ++stats.histogram[t.count];
        stats.nongeneric_resamples += t.redraws;
    }
    return stats;
}

std::vector<EnumeratedSubspace> enumerate_invariant_coordinate_subspaces(const LiftedEndomorphism& f, int max_codim,
                                                                         std::size_t sample_count, std::uint64_t seed) {
    if (max_codim < 1) throw std::invalid_argument("max_codim must be >= 1");
    const auto n = f.k_plus_1();
    const auto k = static_cast<std::size_t>(f.k());
    std::vector<EnumeratedSubspace> all;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::size_t> zeros;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (std::size_t{1} << i)) zeros.push_back(i);
        }
        if (zeros.size() > k) continue;
        all.push_back({check_total_invariance(f, CoordinateSubspace(std::move(zeros)), sample_count, seed), false});
    }
    for (auto& e : all) {
        if (!e.report.totally_invariant()) continue;
        e.minimal = std::none_of(all.begin(), all.end(), [&](const EnumeratedSubspace& other) {
            return other.report.totally_invariant() && other.report.subspace != e.report.subspace &&
                   other.report.subspace.inside(e.report.subspace);
        });
    }
    std::vector<EnumeratedSubspace> out;
    for (auto& e : all) {
        if (e.report.subspace.zero_set.size() <= static_cast<std::size_t>(max_codim)) out.push_back(std::move(e));
    }
    std::stable_sort(out.begin(), out.end(), [](const EnumeratedSubspace& a, const EnumeratedSubspace& b) {
        if (a.report.subspace.zero_set.size() != b.report.subspace.zero_set.size())
            return a.report.subspace.zero_set.size() < b.report.subspace.zero_set.size();
        return a.report.subspace.zero_set < b.report.subspace.zero_set;
    });
    return out;
}

}  // namespace greenlab
