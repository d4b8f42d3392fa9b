#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "greenlab/equidist.hpp"

namespace greenlab {

/// The linear subspace {z_i = 0 for i in zero_set} of P^k.
struct CoordinateSubspace {
    std::vector<std::size_t> zero_set;  // sorted, distinct

    CoordinateSubspace() = default;
    explicit CoordinateSubspace(std::vector<std::size_t> zeros);
    [[nodiscard]] int dimension(int k) const { return k - static_cast<int>(zero_set.size()); }
    [[nodiscard]] bool contains_index(std::size_t i) const;
    /// True when this subspace lies inside `other` (zero set is a superset).
    [[nodiscard]] bool inside(const CoordinateSubspace& other) const;
    [[nodiscard]] std::string to_string() const;
    bool operator==(const CoordinateSubspace&) const = default;
};

enum class InvarianceMethod { Symbolic, Sampled };

const char* to_string(InvarianceMethod m);

struct InvarianceReport {
    CoordinateSubspace subspace;
    bool forward_invariant = false;
    bool backward_invariant = false;
    /// False when no preimage solver applies (Sampled path only).
    bool backward_tested = true;
    InvarianceMethod method = InvarianceMethod::Symbolic;
    double forward_residual = 0.0;
    double backward_residual = 0.0;
    std::size_t samples = 0;
    [[nodiscard]] bool totally_invariant() const { return forward_invariant && backward_invariant && backward_tested; }
};

inline constexpr double kSampledInvarianceTol = 1e-10;

/// f(S) subset S and f^-1(S) subset S. Exact exponent bookkeeping for maps
/// whose components are single monomials (unless `force_sampled`); otherwise
/// residuals on FS-uniform points of S and their preimages.
InvarianceReport check_total_invariance(const LiftedEndomorphism& f, const CoordinateSubspace& sub,
                                        std::size_t sample_count, std::uint64_t seed, bool force_sampled = false);

/// FS-uniform point of the subspace S (zero outside its free coordinates).
ProjectivePoint sample_on_subspace(const CoordinateSubspace& sub, int k, std::uint64_t seed, std::uint64_t index);

struct DegreeStatistics {
    std::map<int, std::size_t> histogram;  // distinct preimage count -> trials
    std::size_t trials = 0;
    std::size_t nongeneric_resamples = 0;
    int expected = 0;  // d^p, p = dim S
};

/// Distinct preimages on S of generic points of S, for an invariant S.
/// Trials whose preimages on S include a pair closer than 1e-4 are redrawn.
DegreeStatistics restricted_topological_degree(const LiftedEndomorphism& f, const CoordinateSubspace& sub,
                                               std::size_t trial_points, std::uint64_t seed, PreimageSolver solver);

struct EnumeratedSubspace {
    InvarianceReport report;
    bool minimal = false;
};

/// All proper coordinate subspaces with 1 <= codimension <= max_codim and
/// their invariance; `minimal` marks totally invariant ones containing no
/// smaller totally invariant coordinate subspace.
std::vector<EnumeratedSubspace> enumerate_invariant_coordinate_subspaces(const LiftedEndomorphism& f, int max_codim,
                                                                         std::size_t sample_count = 200,
                                                                         std::uint64_t seed = 1);

}  // namespace greenlab
