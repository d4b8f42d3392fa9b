#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "greenlab/equidist.hpp"
#include "greenlab/pullback.hpp"

namespace greenlab {

/// A potential on P^k; clipped values mark points where it is -infinity.
using Potential = std::function<PotentialValue(const ProjectivePoint&)>;

struct LelongOptions {
    double r_max = 0.1;
    int levels = 8;
    std::size_t samples_per_radius = 2000;
    std::uint64_t seed = 1;
};

struct LelongEstimate {
    ProjectivePoint center;
    std::vector<double> radii;  // r_max * 2^-j, decreasing
    /// Sup of the potential over B_center(r). Each entry also takes the
    /// estimates of the nested smaller balls into account.
    std::vector<double> sups;
    double slope = 0.0;
    double r_squared = 0.0;
    std::size_t samples_per_radius = 0;
    double rejection_rate = 0.0;
    /// Every sample at some radius was clipped: potential -infinity near the center.
    bool infinite = false;
    /// Smallest discrete second difference of sup against log r.
    double min_second_difference = 0.0;
    [[nodiscard]] bool convex(double noise = 0.05) const { return min_second_difference >= -noise; }
};

/// nu(v, a) = lim sup_{B_a(r)} v / log r, estimated as the least-squares
/// slope of the sup against log r over the smaller half of dyadic radii.
/// 90% of the samples per radius are uniform proposals in the ball; the rest
/// search within r/10 of the best point found so far.
LelongEstimate lelong_estimate(const Potential& v, const ProjectivePoint& center, const LelongOptions& options);

struct LelongComparison {
    LelongEstimate downstairs;  // u at f^n(center)
    LelongEstimate upstairs;    // u_n at center
    double nu_down = 0.0;
    double nu_up = 0.0;  // Lelong number of u o f^n = d^n u_n
    int local_degree = 0;
    bool sandwich_holds = false;
    bool inconclusive = false;  // a fit has r^2 < 0.9
};

inline constexpr double kSandwichSlack = 0.1;

/// Compares the Lelong number of u o f^n at `center` with that of u at
/// f^n(center): delta^-k nu <= nu' <= delta nu with delta the local degree of
/// f^n at the center, checked with slack 0.1.
LelongComparison lelong_pullback_comparison(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                            const ProjectivePoint& center, int n, const LelongOptions& options,
                                            double tol = kDefaultPotentialTol);

}  // namespace greenlab
