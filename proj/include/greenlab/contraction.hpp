#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "greenlab/maps.hpp"
#include "greenlab/projective.hpp"

namespace greenlab {

inline constexpr double kSigmaFloor = 1e-12;

struct ContractionRow {
    int n = 0;
    /// ESTIMATE of log r_n: log r + sum_{i<n} log max(sigma_min(Df at x_i), 1e-12).
    double log_rn_estimate = 0.0;
    /// log r + log sigma_min(D(f^n) at x) from the product of step differentials.
    double log_sigma_min_product = 0.0;
    /// log_sigma_min_product / d^n.
    double normalized = 0.0;
    /// Some step up to and including x_n had sigma_min below the floor.
    bool flagged = false;
};

struct ContractionProbeReport {
    ProjectivePoint center;
    double r = 0.0;
    std::vector<ContractionRow> rows;
    /// -normalized * r^(2k) at the last row; the envelope is -c_fit r^(-2k).
    double c_fit = 0.0;
    /// c_fit varies by less than 20% over the last 5 rows.
    bool stable = false;
};

/// Differential of the induced map of P^k at [u] in Fubini-Study orthonormal
/// tangent frames at [u] and [F(u)], as a row-major k x k matrix in extended range.
ExtVec projective_differential(const LiftedEndomorphism& f, std::span<const ExtComplex> u);

/// log of the smallest singular value of a row-major k x k extended-range
/// matrix; -inf for a singular matrix.
double log_sigma_min(std::span<const ExtComplex> m, int k);

/// First-order inradius proxy for f^n(B_x(r)) along the orbit of x, n = 0..N.
/// The orbit and the step matrices run in extended range, so superattracting
/// orbits do not underflow. Rows where the product is singular fall back to
/// the floored per-step sum.
ContractionProbeReport orbit_inradius_estimate(const LiftedEndomorphism& f, const ProjectivePoint& x, double r, int n_max);

struct VolumeRow {
    int n = 0;
    double volume = 0.0;
    std::size_t occupied_cells = 0;
    double h = 0.0;
    double normalized_log_volume = 0.0;  // log(volume) / d^n
    /// -log(volume) * vol_Z / d^n, the constant in exp(-C vol_Z^-1 d^n).
    double c_n = 0.0;
    bool feasible = false;
};

struct VolumeProbeReport {
    double source_volume = 0.0;
    std::vector<VolumeRow> rows;
    /// max of c_n over n in {1, 2}.
    double fitted_c = 0.0;
    /// Non-empty when the grid was coarsened to respect the memory cap.
    std::string annotation;
};

inline constexpr std::size_t kDefaultCellCap = std::size_t{1} << 22;

/// Pushes the sample cloud forward n = 0..n_max steps and counts occupied
/// grid cells of side h in the dominant affine chart, each weighted by the
/// FS density k!/pi^k (1+|zeta|^2)^-(k+1) at its center. When more than
/// cell_cap cells are occupied h is doubled until they fit.
VolumeProbeReport volume_image_probe(const LiftedEndomorphism& f, std::span<const ProjectivePoint> points,
                                     double source_volume, int n_max, double h = 0.01,
                                     std::size_t cell_cap = kDefaultCellCap);

/// FS-uniform points of the ball B_center(radius), drawn by inverting the
/// radial law. The ball has volume sin(radius)^(2k).
std::vector<ProjectivePoint> sample_fs_ball_uniform(const ProjectivePoint& center, double radius, std::size_t count,
                                                    std::uint64_t seed);

/// Grid volume estimate of a point cloud (the n = 0 row of the probe).
double grid_volume(std::span<const ProjectivePoint> points, double h, std::size_t* occupied = nullptr);

}  // namespace greenlab
