#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "greenlab/polynomial.hpp"
#include "greenlab/random.hpp"

namespace greenlab {

/// Point of P^k stored as a unit vector of C^(k+1). `gauge` keeps the log
/// of the norm discarded when the point was normalized.
class ProjectivePoint {
public:
    ProjectivePoint() = default;

    /// Wraps an already unit-norm vector (checked to 1e-12).
    static ProjectivePoint from_unit(CVec coords, double gauge = 0.0);

    [[nodiscard]] const CVec& coords() const { return coords_; }
    [[nodiscard]] std::span<const Complex> span() const { return coords_; }
    [[nodiscard]] double gauge() const { return gauge_; }
    [[nodiscard]] std::size_t k_plus_1() const { return coords_.size(); }
    [[nodiscard]] int k() const { return static_cast<int>(coords_.size()) - 1; }
    [[nodiscard]] Complex operator[](std::size_t i) const { return coords_[i]; }

private:
    CVec coords_;
    double gauge_ = 0.0;
};

struct NormalizedPoint {
    ProjectivePoint point;
    double log_norm;
};

/// Overflow-safe normalization: z = exp(log_norm) * point.coords().
/// Throws std::domain_error("indeterminate projective point") when
/// |z| <= 1e-300.
NormalizedPoint normalize(std::span<const Complex> z);

/// Convenience: normalize and drop the log norm.
ProjectivePoint projective_point(std::span<const Complex> z);
ProjectivePoint projective_point(std::initializer_list<Complex> z);

/// Rescales z to unit norm in extended range and returns log|z|. Tiny
/// coordinates keep their exponent instead of flushing to zero.
double normalize_in_place(ExtVec& z);

CVec to_complex(std::span<const ExtComplex> z);
ExtVec to_ext(std::span<const Complex> z);

/// Fubini-Study distance arccos|<p,q>| in [0, pi/2], evaluated as
/// atan2(|p ^ q|, |<p,q>|) for accuracy near 0.
double fs_distance(const ProjectivePoint& p, const ProjectivePoint& q);

/// |p ^ q| for unit p, q: the sine of the FS distance.
double wedge_norm(std::span<const Complex> p, std::span<const Complex> q);

/// Uniform point of the unit sphere in C^n (normalized complex Gaussian).
CVec unit_sphere_vector(SplitMix64& rng, std::size_t n);

/// Sample `index` of the FS-uniform stream `seed` on P^k.
ProjectivePoint fs_uniform_point(std::uint64_t seed, std::uint64_t index, int k);

std::vector<ProjectivePoint> sample_fs_uniform(std::size_t count, int k, std::uint64_t seed);

/// Point of the affine chart {z_chart = 1}: affine holds the other k
/// coordinates in index order.
ProjectivePoint from_affine(std::size_t chart, std::span<const Complex> affine);

/// Affine coordinates of p in chart `chart` (z_i / z_chart, i != chart).
CVec to_affine(const ProjectivePoint& p, std::size_t chart);

/// Index of the coordinate of largest modulus (the best-conditioned chart).
std::size_t dominant_chart(std::span<const Complex> z);

/// sqrt(sum_{i in zero_set} |p_i|^2): sine of the FS distance from p to the
/// coordinate subspace {z_i = 0, i in zero_set}.
double distance_to_coordinate_subspace(const ProjectivePoint& p, std::span<const std::size_t> zero_set);

/// Orthonormal basis (k vectors) of the orthogonal complement of the unit
/// vector u, built from a Householder reflection so tiny entries of u are
/// not lost to cancellation.
std::vector<CVec> tangent_frame(std::span<const Complex> u);

/// Rejection sampler for Fubini-Study balls B_center(r). Proposals are
/// complex Gaussians (scale tan r per coordinate) in the affine chart whose
/// origin is `center` and whose axes are the tangent frame at `center`;
/// proposals with FS distance > r are rejected.
class FsBallSampler {
public:
    explicit FsBallSampler(ProjectivePoint center);

    [[nodiscard]] const ProjectivePoint& center() const { return center_; }

    /// Draws one accepted point; adds the number of proposals used.
    ProjectivePoint draw(double radius, SplitMix64& rng, std::size_t& proposals) const;

    /// Point at FS distance atan|v| from the center along the tangent offset v.
    [[nodiscard]] ProjectivePoint offset(std::span<const Complex> v) const;

private:
    ProjectivePoint center_;
    std::vector<CVec> frame_;
};

/// Writes `re_0,im_0,...,re_k,im_k` header and one row per point.
void write_points_csv(std::ostream& out, std::span<const ProjectivePoint> points);

}  // namespace greenlab
