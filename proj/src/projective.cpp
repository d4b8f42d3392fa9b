#include "greenlab/projective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace greenlab {

ProjectivePoint ProjectivePoint::from_unit(CVec coords, double gauge) {
    double norm_sq = 0.0;
    for (const auto& c : coords) norm_sq += std::norm(c);
    if (coords.size() < 2 || std::abs(std::sqrt(norm_sq) - 1.0) > 1e-12) {
        throw std::invalid_argument("ProjectivePoint::from_unit: coordinates are not a unit vector of length >= 2");
    }
    ProjectivePoint p;
    p.coords_ = std::move(coords);
    p.gauge_ = gauge;
    return p;
}

NormalizedPoint normalize(std::span<const Complex> z) {
    double scale = 0.0;
    for (const auto& c : z) scale = std::max({scale, std::abs(c.real()), std::abs(c.imag())});
    if (!(scale > 1e-300)) throw std::domain_error("indeterminate projective point");
    if (!std::isfinite(scale)) throw std::domain_error("projective point with non-finite coordinates");
    double sum = 0.0;
    for (const auto& c : z) sum += std::norm(c / scale);
    const double rel = std::sqrt(sum);
    const double log_norm = std::log(scale) + std::log(rel);
    CVec coords(z.begin(), z.end());
    for (auto& c : coords) c = (c / scale) / rel;
    return {ProjectivePoint::from_unit(std::move(coords), log_norm), log_norm};
}

ProjectivePoint projective_point(std::span<const Complex> z) { return normalize(z).point; }

double normalize_in_place(ExtVec& z) {
    ExtComplex::Exponent top = std::numeric_limits<ExtComplex::Exponent>::min();
    for (const auto& c : z) {
        if (!c.is_zero()) top = std::max(top, c.exponent());
    }
    if (top == std::numeric_limits<ExtComplex::Exponent>::min()) throw std::domain_error("indeterminate projective point");
    double sum = 0.0;
    for (const auto& c : z) sum += std::norm(c.scaled_pow2(-top).to_complex());
    const double rel = std::sqrt(sum);
    const ExtComplex inv(1.0 / rel);
    for (auto& c : z) c = c.scaled_pow2(-top) * inv;
    return static_cast<double>(top) * std::numbers::ln2 + std::log(rel);
}

CVec to_complex(std::span<const ExtComplex> z) {
    CVec out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].to_complex();
    return out;
}

ExtVec to_ext(std::span<const Complex> z) { return ExtVec(z.begin(), z.end()); }

ProjectivePoint projective_point(std::initializer_list<Complex> z) {
    const CVec v(z);
    return normalize(v).point;
}

double wedge_norm(std::span<const Complex> p, std::span<const Complex> q) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i + 1; j < p.size(); ++j) sum += std::norm(p[i] * q[j] - p[j] * q[i]);
    }
    return std::sqrt(sum);
}

double fs_distance(const ProjectivePoint& p, const ProjectivePoint& q) {
    if (p.k_plus_1() != q.k_plus_1()) throw std::invalid_argument("fs_distance: dimension mismatch");
    Complex inner(0.0, 0.0);
    for (std::size_t i = 0; i < p.k_plus_1(); ++i) inner += std::conj(p[i]) * q[i];
    return std::atan2(wedge_norm(p.span(), q.span()), std::abs(inner));
}

CVec unit_sphere_vector(SplitMix64& rng, std::size_t n) {
    CVec v(n);
    double sum = 0.0;
    for (auto& c : v) {
        c = rng.complex_normal();
        sum += std::norm(c);
    }
    const double norm = std::sqrt(sum);
    for (auto& c : v) c /= norm;
    return v;
}

ProjectivePoint fs_uniform_point(std::uint64_t seed, std::uint64_t index, int k) {
    SplitMix64 rng(seed, index);
    return ProjectivePoint::from_unit(unit_sphere_vector(rng, static_cast<std::size_t>(k) + 1));
}

std::vector<ProjectivePoint> sample_fs_uniform(std::size_t count, int k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("sample_fs_uniform: k must be >= 1");
    std::vector<ProjectivePoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(fs_uniform_point(seed, i, k));
    return out;
}

ProjectivePoint from_affine(std::size_t chart, std::span<const Complex> affine) {
    CVec z;
    z.reserve(affine.size() + 1);
    for (std::size_t i = 0, j = 0; i <= affine.size(); ++i) z.push_back(i == chart ? Complex(1.0, 0.0) : affine[j++]);
    return projective_point(z);
}

CVec to_affine(const ProjectivePoint& p, std::size_t chart) {
    CVec out;
    out.reserve(p.k_plus_1() - 1);
    for (std::size_t i = 0; i < p.k_plus_1(); ++i) {
        if (i != chart) out.push_back(p[i] / p[chart]);
    }
    return out;
}

std::size_t dominant_chart(std::span<const Complex> z) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < z.size(); ++i) {
        if (std::abs(z[i]) > std::abs(z[best])) best = i;
    }
    return best;
}

double distance_to_coordinate_subspace(const ProjectivePoint& p, std::span<const std::size_t> zero_set) {
    double sum = 0.0;
    for (auto i : zero_set) sum += std::norm(p[i]);
    return std::sqrt(sum);
}

std::vector<CVec> tangent_frame(std::span<const Complex> u) {
    const std::size_t n = u.size();
    const std::size_t pivot = dominant_chart(u);
    const Complex phase = u[pivot] / std::abs(u[pivot]);
    // v = u + phase * e_pivot, H = I - 2 v v* / |v|^2 maps u to -phase e_pivot.
    CVec v(u.begin(), u.end());
    v[pivot] += phase;
    double v_norm_sq = 0.0;
    for (const auto& c : v) v_norm_sq += std::norm(c);
    std::vector<CVec> frame;
    frame.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == pivot) continue;
        CVec col(n);
        const Complex factor = -2.0 * std::conj(v[j]) / v_norm_sq;
        for (std::size_t i = 0; i < n; ++i) col[i] = factor * v[i];
        col[j] += 1.0;
        frame.push_back(std::move(col));
    }
    return frame;
}

FsBallSampler::FsBallSampler(ProjectivePoint center) : center_(std::move(center)), frame_(tangent_frame(center_.span())) {}

ProjectivePoint FsBallSampler::offset(std::span<const Complex> v) const {
    CVec z = center_.coords();
    for (std::size_t j = 0; j < frame_.size(); ++j) {
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += v[j] * frame_[j][i];
    }
    return projective_point(z);
}

ProjectivePoint FsBallSampler::draw(double radius, SplitMix64& rng, std::size_t& proposals) const {
    const double chart_radius = std::tan(radius);
    CVec v(frame_.size());
    while (true) {
        ++proposals;
        double norm_sq = 0.0;
        for (auto& c : v) {
            c = chart_radius * rng.complex_normal();
            norm_sq += std::norm(c);
        }
        if (std::sqrt(norm_sq) <= chart_radius) return offset(v);
    }
}

void write_points_csv(std::ostream& out, std::span<const ProjectivePoint> points) {
    if (points.empty()) return;
    const std::size_t n = points.front().k_plus_1();
    for (std::size_t i = 0; i < n; ++i) out << (i ? "," : "") << "re_" << i << ",im_" << i;
    out << '\n';
    char buf[64];
    for (const auto& p : points) {
        for (std::size_t i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof(buf), "%s%.17g,%.17g", i ? "," : "", p[i].real(), p[i].imag());
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace greenlab
