#include "greenlab/contraction.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "greenlab/parallel.hpp"

namespace greenlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

CVec unit_double(std::span<const ExtComplex> u) {
    return normalize(to_complex(u)).point.coords();
}

struct Step {
    ExtVec matrix;  // k x k, row-major
    ExtVec image;   // unit representative of F(u)
};

Step differential_step(const LiftedEndomorphism& f, std::span<const ExtComplex> u) {
    const int k = f.k();
    const auto n = f.k_plus_1();
    ExtVec image = f.evaluate(u);
    const double log_norm = normalize_in_place(image);
    const auto source = tangent_frame(unit_double(u));
    const auto target = tangent_frame(unit_double(image));
    const ExtVec jac = f.jacobian(u);
    const ExtComplex inv_norm(std::exp(-log_norm));

    Step s;
    s.matrix.assign(static_cast<std::size_t>(k * k), ExtComplex(0.0));
    for (int b = 0; b < k; ++b) {
        // J * source_b
        ExtVec column(n, ExtComplex(0.0));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const Complex s_j = source[static_cast<std::size_t>(b)][j];
                if (s_j != Complex(0.0)) column[i] += jac[i * n + j] * ExtComplex(s_j);
            }
        }
        for (int a = 0; a < k; ++a) {
            ExtComplex acc(0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const Complex t_i = std::conj(target[static_cast<std::size_t>(a)][i]);
                if (t_i != Complex(0.0)) acc += column[i] * ExtComplex(t_i);
            }
            s.matrix[static_cast<std::size_t>(a * k + b)] = acc * inv_norm;
        }
    }
    s.image = std::move(image);
    return s;
}

ExtVec multiply(std::span<const ExtComplex> a, std::span<const ExtComplex> b, int k) {
    ExtVec out(static_cast<std::size_t>(k * k), ExtComplex(0.0));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            ExtComplex acc(0.0);
            for (int t = 0; t < k; ++t) acc += a[static_cast<std::size_t>(i * k + t)] * b[static_cast<std::size_t>(t * k + j)];
            out[static_cast<std::size_t>(i * k + j)] = acc;
        }
    }
    return out;
}

}  // namespace

ExtVec projective_differential(const LiftedEndomorphism& f, std::span<const ExtComplex> u) {
    return differential_step(f, u).matrix;
}

double log_sigma_min(std::span<const ExtComplex> m, int k) {
    if (m.size() != static_cast<std::size_t>(k * k)) throw std::invalid_argument("log_sigma_min: size mismatch");
    if (k == 1) return m[0].log_abs();
    ExtComplex::Exponent top = std::numeric_limits<ExtComplex::Exponent>::min();
    for (const auto& x : m) {
        if (!x.is_zero()) top = std::max(top, x.exponent());
    }
    if (top == std::numeric_limits<ExtComplex::Exponent>::min()) return kNegInf;
    const double shift = static_cast<double>(top) * std::numbers::ln2;
    if (k == 2) {
        const double log_det = (m[0] * m[3] - m[1] * m[2]).log_abs();
        if (std::isinf(log_det)) return kNegInf;
        double fro = 0.0;
        for (const auto& x : m) fro += std::norm(x.scaled_pow2(-top).to_complex());
        const double det_scaled = std::exp(log_det - 2.0 * shift);
        const double disc = std::max(fro * fro - 4.0 * det_scaled * det_scaled, 0.0);
        const double sigma_max_sq = 0.5 * (fro + std::sqrt(disc));
        return log_det - shift - 0.5 * std::log(sigma_max_sq);
    }
    CMatrix scaled(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) scaled(i, j) = m[static_cast<std::size_t>(i * k + j)].scaled_pow2(-top).to_complex();
    }
    Eigen::JacobiSVD<CMatrix> svd(scaled);
    const double smin = svd.singularValues()(k - 1);
    return smin > 0.0 ? std::log(smin) + shift : kNegInf;
}

ContractionProbeReport orbit_inradius_estimate(const LiftedEndomorphism& f, const ProjectivePoint& x, double r, int n_max) {
    if (!(r > 0.0 && r < 0.25)) throw std::invalid_argument("r must be in (0, 0.25)");
    if (n_max < 0 || n_max > 25) throw std::invalid_argument("N must be in [0, 25]");
    if (x.k_plus_1() != f.k_plus_1()) throw std::invalid_argument("orbit_inradius_estimate: dimension mismatch");
    const int k = f.k();
    const double d = f.degree();
    const double log_r = std::log(r);
    const double log_floor = std::log(kSigmaFloor);

    ContractionProbeReport rep;
    rep.center = x;
    rep.r = r;
    ExtVec u = to_ext(x.coords());
    ExtVec product(static_cast<std::size_t>(k * k), ExtComplex(0.0));
    for (int i = 0; i < k; ++i) product[static_cast<std::size_t>(i * k + i)] = ExtComplex(1.0);
    double floored_sum = 0.0;
    bool flagged = false;
    double scale = 1.0;  // d^-n
    for (int n = 0; n <= n_max; ++n) {
        auto step = differential_step(f, u);
        const double log_sigma = log_sigma_min(step.matrix, k);
        if (!(log_sigma >= log_floor)) flagged = true;

        ContractionRow row;
        row.n = n;
        row.flagged = flagged;
        row.log_rn_estimate = log_r + floored_sum;
        const double lp = n == 0 ? 0.0 : log_sigma_min(product, k);
        row.log_sigma_min_product = log_r + (std::isfinite(lp) ? lp : floored_sum);
        row.normalized = row.log_sigma_min_product * scale;
        rep.rows.push_back(row);

        floored_sum += std::max(log_sigma, log_floor);
        product = multiply(step.matrix, product, k);
        u = std::move(step.image);
        scale /= d;
    }

    const double r2k = std::pow(r, 2 * k);
    rep.c_fit = -rep.rows.back().normalized * r2k;
    if (rep.rows.size() >= 5) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0.0;
        for (std::size_t i = rep.rows.size() - 5; i < rep.rows.size(); ++i) {
            const double c = -rep.rows[i].normalized * r2k;
            lo = std::min(lo, c);
            hi = std::max(hi, c);
            mean += c / 5.0;
        }
        rep.stable = std::abs(mean) > 0.0 && (hi - lo) < 0.2 * std::abs(mean);
    }
    return rep;
}

std::vector<ProjectivePoint> sample_fs_ball_uniform(const ProjectivePoint& center, double radius, std::size_t count,
                                                    std::uint64_t seed) {
    if (!(radius > 0.0 && radius <= std::numbers::pi / 2)) throw std::invalid_argument("ball radius must be in (0, pi/2]");
    const int k = center.k();
    const auto frame = tangent_frame(center.coords());
    const double sin_r = std::sin(radius);
    return parallel::map_indices<ProjectivePoint>(count, [&](std::size_t i) {
        SplitMix64 rng(seed, i);
        // Distance rho from the center has CDF sin(rho)^(2k) / sin(R)^(2k).
        const double rho = std::asin(sin_r * std::pow(rng.uniform(), 1.0 / (2.0 * k)));
        const CVec dir = unit_sphere_vector(rng, static_cast<std::size_t>(k));
        CVec z = center.coords();
        for (auto& c : z) c *= std::cos(rho);
        for (int a = 0; a < k; ++a) {
            for (std::size_t j = 0; j < z.size(); ++j) z[j] += std::sin(rho) * dir[static_cast<std::size_t>(a)] * frame[static_cast<std::size_t>(a)][j];
        }
        return projective_point(z);
    });
}

double grid_volume(std::span<const ProjectivePoint> points, double h, std::size_t* occupied) {
    if (points.empty()) return 0.0;
    const int k = points.front().k();
    if (k > 2) throw std::invalid_argument("grid volume supports k <= 2");
    using Key = std::array<std::int64_t, 5>;
    std::vector<Key> keys(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto chart = dominant_chart(points[i].coords());
        const CVec zeta = to_affine(points[i], chart);
        Key key{static_cast<std::int64_t>(chart), 0, 0, 0, 0};
        for (int a = 0; a < k; ++a) {
            key[static_cast<std::size_t>(1 + 2 * a)] = static_cast<std::int64_t>(std::floor(zeta[static_cast<std::size_t>(a)].real() / h));
            key[static_cast<std::size_t>(2 + 2 * a)] = static_cast<std::int64_t>(std::floor(zeta[static_cast<std::size_t>(a)].imag() / h));
        }
        keys[i] = key;
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    if (occupied) *occupied = keys.size();

    const double factorial = k == 1 ? 1.0 : 2.0;
    const double norm = factorial / std::pow(std::numbers::pi, k);
    const double cell = std::pow(h, 2 * k);
    std::vector<double> contributions(keys.size());
    for (std::size_t c = 0; c < keys.size(); ++c) {
        double mod_sq = 0.0;
        for (int a = 0; a < 2 * k; ++a) {
            const double centre = (static_cast<double>(keys[c][static_cast<std::size_t>(1 + a)]) + 0.5) * h;
            mod_sq += centre * centre;
        }
        contributions[c] = cell * norm * std::pow(1.0 + mod_sq, -(k + 1));
    }
    return parallel::pairwise_sum(contributions);
}

VolumeProbeReport volume_image_probe(const LiftedEndomorphism& f, std::span<const ProjectivePoint> points,
                                     double source_volume, int n_max, double h, std::size_t cell_cap) {
    if (f.k() > 2) throw std::invalid_argument("volume probe supports k <= 2");
    if (n_max < 0 || n_max > 10) throw std::invalid_argument("n must be in [0, 10]");
    if (points.size() < 10000) throw std::invalid_argument("volume probe needs at least 10^4 sample points");
    if (!(h > 0.0)) throw std::invalid_argument("grid resolution h must be positive");
    if (!(source_volume > 0.0)) throw std::invalid_argument("source volume must be positive");
    if (cell_cap == 0) throw std::invalid_argument("cell cap must be positive");

    VolumeProbeReport rep;
    rep.source_volume = source_volume;
    std::vector<ProjectivePoint> cloud(points.begin(), points.end());
    const double d = f.degree();
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0) {
            cloud = parallel::map_indices<ProjectivePoint>(
                cloud.size(), [&](std::size_t i) { return projective_point(f.evaluate(cloud[i].coords())); });
        }
        VolumeRow row;
        row.n = n;
        row.h = h;
        row.volume = grid_volume(cloud, row.h, &row.occupied_cells);
        while (row.occupied_cells > cell_cap) {
            row.h *= 2.0;
            row.volume = grid_volume(cloud, row.h, &row.occupied_cells);
        }
        if (row.h != h) {
            if (!rep.annotation.empty()) rep.annotation += "; ";
            rep.annotation += "n=" + std::to_string(n) + ": grid coarsened to h=" + std::to_string(row.h) + " (cell cap)";
        }
        const double dn = std::pow(d, n);
        row.normalized_log_volume = std::log(row.volume) / dn;
        row.c_n = -std::log(row.volume) * source_volume / dn;
        rep.rows.push_back(row);
    }
    rep.fitted_c = kNegInf;
    for (const auto& row : rep.rows) {
        if (row.n == 1 || row.n == 2) rep.fitted_c = std::max(rep.fitted_c, row.c_n);
    }
    if (!std::isfinite(rep.fitted_c)) rep.fitted_c = rep.rows.front().c_n;
    for (auto& row : rep.rows) {
        row.feasible = row.volume >= std::exp(-rep.fitted_c * std::pow(d, row.n) / source_volume);
    }
    return rep;
}

}  // namespace greenlab
