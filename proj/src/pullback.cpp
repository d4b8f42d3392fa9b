#include "greenlab/pullback.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "greenlab/parallel.hpp"

namespace greenlab {

HypersurfaceCurrent::HypersurfaceCurrent(HomogeneousPolynomial p, std::string id)
    : polynomial(std::move(p)), id(std::move(id)) {
    if (polynomial.polynomial().is_zero()) throw std::invalid_argument("hypersurface polynomial is identically zero");
    if (polynomial.degree() < 1) throw std::invalid_argument("hypersurface polynomial must have degree >= 1");
}

HypersurfaceCurrent HypersurfaceCurrent::hyperplane(std::span<const Complex> coefficients, std::string id) {
    std::vector<Monomial> terms;
    const auto n = coefficients.size();
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<int> e(n, 0);
        e[i] = 1;
        terms.push_back({std::move(e), coefficients[i]});
    }
    return HypersurfaceCurrent(HomogeneousPolynomial(Polynomial(n, std::move(terms)), 1), std::move(id));
}

HypersurfaceCurrent HypersurfaceCurrent::random_hyperplane(int k, std::uint64_t seed) {
    SplitMix64 rng(seed, 0);
    CVec c(static_cast<std::size_t>(k) + 1);
    for (auto& x : c) x = rng.unit_disk();
    return hyperplane(c, "line(seed=" + std::to_string(seed) + ")");
}

HypersurfaceCurrent HypersurfaceCurrent::coordinate_hyperplane(int k, int index) {
    CVec c(static_cast<std::size_t>(k) + 1, 0.0);
    c.at(static_cast<std::size_t>(index)) = 1.0;
    return hyperplane(c, "z" + std::to_string(index) + "=0");
}

std::vector<PullbackPotentialSample> pullback_potentials(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                                         const ProjectivePoint& p, std::span<const int> n_list,
                                                         double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("pullback: tol must be positive");
    if (n_list.empty()) return {};
    if (h.polynomial.k_plus_1() != f.k_plus_1() || p.k_plus_1() != f.k_plus_1())
        throw std::invalid_argument("pullback: dimension mismatch");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 0 || (i > 0 && n_list[i] <= n_list[i - 1]))
            throw std::invalid_argument("pullback: n_list must be increasing and nonnegative");
    }

    const double d = f.degree();
    const double s = h.s();
    const double c_over = f.c_bound() / (d - 1.0);

    struct Partial {
        double term;
        bool clipped;
        double g_n;
        double weight;
    };
    std::vector<Partial> at_n;
    at_n.reserve(n_list.size());

    ExtVec w = to_ext(p.coords());
    double partial = normalize_in_place(w);
    double weight = 1.0;
    std::size_t next = 0;
    const int n_last = n_list.back();
    for (int j = 0;; ++j) {
        if (next < n_list.size() && n_list[next] == j) {
            const double log_p = h.polynomial.evaluate(std::span<const ExtComplex>(w)).log_abs();
            const double term = weight * log_p / s;
            const bool clipped = !std::isfinite(term) || term < kClipFloor;
            at_n.push_back({term, clipped, partial, weight});
            ++next;
        }
        const bool tail_done = c_over * weight <= tol || j >= kGreenMaxIterations;
        if (j >= n_last && tail_done) break;
        ExtVec image = f.evaluate(std::span<const ExtComplex>(w));
        const double log_norm = normalize_in_place(image);
        weight /= d;
        partial += weight * log_norm;
        w = std::move(image);
    }
    const double g_inf = partial;
    const double g_err = c_over * weight;

    std::vector<PullbackPotentialSample> out;
    out.reserve(n_list.size());
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const auto& a = at_n[i];
        PullbackPotentialSample sample;
        sample.point = p;
        sample.n = n_list[i];
        sample.clipped = a.clipped;
        sample.correction = g_inf - a.g_n;
        sample.error_bound = c_over * a.weight + g_err;
        sample.u_n = a.clipped ? kClipFloor : a.term - sample.correction;
        out.push_back(std::move(sample));
    }
    return out;
}

PullbackPotentialSample pullback_potential(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                           const ProjectivePoint& p, int n, double tol) {
    if (n < 0) throw std::invalid_argument("pullback: n must be >= 0");
    const int list[] = {n};
    return pullback_potentials(h, f, p, list, tol).front();
}

PotentialValue modulo_potential(const HypersurfaceCurrent& h, const LiftedEndomorphism& f, const ProjectivePoint& p,
                                double tol) {
    auto s = pullback_potential(h, f, p, 0, tol);
    return {s.u_n, s.clipped, s.error_bound - f.c_bound() / (f.degree() - 1.0)};
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope: need at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

namespace {

double fitted_log_rate(const std::vector<ConvergenceRow>& rows) {
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        if (r.samples_used > 0 && r.mean_abs_u > 0.0) {
            xs.push_back(r.n);
            ys.push_back(std::log(r.mean_abs_u));
        }
    }
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    return fit_slope(xs, ys);
}

// Mean and max of |values| over entries not marked clipped, reduced in index order.
void fill_row(ConvergenceRow& row, const std::vector<double>& values, const std::vector<char>& use) {
    std::vector<double> kept;
    kept.reserve(values.size());
    double mx = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!use[i]) continue;
        kept.push_back(std::abs(values[i]));
        mx = std::max(mx, std::abs(values[i]));
    }
    row.samples_used = kept.size();
    row.max_abs_u = mx;
    row.mean_abs_u = kept.empty() ? std::numeric_limits<double>::quiet_NaN()
                                  : parallel::pairwise_sum(kept) / static_cast<double>(kept.size());
}

}  // namespace

ConvergenceReport convergence_report(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                     std::span<const int> n_list, std::size_t sample_count, std::uint64_t seed,
                                     double tol) {
    if (sample_count < 100) throw std::invalid_argument("convergence_report: sample_count must be >= 100");
    if (n_list.empty()) throw std::invalid_argument("convergence_report: empty n_list");

    auto per_sample = parallel::map_indices<std::vector<PullbackPotentialSample>>(sample_count, [&](std::size_t i) {
        return pullback_potentials(h, f, fs_uniform_point(seed, i, f.k()), n_list, tol);
    });

    ConvergenceReport report;
    report.map_id = f.id();
    report.hypersurface_id = h.id;
    report.sample_count = sample_count;
    report.seed = seed;
    std::vector<double> values(sample_count);
    std::vector<char> use(sample_count);
    for (std::size_t j = 0; j < n_list.size(); ++j) {
        ConvergenceRow row;
        row.n = n_list[j];
        row.bounded_mean_abs = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < sample_count; ++i) {
            values[i] = per_sample[i][j].u_n;
            use[i] = !per_sample[i][j].clipped;
            if (per_sample[i][j].clipped) ++row.clipped_count;
        }
        fill_row(row, values, use);
        if (row.samples_used == 0) report.degenerate = true;
        report.rows.push_back(row);
    }
    report.fitted_rate = fitted_log_rate(report.rows);
    return report;
}

std::vector<double> abs_potential_samples(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                          std::size_t sample_count, std::uint64_t seed, double tol) {
    return parallel::map_indices<double>(sample_count, [&](std::size_t i) {
        auto s = pullback_potential(h, f, fs_uniform_point(seed, i, f.k()), 0, tol);
        return std::abs(s.u_n);
    });
}

InvarianceResidual invariance_residual(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                       std::size_t sample_count, std::uint64_t seed, double tol) {
    if (sample_count == 0) throw std::invalid_argument("invariance_residual: sample_count must be >= 1");
    const int list[] = {0, 1};
    auto diffs = parallel::map_indices<double>(sample_count, [&](std::size_t i) {
        auto s = pullback_potentials(h, f, fs_uniform_point(seed, i, f.k()), list, tol);
        if (s[0].clipped || s[1].clipped) return std::numeric_limits<double>::quiet_NaN();
        return std::abs(s[1].u_n - s[0].u_n);
    });
    InvarianceResidual out;
    for (double v : diffs) {
        if (std::isnan(v)) {
            ++out.skipped;
        } else {
            out.residual = std::max(out.residual, v);
        }
    }
    return out;
}

CVec sample_affine_region(const AffineRegion& region, int k, std::uint64_t seed, std::uint64_t index) {
    if (!(region.r_min >= 0.0 && region.r_max > region.r_min))
        throw std::invalid_argument("affine region needs 0 <= r_min < r_max");
    SplitMix64 rng(seed, index);
    const auto n = static_cast<std::size_t>(k);
    CVec z(n);
    double norm_sq = 0.0;
    do {
        norm_sq = 0.0;
        for (auto& c : z) {
            c = region.real_slice ? Complex(rng.normal(), 0.0) : rng.complex_normal();
            norm_sq += std::norm(c);
        }
    } while (norm_sq == 0.0);
    const double dim = region.real_slice ? k : 2.0 * k;
    const double lo = std::pow(region.r_min, dim);
    const double hi = std::pow(region.r_max, dim);
    const double radius = std::pow(lo + rng.uniform() * (hi - lo), 1.0 / dim);
    const double scale = radius / std::sqrt(norm_sq);
    for (auto& c : z) c *= scale;
    return z;
}

ConvergenceReport henon_pullback_report(const RegularAutomorphism& a, const Polynomial& q, std::span<const int> n_list,
                                        const AffineRegion& region, std::size_t sample_count, std::uint64_t seed) {
    if (q.total_degree() < 1) throw std::invalid_argument("henon_pullback_report: Q must be nonconstant");
    if (q.variables() != static_cast<std::size_t>(a.k())) throw std::invalid_argument("henon_pullback_report: Q has the wrong number of variables");
    if (n_list.empty() || sample_count == 0) throw std::invalid_argument("henon_pullback_report: empty n_list or sample set");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 0 || (i > 0 && n_list[i] <= n_list[i - 1]))
            throw std::invalid_argument("henon_pullback_report: n_list must be increasing and nonnegative");
    }
    const double deg_q = q.total_degree();
    const double d_plus = a.d_plus();

    struct SampleResult {
        bool escaped = false;
        std::vector<double> residual;
        std::vector<char> clipped;
    };
    auto results = parallel::map_indices<SampleResult>(sample_count, [&](std::size_t i) {
        const CVec z = sample_affine_region(region, a.k(), seed, i);
        SampleResult r;
        const auto g = henon_green_plus(a, z, kHenonEscapeSteps);
        r.escaped = g.escaped;
        ExtVec w = to_ext(z);
        double weight = 1.0;
        std::size_t next = 0;
        for (int j = 0; next < n_list.size(); ++j) {
            if (n_list[next] == j) {
                const double term = weight * q.evaluate(std::span<const ExtComplex>(w)).log_abs() / deg_q;
                const bool clipped = !std::isfinite(term) || term < kClipFloor;
                r.clipped.push_back(clipped);
                r.residual.push_back(clipped ? 0.0 : term - g.value);
                ++next;
            }
            w = a.apply(std::span<const ExtComplex>(w));
            weight /= d_plus;
        }
        return r;
    });

    ConvergenceReport report;
    report.map_id = a.id();
    report.hypersurface_id = "Q";
    report.sample_count = sample_count;
    report.seed = seed;
    for (const auto& r : results) (r.escaped ? report.escaping_samples : report.bounded_samples)++;
    std::vector<double> values(sample_count);
    std::vector<char> use(sample_count), use_bounded(sample_count);
    for (std::size_t j = 0; j < n_list.size(); ++j) {
        ConvergenceRow row;
        row.n = n_list[j];
        for (std::size_t i = 0; i < sample_count; ++i) {
            values[i] = results[i].residual[j];
            const bool clipped = results[i].clipped[j];
            if (clipped) ++row.clipped_count;
            use[i] = results[i].escaped && !clipped;
            use_bounded[i] = !results[i].escaped && !clipped;
        }
        ConvergenceRow bounded;
        fill_row(bounded, values, use_bounded);
        fill_row(row, values, use);
        row.bounded_mean_abs = bounded.mean_abs_u;
        report.rows.push_back(row);
    }
    report.degenerate = report.escaping_samples == 0;
    report.fitted_rate = fitted_log_rate(report.rows);
    return report;
}

}  // namespace greenlab
