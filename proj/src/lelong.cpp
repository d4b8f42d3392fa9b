#include "greenlab/lelong.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "greenlab/parallel.hpp"

namespace greenlab {

namespace {

struct LevelResult {
    double sup = -std::numeric_limits<double>::infinity();
    std::size_t proposals = 0;
    std::size_t accepted = 0;
};

LevelResult sup_over_ball(const Potential& v, const ProjectivePoint& center, double r, std::size_t samples,
                          SplitMix64& rng) {
    const FsBallSampler ball(center);
    LevelResult out;
    ProjectivePoint best;
    auto consider = [&](const ProjectivePoint& p) {
        const auto value = v(p);
        if (!value.clipped && value.value > out.sup) {
            out.sup = value.value;
            best = p;
        }
    };
    const std::size_t uniform = (samples * 9 + 9) / 10;
    for (std::size_t i = 0; i < uniform; ++i) {
        consider(ball.draw(r, rng, out.proposals));
        ++out.accepted;
    }
    for (std::size_t i = uniform; i < samples; ++i) {
        if (best.k_plus_1() == 0) {
            consider(ball.draw(r, rng, out.proposals));
            ++out.accepted;
            continue;
        }
        // Refinement around the current maximizer, kept inside B_center(r).
        const FsBallSampler local(best);
        ProjectivePoint p;
        do {
            p = local.draw(r / 10.0, rng, out.proposals);
        } while (fs_distance(p, center) > r);
        ++out.accepted;
        consider(p);
    }
    return out;
}

}  // namespace

LelongEstimate lelong_estimate(const Potential& v, const ProjectivePoint& center, const LelongOptions& options) {
    if (!(options.r_max > 0.0 && options.r_max <= 0.25)) throw std::invalid_argument("r_max must be in (0, 0.25]");
    if (options.levels < 4) throw std::invalid_argument("levels must be >= 4");
    if (options.samples_per_radius < 500) throw std::invalid_argument("samples_per_radius must be >= 500");

    const auto levels = static_cast<std::size_t>(options.levels);
    LelongEstimate est;
    est.center = center;
    est.samples_per_radius = options.samples_per_radius;
    for (std::size_t j = 0; j < levels; ++j) est.radii.push_back(std::ldexp(options.r_max, -static_cast<int>(j)));

    auto results = parallel::map_indices<LevelResult>(levels, [&](std::size_t j) {
        SplitMix64 rng(options.seed, j);
        return sup_over_ball(v, center, est.radii[j], options.samples_per_radius, rng);
    });

    std::size_t proposals = 0, accepted = 0;
    est.sups.resize(levels);
    for (std::size_t j = 0; j < levels; ++j) {
        est.sups[j] = results[j].sup;
        proposals += results[j].proposals;
        accepted += results[j].accepted;
        if (std::isinf(results[j].sup)) est.infinite = true;
    }
    est.rejection_rate = proposals == 0 ? 0.0 : 1.0 - static_cast<double>(accepted) / static_cast<double>(proposals);
    // B(r_j+1) is inside B(r_j): a sample of the smaller ball bounds the larger sup from below.
    for (std::size_t j = levels - 1; j-- > 0;) est.sups[j] = std::max(est.sups[j], est.sups[j + 1]);

    if (est.infinite) {
        est.slope = std::numeric_limits<double>::infinity();
        est.r_squared = 0.0;
        return est;
    }

    const std::size_t fit = (levels + 1) / 2;
    std::vector<double> xs, ys;
    for (std::size_t j = levels - fit; j < levels; ++j) {
        xs.push_back(std::log(est.radii[j]));
        ys.push_back(est.sups[j]);
    }
    est.slope = fit_slope(xs, ys);
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    const double mx = [&] {
        double s = 0.0;
        for (double x : xs) s += x;
        return s / static_cast<double>(xs.size());
    }();
    double ss_tot = 0.0, ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = mean + est.slope * (xs[i] - mx);
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - mean) * (ys[i] - mean);
    }
    est.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

    est.min_second_difference = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j + 1 < levels; ++j) {
        est.min_second_difference = std::min(est.min_second_difference, est.sups[j - 1] - 2.0 * est.sups[j] + est.sups[j + 1]);
    }
    return est;
}

LelongComparison lelong_pullback_comparison(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                            const ProjectivePoint& center, int n, const LelongOptions& options,
                                            double tol) {
    if (n < 1) throw std::invalid_argument("lelong_pullback_comparison: n must be >= 1");
    CVec image = center.coords();
    for (int j = 0; j < n; ++j) image = normalize(f.evaluate(image)).point.coords();
    const auto image_point = projective_point(image);

    LelongComparison out;
    out.downstairs = lelong_estimate([&](const ProjectivePoint& p) { return modulo_potential(h, f, p, tol); },
                                     image_point, options);
    out.upstairs = lelong_estimate(
        [&](const ProjectivePoint& p) {
            const auto s = pullback_potential(h, f, p, n, tol);
            return PotentialValue{s.u_n, s.clipped, s.error_bound};
        },
        center, options);
    out.nu_down = out.downstairs.slope;
    out.nu_up = std::pow(static_cast<double>(f.degree()), n) * out.upstairs.slope;
    out.local_degree = local_degree_estimate(f, center, n, default_solver(f));

    const double delta = out.local_degree;
    const double lower = std::pow(delta, -f.k()) * out.nu_down - kSandwichSlack;
    const double upper = delta * out.nu_down + kSandwichSlack;
    out.sandwich_holds = out.nu_up >= lower && out.nu_up <= upper;
    // A flat sup profile (nu = 0) has no linear trend to fit; r^2 is only
    // meaningful once the slope is resolved.
    auto weak = [](const LelongEstimate& e) { return std::abs(e.slope) > 0.05 && e.r_squared < 0.9; };
    out.inconclusive = weak(out.downstairs) || weak(out.upstairs);
    return out;
}

}  // namespace greenlab
