#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "greenlab/green.hpp"

namespace greenlab {

inline constexpr double kClipFloor = -700.0;
inline constexpr double kDefaultPotentialTol = 1e-10;

/// The normalized current s^-1 [H] of the hypersurface {P = 0}, s = deg P.
/// Its potential modulo T is u = s^-1 log|P| - G.
struct HypersurfaceCurrent {
    HomogeneousPolynomial polynomial;
    std::string id = "H";

    explicit HypersurfaceCurrent(HomogeneousPolynomial p, std::string id = "H");
    [[nodiscard]] int s() const { return polynomial.degree(); }

    /// The hyperplane sum_i coefficients[i] z_i = 0.
    static HypersurfaceCurrent hyperplane(std::span<const Complex> coefficients, std::string id = "H");
    /// A hyperplane with coefficients uniform in the unit disk.
    static HypersurfaceCurrent random_hyperplane(int k, std::uint64_t seed);
    static HypersurfaceCurrent coordinate_hyperplane(int k, int index);
};

struct PotentialValue {
    double value = 0.0;
    bool clipped = false;
    double error_bound = 0.0;
};

/// u(p) = s^-1 log|P(coords)| - G(coords); zeros of P are clipped to -700.
PotentialValue modulo_potential(const HypersurfaceCurrent& h, const LiftedEndomorphism& f, const ProjectivePoint& p,
                                double tol);

struct PullbackPotentialSample {
    ProjectivePoint point;
    int n = 0;
    double u_n = 0.0;
    bool clipped = false;
    /// G - G_n, the tail substituted from the same orbit run.
    double correction = 0.0;
    double error_bound = 0.0;
};

/// u_n(p) = d^-n u(f^n(p)), evaluated as d^-n s^-1 log|P(w_n)| + G_n - G along
/// one renormalized orbit. The orbit runs in extended range, so P(w_n) may be
/// far below the double range before it is declared clipped.
PullbackPotentialSample pullback_potential(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                           const ProjectivePoint& p, int n, double tol);

/// u_n(p) for every n in `n_list` (increasing) from a single orbit run.
std::vector<PullbackPotentialSample> pullback_potentials(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                                         const ProjectivePoint& p, std::span<const int> n_list,
                                                         double tol);

struct ConvergenceRow {
    int n = 0;
    double mean_abs_u = 0.0;
    double max_abs_u = 0.0;
    std::size_t clipped_count = 0;
    std::size_t samples_used = 0;
    /// Henon reports only: mean over samples whose orbit never certified
    /// escape (G+ = 0 there). NaN when there are none.
    double bounded_mean_abs = 0.0;
};

struct ConvergenceReport {
    std::string map_id;
    std::string hypersurface_id;
    std::size_t sample_count = 0;
    std::uint64_t seed = 0;
    std::vector<ConvergenceRow> rows;
    /// Least-squares slope of log mean|u_n| against n.
    double fitted_rate = 0.0;
    bool degenerate = false;
    std::size_t escaping_samples = 0;
    std::size_t bounded_samples = 0;
};

/// Paired design: the same FS-uniform samples (stream `seed`) for every n.
/// Clipped samples are excluded from the means and counted.
ConvergenceReport convergence_report(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                     std::span<const int> n_list, std::size_t sample_count, std::uint64_t seed,
                                     double tol = kDefaultPotentialTol);

/// Per-sample |u_0| for the paired samples; exposed for Monte Carlo error studies.
std::vector<double> abs_potential_samples(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                          std::size_t sample_count, std::uint64_t seed, double tol);

struct InvarianceResidual {
    double residual = 0.0;
    std::size_t skipped = 0;
};

/// max over FS-uniform samples of |d^-1 u(f(p)) - u(p)|; clipped samples are skipped.
InvarianceResidual invariance_residual(const HypersurfaceCurrent& h, const LiftedEndomorphism& f,
                                       std::size_t sample_count, std::uint64_t seed,
                                       double tol = kDefaultPotentialTol);

/// Sampling region in C^k (or R^k when `real_slice`): uniform in the shell
/// r_min <= |z| <= r_max.
struct AffineRegion {
    double r_min = 0.0;
    double r_max = 1.0;
    bool real_slice = false;
};

CVec sample_affine_region(const AffineRegion& region, int k, std::uint64_t seed, std::uint64_t index);

inline constexpr int kHenonEscapeSteps = 200;

/// Rows track mean |d+^-n deg(Q)^-1 log|Q(f^n z)| - G+(z)| over samples whose
/// orbit certifies escape; samples that stay bounded for 200 steps are
/// reported in bounded_mean_abs. f^n runs in extended range.
ConvergenceReport henon_pullback_report(const RegularAutomorphism& a, const Polynomial& q, std::span<const int> n_list,
                                        const AffineRegion& region, std::size_t sample_count, std::uint64_t seed);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace greenlab
