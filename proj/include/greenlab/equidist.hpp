#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "greenlab/maps.hpp"
#include "greenlab/projective.hpp"

namespace greenlab {

enum class PreimageSolver {
    Univariate,   // k = 1: roots of the binary form w1 F0 - w0 F1
    PowerMap,     // components c_i z_perm(i)^d: coordinatewise d-th roots
    UedaProduct,  // lift to (P^1)^k, solve with h, project by the symmetrization
};

const char* to_string(PreimageSolver s);
PreimageSolver parse_preimage_solver(std::string_view name);

/// Solver applicable to f, or throws std::invalid_argument.
PreimageSolver default_solver(const LiftedEndomorphism& f);

struct Preimage {
    ProjectivePoint point;
    int multiplicity = 1;
};

/// Raised when a computed preimage fails the projective residual check.
class PreimageError : public std::runtime_error {
public:
    PreimageError(const std::string& what, CVec worst, double residual)
        : std::runtime_error(what), worst(std::move(worst)), residual(residual) {}
    CVec worst;
    double residual;
};

/// Roots of the binary form sum_j c_j T0^(m-j) T1^j as points [T0:T1] with
/// multiplicities summing to m. Eigenvalues of the companion matrix, Newton
/// polish in the better chart, clustering of coincident roots.
std::vector<Preimage> binary_form_roots(std::span<const Complex> coefficients);

inline constexpr double kPreimageResidualTol = 1e-6;

/// f^-1(w) with multiplicities summing to d^k.
std::vector<Preimage> preimages(const LiftedEndomorphism& f, const ProjectivePoint& w, PreimageSolver solver);

struct Atom {
    ProjectivePoint point;
    double weight = 0.0;
};

struct EmpiricalMeasure {
    std::vector<Atom> atoms;
    double total = 0.0;
    /// Number of backward levels at which stratified resampling was applied.
    int resampled_levels = 0;
};

inline constexpr std::size_t kDefaultMaxAtoms = std::size_t{1} << 14;

/// d^(-kn) (f^n)^* delta_a by exact branch expansion while the atom count
/// fits in max_atoms, then stratified resampling (seeded per level) back to
/// max_atoms equal-weight draws.
EmpiricalMeasure backward_orbit_measure(const LiftedEndomorphism& f, const ProjectivePoint& a, int n,
                                        std::size_t max_atoms, std::uint64_t seed, PreimageSolver solver);

/// Kolmogorov-Smirnov distance between the weighted distribution of
/// arg(z1/z0) and the uniform law on the circle. k = 1 only; atoms at 0 or
/// infinity count as mass with undefined angle and are placed at -pi.
double ks_angle_distance(const EmpiricalMeasure& m);

struct PotentialResidual {
    double residual = 0.0;
    std::vector<double> per_point;  // NaN for excluded points
    std::size_t excluded = 0;
};

inline constexpr double kSupportExclusion = 0.2;

/// k = 1, polynomial maps (infinity totally invariant): max over test points
/// t of |sum w_i log|t - x_i| - (G(1,t) - G(0,1))| in the chart x = z1/z0.
/// Test points within FS distance 0.2 of an atom, or at infinity, are excluded.
/// k >= 2, power maps: max deviation of 10 torus moments from their Haar values.
PotentialResidual potential_residual(const EmpiricalMeasure& m, const LiftedEndomorphism& f,
                                     std::span<const ProjectivePoint> test_points, double tol);

/// Moment dictionary used for k >= 2: |z_i|^2, Re and Im of z_i conj(z_j)
/// (i < j), |z0 z1|^2, truncated to 10 entries.
std::vector<double> torus_moments(const EmpiricalMeasure& m);
std::vector<double> torus_moment_oracle(int k);

/// Number of preimages under f^n (with multiplicity) of a point near f^n(x)
/// that land within FS distance `radius` of x: the local topological degree
/// of f^n at x.
int local_degree_estimate(const LiftedEndomorphism& f, const ProjectivePoint& x, int n, PreimageSolver solver,
                          double radius = 0.1, double offset = 1e-10);

}  // namespace greenlab
