#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "greenlab/polynomial.hpp"

namespace greenlab {

using CMatrix = Eigen::MatrixXcd;

struct SymbolicCertificate {};

struct ProbabilisticCertificate {
    double min_sphere_norm;
    std::size_t sample_count;
};

using NondegeneracyCertificate = std::variant<SymbolicCertificate, ProbabilisticCertificate>;

/// Sup/inf statistics of log|F| over deterministic unit-sphere samples.
struct SphereStatistics {
    double min_norm = 0.0;
    double max_norm = 0.0;
    double max_abs_log_norm = 0.0;
    std::size_t samples = 0;
    std::size_t argmin = 0;
    CVec argmin_point;
};

/// Rational self-map h = numerator / denominator of P^1, coefficients in
/// ascending powers of the affine coordinate x = z1 / z0. A polynomial has
/// denominator {1}.
struct UnivariateRational {
    CVec numerator;
    CVec denominator{1.0};

    [[nodiscard]] int degree() const;
    /// Homogeneous pair (p, q) in (a, b) with x = a / b: p(a,b) = b^d num(a/b).
    [[nodiscard]] std::pair<Polynomial, Polynomial> homogenized_ab() const;
};

enum class MapFamily { Power, PerturbedPower, Ueda, Custom };

/// Raised when a map fails the sphere-sampling nondegeneracy test.
class NondegeneracyError : public std::runtime_error {
public:
    NondegeneracyError(const std::string& what, std::size_t sample_index, CVec sample)
        : std::runtime_error(what), sample_index(sample_index), sample(std::move(sample)) {}
    std::size_t sample_index;
    CVec sample;
};

/// Lift F: C^(k+1) -> C^(k+1) of a holomorphic endomorphism of P^k of
/// algebraic degree d >= 2. Immutable; evaluation is thread-safe.
class LiftedEndomorphism {
public:
    /// Validates degrees and runs the sphere statistics. A Probabilistic
    /// certificate is issued unless `symbolic` is set; the check rejects
    /// min |F| < kNondegeneracyThreshold in either case.
    LiftedEndomorphism(std::vector<HomogeneousPolynomial> components, bool symbolic = false,
                       MapFamily family = MapFamily::Custom, std::string id = "custom");

    static constexpr std::size_t kSphereSamples = 10000;
    static constexpr double kNondegeneracyThreshold = 1e-3;
    static constexpr std::uint64_t kSphereSeed = 0x5EEDF00DULL;
    static constexpr double kSafetyFactor = 1.1;

    [[nodiscard]] int k() const { return static_cast<int>(components_.size()) - 1; }
    [[nodiscard]] std::size_t k_plus_1() const { return components_.size(); }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] const std::vector<HomogeneousPolynomial>& components() const { return components_; }
    [[nodiscard]] const NondegeneracyCertificate& certificate() const { return certificate_; }
    [[nodiscard]] const SphereStatistics& sphere_statistics() const { return sphere_; }
    [[nodiscard]] MapFamily family() const { return family_; }
    [[nodiscard]] const std::string& id() const { return id_; }

    /// Estimated sup of |log|F|| on the unit sphere times the 1.1 safety factor.
    [[nodiscard]] double c_bound() const { return c_bound_; }

    /// True when every component is a single monomial.
    [[nodiscard]] bool is_monomial() const;
    /// Index permutation when component i is c_i * z_{perm[i]}^d for all i.
    [[nodiscard]] std::optional<std::vector<std::size_t>> diagonal_power_structure() const;

    [[nodiscard]] CVec evaluate(std::span<const Complex> z) const;
    [[nodiscard]] ExtVec evaluate(std::span<const ExtComplex> z) const;
    [[nodiscard]] CMatrix jacobian(std::span<const Complex> z) const;
    /// Row-major (k+1)x(k+1) Jacobian in extended range.
    [[nodiscard]] ExtVec jacobian(std::span<const ExtComplex> z) const;

    [[nodiscard]] const std::optional<UnivariateRational>& ueda_factor() const { return ueda_; }

    /// One component per line in the polynomial text format.
    [[nodiscard]] std::string to_string() const;
    static LiftedEndomorphism parse(std::string_view text);

private:
    friend LiftedEndomorphism make_ueda_map(const UnivariateRational& h, int k);

    std::vector<HomogeneousPolynomial> components_;
    std::vector<std::vector<Polynomial>> derivatives_;
    int degree_ = 0;
    NondegeneracyCertificate certificate_;
    SphereStatistics sphere_;
    double c_bound_ = 0.0;
    MapFamily family_;
    std::string id_;
    std::optional<UnivariateRational> ueda_;
};

SphereStatistics sphere_statistics(std::span<const HomogeneousPolynomial> components, std::size_t samples,
                                   std::uint64_t seed);

Complex eval_poly(const HomogeneousPolynomial& p, std::span<const Complex> z);
CVec eval_map(const LiftedEndomorphism& f, std::span<const Complex> z);
CMatrix jacobian(const LiftedEndomorphism& f, std::span<const Complex> z);

/// Components z_i^d.
LiftedEndomorphism make_power_map(int k, int d);

/// Components z_i^d + epsilon * Q_i, Q_i with coefficients uniform in the unit
/// disk drawn from substream i of `seed`. Throws NondegeneracyError when the
/// minimum sphere norm falls below 1e-3.
LiftedEndomorphism make_perturbed_power_map(int k, int d, double epsilon, std::uint64_t seed);

/// Endomorphism f of P^k with f o pi = pi o (h x ... x h), where pi sends
/// ([a_1:b_1], ..., [a_k:b_k]) to the coefficients e_j(a;b) of
/// prod_i (b_i X - a_i Y) (up to sign): z_j = sum over |J| = j of
/// prod_{i in J} a_i prod_{i not in J} b_i. The components come from exact
/// reduction of the multisymmetric targets to the e_j.
LiftedEndomorphism make_ueda_map(const UnivariateRational& h, int k);

/// The symmetrization pi evaluated at affine points x_i = a_i / b_i given as
/// (a_i, b_i) pairs.
CVec symmetrize(std::span<const std::pair<Complex, Complex>> points);

/// Polynomial automorphism of C^k with forward and backward maps.
class RegularAutomorphism {
public:
    struct HenonParameters {
        Complex a;
        Complex c;
    };

    [[nodiscard]] int k() const { return static_cast<int>(forward_.size()); }
    [[nodiscard]] int d_plus() const { return d_plus_; }
    [[nodiscard]] int d_minus() const { return d_minus_; }
    [[nodiscard]] int s() const { return s_; }
    [[nodiscard]] double filtration_radius() const { return filtration_radius_; }
    [[nodiscard]] const std::vector<Polynomial>& forward() const { return forward_; }
    [[nodiscard]] const std::vector<Polynomial>& backward() const { return backward_; }
    [[nodiscard]] const std::optional<HenonParameters>& henon() const { return henon_; }
    [[nodiscard]] const std::string& id() const { return id_; }

    /// Indeterminacy points at infinity [x:y:0] of f and f^-1.
    [[nodiscard]] const CVec& indeterminacy_plus() const { return i_plus_; }
    [[nodiscard]] const CVec& indeterminacy_minus() const { return i_minus_; }

    [[nodiscard]] CVec apply(std::span<const Complex> z) const;
    [[nodiscard]] ExtVec apply(std::span<const ExtComplex> z) const;
    [[nodiscard]] CVec apply_inverse(std::span<const Complex> z) const;
    [[nodiscard]] CMatrix jacobian(std::span<const Complex> z) const;

    /// Forward escape region where growth is certified (for Henon maps
    /// |y| >= max(|x|, R)): orbits entering it never leave and |y| at least
    /// doubles per step.
    [[nodiscard]] bool in_escape_region(std::span<const Complex> z) const;

    friend RegularAutomorphism make_henon(Complex a, Complex c);

private:
    std::vector<Polynomial> forward_;
    std::vector<Polynomial> backward_;
    std::vector<std::vector<Polynomial>> derivatives_;
    int d_plus_ = 0;
    int d_minus_ = 0;
    int s_ = 0;
    double filtration_radius_ = 0.0;
    std::optional<HenonParameters> henon_;
    CVec i_plus_;
    CVec i_minus_;
    std::string id_;
};

/// Quadratic Henon map (x, y) -> (y, y^2 + c - a x) with inverse
/// (x, y) -> ((x^2 + c - y) / a, x); d+ = d- = 2, s = 1,
/// R = max(3, |c| + |a| + 2). Throws std::invalid_argument for a = 0.
RegularAutomorphism make_henon(Complex a, Complex c);

CMatrix jacobian(const RegularAutomorphism& f, std::span<const Complex> z);

}  // namespace greenlab
