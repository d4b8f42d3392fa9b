#pragma once

#include <span>

#include "greenlab/maps.hpp"
#include "greenlab/projective.hpp"

namespace greenlab {

/// Result of an escape-rate evaluation with its certified tail bound
/// c_bound * d^-n_used / (d - 1). The certificate is modulo the sampled
/// sphere estimate of c_bound.
struct GreenValue {
    double value = 0.0;
    int n_used = 0;
    double error_bound = 0.0;
    bool converged = false;
};

/// Renormalized orbit of a lift F. After n steps
///   partial = log|z| + sum_{j<n} d^-(j+1) log|F(w_j)|,  w_{j+1} = F(w_j)/|F(w_j)|,
/// which equals d^-n log|F^n(z)| exactly, and |G(z) - partial| <= tail_bound().
class OrbitAccumulator {
public:
    /// Throws std::domain_error for z = 0.
    OrbitAccumulator(const LiftedEndomorphism& map, std::span<const Complex> z);

    void step();

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] double partial() const { return partial_; }
    /// Current unit-norm iterate w_n.
    [[nodiscard]] const CVec& w() const { return w_; }
    /// log|F^n(z)| = d^n * partial.
    [[nodiscard]] double log_norm_of_iterate() const { return log_norm_; }
    [[nodiscard]] double c_bound() const { return map_->c_bound(); }
    [[nodiscard]] double tail_bound() const;
    [[nodiscard]] const LiftedEndomorphism& map() const { return *map_; }

private:
    const LiftedEndomorphism* map_;
    CVec w_;
    int n_ = 0;
    double partial_ = 0.0;
    double log_norm_ = 0.0;
    double weight_ = 1.0;  // d^-n
};

inline constexpr int kGreenMaxIterations = 200;

/// G(z) = lim d^-n log|F^n(z)|. Iterates until the tail bound is <= tol or
/// 200 steps; `converged` is false in the latter case.
GreenValue green_lift(const LiftedEndomorphism& f, std::span<const Complex> z, double tol);

/// g(p) = G(coords) for the unit representative, the potential of the
/// Green current modulo the Fubini-Study form.
GreenValue green_potential(const LiftedEndomorphism& f, const ProjectivePoint& p, double tol);

struct HenonGreenValue {
    double value = 0.0;
    /// False when the orbit did not enter the escape region within N steps;
    /// value is then 0 and only claimed "bounded up to N".
    bool escaped = false;
    int escape_step = -1;
    int steps = 0;
    double error_bound = 0.0;
};

/// G+(z) = lim d+^-n log+|f^n(z)| for a Henon-family automorphism. Iterates
/// up to N steps waiting for the orbit to enter the escape region
/// |y| >= max(|x|, R), then continues with a renormalized telescoping sum
/// (log|y| tracked separately, no overflow) until the tail is below 1e-15.
HenonGreenValue henon_green_plus(const RegularAutomorphism& f, std::span<const Complex> z, int n_max);

}  // namespace greenlab
