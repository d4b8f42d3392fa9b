#include "greenlab/green.hpp"

#include <cmath>
#include <stdexcept>

namespace greenlab {

OrbitAccumulator::OrbitAccumulator(const LiftedEndomorphism& map, std::span<const Complex> z) : map_(&map) {
    if (z.size() != map.k_plus_1()) throw std::invalid_argument("green: dimension mismatch");
    auto start = normalize(z);
    w_ = start.point.coords();
    partial_ = start.log_norm;
    log_norm_ = start.log_norm;
}

void OrbitAccumulator::step() {
    const double d = map_->degree();
    auto image = normalize(map_->evaluate(w_));
    weight_ /= d;
    partial_ += weight_ * image.log_norm;
    log_norm_ = d * log_norm_ + image.log_norm;
    w_ = image.point.coords();
    ++n_;
}

double OrbitAccumulator::tail_bound() const {
    const double d = map_->degree();
    return map_->c_bound() * weight_ / (d - 1.0);
}

GreenValue green_lift(const LiftedEndomorphism& f, std::span<const Complex> z, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("green_lift: tol must be positive");
    OrbitAccumulator acc(f, z);
    while (acc.tail_bound() > tol && acc.n() < kGreenMaxIterations) acc.step();
    return {acc.partial(), acc.n(), acc.tail_bound(), acc.tail_bound() <= tol};
}

GreenValue green_potential(const LiftedEndomorphism& f, const ProjectivePoint& p, double tol) {
    return green_lift(f, p.span(), tol);
}

HenonGreenValue henon_green_plus(const RegularAutomorphism& f, std::span<const Complex> z, int n_max) {
    if (n_max < 1) throw std::invalid_argument("henon_green_plus: N must be >= 1");
    if (!f.henon()) throw std::invalid_argument("henon_green_plus: escape region only known for the Henon family");
    if (z.size() != 2) throw std::invalid_argument("henon_green_plus: expected a point of C^2");
    const Complex a = f.henon()->a;
    const Complex c = f.henon()->c;

    HenonGreenValue out;
    CVec w(z.begin(), z.end());
    int step = 0;
    while (!f.in_escape_region(w)) {
        if (step >= n_max) {
            out.steps = step;
            return out;
        }
        w = f.apply(w);
        ++step;
    }
    out.escaped = true;
    out.escape_step = step;

    // In the escape region: y_{j+1} = y_j^2 (1 + t_j), t_j = (c - a x_j) / y_j^2.
    // State: L = log|y|, u = x / |y|, v = y / |y|.
    double big_l = std::log(std::abs(w[1]));
    Complex u = w[0] / std::abs(w[1]);
    Complex v = w[1] / std::abs(w[1]);
    double scale = std::ldexp(1.0, -step);  // d+^-j
    const double abs_a = std::abs(a);
    const double abs_c = std::abs(c);
    auto tail = [&](double l) {
        const double tau = abs_c * std::exp(-2.0 * l) + abs_a * std::exp(-l);
        return -std::log1p(-tau);
    };
    constexpr int kMaxTotal = 400;
    while (scale * tail(big_l) > 1e-15 * std::max(1.0, scale * big_l) && step < kMaxTotal) {
        const Complex t = (c * std::exp(-2.0 * big_l) - a * u * std::exp(-big_l)) / (v * v);
        const Complex next = v * v * (1.0 + t);
        const double next_l = 2.0 * big_l + std::log(std::abs(next));
        u = v * std::exp(big_l - next_l);
        v = next / std::abs(next);
        big_l = next_l;
        scale *= 0.5;
        ++step;
    }
    out.steps = step;
    out.value = scale * big_l;
    out.error_bound = scale * tail(big_l);
    return out;
}

}  // namespace greenlab
