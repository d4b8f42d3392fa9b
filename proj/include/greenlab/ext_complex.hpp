#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

namespace greenlab {

/// Complex number with an unbounded binary exponent.
///
/// Value is mantissa * 2^exponent with max(|re|,|im|) of the mantissa in
/// [0.5, 1) (or exactly zero). Orbit coordinates of superattracting maps
/// shrink like r^(d^n); this keeps them representable where double would
/// flush to zero after ~10 steps.
class ExtComplex {
public:
    using Exponent = std::int64_t;

    ExtComplex() = default;
    ExtComplex(std::complex<double> value) : mantissa_(value), exponent_(0) { normalize(); }
    ExtComplex(double value) : ExtComplex(std::complex<double>(value, 0.0)) {}

    static ExtComplex from_parts(std::complex<double> mantissa, Exponent exponent) {
        ExtComplex out;
        out.mantissa_ = mantissa;
        out.exponent_ = exponent;
        out.normalize();
        return out;
    }

    [[nodiscard]] bool is_zero() const { return mantissa_ == std::complex<double>(0.0, 0.0); }
    [[nodiscard]] std::complex<double> mantissa() const { return mantissa_; }
    [[nodiscard]] Exponent exponent() const { return exponent_; }

    /// Natural log of the modulus; -inf for zero.
    [[nodiscard]] double log_abs() const {
        if (is_zero()) return -std::numeric_limits<double>::infinity();
        return std::log(std::abs(mantissa_)) + static_cast<double>(exponent_) * kLn2;
    }

    /// Nearest double-precision value (underflows to 0, overflows to inf).
    [[nodiscard]] std::complex<double> to_complex() const {
        if (is_zero()) return {0.0, 0.0};
        if (exponent_ > 4096) return {std::copysign(kInf, mantissa_.real()), std::copysign(kInf, mantissa_.imag())};
        if (exponent_ < -4096) return {0.0, 0.0};
        const int e = static_cast<int>(exponent_);
        return {std::ldexp(mantissa_.real(), e), std::ldexp(mantissa_.imag(), e)};
    }

    /// Multiply by 2^shift.
    [[nodiscard]] ExtComplex scaled_pow2(Exponent shift) const {
        if (is_zero()) return *this;
        ExtComplex out = *this;
        out.exponent_ += shift;
        return out;
    }

    [[nodiscard]] ExtComplex conj() const { return from_raw(std::conj(mantissa_), exponent_); }

    /// |z|^2 as an ExtComplex with zero imaginary part.
    [[nodiscard]] ExtComplex norm_sq() const {
        return from_parts({std::norm(mantissa_), 0.0}, 2 * exponent_);
    }

    ExtComplex& operator*=(const ExtComplex& rhs) {
        if (is_zero() || rhs.is_zero()) {
            *this = ExtComplex();
            return *this;
        }
        mantissa_ *= rhs.mantissa_;
        exponent_ += rhs.exponent_;
        normalize();
        return *this;
    }

    ExtComplex& operator/=(const ExtComplex& rhs) {
        if (is_zero()) return *this;
        mantissa_ /= rhs.mantissa_;
        exponent_ -= rhs.exponent_;
        normalize();
        return *this;
    }

    ExtComplex& operator+=(const ExtComplex& rhs) {
        if (rhs.is_zero()) return *this;
        if (is_zero()) {
            *this = rhs;
            return *this;
        }
        const Exponent gap = exponent_ - rhs.exponent_;
        if (gap > kAlignLimit) return *this;
        if (gap < -kAlignLimit) {
            *this = rhs;
            return *this;
        }
        if (gap >= 0) {
            mantissa_ += shift(rhs.mantissa_, -gap);
        } else {
            mantissa_ = shift(mantissa_, gap) + rhs.mantissa_;
            exponent_ = rhs.exponent_;
        }
        normalize();
        return *this;
    }

    ExtComplex& operator-=(const ExtComplex& rhs) { return *this += -rhs; }

    ExtComplex operator-() const { return from_raw(-mantissa_, exponent_); }

    friend ExtComplex operator*(ExtComplex a, const ExtComplex& b) { return a *= b; }
    friend ExtComplex operator/(ExtComplex a, const ExtComplex& b) { return a /= b; }
    friend ExtComplex operator+(ExtComplex a, const ExtComplex& b) { return a += b; }
    friend ExtComplex operator-(ExtComplex a, const ExtComplex& b) { return a -= b; }

    /// Principal square root.
    [[nodiscard]] ExtComplex sqrt() const {
        if (is_zero()) return *this;
        Exponent e = exponent_;
        std::complex<double> m = mantissa_;
        if (e % 2 != 0) {
            m *= 2.0;
            e -= 1;
        }
        return from_parts(std::sqrt(m), e / 2);
    }

    /// Real part as a (possibly huge or tiny) positive-or-negative ExtComplex.
    [[nodiscard]] ExtComplex real_part() const { return from_parts({mantissa_.real(), 0.0}, exponent_); }

    static constexpr double kLn2 = 0.69314718055994530942;

private:
    static constexpr Exponent kAlignLimit = 1100;
    static constexpr double kInf = std::numeric_limits<double>::infinity();

    static ExtComplex from_raw(std::complex<double> m, Exponent e) {
        ExtComplex out;
        out.mantissa_ = m;
        out.exponent_ = e;
        return out;
    }

    static std::complex<double> shift(std::complex<double> m, Exponent by) {
        const int e = static_cast<int>(by);
        return {std::ldexp(m.real(), e), std::ldexp(m.imag(), e)};
    }

    void normalize() {
        const double scale = std::max(std::abs(mantissa_.real()), std::abs(mantissa_.imag()));
        if (scale == 0.0 || !std::isfinite(scale)) {
            if (scale == 0.0) {
                mantissa_ = {0.0, 0.0};
                exponent_ = 0;
            }
            return;
        }
        int e = 0;
        std::frexp(scale, &e);
        mantissa_ = shift(mantissa_, -e);
        exponent_ += e;
    }

    std::complex<double> mantissa_{0.0, 0.0};
    Exponent exponent_ = 0;
};

inline double log_abs(const ExtComplex& z) { return z.log_abs(); }
inline double log_abs(const std::complex<double>& z) { return std::log(std::abs(z)); }

}  // namespace greenlab
