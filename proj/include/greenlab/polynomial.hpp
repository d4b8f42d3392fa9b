#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "greenlab/ext_complex.hpp"

namespace greenlab {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;
using ExtVec = std::vector<ExtComplex>;

struct Monomial {
    std::vector<int> exponents;
    Complex coefficient;

    [[nodiscard]] int degree() const;
};

/// Graded lexicographic comparison: higher total degree first, then larger
/// exponent of z0, then z1, ...
bool graded_lex_before(const std::vector<int>& a, const std::vector<int>& b);

/// Sparse polynomial in a fixed number of variables, kept in canonical form:
/// terms sorted graded-lex, no repeated exponent vectors, no zero
/// coefficients. Evaluation sums terms in that order.
class Polynomial {
public:
    explicit Polynomial(std::size_t variables = 1) : variables_(variables) {}
    Polynomial(std::size_t variables, std::vector<Monomial> terms);

    static Polynomial constant(std::size_t variables, Complex value);
    static Polynomial variable(std::size_t variables, std::size_t index);

    [[nodiscard]] std::size_t variables() const { return variables_; }
    [[nodiscard]] std::span<const Monomial> terms() const { return terms_; }
    [[nodiscard]] bool is_zero() const { return terms_.empty(); }
    /// Largest term degree; 0 for the zero polynomial.
    [[nodiscard]] int total_degree() const;
    [[nodiscard]] bool is_homogeneous() const;
    /// Largest exponent of any single variable.
    [[nodiscard]] int max_exponent() const;

    template <typename T>
    [[nodiscard]] T evaluate(std::span<const T> z) const;

    [[nodiscard]] Complex operator()(std::span<const Complex> z) const { return evaluate<Complex>(z); }

    [[nodiscard]] Polynomial derivative(std::size_t variable) const;

    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator-=(const Polynomial& rhs);
    Polynomial& operator*=(Complex scalar);
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(Polynomial a, Complex s) { return a *= s; }
    friend Polynomial operator*(Complex s, Polynomial a) { return a *= s; }
    [[nodiscard]] Polynomial pow(unsigned exponent) const;

    bool operator==(const Polynomial& rhs) const;

    /// Text form: `(re,im)*z0^e0*z1^e1*...` terms joined by ` + `, every
    /// exponent written out, coefficients at 17 significant digits.
    [[nodiscard]] std::string to_string() const;
    /// Parses the text form. Factors `z<i>` without exponent and omitted
    /// variables (exponent 0) are accepted; the coefficient may be `(re,im)`,
    /// a real literal, or absent.
    static Polynomial parse(std::string_view text, std::size_t variables);

private:
    void canonicalize();

    std::size_t variables_;
    std::vector<Monomial> terms_;
};

/// Polynomial whose terms all share the total degree `degree()`.
class HomogeneousPolynomial {
public:
    HomogeneousPolynomial() = default;
    HomogeneousPolynomial(Polynomial poly, int degree);
    HomogeneousPolynomial(std::size_t variables, int degree, std::vector<Monomial> terms)
        : HomogeneousPolynomial(Polynomial(variables, std::move(terms)), degree) {}

    [[nodiscard]] std::size_t k_plus_1() const { return poly_.variables(); }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] std::span<const Monomial> terms() const { return poly_.terms(); }
    [[nodiscard]] const Polynomial& polynomial() const { return poly_; }
    [[nodiscard]] bool is_zero() const { return poly_.is_zero(); }

    /// Deterministic sum of coeff * prod z_i^e_i. Throws std::invalid_argument
    /// when z has the wrong length.
    [[nodiscard]] Complex evaluate(std::span<const Complex> z) const;
    [[nodiscard]] ExtComplex evaluate(std::span<const ExtComplex> z) const;

    [[nodiscard]] std::string to_string() const { return poly_.to_string(); }
    static HomogeneousPolynomial parse(std::string_view text, std::size_t k_plus_1, int degree);
    /// Parses and infers the degree from the terms (zero polynomial rejected).
    static HomogeneousPolynomial parse(std::string_view text, std::size_t k_plus_1);

    bool operator==(const HomogeneousPolynomial& rhs) const = default;

private:
    Polynomial poly_;
    int degree_ = 0;
};

/// All exponent vectors of `variables` entries summing to `degree`, in
/// graded-lex order.
std::vector<std::vector<int>> homogeneous_exponents(std::size_t variables, int degree);

namespace detail {
template <typename T>
T ipow(T base, int exponent) {
    T result(1.0);
    while (exponent > 0) {
        if (exponent & 1) result *= base;
        exponent >>= 1;
        if (exponent > 0) base *= base;
    }
    return result;
}
}  // namespace detail

template <typename T>
T Polynomial::evaluate(std::span<const T> z) const {
    if (z.size() != variables_) {
        throw std::invalid_argument("polynomial evaluation: expected " + std::to_string(variables_) +
                                    " coordinates, got " + std::to_string(z.size()));
    }
    const int max_e = max_exponent();
    const std::size_t stride = static_cast<std::size_t>(max_e) + 1;
    std::vector<T> powers(variables_ * stride, T(1.0));
    for (std::size_t v = 0; v < variables_; ++v) {
        for (int e = 1; e <= max_e; ++e) powers[v * stride + e] = powers[v * stride + e - 1] * z[v];
    }
    T sum(0.0);
    for (const auto& term : terms_) {
        T product(term.coefficient);
        for (std::size_t v = 0; v < variables_; ++v) {
            const int e = term.exponents[v];
            if (e != 0) product *= powers[v * stride + e];
        }
        sum += product;
    }
    return sum;
}

}  // namespace greenlab
