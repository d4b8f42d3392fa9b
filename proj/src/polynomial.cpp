#include "greenlab/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <sstream>

namespace greenlab {

int Monomial::degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

bool graded_lex_before(const std::vector<int>& a, const std::vector<int>& b) {
    const int da = std::accumulate(a.begin(), a.end(), 0);
    const int db = std::accumulate(b.begin(), b.end(), 0);
    if (da != db) return da > db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

Polynomial::Polynomial(std::size_t variables, std::vector<Monomial> terms)
    : variables_(variables), terms_(std::move(terms)) {
    if (variables_ == 0) throw std::invalid_argument("polynomial needs at least one variable");
    for (const auto& t : terms_) {
        if (t.exponents.size() != variables_) {
            throw std::invalid_argument("monomial has " + std::to_string(t.exponents.size()) +
                                        " exponents, expected " + std::to_string(variables_));
        }
        for (int e : t.exponents) {
            if (e < 0) throw std::invalid_argument("negative exponent in monomial");
        }
        if (!std::isfinite(t.coefficient.real()) || !std::isfinite(t.coefficient.imag())) {
            throw std::invalid_argument("non-finite monomial coefficient");
        }
    }
    canonicalize();
}

Polynomial Polynomial::constant(std::size_t variables, Complex value) {
    return Polynomial(variables, {Monomial{std::vector<int>(variables, 0), value}});
}

Polynomial Polynomial::variable(std::size_t variables, std::size_t index) {
    std::vector<int> e(variables, 0);
    e.at(index) = 1;
    return Polynomial(variables, {Monomial{std::move(e), 1.0}});
}

void Polynomial::canonicalize() {
    std::stable_sort(terms_.begin(), terms_.end(),
                     [](const Monomial& a, const Monomial& b) { return graded_lex_before(a.exponents, b.exponents); });
    std::vector<Monomial> merged;
    merged.reserve(terms_.size());
    for (auto& t : terms_) {
        if (!merged.empty() && merged.back().exponents == t.exponents) {
            merged.back().coefficient += t.coefficient;
        } else {
            merged.push_back(std::move(t));
        }
    }
    std::erase_if(merged, [](const Monomial& m) { return m.coefficient == Complex(0.0, 0.0); });
    terms_ = std::move(merged);
}

int Polynomial::total_degree() const { return terms_.empty() ? 0 : terms_.front().degree(); }

bool Polynomial::is_homogeneous() const {
    if (terms_.empty()) return true;
    const int d = terms_.front().degree();
    return std::all_of(terms_.begin(), terms_.end(), [d](const Monomial& m) { return m.degree() == d; });
}

int Polynomial::max_exponent() const {
    int m = 0;
    for (const auto& t : terms_)
        for (int e : t.exponents) m = std::max(m, e);
    return m;
}

Polynomial Polynomial::derivative(std::size_t variable) const {
    if (variable >= variables_) throw std::invalid_argument("derivative: variable index out of range");
    std::vector<Monomial> out;
    for (const auto& t : terms_) {
        const int e = t.exponents[variable];
        if (e == 0) continue;
        Monomial m = t;
        m.coefficient *= static_cast<double>(e);
        m.exponents[variable] = e - 1;
        out.push_back(std::move(m));
    }
    return Polynomial(variables_, std::move(out));
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    if (rhs.variables_ != variables_) throw std::invalid_argument("polynomial sum: variable count mismatch");
    terms_.insert(terms_.end(), rhs.terms_.begin(), rhs.terms_.end());
    canonicalize();
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) { return *this += rhs * Complex(-1.0, 0.0); }

Polynomial& Polynomial::operator*=(Complex scalar) {
    for (auto& t : terms_) t.coefficient *= scalar;
    canonicalize();
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.variables_ != b.variables_) throw std::invalid_argument("polynomial product: variable count mismatch");
    std::vector<Monomial> out;
    out.reserve(a.terms_.size() * b.terms_.size());
    for (const auto& ta : a.terms_) {
        for (const auto& tb : b.terms_) {
            Monomial m{ta.exponents, ta.coefficient * tb.coefficient};
            for (std::size_t v = 0; v < a.variables_; ++v) m.exponents[v] += tb.exponents[v];
            out.push_back(std::move(m));
        }
    }
    return Polynomial(a.variables_, std::move(out));
}

Polynomial Polynomial::pow(unsigned exponent) const {
    Polynomial result = constant(variables_, 1.0);
    Polynomial base = *this;
    while (exponent > 0) {
        if (exponent & 1u) result = result * base;
        exponent >>= 1u;
        if (exponent > 0) base = base * base;
    }
    return result;
}

bool Polynomial::operator==(const Polynomial& rhs) const {
    if (variables_ != rhs.variables_ || terms_.size() != rhs.terms_.size()) return false;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (terms_[i].exponents != rhs.terms_[i].exponents || terms_[i].coefficient != rhs.terms_[i].coefficient) {
            return false;
        }
    }
    return true;
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view s, std::string_view context) {
    s = trim(s);
    std::string owned(s);
    char* end = nullptr;
    const double v = std::strtod(owned.c_str(), &end);
    if (owned.empty() || end != owned.c_str() + owned.size()) {
        throw std::invalid_argument("polynomial parse: bad number '" + owned + "' in '" + std::string(context) + "'");
    }
    return v;
}

int parse_int(std::string_view s, std::string_view context) {
    s = trim(s);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw std::invalid_argument("polynomial parse: bad integer '" + std::string(s) + "' in '" +
                                    std::string(context) + "'");
    }
    return v;
}

// Splits on `sep` at parenthesis depth zero.
std::vector<std::string_view> split_top_level(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (c == sep && depth == 0) {
            // a '+' inside an exponent literal such as 1e+5 is not a separator
            const bool exponent_sign = sep == '+' && i > 0 && (s[i - 1] == 'e' || s[i - 1] == 'E') && i > 1 &&
                                       std::isdigit(static_cast<unsigned char>(s[i - 2]));
            if (exponent_sign) continue;
            parts.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(s.substr(start));
    return parts;
}

Complex parse_coefficient(std::string_view s, std::string_view context) {
    s = trim(s);
    if (!s.empty() && s.front() == '(') {
        if (s.back() != ')') throw std::invalid_argument("polynomial parse: unbalanced coefficient in '" + std::string(context) + "'");
        const auto inner = s.substr(1, s.size() - 2);
        const auto comma = inner.find(',');
        if (comma == std::string_view::npos) return {parse_double(inner, context), 0.0};
        return {parse_double(inner.substr(0, comma), context), parse_double(inner.substr(comma + 1), context)};
    }
    return {parse_double(s, context), 0.0};
}

}  // namespace

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
        if (i > 0) out << " + ";
        const auto& t = terms_[i];
        out << '(' << format_double(t.coefficient.real()) << ',' << format_double(t.coefficient.imag()) << ')';
        for (std::size_t v = 0; v < variables_; ++v) out << "*z" << v << '^' << t.exponents[v];
    }
    return out.str();
}

Polynomial Polynomial::parse(std::string_view text, std::size_t variables) {
    text = trim(text);
    if (text.empty()) throw std::invalid_argument("polynomial parse: empty text");
    if (text == "0") return Polynomial(variables);
    std::vector<Monomial> terms;
    for (auto term_text : split_top_level(text, '+')) {
        term_text = trim(term_text);
        if (term_text.empty()) throw std::invalid_argument("polynomial parse: empty term in '" + std::string(text) + "'");
        Monomial m{std::vector<int>(variables, 0), 1.0};
        for (auto factor : split_top_level(term_text, '*')) {
            factor = trim(factor);
            if (!factor.empty() && factor.front() == 'z') {
                const auto caret = factor.find('^');
                const auto index = parse_int(factor.substr(1, caret == std::string_view::npos ? factor.npos : caret - 1), term_text);
                const int e = caret == std::string_view::npos ? 1 : parse_int(factor.substr(caret + 1), term_text);
                if (index < 0 || static_cast<std::size_t>(index) >= variables) {
                    throw std::invalid_argument("polynomial parse: variable z" + std::to_string(index) +
                                                " out of range for " + std::to_string(variables) + " variables");
                }
                if (e < 0) throw std::invalid_argument("polynomial parse: negative exponent in '" + std::string(term_text) + "'");
                m.exponents[static_cast<std::size_t>(index)] += e;
            } else {
                m.coefficient *= parse_coefficient(factor, term_text);
            }
        }
        terms.push_back(std::move(m));
    }
    return Polynomial(variables, std::move(terms));
}

HomogeneousPolynomial::HomogeneousPolynomial(Polynomial poly, int degree) : poly_(std::move(poly)), degree_(degree) {
    if (degree_ < 0) throw std::invalid_argument("homogeneous polynomial: negative degree");
    for (const auto& t : poly_.terms()) {
        if (t.degree() != degree_) {
            throw std::invalid_argument("homogeneous polynomial: term of degree " + std::to_string(t.degree()) +
                                        " in a polynomial of degree " + std::to_string(degree_));
        }
    }
}

Complex HomogeneousPolynomial::evaluate(std::span<const Complex> z) const { return poly_.evaluate<Complex>(z); }

ExtComplex HomogeneousPolynomial::evaluate(std::span<const ExtComplex> z) const { return poly_.evaluate<ExtComplex>(z); }

HomogeneousPolynomial HomogeneousPolynomial::parse(std::string_view text, std::size_t k_plus_1, int degree) {
    return HomogeneousPolynomial(Polynomial::parse(text, k_plus_1), degree);
}

HomogeneousPolynomial HomogeneousPolynomial::parse(std::string_view text, std::size_t k_plus_1) {
    auto poly = Polynomial::parse(text, k_plus_1);
    if (poly.is_zero()) throw std::invalid_argument("homogeneous polynomial: cannot infer the degree of 0");
    const int d = poly.total_degree();
    return HomogeneousPolynomial(std::move(poly), d);
}

std::vector<std::vector<int>> homogeneous_exponents(std::size_t variables, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> current(variables, 0);
    // Recursive fill: first variable takes the largest share first, which is
    // graded-lex order already.
    auto fill = [&](auto&& self, std::size_t v, int remaining) -> void {
        if (v + 1 == variables) {
            current[v] = remaining;
            out.push_back(current);
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            current[v] = e;
            self(self, v + 1, remaining - e);
        }
    };
    fill(fill, 0, degree);
    return out;
}

}  // namespace greenlab
