#include "greenlab/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "greenlab/projective.hpp"
#include "greenlab/random.hpp"

namespace greenlab {

int UnivariateRational::degree() const {
    auto effective = [](const CVec& c) {
        int d = static_cast<int>(c.size()) - 1;
        while (d > 0 && c[static_cast<std::size_t>(d)] == Complex(0.0, 0.0)) --d;
        return d;
    };
    return std::max(effective(numerator), effective(denominator));
}

std::pair<Polynomial, Polynomial> UnivariateRational::homogenized_ab() const {
    const int d = degree();
    auto homogenize = [d](const CVec& c) {
        std::vector<Monomial> terms;
        for (std::size_t m = 0; m < c.size(); ++m) {
            if (c[m] == Complex(0.0, 0.0)) continue;
            terms.push_back({{static_cast<int>(m), d - static_cast<int>(m)}, c[m]});
        }
        return Polynomial(2, std::move(terms));
    };
    return {homogenize(numerator), homogenize(denominator)};
}

SphereStatistics sphere_statistics(std::span<const HomogeneousPolynomial> components, std::size_t samples,
                                   std::uint64_t seed) {
    SphereStatistics stats;
    stats.samples = samples;
    stats.min_norm = std::numeric_limits<double>::infinity();
    const std::size_t n = components.size();
    for (std::size_t s = 0; s < samples; ++s) {
        SplitMix64 rng(seed, s);
        const CVec w = unit_sphere_vector(rng, n);
        double norm_sq = 0.0;
        for (const auto& c : components) norm_sq += std::norm(c.evaluate(w));
        const double norm = std::sqrt(norm_sq);
        if (norm < stats.min_norm) {
            stats.min_norm = norm;
            stats.argmin = s;
            stats.argmin_point = w;
        }
        stats.max_norm = std::max(stats.max_norm, norm);
    }
    stats.max_abs_log_norm = std::max(std::abs(std::log(stats.min_norm)), std::abs(std::log(stats.max_norm)));
    return stats;
}

LiftedEndomorphism::LiftedEndomorphism(std::vector<HomogeneousPolynomial> components, bool symbolic, MapFamily family,
                                       std::string id)
    : components_(std::move(components)), family_(family), id_(std::move(id)) {
    if (components_.size() < 2) throw std::invalid_argument("endomorphism needs k+1 >= 2 components");
    degree_ = components_.front().degree();
    if (degree_ < 2) throw std::invalid_argument("endomorphism needs algebraic degree d >= 2");
    for (std::size_t i = 0; i < components_.size(); ++i) {
        const auto& c = components_[i];
        if (c.degree() != degree_) {
            throw std::invalid_argument("component " + std::to_string(i) + " has degree " + std::to_string(c.degree()) +
                                        ", expected " + std::to_string(degree_));
        }
        if (c.k_plus_1() != components_.size()) {
            throw std::invalid_argument("component " + std::to_string(i) + " has " + std::to_string(c.k_plus_1()) +
                                        " variables, expected " + std::to_string(components_.size()));
        }
    }
    derivatives_.resize(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) {
        for (std::size_t j = 0; j < components_.size(); ++j) derivatives_[i].push_back(components_[i].polynomial().derivative(j));
    }

    sphere_ = greenlab::sphere_statistics(components_, kSphereSamples, kSphereSeed);
    c_bound_ = std::max(kSafetyFactor * sphere_.max_abs_log_norm, std::numeric_limits<double>::min());
    if (symbolic) {
        certificate_ = SymbolicCertificate{};
    } else {
        if (!(sphere_.min_norm >= kNondegeneracyThreshold)) {
            std::ostringstream msg;
            msg << "nondegeneracy check failed: |F(w)| = " << sphere_.min_norm << " < " << kNondegeneracyThreshold
                << " at sphere sample " << sphere_.argmin << " w = (";
            for (std::size_t i = 0; i < sphere_.argmin_point.size(); ++i) msg << (i ? ", " : "") << sphere_.argmin_point[i];
            msg << ")";
            throw NondegeneracyError(msg.str(), sphere_.argmin, sphere_.argmin_point);
        }
        certificate_ = ProbabilisticCertificate{sphere_.min_norm, sphere_.samples};
    }
}

bool LiftedEndomorphism::is_monomial() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const HomogeneousPolynomial& p) { return p.terms().size() == 1; });
}

std::optional<std::vector<std::size_t>> LiftedEndomorphism::diagonal_power_structure() const {
    if (!is_monomial()) return std::nullopt;
    std::vector<std::size_t> perm;
    std::vector<bool> used(k_plus_1(), false);
    for (const auto& c : components_) {
        const auto& e = c.terms().front().exponents;
        const auto it = std::find(e.begin(), e.end(), degree_);
        if (it == e.end()) return std::nullopt;
        const auto j = static_cast<std::size_t>(it - e.begin());
        if (used[j]) return std::nullopt;
        used[j] = true;
        perm.push_back(j);
    }
    return perm;
}

CVec LiftedEndomorphism::evaluate(std::span<const Complex> z) const {
    if (z.size() != k_plus_1()) throw std::invalid_argument("eval_map: dimension mismatch");
    CVec out(k_plus_1());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = components_[i].evaluate(z);
    return out;
}

ExtVec LiftedEndomorphism::evaluate(std::span<const ExtComplex> z) const {
    if (z.size() != k_plus_1()) throw std::invalid_argument("eval_map: dimension mismatch");
    ExtVec out(k_plus_1());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = components_[i].evaluate(z);
    return out;
}

CMatrix LiftedEndomorphism::jacobian(std::span<const Complex> z) const {
    if (z.size() != k_plus_1()) throw std::invalid_argument("jacobian: dimension mismatch");
    CMatrix j(k_plus_1(), k_plus_1());
    for (std::size_t r = 0; r < k_plus_1(); ++r) {
        for (std::size_t c = 0; c < k_plus_1(); ++c) {
            j(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = derivatives_[r][c].evaluate<Complex>(z);
        }
    }
    return j;
}

ExtVec LiftedEndomorphism::jacobian(std::span<const ExtComplex> z) const {
    if (z.size() != k_plus_1()) throw std::invalid_argument("jacobian: dimension mismatch");
    const std::size_t n = k_plus_1();
    ExtVec j(n * n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) j[r * n + c] = derivatives_[r][c].evaluate<ExtComplex>(z);
    }
    return j;
}

std::string LiftedEndomorphism::to_string() const {
    std::string out;
    for (const auto& c : components_) out += c.to_string() + "\n";
    return out;
}

LiftedEndomorphism LiftedEndomorphism::parse(std::string_view text) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    std::vector<HomogeneousPolynomial> components;
    for (const auto& line : lines) components.push_back(HomogeneousPolynomial::parse(line, lines.size()));
    return LiftedEndomorphism(std::move(components));
}

Complex eval_poly(const HomogeneousPolynomial& p, std::span<const Complex> z) { return p.evaluate(z); }

CVec eval_map(const LiftedEndomorphism& f, std::span<const Complex> z) { return f.evaluate(z); }

CMatrix jacobian(const LiftedEndomorphism& f, std::span<const Complex> z) { return f.jacobian(z); }

namespace {

HomogeneousPolynomial pure_power(std::size_t variables, std::size_t index, int d) {
    std::vector<int> e(variables, 0);
    e[index] = d;
    return HomogeneousPolynomial(variables, d, {Monomial{std::move(e), 1.0}});
}

void require_kd(int k, int d) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (d < 2) throw std::invalid_argument("d must be >= 2");
}

}  // namespace

LiftedEndomorphism make_power_map(int k, int d) {
    require_kd(k, d);
    const auto n = static_cast<std::size_t>(k) + 1;
    std::vector<HomogeneousPolynomial> comps;
    for (std::size_t i = 0; i < n; ++i) comps.push_back(pure_power(n, i, d));
    return LiftedEndomorphism(std::move(comps), true, MapFamily::Power,
                              "power(k=" + std::to_string(k) + ",d=" + std::to_string(d) + ")");
}

LiftedEndomorphism make_perturbed_power_map(int k, int d, double epsilon, std::uint64_t seed) {
    require_kd(k, d);
    if (!std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be finite");
    const auto n = static_cast<std::size_t>(k) + 1;
    const auto exponents = homogeneous_exponents(n, d);
    std::vector<HomogeneousPolynomial> comps;
    for (std::size_t i = 0; i < n; ++i) {
        SplitMix64 rng(seed, i);
        std::vector<Monomial> terms;
        terms.push_back({pure_power(n, i, d).terms().front().exponents, 1.0});
        for (const auto& e : exponents) terms.push_back({e, epsilon * rng.unit_disk()});
        comps.emplace_back(n, d, std::move(terms));
    }
    char id[128];
    std::snprintf(id, sizeof(id), "perturbed(k=%d,d=%d,eps=%.17g,seed=%llu)", k, d, epsilon,
                  static_cast<unsigned long long>(seed));
    return LiftedEndomorphism(std::move(comps), epsilon == 0.0,
                              epsilon == 0.0 ? MapFamily::Power : MapFamily::PerturbedPower, id);
}

namespace {

// e_j of the pairs (x_i, y_i): coefficient of t^j in prod_i (y_i + t x_i).
std::vector<Polynomial> elementary_pairs(std::span<const Polynomial> x, std::span<const Polynomial> y) {
    const std::size_t vars = x.front().variables();
    std::vector<Polynomial> e{Polynomial::constant(vars, 1.0)};
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<Polynomial> next(e.size() + 1, Polynomial(vars));
        for (std::size_t j = 0; j < e.size(); ++j) {
            next[j] += e[j] * y[i];
            next[j + 1] += e[j] * x[i];
        }
        e = std::move(next);
    }
    return e;
}

Polynomial prune(const Polynomial& p, double threshold) {
    std::vector<Monomial> kept;
    for (const auto& t : p.terms()) {
        if (std::abs(t.coefficient) > threshold) kept.push_back(t);
    }
    return Polynomial(p.variables(), std::move(kept));
}

// Writes a multisymmetric polynomial of multidegree (d,...,d) in the pairs
// (a_i, b_i) as a degree-d form in the e_j(a;b).
HomogeneousPolynomial reduce_multisymmetric(Polynomial target, std::span<const Polynomial> elementary, int k, int d) {
    const auto nk = static_cast<std::size_t>(k);
    std::vector<std::vector<Polynomial>> powers(elementary.size());
    for (std::size_t j = 0; j < elementary.size(); ++j) {
        powers[j].push_back(Polynomial::constant(target.variables(), 1.0));
        for (int m = 1; m <= d; ++m) powers[j].push_back(powers[j].back() * elementary[j]);
    }
    double scale = 0.0;
    for (const auto& t : target.terms()) scale = std::max(scale, std::abs(t.coefficient));
    const double threshold = 1e-12 * std::max(scale, 1.0);

    std::vector<Monomial> result;
    std::size_t guard = 0;
    while (!target.is_zero()) {
        if (++guard > 100000) throw std::logic_error("symmetric reduction: no progress");
        const Monomial lead = target.terms().front();
        std::vector<int> alpha(nk + 1, 0);
        for (std::size_t i = 0; i < nk; ++i) {
            alpha[i] = lead.exponents[i];
            const bool ordered = i == 0 || alpha[i] <= alpha[i - 1];
            if (lead.exponents[nk + i] != d - alpha[i] || !ordered) {
                throw std::logic_error("symmetric reduction: non-symmetric intermediate (internal invariant violation)");
            }
        }
        std::vector<int> m(nk + 1, 0);
        m[0] = d - alpha[0];
        for (std::size_t j = 1; j <= nk; ++j) m[j] = alpha[j - 1] - alpha[j];
        Polynomial product = Polynomial::constant(target.variables(), lead.coefficient);
        for (std::size_t j = 0; j <= nk; ++j) {
            if (m[j] > 0) product = product * powers[j][static_cast<std::size_t>(m[j])];
        }
        target = prune(target - product, threshold);
        result.push_back({m, lead.coefficient});
    }
    return HomogeneousPolynomial(nk + 1, d, std::move(result));
}

}  // namespace

LiftedEndomorphism make_ueda_map(const UnivariateRational& h, int k) {
    const int d = h.degree();
    require_kd(k, d);
    const auto nk = static_cast<std::size_t>(k);
    const std::size_t vars = 2 * nk;
    const auto [p, q] = h.homogenized_ab();

    std::vector<Polynomial> a, b, pa, qb;
    for (std::size_t i = 0; i < nk; ++i) {
        a.push_back(Polynomial::variable(vars, i));
        b.push_back(Polynomial::variable(vars, nk + i));
    }
    // Substitute (a_i, b_i) into the binary forms p and q.
    auto substitute = [&](const Polynomial& form, std::size_t i) {
        Polynomial out(vars);
        for (const auto& t : form.terms()) {
            out += t.coefficient * (a[i].pow(static_cast<unsigned>(t.exponents[0])) *
                                    b[i].pow(static_cast<unsigned>(t.exponents[1])));
        }
        return out;
    };
    for (std::size_t i = 0; i < nk; ++i) {
        pa.push_back(substitute(p, i));
        qb.push_back(substitute(q, i));
    }
    const auto elementary = elementary_pairs(a, b);
    const auto targets = elementary_pairs(pa, qb);

    std::vector<HomogeneousPolynomial> comps;
    for (std::size_t j = 0; j <= nk; ++j) comps.push_back(reduce_multisymmetric(targets[j], elementary, k, d));

    LiftedEndomorphism f(std::move(comps), true, MapFamily::Ueda,
                         "ueda(k=" + std::to_string(k) + ",d=" + std::to_string(d) + ")");
    if (!(f.sphere_statistics().min_norm >= LiftedEndomorphism::kNondegeneracyThreshold)) {
        throw NondegeneracyError("ueda map is degenerate: numerator and denominator of h share a root",
                                 f.sphere_statistics().argmin, f.sphere_statistics().argmin_point);
    }
    f.ueda_ = h;
    return f;
}

CVec symmetrize(std::span<const std::pair<Complex, Complex>> points) {
    CVec e{1.0};
    for (const auto& [a, b] : points) {
        CVec next(e.size() + 1, 0.0);
        for (std::size_t j = 0; j < e.size(); ++j) {
            next[j] += e[j] * b;
            next[j + 1] += e[j] * a;
        }
        e = std::move(next);
    }
    return e;
}

RegularAutomorphism make_henon(Complex a, Complex c) {
    if (a == Complex(0.0, 0.0)) throw std::invalid_argument("henon map with a = 0 is not invertible");
    RegularAutomorphism f;
    const auto x = Polynomial::variable(2, 0);
    const auto y = Polynomial::variable(2, 1);
    const auto one = Polynomial::constant(2, 1.0);
    f.forward_ = {y, y * y + c * one - a * x};
    f.backward_ = {(x * x + c * one - y) * (1.0 / a), x};
    for (const auto& comp : f.forward_) f.derivatives_.push_back({comp.derivative(0), comp.derivative(1)});
    f.d_plus_ = 2;
    f.d_minus_ = 2;
    f.s_ = 1;
    f.filtration_radius_ = std::max(3.0, std::abs(c) + std::abs(a) + 2.0);
    f.henon_ = RegularAutomorphism::HenonParameters{a, c};
    f.i_plus_ = {1.0, 0.0, 0.0};
    f.i_minus_ = {0.0, 1.0, 0.0};
    std::ostringstream id;
    id.precision(17);
    id << "henon(a=" << a << ",c=" << c << ")";
    f.id_ = id.str();
    return f;
}

CVec RegularAutomorphism::apply(std::span<const Complex> z) const {
    if (z.size() != forward_.size()) throw std::invalid_argument("automorphism: dimension mismatch");
    CVec out;
    for (const auto& p : forward_) out.push_back(p.evaluate<Complex>(z));
    return out;
}

ExtVec RegularAutomorphism::apply(std::span<const ExtComplex> z) const {
    if (z.size() != forward_.size()) throw std::invalid_argument("automorphism: dimension mismatch");
    ExtVec out;
    for (const auto& p : forward_) out.push_back(p.evaluate<ExtComplex>(z));
    return out;
}

CVec RegularAutomorphism::apply_inverse(std::span<const Complex> z) const {
    if (z.size() != backward_.size()) throw std::invalid_argument("automorphism: dimension mismatch");
    CVec out;
    for (const auto& p : backward_) out.push_back(p.evaluate<Complex>(z));
    return out;
}

CMatrix RegularAutomorphism::jacobian(std::span<const Complex> z) const {
    if (z.size() != forward_.size()) throw std::invalid_argument("jacobian: dimension mismatch");
    const auto n = static_cast<Eigen::Index>(forward_.size());
    CMatrix j(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            j(r, c) = derivatives_[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].evaluate<Complex>(z);
        }
    }
    return j;
}

bool RegularAutomorphism::in_escape_region(std::span<const Complex> z) const {
    if (henon_) {
        const double ax = std::abs(z[0]);
        const double ay = std::abs(z[1]);
        return ay > filtration_radius_ && ay >= ax;
    }
    double norm = 0.0;
    for (const auto& c : z) norm = std::max(norm, std::abs(c));
    return norm > filtration_radius_;
}

CMatrix jacobian(const RegularAutomorphism& f, std::span<const Complex> z) { return f.jacobian(z); }

}  // namespace greenlab
