#include "greenlab/equidist.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "greenlab/green.hpp"
#include "greenlab/parallel.hpp"

namespace greenlab {

const char* to_string(PreimageSolver s) {
    switch (s) {
        case PreimageSolver::Univariate: return "univariate";
        case PreimageSolver::PowerMap: return "power";
        case PreimageSolver::UedaProduct: return "ueda";
    }
    return "?";
}

PreimageSolver parse_preimage_solver(std::string_view name) {
    if (name == "univariate") return PreimageSolver::Univariate;
    if (name == "power") return PreimageSolver::PowerMap;
    if (name == "ueda") return PreimageSolver::UedaProduct;
    throw std::invalid_argument("unknown preimage solver '" + std::string(name) + "'");
}

PreimageSolver default_solver(const LiftedEndomorphism& f) {
    if (f.k() == 1) return PreimageSolver::Univariate;
    if (f.diagonal_power_structure()) return PreimageSolver::PowerMap;
    if (f.ueda_factor()) return PreimageSolver::UedaProduct;
    throw std::invalid_argument("no preimage solver for map '" + f.id() + "'");
}

namespace {

constexpr double kClusterDistance = 1e-5;

Complex horner(std::span<const Complex> c, Complex x) {
    Complex acc = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) acc = acc * x + c[j];
    return acc;
}

Complex horner_derivative(std::span<const Complex> c, Complex x) {
    Complex acc = 0.0;
    for (std::size_t j = c.size(); j-- > 1;) acc = acc * x + static_cast<double>(j) * c[j];
    return acc;
}

// A few Newton steps on p, kept only while |p| decreases.
Complex polish(std::span<const Complex> c, Complex x) {
    double best = std::abs(horner(c, x));
    for (int it = 0; it < 8 && best > 0.0; ++it) {
        const Complex dp = horner_derivative(c, x);
        if (dp == Complex(0.0)) break;
        const Complex next = x - horner(c, x) / dp;
        const double r = std::abs(horner(c, next));
        if (!(r < best)) break;
        best = r;
        x = next;
    }
    return x;
}

// Groups points closer than kClusterDistance. A computed m-fold root splits
// into m points spread like eps^(1/m) around the true root; their centroid
// (in the chart of the first member) is accurate to O(eps).
std::vector<Preimage> cluster(std::vector<Preimage> points) {
    struct Group {
        Preimage first;
        std::size_t chart;
        Complex sum;
        int members;
    };
    std::vector<Group> groups;
    for (auto& p : points) {
        bool merged = false;
        for (auto& g : groups) {
            if (fs_distance(p.point, g.first.point) < kClusterDistance) {
                g.first.multiplicity += p.multiplicity;
                if (p.point.k() == 1) g.sum += to_affine(p.point, g.chart).front() * static_cast<double>(p.multiplicity);
                g.members += p.multiplicity;
                merged = true;
                break;
            }
        }
        if (!merged) {
            const std::size_t chart = dominant_chart(p.point.coords());
            const int m = p.multiplicity;
            const Complex x = p.point.k() == 1 ? to_affine(p.point, chart).front() : Complex(0.0);
            groups.push_back({std::move(p), chart, x * static_cast<double>(m), m});
        }
    }
    std::vector<Preimage> out;
    for (auto& g : groups) {
        if (g.first.point.k() != 1 || g.members == 1) {
            out.push_back(std::move(g.first));
            continue;
        }
        const Complex centroid = g.sum / static_cast<double>(g.members);
        out.push_back({from_affine(g.chart, std::span<const Complex>(&centroid, 1)), g.first.multiplicity});
    }
    return out;
}

std::vector<Preimage> univariate_preimages(const LiftedEndomorphism& f, const ProjectivePoint& w) {
    if (f.k() != 1) throw std::invalid_argument("univariate solver needs k = 1");
    const int d = f.degree();
    // B(z0, z1) = w1 F0 - w0 F1, coefficient of z0^(d-j) z1^j at index j.
    CVec coeffs(static_cast<std::size_t>(d) + 1, 0.0);
    for (int comp = 0; comp < 2; ++comp) {
        const Complex factor = comp == 0 ? w[1] : -w[0];
        for (const auto& t : f.components()[static_cast<std::size_t>(comp)].terms()) {
            coeffs[static_cast<std::size_t>(t.exponents[1])] += factor * t.coefficient;
        }
    }
    return binary_form_roots(coeffs);
}

std::vector<Preimage> power_preimages(const LiftedEndomorphism& f, const ProjectivePoint& w) {
    const auto perm = f.diagonal_power_structure();
    if (!perm) throw std::invalid_argument("power solver needs components c_i z_perm(i)^d");
    const auto n = f.k_plus_1();
    const int d = f.degree();
    // z_perm(i)^d = w_i / c_i.
    CVec base(n, 0.0);
    std::vector<std::size_t> free_coords;
    for (std::size_t i = 0; i < n; ++i) {
        const Complex c = f.components()[i].terms().front().coefficient;
        const Complex target = w[i] / c;
        const std::size_t j = (*perm)[i];
        if (std::abs(w[i]) > 0.0) {
            base[j] = std::pow(target, 1.0 / d);
            free_coords.push_back(j);
        }
    }
    if (free_coords.empty()) throw std::domain_error("power solver: zero target");
    // The first nonzero coordinate is fixed (global d-th roots of unity act
    // trivially on P^k); the others range over all d-th roots.
    const std::size_t varying = free_coords.size() - 1;
    const int multiplicity = static_cast<int>(std::lround(std::pow(d, static_cast<double>(n - free_coords.size()))));
    std::size_t branches = 1;
    for (std::size_t i = 0; i < varying; ++i) branches *= static_cast<std::size_t>(d);
    std::vector<Preimage> out;
    out.reserve(branches);
    for (std::size_t b = 0; b < branches; ++b) {
        CVec z = base;
        std::size_t code = b;
        for (std::size_t i = 1; i < free_coords.size(); ++i) {
            const auto r = static_cast<double>(code % static_cast<std::size_t>(d));
            code /= static_cast<std::size_t>(d);
            z[free_coords[i]] *= std::polar(1.0, 2.0 * std::numbers::pi * r / d);
        }
        out.push_back({projective_point(z), multiplicity});
    }
    return out;
}

std::vector<Preimage> ueda_preimages(const LiftedEndomorphism& f, const ProjectivePoint& w) {
    const auto& h = f.ueda_factor();
    if (!h) throw std::invalid_argument("ueda solver needs a map built by make_ueda_map");
    const int k = f.k();
    // prod_i (b_i T0 + a_i T1) = sum_j w_j T0^(k-j) T1^j; a root [T0:T1] gives [a:b] = [T0:-T1].
    auto factors = binary_form_roots(w.coords());
    std::vector<std::pair<Complex, Complex>> targets;
    for (const auto& r : factors) {
        for (int m = 0; m < r.multiplicity; ++m) targets.emplace_back(r.point[0], -r.point[1]);
    }
    const auto [p, q] = h->homogenized_ab();
    const int dh = h->degree();
    // Preimages of [a_i:b_i] under h: a_i q(a,b) - b_i p(a,b) = 0, in the
    // binary-form convention coefficient of b^(d-j) a^j, i.e. [T0:T1] = [b:a].
    std::vector<std::vector<Preimage>> fibres;
    for (const auto& [ai, bi] : targets) {
        CVec coeffs(static_cast<std::size_t>(dh) + 1, 0.0);
        for (const auto& t : q.terms()) coeffs[static_cast<std::size_t>(t.exponents[0])] += ai * t.coefficient;
        for (const auto& t : p.terms()) coeffs[static_cast<std::size_t>(t.exponents[0])] -= bi * t.coefficient;
        fibres.push_back(binary_form_roots(coeffs));
    }
    std::vector<Preimage> out;
    std::vector<std::size_t> pick(static_cast<std::size_t>(k), 0);
    while (true) {
        std::vector<std::pair<Complex, Complex>> ab;
        int mult = 1;
        for (std::size_t i = 0; i < pick.size(); ++i) {
            const auto& r = fibres[i][pick[i]];
            ab.emplace_back(r.point[1], r.point[0]);
            mult *= r.multiplicity;
        }
        out.push_back({projective_point(symmetrize(ab)), mult});
        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == fibres[i].size()) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    return cluster(std::move(out));
}

}  // namespace

std::vector<Preimage> binary_form_roots(std::span<const Complex> coefficients) {
    if (coefficients.empty()) throw std::invalid_argument("binary form needs at least one coefficient");
    const std::size_t m = coefficients.size() - 1;
    double scale = 0.0;
    for (auto c : coefficients) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) throw std::domain_error("binary form vanishes identically");
    CVec c(coefficients.begin(), coefficients.end());
    for (auto& x : c) x /= scale;

    std::size_t top = m;
    while (c[top] == Complex(0.0)) --top;
    std::size_t low = 0;
    while (c[low] == Complex(0.0)) ++low;

    std::vector<Preimage> roots;
    if (m > top) roots.push_back({projective_point({0.0, 1.0}), static_cast<int>(m - top)});
    if (low > 0) roots.push_back({projective_point({1.0, 0.0}), static_cast<int>(low)});

    const std::size_t deg = top - low;
    if (deg > 0) {
        std::span<const Complex> core(c.data() + low, deg + 1);
        CVec reversed(core.rbegin(), core.rend());
        CMatrix companion = CMatrix::Zero(static_cast<Eigen::Index>(deg), static_cast<Eigen::Index>(deg));
        for (std::size_t i = 0; i < deg; ++i) {
            companion(0, static_cast<Eigen::Index>(i)) = -core[deg - 1 - i] / core[deg];
            if (i + 1 < deg) companion(static_cast<Eigen::Index>(i) + 1, static_cast<Eigen::Index>(i)) = 1.0;
        }
        Eigen::ComplexEigenSolver<CMatrix> solver(companion, false);
        if (solver.info() != Eigen::Success) throw std::runtime_error("companion eigenvalue solver failed");
        std::vector<Preimage> finite;
        for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
            const Complex x = solver.eigenvalues()(i);
            if (std::abs(x) <= 1.0) {
                finite.push_back({projective_point({1.0, polish(core, x)}), 1});
            } else {
                const Complex y = polish(reversed, 1.0 / x);
                finite.push_back({projective_point({y, 1.0}), 1});
            }
        }
        for (auto& r : finite) roots.push_back(std::move(r));
    }
    return cluster(std::move(roots));
}

std::vector<Preimage> preimages(const LiftedEndomorphism& f, const ProjectivePoint& w, PreimageSolver solver) {
    if (w.k_plus_1() != f.k_plus_1()) throw std::invalid_argument("preimages: dimension mismatch");
    std::vector<Preimage> out;
    switch (solver) {
        case PreimageSolver::Univariate: out = univariate_preimages(f, w); break;
        case PreimageSolver::PowerMap: out = power_preimages(f, w); break;
        case PreimageSolver::UedaProduct: out = ueda_preimages(f, w); break;
    }
    double worst = 0.0;
    const Preimage* worst_point = nullptr;
    for (const auto& p : out) {
        const double r = wedge_norm(normalize(f.evaluate(p.point.coords())).point.coords(), w.coords());
        if (r > worst) {
            worst = r;
            worst_point = &p;
        }
    }
    if (worst >= kPreimageResidualTol) {
        throw PreimageError("preimage residual " + std::to_string(worst) + " exceeds tolerance", worst_point->point.coords(),
                            worst);
    }
    return out;
}

EmpiricalMeasure backward_orbit_measure(const LiftedEndomorphism& f, const ProjectivePoint& a, int n,
                                        std::size_t max_atoms, std::uint64_t seed, PreimageSolver solver) {
    if (n < 1) throw std::invalid_argument("backward_orbit_measure: n must be >= 1");
    if (max_atoms < 1000) throw std::invalid_argument("backward_orbit_measure: max_atoms must be >= 1000");
    const double fibre = std::pow(static_cast<double>(f.degree()), f.k());

    EmpiricalMeasure m;
    m.atoms.push_back({a, 1.0});
    for (int level = 1; level <= n; ++level) {
        auto children = parallel::map_indices<std::vector<Atom>>(m.atoms.size(), [&](std::size_t i) {
            std::vector<Atom> out;
            try {
                for (auto& p : preimages(f, m.atoms[i].point, solver)) {
                    out.push_back({std::move(p.point), m.atoms[i].weight * p.multiplicity / fibre});
                }
            } catch (const PreimageError& e) {
                throw PreimageError(std::string(e.what()) + " at level " + std::to_string(level) + ", atom " +
                                        std::to_string(i),
                                    e.worst, e.residual);
            }
            return out;
        });
        std::vector<Atom> next;
        for (auto& c : children) {
            for (auto& atom : c) next.push_back(std::move(atom));
        }
        if (next.size() > max_atoms) {
            // Stratified resampling: one uniform draw inside each of max_atoms
            // equal slices of the cumulative weight. A single shared offset
            // would pick the same branch of every sibling group.
            std::vector<double> weights(next.size());
            for (std::size_t i = 0; i < next.size(); ++i) weights[i] = next[i].weight;
            const double total = parallel::pairwise_sum(weights);
            SplitMix64 rng(seed, static_cast<std::uint64_t>(level));
            const double step = total / static_cast<double>(max_atoms);
            double cumulative = 0.0;
            std::vector<Atom> kept;
            std::size_t j = 0;
            for (std::size_t i = 0; i < max_atoms; ++i) {
                const double position = (static_cast<double>(i) + rng.uniform()) * step;
                while (j + 1 < next.size() && cumulative + next[j].weight <= position) cumulative += next[j++].weight;
                if (!kept.empty() && kept.back().point.coords() == next[j].point.coords()) {
                    kept.back().weight += 1.0 / static_cast<double>(max_atoms);
                } else {
                    kept.push_back({next[j].point, 1.0 / static_cast<double>(max_atoms)});
                }
            }
            next = std::move(kept);
            ++m.resampled_levels;
        }
        m.atoms = std::move(next);
    }
    std::vector<double> weights(m.atoms.size());
    for (std::size_t i = 0; i < m.atoms.size(); ++i) weights[i] = m.atoms[i].weight;
    m.total = parallel::pairwise_sum(weights);
    return m;
}

double ks_angle_distance(const EmpiricalMeasure& m) {
    std::vector<std::pair<double, double>> angle_weight;
    angle_weight.reserve(m.atoms.size());
    for (const auto& atom : m.atoms) {
        if (atom.point.k() != 1) throw std::invalid_argument("ks_angle_distance needs k = 1");
        const Complex z0 = atom.point[0];
        const Complex z1 = atom.point[1];
        const double angle = (z0 == Complex(0.0) || z1 == Complex(0.0)) ? -std::numbers::pi : std::arg(z1 / z0);
        angle_weight.emplace_back(angle, atom.weight / m.total);
    }
    std::sort(angle_weight.begin(), angle_weight.end());
    double cumulative = 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < angle_weight.size(); ++i) {
        const double cdf = (angle_weight[i].first + std::numbers::pi) / (2.0 * std::numbers::pi);
        worst = std::max(worst, std::abs(cumulative - cdf));
        cumulative += angle_weight[i].second;
        // Ties: evaluate the right limit after the last atom at this angle.
        if (i + 1 == angle_weight.size() || angle_weight[i + 1].first != angle_weight[i].first)
            worst = std::max(worst, std::abs(cumulative - cdf));
    }
    return worst;
}

std::vector<double> torus_moments(const EmpiricalMeasure& m) {
    if (m.atoms.empty()) throw std::invalid_argument("torus_moments: empty measure");
    const std::size_t n = m.atoms.front().point.k_plus_1();
    std::vector<std::vector<double>> columns;
    auto column = [&](auto&& stat) {
        std::vector<double> v(m.atoms.size());
        for (std::size_t i = 0; i < m.atoms.size(); ++i) v[i] = m.atoms[i].weight * stat(m.atoms[i].point);
        columns.push_back(std::move(v));
    };
    for (std::size_t i = 0; i < n; ++i) column([i](const ProjectivePoint& p) { return std::norm(p[i]); });
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            column([i, j](const ProjectivePoint& p) { return (p[i] * std::conj(p[j])).real(); });
            column([i, j](const ProjectivePoint& p) { return (p[i] * std::conj(p[j])).imag(); });
        }
    }
    column([](const ProjectivePoint& p) { return std::norm(p[0] * p[1]); });
    std::vector<double> out;
    for (std::size_t c = 0; c < columns.size() && out.size() < 10; ++c) out.push_back(parallel::pairwise_sum(columns[c]) / m.total);
    return out;
}

std::vector<double> torus_moment_oracle(int k) {
    const auto n = static_cast<std::size_t>(k) + 1;
    const double inv = 1.0 / static_cast<double>(n);
    std::vector<double> out(n, inv);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            out.push_back(0.0);
            out.push_back(0.0);
        }
    }
    out.push_back(inv * inv);
    out.resize(std::min<std::size_t>(out.size(), 10));
    return out;
}

PotentialResidual potential_residual(const EmpiricalMeasure& m, const LiftedEndomorphism& f,
                                     std::span<const ProjectivePoint> test_points, double tol) {
    PotentialResidual out;
    if (f.k() >= 2) {
        if (!f.diagonal_power_structure()) throw std::invalid_argument("moment residual needs a power map oracle");
        const auto moments = torus_moments(m);
        const auto oracle = torus_moment_oracle(f.k());
        for (std::size_t i = 0; i < moments.size(); ++i) {
            out.per_point.push_back(std::abs(moments[i] - oracle[i]));
            out.residual = std::max(out.residual, out.per_point.back());
        }
        return out;
    }
    // Infinity must be totally invariant: F(0, 1) is a multiple of (0, 1).
    const CVec at_infinity = f.evaluate(CVec{0.0, 1.0});
    if (std::abs(at_infinity[0]) > 1e-14 * std::abs(at_infinity[1]))
        throw std::invalid_argument("potential residual needs a polynomial map (infinity totally invariant)");
    const double g_infinity = green_lift(f, CVec{0.0, 1.0}, tol).value;

    std::vector<Complex> xs(m.atoms.size());
    std::vector<bool> at_inf(m.atoms.size());
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
        at_inf[i] = m.atoms[i].point[0] == Complex(0.0);
        if (!at_inf[i]) xs[i] = m.atoms[i].point[1] / m.atoms[i].point[0];
    }
    for (const auto& t : test_points) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& atom : m.atoms) nearest = std::min(nearest, fs_distance(t, atom.point));
        if (t[0] == Complex(0.0) || nearest < kSupportExclusion) {
            ++out.excluded;
            out.per_point.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const Complex x = t[1] / t[0];
        std::vector<double> terms(m.atoms.size());
        for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            if (at_inf[i]) throw std::invalid_argument("potential residual: atom at infinity");
            terms[i] = m.atoms[i].weight * std::log(std::abs(x - xs[i]));
        }
        const double integral = parallel::pairwise_sum(terms) / m.total;
        const double expected = green_lift(f, CVec{1.0, x}, tol).value - g_infinity;
        out.per_point.push_back(std::abs(integral - expected));
        out.residual = std::max(out.residual, out.per_point.back());
    }
    return out;
}

int local_degree_estimate(const LiftedEndomorphism& f, const ProjectivePoint& x, int n, PreimageSolver solver,
                          double radius, double offset) {
    if (n < 1) throw std::invalid_argument("local_degree_estimate: n must be >= 1");
    CVec image = x.coords();
    for (int j = 0; j < n; ++j) image = normalize(f.evaluate(image)).point.coords();
    const auto frame = tangent_frame(image);
    CVec target = image;
    for (std::size_t i = 0; i < target.size(); ++i) target[i] += Complex(0.6, 0.8) * offset * frame.front()[i];

    std::vector<Preimage> level{{projective_point(target), 1}};
    for (int j = 0; j < n; ++j) {
        std::vector<Preimage> next;
        for (const auto& p : level) {
            for (auto& q : preimages(f, p.point, solver)) next.push_back({std::move(q.point), p.multiplicity * q.multiplicity});
        }
        level = std::move(next);
    }
    int count = 0;
    for (const auto& p : level) {
        if (fs_distance(p.point, x) < radius) count += p.multiplicity;
    }
    return count;
}

}  // namespace greenlab
