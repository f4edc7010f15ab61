#pragma once

#include "lie_core.hpp"
#include "quadrature.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <functional>
#include <random>
#include <sstream>

namespace eqszego {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

// Product formula evaluated as a polynomial in nu; valid for any real nu.
inline double weyl_dimension_polynomial(const InvariantMetric& metric, const Vec& nu) {
    const auto& G = metric.group();
    double d = 1.0;
    for (const Vec& beta : G.positive_roots)
        d *= metric.cartan_dual_inner(nu, beta) / metric.cartan_dual_inner(G.delta, beta);
    return d;
}

// d_nu for nu in E^G: the product formula, rounded to the integer it must be.
inline double weyl_dimension(const InvariantMetric& metric, const Vec& nu) {
    const HalfWeight w(metric, nu);
    if (!w.integral()) throw PreconditionError("nu - delta is not in the weight lattice");
    const double d = weyl_dimension_polynomial(metric, nu);
    const double r = std::round(d);
    if (std::abs(d - r) > 1e-9 * std::max(1.0, r) || r < 1.0)
        throw NumericalError("Weyl dimension " + std::to_string(d) + " is not a positive integer");
    return r;
}

namespace detail {

// 2*nu as integers; nu must be a half-integer vector.
inline std::vector<BigInt> doubled_integers(const Vec& nu) {
    std::vector<BigInt> out;
    for (int i = 0; i < nu.size(); ++i) {
        const double t = 2.0 * nu[i];
        if (std::abs(t - std::round(t)) > 1e-12) throw PreconditionError("exact arithmetic needs half-integer coordinates");
        out.emplace_back(static_cast<long long>(std::llround(t)));
    }
    return out;
}

// Trace-form pairing of a Cartan covector with e_i - e_j, times two.
inline BigInt doubled_root_pairing(const CompactGroup& G, const std::vector<BigInt>& c2, int i, int j) {
    if (G.spec.kind == GroupKind::special_unitary) {
        BigInt s = 0;
        for (int a = i; a < j; ++a) s += c2[a];
        return s;
    }
    return c2[i] - c2[j];
}

}  // namespace detail

// Exact product formula with the trace form (ratios do not depend on the invariant metric).
inline BigRational exact_weyl_dimension(const CompactGroup& G, const Vec& nu) {
    const auto n2 = detail::doubled_integers(nu);
    const auto d2 = detail::doubled_integers(G.delta);
    BigRational d = 1;
    for (auto [i, j] : G.root_pairs)
        d *= BigRational(detail::doubled_root_pairing(G, n2, i, j), detail::doubled_root_pairing(G, d2, i, j));
    return d;
}

struct DimScaling {
    BigInt d_k_nu;
    BigInt d_nu;
    int n_g = 0;
    int k = 1;
};

inline DimScaling dim_scaling(const InvariantMetric& metric, const Vec& nu, int k) {
    if (k < 1) throw ConfigError("dim_scaling: k must be a positive integer");
    const auto& G = metric.group();
    const HalfWeight w(metric, nu);
    if (!w.integral()) throw PreconditionError("nu - delta is not in the weight lattice");
    const Vec knu = static_cast<double>(k) * nu;
    const BigRational dk = exact_weyl_dimension(G, knu), d1 = exact_weyl_dimension(G, nu);
    if (denominator(dk) != 1 || denominator(d1) != 1) throw NumericalError("Weyl dimension is not an integer");
    DimScaling out{numerator(dk), numerator(d1), G.n_g, k};
    BigInt kp = 1;
    for (int i = 0; i < G.n_g; ++i) kp *= k;
    if (out.d_k_nu != kp * out.d_nu) throw NumericalError("scaling law d_{k nu} = k^{n_G} d_nu fails");
    return out;
}

struct CharacterOptions {
    bool allow_wall_extrapolation = true;
    double wall_threshold = 1e-8;
    double step = 1e-3;
};

namespace detail {

inline cplx alternant(const CompactGroup& G, const Vec& gamma, const Vec& theta) {
    std::vector<cplx> terms;
    terms.reserve(G.weyl_group.size());
    for (const auto& s : G.weyl_group)
        terms.push_back(static_cast<double>(s.sign) * std::polar(1.0, (s.coalgebra_action * gamma).dot(theta)));
    return pairwise_sum(terms);
}

inline Vec regular_direction(const CompactGroup& G) {
    std::mt19937_64 rng(0x5eedULL);
    std::normal_distribution<double> N(0.0, 1.0);
    while (true) {
        Vec dir(G.rank);
        for (int a = 0; a < G.rank; ++a) dir[a] = N(rng);
        dir.normalize();
        bool ok = true;
        for (const Vec& b : G.positive_roots) ok = ok && std::abs(b.dot(dir)) > 1e-2;
        if (ok) return dir;
    }
}

}  // namespace detail

// chi_nu at t = exp(sum theta_a H_a), theta in Cartan algebra coordinates.
inline cplx weyl_character(const InvariantMetric& metric, const Vec& nu, const Vec& theta,
                           const CharacterOptions& opt = {}) {
    const auto& G = metric.group();
    if (theta.size() != G.rank) throw ConfigError("weyl_character: angles must have rank many entries");
    const Vec diag = G.cartan_diag * theta;
    bool identity = true;
    for (int j = 0; j < diag.size(); ++j) identity = identity && std::abs(std::polar(1.0, diag[j]) - 1.0) < 1e-15;
    if (identity) return weyl_dimension_polynomial(metric, nu);

    const cplx den = detail::alternant(G, G.delta, theta);
    if (std::abs(den) >= opt.wall_threshold) return detail::alternant(G, nu, theta) / den;

    if (!opt.allow_wall_extrapolation) {
        std::size_t worst = 0;
        double best = 1e300;
        for (std::size_t i = 0; i < G.positive_roots.size(); ++i) {
            const double v = std::abs(std::sin(0.5 * G.positive_roots[i].dot(theta)));
            if (v < best) best = v, worst = i;
        }
        const auto [i, j] = G.root_pairs[worst];
        throw PreconditionError("torus element lies on the wall of root e" + std::to_string(i + 1) + " - e" +
                                std::to_string(j + 1));
    }
    const Vec dir = detail::regular_direction(G);
    auto f = [&](double h) {
        const Vec t = theta + h * dir;
        return detail::alternant(G, nu, t) / detail::alternant(G, G.delta, t);
    };
    const double h = opt.step;
    return (8.0 * f(h / 4.0) - 6.0 * f(h / 2.0) + f(h)) / 3.0;
}

// chi_nu on an arbitrary group element.
inline cplx character(const InvariantMetric& metric, const Vec& nu, const CMat& g) {
    return weyl_character(metric, nu, metric.group().eigen_angles(g));
}

namespace detail {

inline double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

// Eigen-angles of -i xi; throws outside the injectivity domain (all angles in (-pi, pi)).
inline Vec algebra_eigen_angles(const CompactGroup& G, const Vec& xi) {
    const CMat X = G.to_matrix(xi);
    const cplx I(0.0, 1.0);
    Eigen::SelfAdjointEigenSolver<CMat> es(-I * X);
    const Vec th = es.eigenvalues();
    if (th.cwiseAbs().maxCoeff() >= pi) throw PreconditionError("xi lies outside the injectivity domain of exp");
    return th;
}

}  // namespace detail

// P(xi) with exp^*(dV_G) = P^2 d xi.
inline double exp_jacobian(const InvariantMetric& metric, const Vec& xi) {
    const auto& G = metric.group();
    const Vec th = detail::algebra_eigen_angles(G, xi);
    if (G.spec.kind == GroupKind::torus) return 1.0;
    double p = 1.0;
    for (Eigen::Index i = 0; i < th.size(); ++i)
        for (std::size_t j = i + 1; j < static_cast<std::size_t>(th.size()); ++j)
            p *= detail::sinc(0.5 * (th[i] - th[j]));
    return p;
}

// Same quantity from a central-difference Jacobian of the matrix exponential.
inline double exp_jacobian_fd(const InvariantMetric& metric, const Vec& xi, double h = 1e-5) {
    const auto& G = metric.group();
    (void)detail::algebra_eigen_angles(G, xi);
    const CMat X = G.to_matrix(xi);
    const CMat ginv = X.exp().adjoint();
    Mat M(G.dim, G.dim);
    for (int b = 0; b < G.dim; ++b) {
        const CMat dg = ((X + h * G.basis[b]).exp() - (X - h * G.basis[b]).exp()) / (2.0 * h);
        M.col(b) = G.to_coords(ginv * dg);
    }
    return std::sqrt(std::abs(M.determinant()));
}

struct OrbitQuadrature {
    GroupPtr group;
    std::vector<Vec> nodes;  // coalgebra covectors
    std::vector<double> weights;
    std::string scheme;
    bool monte_carlo = false;
    double symplectic_volume = 0.0;  // independent of the weights in Monte Carlo mode
};

namespace detail {

inline Mat phi_orthonormalize(const InvariantMetric& metric, const std::vector<Vec>& vs, double tol = 1e-10) {
    std::vector<Vec> out;
    for (Vec v : vs) {
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& q : out) v -= metric.inner(q, v) * q;
        const double n = metric.norm(v);
        if (n > tol) out.push_back(v / n);
    }
    Mat Q(vs.empty() ? 0 : vs.front().size(), static_cast<int>(out.size()));
    for (std::size_t i = 0; i < out.size(); ++i) Q.col(static_cast<int>(i)) = out[i];
    return Q;
}

inline CMat haar_random(const CompactGroup& G, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    const int n = G.matrix_size;
    if (G.spec.kind == GroupKind::torus) {
        std::uniform_real_distribution<double> U(0.0, 2.0 * pi);
        CMat g = CMat::Zero(n, n);
        for (int j = 0; j < n; ++j) g(j, j) = std::polar(1.0, U(rng));
        return g;
    }
    CMat Z(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Z(i, j) = cplx(N(rng), N(rng));
    Eigen::HouseholderQR<CMat> qr(Z);
    CMat Q = qr.householderQ();
    const CMat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) Q.col(j) *= R(j, j) / std::abs(R(j, j));
    if (G.spec.kind == GroupKind::special_unitary) Q *= std::pow(Q.determinant(), -1.0 / n);
    return Q;
}

}  // namespace detail

inline CMat haar_random(const CompactGroup& G, std::mt19937_64& rng) { return detail::haar_random(G, rng); }

// Symplectic volume of O_nu from Riemannian data: sqrt|det S| vol(G)/vol(T).
inline double orbit_volume_riemannian(const InvariantMetric& metric, const Vec& nu) {
    const auto& G = metric.group();
    const Vec nu_sharp = sharp(metric, G.embed_cartan_covector(nu)).sharp.head(G.rank);
    const GroupVolumes v = group_volumes(metric);
    return std::sqrt(s_tau(metric, nu_sharp).abs_det) * v.group / v.torus;
}

// Nodes and weights on O_nu for the Kostant-Kirillov volume form. Dense
// product rules for groups with n_G <= 1; Monte Carlo otherwise.
inline OrbitQuadrature orbit_quadrature(const InvariantMetric& metric, const Vec& nu, int level = 1,
                                        std::uint64_t seed = 12345) {
    const auto& G = metric.group();
    OrbitQuadrature q;
    q.group = metric.group_ptr();
    const Vec nu_full = G.embed_cartan_covector(nu);
    if (G.n_g == 0) {
        q.nodes.push_back(nu_full);
        q.weights.push_back(1.0);
        q.scheme = "point";
        q.symplectic_volume = 1.0;
        return q;
    }
    const Vec nu_sharp = sharp(metric, nu_full).sharp;
    const double kks = 1.0 / std::sqrt(s_tau(metric, nu_sharp.head(G.rank)).abs_det);
    if (G.n_g == 1) {
        std::vector<Vec> brackets;
        for (int a = 0; a < G.dim; ++a)
            for (int b = a + 1; b < G.dim; ++b) brackets.push_back(bracket(G, Vec::Unit(G.dim, a), Vec::Unit(G.dim, b)));
        const Mat ss = detail::phi_orthonormalize(metric, brackets);
        Vec p = Vec::Zero(G.dim);
        for (int i = 0; i < ss.cols(); ++i) p += metric.inner(ss.col(i), nu_sharp) * ss.col(i);
        const Vec center = nu_sharp - p;
        const double radius = metric.norm(p);
        std::vector<Vec> seed_vecs = {p};
        for (int i = 0; i < ss.cols(); ++i) seed_vecs.push_back(ss.col(i));
        const Mat frame = detail::phi_orthonormalize(metric, seed_vecs);
        const int nt = 32 * (level + 1), np = 2 * nt;
        const Rule1D gl = gauss_legendre(nt);
        for (int i = 0; i < nt; ++i) {
            const double c = gl.nodes[i], s = std::sqrt(std::max(0.0, 1.0 - c * c));
            for (int j = 0; j < np; ++j) {
                const double ph = 2.0 * pi * j / np;
                const Vec node = center + radius * (c * frame.col(0) + s * std::cos(ph) * frame.col(1) +
                                                    s * std::sin(ph) * frame.col(2));
                q.nodes.push_back(metric.flat(node));
                q.weights.push_back(radius * radius * gl.weights[i] * (2.0 * pi / np) * kks);
            }
        }
        q.scheme = "gauss-legendre x uniform " + std::to_string(nt) + "x" + std::to_string(np);
        q.symplectic_volume = pairwise_sum(q.weights);
        return q;
    }
    q.monte_carlo = true;
    q.symplectic_volume = orbit_volume_riemannian(metric, nu);
    const int N = 4096 << std::max(0, level);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < N; ++i) {
        q.nodes.push_back(coadjoint_action(G, detail::haar_random(G, rng), nu_full));
        q.weights.push_back(q.symplectic_volume / N);
    }
    q.scheme = "monte carlo " + std::to_string(N);
    return q;
}

struct KirillovValue {
    cplx value;
    double std_error = 0.0;  // nonzero only in Monte Carlo mode
};

// (k/2pi)^{n_G} P(xi)^{-1} \int_{O_nu} e^{i k <lambda, xi>}; k = 1 is the plain formula.
inline KirillovValue kirillov_character(const InvariantMetric& metric, const OrbitQuadrature& q, const Vec& xi,
                                        double k = 1.0) {
    const auto& G = metric.group();
    const double P = exp_jacobian(metric, xi);
    std::vector<cplx> terms;
    terms.reserve(q.nodes.size());
    for (std::size_t i = 0; i < q.nodes.size(); ++i) terms.push_back(q.weights[i] * std::polar(1.0, k * q.nodes[i].dot(xi)));
    const double pref = std::pow(k / (2.0 * pi), G.n_g) / P;
    KirillovValue out{pref * pairwise_sum(terms)};
    if (q.monte_carlo) {
        const cplx mean = pairwise_sum(terms) / static_cast<double>(terms.size());
        double var = 0.0;
        for (const cplx& t : terms) var += std::norm(t - mean);
        var /= static_cast<double>(terms.size() - 1);
        out.std_error = pref * std::sqrt(var * static_cast<double>(terms.size()));
    }
    return out;
}

inline KirillovValue kirillov_character(const InvariantMetric& metric, const Vec& nu, const Vec& xi, int level = 1) {
    return kirillov_character(metric, orbit_quadrature(metric, nu, level), xi);
}

struct HaarRule {
    std::vector<CMat> elements;
    std::vector<double> weights;  // total mass 1
    bool monte_carlo = false;
};

// Product rules: trapezoid on tori; Hopf coordinates on SU(2) (Gauss-Legendre in
// sin^2 of the polar angle); an extra uniform circle for U(2).
inline HaarRule haar_rule(const CompactGroup& G, int n, std::uint64_t seed = 777) {
    HaarRule h;
    if (G.spec.kind == GroupKind::torus) {
        const int r = G.rank;
        std::vector<int> idx(r, 0);
        const double w = std::pow(1.0 / n, r);
        while (true) {
            CMat g = CMat::Zero(r, r);
            for (int a = 0; a < r; ++a) g(a, a) = std::polar(1.0, 2.0 * pi * idx[a] / n);
            h.elements.push_back(g);
            h.weights.push_back(w);
            int a = 0;
            while (a < r && ++idx[a] == n) idx[a++] = 0;
            if (a == r) break;
        }
        return h;
    }
    if (G.matrix_size == 2) {
        const Rule1D u = gauss_legendre(n, 0.0, 1.0);
        const int npsi = G.spec.kind == GroupKind::unitary ? n : 1;
        for (int i = 0; i < n; ++i) {
            const double eta = std::asin(std::sqrt(u.nodes[i]));
            for (int j1 = 0; j1 < n; ++j1)
                for (int j2 = 0; j2 < n; ++j2) {
                    const CMat s = su2_hopf(eta, 2.0 * pi * j1 / n, 2.0 * pi * j2 / n);
                    for (int l = 0; l < npsi; ++l) {
                        h.elements.push_back(std::polar(1.0, 2.0 * pi * l / npsi) * s);
                        h.weights.push_back(u.weights[i] / (static_cast<double>(n) * n * npsi));
                    }
                }
        }
        return h;
    }
    h.monte_carlo = true;
    std::mt19937_64 rng(seed);
    const int N = n * n * n;
    for (int i = 0; i < N; ++i) {
        h.elements.push_back(detail::haar_random(G, rng));
        h.weights.push_back(1.0 / N);
    }
    return h;
}

inline cplx haar_integral(const HaarRule& rule, const std::function<cplx(const CMat&)>& f) {
    std::vector<cplx> terms(rule.elements.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = rule.weights[i] * f(rule.elements[i]);
    return pairwise_sum(terms);
}

// d_{k nu} \int_G conj(chi_{k nu}(g)) f(g) dg, checked against a coarser grid.
inline cplx peter_weyl_projector_weight(const InvariantMetric& metric, const Vec& nu, int k,
                                        const std::function<cplx(const CMat&)>& f, int n = 48,
                                        double tol = 1e-8) {
    const auto& G = metric.group();
    const Vec knu = static_cast<double>(k) * nu;
    const double dk = weyl_dimension(metric, knu);
    auto integrand = [&](const CMat& g) { return std::conj(character(metric, knu, g)) * f(g); };
    const cplx fine = dk * haar_integral(haar_rule(G, n), integrand);
    const int nc = std::max(4, (3 * n) / 4);
    const cplx coarse = dk * haar_integral(haar_rule(G, nc), integrand);
    if (std::abs(fine - coarse) > tol * std::max(1.0, std::abs(fine))) {
        std::ostringstream os;
        os << "Haar quadrature did not converge: " << fine << " (n=" << n << ") vs " << coarse << " (n=" << nc << ")";
        throw NumericalError(os.str());
    }
    return fine;
}

}  // namespace eqszego
