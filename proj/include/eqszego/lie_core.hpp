#pragma once

#include "common.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>

namespace eqszego {

enum class GroupKind { torus, special_unitary, unitary };

struct GroupSpec {
    GroupKind kind = GroupKind::torus;
    int n = 1;  // rank for tori, matrix size otherwise

    std::string name() const {
        switch (kind) {
            case GroupKind::torus: return "torus" + std::to_string(n);
            case GroupKind::special_unitary: return "su" + std::to_string(n);
            case GroupKind::unitary: return "u" + std::to_string(n);
        }
        return "?";
    }

    // Accepts "torus3", "t3", "su2", "u2" (case-insensitive).
    static GroupSpec parse(std::string_view text) {
        std::string s(text);
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        auto tail = [&](std::size_t p) -> int {
            if (p >= s.size()) throw ConfigError("group id '" + std::string(text) + "' lacks a size");
            for (std::size_t i = p; i < s.size(); ++i)
                if (!std::isdigit(static_cast<unsigned char>(s[i])))
                    throw ConfigError("group id '" + std::string(text) + "' is malformed");
            return std::stoi(s.substr(p));
        };
        if (s.rfind("torus", 0) == 0) return {GroupKind::torus, tail(5)};
        if (s.rfind("su", 0) == 0) return {GroupKind::special_unitary, tail(2)};
        if (s.rfind("u", 0) == 0) return {GroupKind::unitary, tail(1)};
        if (s.rfind("t", 0) == 0) return {GroupKind::torus, tail(1)};
        throw ConfigError("unknown group id '" + std::string(text) + "' (expected torusR, suN or uN)");
    }
};

struct WeylElement {
    std::vector<int> permutation;  // image of each diagonal slot
    int sign = 1;
    Mat coalgebra_action;  // on Cartan coalgebra coordinates
    Mat algebra_action;    // on Cartan algebra coordinates
};

// A compact connected matrix group realized inside U(n). The Lie algebra basis
// lists the Cartan generators first, then one pair per positive root.
class CompactGroup {
public:
    GroupSpec spec;
    int matrix_size = 0;
    int dim = 0;
    int rank = 0;
    int n_g = 0;
    std::vector<CMat> basis;
    // Cartan generator a is i*diag(cartan_diag.col(a)).
    Mat cartan_diag;
    std::vector<std::pair<int, int>> root_pairs;  // e_i - e_j with i < j
    std::vector<Vec> positive_roots;              // values on the Cartan generators
    Vec delta;
    std::vector<WeylElement> weyl_group;
    Mat lattice_basis;  // columns span L(G) in Cartan coalgebra coordinates
    Mat trace_gram;     // Re tr(E_a E_b^*)

    std::string name() const { return spec.name(); }

    CMat to_matrix(const Vec& coords) const {
        CMat X = CMat::Zero(matrix_size, matrix_size);
        for (int a = 0; a < dim; ++a) X += coords[a] * basis[a];
        return X;
    }

    // Coordinates of a matrix lying in the Lie algebra.
    Vec to_coords(const CMat& X) const {
        Vec rhs(dim);
        for (int a = 0; a < dim; ++a) rhs[a] = (X * basis[a].adjoint()).trace().real();
        return trace_gram.ldlt().solve(rhs);
    }

    // Diagonal functional g (theta -> g.theta on i*diag(theta)) in Cartan coalgebra coordinates.
    Vec diag_functional_to_coords(const Vec& g) const { return cartan_diag.transpose() * g; }

    // Cartan algebra coordinates of i*diag(theta); theta must lie in the Cartan algebra.
    Vec diag_angles_to_cartan(const Vec& theta) const {
        return cartan_diag.colPivHouseholderQr().solve(theta);
    }

    // Full coalgebra covector extending a Cartan coalgebra covector by zero on the root spaces.
    Vec embed_cartan_covector(const Vec& c) const {
        Vec full = Vec::Zero(dim);
        full.head(rank) = c;
        return full;
    }

    Vec embed_cartan_vector(const Vec& h) const {
        Vec full = Vec::Zero(dim);
        full.head(rank) = h;
        return full;
    }

    bool in_lattice(const Vec& c, double tol = 1e-9) const {
        const Vec z = lattice_basis.colPivHouseholderQr().solve(c);
        if ((lattice_basis * z - c).norm() > tol) return false;
        for (int i = 0; i < z.size(); ++i)
            if (std::abs(z[i] - std::round(z[i])) > tol) return false;
        return true;
    }

    // Checks g is in the group (unitary, and det 1 for SU(n); diagonal for tori).
    void check_element(const CMat& g, double tol = 1e-10) const {
        if (g.rows() != matrix_size || g.cols() != matrix_size)
            throw PreconditionError(name() + ": group element has wrong size");
        if ((g.adjoint() * g - CMat::Identity(matrix_size, matrix_size)).norm() > tol)
            throw PreconditionError(name() + ": group element is not unitary");
        if (spec.kind == GroupKind::special_unitary && std::abs(g.determinant() - 1.0) > tol)
            throw PreconditionError(name() + ": group element does not have determinant 1");
        if (spec.kind == GroupKind::torus) {
            CMat off = g;
            off.diagonal().setZero();
            if (off.norm() > tol) throw PreconditionError(name() + ": torus element must be diagonal");
        }
    }

    // Cartan algebra angles h with g conjugate to exp(sum h_a H_a).
    Vec eigen_angles(const CMat& g) const {
        Vec theta(matrix_size);
        if (spec.kind == GroupKind::torus) {
            for (int j = 0; j < matrix_size; ++j) theta[j] = std::arg(g(j, j));
            return theta;
        }
        Eigen::ComplexEigenSolver<CMat> es(g);
        for (int j = 0; j < matrix_size; ++j) theta[j] = std::arg(es.eigenvalues()[j]);
        if (spec.kind == GroupKind::special_unitary) {
            const double total = theta.sum();
            theta[matrix_size - 1] -= 2.0 * pi * std::round(total / (2.0 * pi));
        }
        return diag_angles_to_cartan(theta);
    }
};

using GroupPtr = std::shared_ptr<const CompactGroup>;

namespace detail {

inline int permutation_sign(const std::vector<int>& p) {
    int sign = 1;
    std::vector<bool> seen(p.size(), false);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (seen[i]) continue;
        std::size_t len = 0;
        for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(p[j])) {
            seen[j] = true;
            ++len;
        }
        if (len % 2 == 0) sign = -sign;
    }
    return sign;
}

inline Mat round_if_integral(Mat m) {
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (std::abs(m(i, j) - std::round(m(i, j))) < 1e-12) m(i, j) = std::round(m(i, j));
    return m;
}

}  // namespace detail

inline GroupPtr build_group(GroupSpec spec) {
    auto G = std::make_shared<CompactGroup>();
    G->spec = spec;
    const int n = spec.n;
    const cplx I(0.0, 1.0);
    switch (spec.kind) {
        case GroupKind::torus:
            if (n < 1) throw ConfigError("torus rank must be >= 1");
            G->matrix_size = n;
            G->rank = n;
            G->cartan_diag = Mat::Identity(n, n);
            break;
        case GroupKind::special_unitary:
            if (n < 2) throw ConfigError("SU(n) requires n >= 2");
            G->matrix_size = n;
            G->rank = n - 1;
            G->cartan_diag = Mat::Zero(n, n - 1);
            for (int a = 0; a < n - 1; ++a) {
                G->cartan_diag(a, a) = 1.0;
                G->cartan_diag(a + 1, a) = -1.0;
            }
            break;
        case GroupKind::unitary:
            if (n < 1) throw ConfigError("U(n) requires n >= 1");
            G->matrix_size = n;
            G->rank = n;
            G->cartan_diag = Mat::Identity(n, n);
            break;
    }
    const int m = G->matrix_size;
    for (int a = 0; a < G->rank; ++a) {
        CMat H = CMat::Zero(m, m);
        for (int j = 0; j < m; ++j) H(j, j) = I * G->cartan_diag(j, a);
        G->basis.push_back(H);
    }
    if (spec.kind != GroupKind::torus) {
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                CMat X = CMat::Zero(m, m), Y = CMat::Zero(m, m);
                X(i, j) = 1.0;
                X(j, i) = -1.0;
                Y(i, j) = I;
                Y(j, i) = I;
                G->basis.push_back(X);
                G->basis.push_back(Y);
                G->root_pairs.emplace_back(i, j);
            }
    }
    G->dim = static_cast<int>(G->basis.size());
    G->n_g = (G->dim - G->rank) / 2;
    G->trace_gram = Mat(G->dim, G->dim);
    for (int a = 0; a < G->dim; ++a)
        for (int b = 0; b < G->dim; ++b)
            G->trace_gram(a, b) = (G->basis[a] * G->basis[b].adjoint()).trace().real();

    G->delta = Vec::Zero(G->rank);
    for (auto [i, j] : G->root_pairs) {
        Vec g = Vec::Zero(m);
        g[i] = 1.0;
        g[j] = -1.0;
        G->positive_roots.push_back(G->diag_functional_to_coords(g));
        G->delta += 0.5 * G->positive_roots.back();
    }

    // Cartan coordinates of SU(n) are Dynkin labels, so L(G) is the standard lattice in every case.
    G->lattice_basis = Mat::Identity(G->rank, G->rank);

    const Mat D = G->cartan_diag;
    const Mat Dt_pinv = D.transpose().completeOrthogonalDecomposition().pseudoInverse();
    const Mat D_pinv = D.completeOrthogonalDecomposition().pseudoInverse();
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    if (spec.kind == GroupKind::torus) {
        G->weyl_group.push_back({perm, 1, Mat::Identity(G->rank, G->rank), Mat::Identity(G->rank, G->rank)});
    } else {
        do {
            Mat P = Mat::Zero(m, m);
            for (int i = 0; i < m; ++i) P(perm[i], i) = 1.0;
            WeylElement w;
            w.permutation = perm;
            w.sign = detail::permutation_sign(perm);
            w.coalgebra_action = detail::round_if_integral(D.transpose() * P * Dt_pinv);
            w.algebra_action = detail::round_if_integral(D_pinv * P * D);
            G->weyl_group.push_back(std::move(w));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return G;
}

inline GroupPtr build_group(std::string_view id) { return build_group(GroupSpec::parse(id)); }

// An Ad-invariant inner product: scale * trace form, plus an optional extra
// weight on the center (the only other invariant freedom for U(n)).
class InvariantMetric {
public:
    InvariantMetric(GroupPtr group, double scale = 1.0, double center_weight = 0.0)
        : group_(std::move(group)), scale_(scale), center_weight_(center_weight) {
        if (!(scale > 0.0)) throw ConfigError("invariant metric scale must be positive");
        const auto& G = *group_;
        gram_ = scale * G.trace_gram;
        if (center_weight != 0.0) {
            const int m = G.matrix_size;
            for (int a = 0; a < G.dim; ++a)
                for (int b = 0; b < G.dim; ++b)
                    gram_(a, b) += center_weight *
                                   (G.basis[a].trace() * std::conj(G.basis[b].trace())).real() / m;
        }
        Eigen::SelfAdjointEigenSolver<Mat> es(gram_);
        if (es.eigenvalues().minCoeff() <= 0.0) throw ConfigError("invariant metric is not positive-definite");
        gram_inv_ = gram_.inverse();
    }

    const CompactGroup& group() const { return *group_; }
    const GroupPtr& group_ptr() const { return group_; }
    const Mat& gram() const { return gram_; }
    const Mat& gram_inverse() const { return gram_inv_; }
    double scale() const { return scale_; }
    double center_weight() const { return center_weight_; }

    InvariantMetric scaled(double c) const { return InvariantMetric(group_, c * scale_, c * center_weight_); }

    double inner(const Vec& A, const Vec& B) const { return A.dot(gram_ * B); }
    double norm(const Vec& A) const { return std::sqrt(inner(A, A)); }
    double dual_inner(const Vec& a, const Vec& b) const { return a.dot(gram_inv_ * b); }
    double dual_norm(const Vec& a) const { return std::sqrt(dual_inner(a, a)); }
    Vec flat(const Vec& A) const { return gram_ * A; }

    // Dual inner product on Cartan coalgebra coordinates.
    double cartan_dual_inner(const Vec& a, const Vec& b) const {
        const auto& G = *group_;
        return dual_inner(G.embed_cartan_covector(a), G.embed_cartan_covector(b));
    }
    double cartan_dual_norm(const Vec& a) const { return std::sqrt(cartan_dual_inner(a, a)); }

private:
    GroupPtr group_;
    double scale_;
    double center_weight_;
    Mat gram_;
    Mat gram_inv_;
};

inline InvariantMetric default_metric(GroupPtr g) { return InvariantMetric(std::move(g)); }

struct Sharp {
    Vec sharp;       // gamma^phi in algebra coordinates
    double norm;     // ||gamma||_phi
    Vec unit;        // gamma_{phi,u}
    Vec unit_sharp;  // gamma^phi_u
};

inline Sharp sharp(const InvariantMetric& metric, const Vec& covector) {
    if (covector.size() != metric.group().dim) throw ConfigError("sharp: covector has wrong dimension");
    Sharp s;
    s.sharp = metric.gram_inverse() * covector;
    s.norm = std::sqrt(std::max(0.0, covector.dot(s.sharp)));
    if (s.norm > 0.0) {
        s.unit = covector / s.norm;
        s.unit_sharp = s.sharp / s.norm;
    } else {
        s.unit = Vec::Zero(covector.size());
        s.unit_sharp = s.unit;
    }
    return s;
}

// phi-orthonormal vectors spanning t^perp, in algebra coordinates.
inline Mat cartan_complement_basis(const InvariantMetric& metric) {
    const auto& G = metric.group();
    const int d = G.dim, r = G.rank;
    Mat Q(d, d);
    int count = 0;
    auto push = [&](Vec v) {
        for (int i = 0; i < count; ++i) v -= metric.inner(Q.col(i), v) * Q.col(i);
        for (int i = 0; i < count; ++i) v -= metric.inner(Q.col(i), v) * Q.col(i);
        const double nv = metric.norm(v);
        if (nv < 1e-12) return;
        Q.col(count++) = v / nv;
    };
    for (int a = 0; a < d; ++a) push(Vec::Unit(d, a));
    // The first r columns span t because the basis lists the Cartan generators first.
    return Q.block(0, r, d, d - r);
}

inline Mat cartan_orthonormal_basis(const InvariantMetric& metric) {
    const auto& G = metric.group();
    Mat Q(G.dim, G.rank);
    for (int a = 0; a < G.rank; ++a) {
        Vec v = Vec::Unit(G.dim, a);
        for (int i = 0; i < a; ++i) v -= metric.inner(Q.col(i), v) * Q.col(i);
        Q.col(a) = v / metric.norm(v);
    }
    return Q;
}

struct STau {
    Mat matrix;       // in a phi-orthonormal basis of t^perp
    double abs_det;   // 1 for tori
    Mat basis;        // that orthonormal basis, algebra coordinates
};

// Matrix of the commutator bracket in algebra coordinates.
inline Vec bracket(const CompactGroup& G, const Vec& A, const Vec& B) {
    const CMat a = G.to_matrix(A), b = G.to_matrix(B);
    return G.to_coords(a * b - b * a);
}

inline STau s_tau(const InvariantMetric& metric, const Vec& tau_cartan) {
    const auto& G = metric.group();
    if (tau_cartan.size() != G.rank) throw ConfigError("s_tau: tau must be given in Cartan coordinates");
    STau out;
    out.basis = cartan_complement_basis(metric);
    const int m = static_cast<int>(out.basis.cols());
    out.matrix = Mat::Zero(m, m);
    const Vec tau = G.embed_cartan_vector(tau_cartan);
    for (int j = 0; j < m; ++j) {
        const Vec image = bracket(G, tau, out.basis.col(j));
        for (int i = 0; i < m; ++i) out.matrix(i, j) = metric.inner(out.basis.col(i), image);
    }
    out.abs_det = m == 0 ? 1.0 : std::abs(out.matrix.determinant());
    return out;
}

// Matrix of Ad_g in algebra coordinates.
inline Mat adjoint_matrix(const CompactGroup& G, const CMat& g) {
    G.check_element(g);
    Mat A(G.dim, G.dim);
    for (int b = 0; b < G.dim; ++b) A.col(b) = G.to_coords(g * G.basis[b] * g.adjoint());
    return A;
}

inline Vec adjoint_action(const CompactGroup& G, const CMat& g, const Vec& xi) {
    G.check_element(g);
    return G.to_coords(g * G.to_matrix(xi) * g.adjoint());
}

// <Coad_g lambda, xi> = <lambda, Ad_{g^-1} xi>.
inline Vec coadjoint_action(const CompactGroup& G, const CMat& g, const Vec& lambda) {
    return adjoint_matrix(G, g.adjoint()).transpose() * lambda;
}

struct GroupVolumes {
    double group;
    double torus;
};

namespace detail {

inline double trace_volume_group(const GroupSpec& s) {
    const int n = s.n;
    double fact_prod = 1.0;
    for (int k = 1; k <= n - 1; ++k) fact_prod *= std::tgamma(k + 1.0);
    switch (s.kind) {
        case GroupKind::torus: return std::pow(2.0 * pi, n);
        case GroupKind::unitary: return std::pow(2.0 * pi, n * (n + 1) / 2.0) / fact_prod;
        case GroupKind::special_unitary:
            return std::sqrt(static_cast<double>(n)) * std::pow(2.0 * pi, (n * n + n - 2) / 2.0) / fact_prod;
    }
    return 0.0;
}

inline double trace_volume_torus(const GroupSpec& s) {
    switch (s.kind) {
        case GroupKind::torus:
        case GroupKind::unitary: return std::pow(2.0 * pi, s.n);
        case GroupKind::special_unitary: return std::pow(2.0 * pi, s.n - 1) * std::sqrt(static_cast<double>(s.n));
    }
    return 0.0;
}

}  // namespace detail

// Riemannian volumes of G and of its maximal torus for the metric.
inline GroupVolumes group_volumes(const InvariantMetric& metric) {
    const auto& G = metric.group();
    const int r = G.rank;
    const double full = std::sqrt(metric.gram().determinant() / G.trace_gram.determinant());
    const double cart = std::sqrt(metric.gram().topLeftCorner(r, r).determinant() /
                                  G.trace_gram.topLeftCorner(r, r).determinant());
    return {detail::trace_volume_group(G.spec) * full, detail::trace_volume_torus(G.spec) * cart};
}

// Hopf coordinates on SU(2): g = [[a, -conj b], [b, conj a]] with
// a = cos(eta) e^{i xi1}, b = sin(eta) e^{i xi2}.
inline CMat su2_hopf(double eta, double xi1, double xi2) {
    const cplx a = std::cos(eta) * std::polar(1.0, xi1);
    const cplx b = std::sin(eta) * std::polar(1.0, xi2);
    CMat g(2, 2);
    g << a, -std::conj(b), b, std::conj(a);
    return g;
}

// Independent route for the group volume: integrate the Riemannian density of
// an explicit parametrization. Supported for tori, SU(2) and U(2).
inline double group_volume_by_quadrature(const InvariantMetric& metric, int n = 24) {
    const auto& G = metric.group();
    const Mat& gram = metric.gram();
    auto density = [&](const std::vector<CMat>& left_trivialized) {
        Mat J(G.dim, static_cast<int>(left_trivialized.size()));
        for (std::size_t c = 0; c < left_trivialized.size(); ++c)
            J.col(static_cast<int>(c)) = G.to_coords(left_trivialized[c]);
        return std::sqrt((J.transpose() * gram * J).determinant());
    };
    if (G.spec.kind == GroupKind::torus) {
        std::vector<CMat> cols(G.basis.begin(), G.basis.end());
        return std::pow(2.0 * pi, G.rank) * density(cols);
    }
    if (G.matrix_size != 2) throw PreconditionError("volume quadrature supports tori, SU(2) and U(2) only");
    auto mk = [](cplx a, cplx b) {
        CMat g(2, 2);
        g << a, -std::conj(b), b, std::conj(a);
        return g;
    };
    const cplx I(0.0, 1.0);
    std::vector<double> terms;
    const Rule1D eta = gauss_legendre(n, 0.0, pi / 2.0);
    const double angle_mass = 4.0 * pi * pi;  // the density does not depend on xi1, xi2
    for (int i = 0; i < n; ++i) {
        const double e = eta.nodes[i];
        const double xi1 = 0.3, xi2 = 1.1;
        const CMat g = su2_hopf(e, xi1, xi2);
        const cplx a = std::cos(e) * std::polar(1.0, xi1), b = std::sin(e) * std::polar(1.0, xi2);
        std::vector<CMat> cols = {
            g.adjoint() * mk(-std::sin(e) * std::polar(1.0, xi1), std::cos(e) * std::polar(1.0, xi2)),
            g.adjoint() * mk(I * a, 0.0), g.adjoint() * mk(0.0, I * b)};
        double mass = angle_mass;
        if (G.spec.kind == GroupKind::unitary) {
            // (g, e^{it}) -> e^{it} g is two-to-one, so t runs over [0, pi)
            cols.push_back(I * CMat::Identity(2, 2));
            mass *= pi;
        }
        terms.push_back(eta.weights[i] * mass * density(cols));
    }
    return pairwise_sum(terms);
}

class HalfWeight {
public:
    HalfWeight(const InvariantMetric& metric, Vec coords) : coords_(std::move(coords)) {
        const auto& G = metric.group();
        if (coords_.size() != G.rank)
            throw ConfigError("half-weight for " + G.name() + " needs " + std::to_string(G.rank) + " coordinates");
        for (std::size_t i = 0; i < G.positive_roots.size(); ++i) {
            const double p = metric.cartan_dual_inner(coords_, G.positive_roots[i]);
            if (std::abs(p) < 1e-12)
                throw PreconditionError("half-weight is not regular (orthogonal to a root)");
            if (p < 0.0) throw PreconditionError("half-weight is not dominant");
        }
        integral_ = G.in_lattice(coords_ - G.delta);
    }

    const Vec& coords() const { return coords_; }
    bool integral() const { return integral_; }
    Vec lambda(const CompactGroup& G) const { return coords_ - G.delta; }

private:
    Vec coords_;
    bool integral_ = false;
};

}  // namespace eqszego
