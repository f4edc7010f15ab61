#pragma once

#include "characters.hpp"
#include "lie_core.hpp"
#include "quadrature.hpp"

#include <functional>
#include <regex>
#include <variant>

namespace eqszego {

// How the isotypic components of the Hardy space are enumerated.
enum class ModelKind {
    torus_weights,  // diagonal torus action with integer weight matrix
    split           // std (x) det^a on the first p coordinates, det^b on the rest
};

// CP^d with the unit sphere X = S^{2d+1} in C^{d+1} as circle bundle. The group
// acts on coefficient vectors by rep(g); on X it acts by conj(rep(g)), whose
// generators are conj(B_a).
struct ProjectiveModel {
    std::string id;
    std::string description;
    int d = 1;
    InvariantMetric metric;
    std::vector<CMat> generators;  // B_a, skew-Hermitian, one per algebra basis element
    std::function<CMat(const CMat&)> rep;
    ModelKind kind = ModelKind::torus_weights;
    Eigen::MatrixXi weights;  // torus: r x (d+1)
    int split_dim = 0;
    int det_a = 0;
    int det_b = 0;
    Vec default_nu;
    CVec base_point;

    const CompactGroup& group() const { return metric.group(); }
    int ambient() const { return d + 1; }
    CMat lift_generator(int a) const { return generators[static_cast<std::size_t>(a)].conjugate(); }
    CMat lift_generator(const Vec& xi) const {
        CMat A = CMat::Zero(ambient(), ambient());
        for (int a = 0; a < xi.size(); ++a) A += xi[a] * lift_generator(a);
        return A;
    }
    CVec act(const CMat& g, const CVec& x) const { return rep(g).conjugate() * x; }

    ProjectiveModel with_metric(const InvariantMetric& m) const {
        if (m.group_ptr() != metric.group_ptr()) throw ConfigError("metric belongs to a different group");
        ProjectiveModel out = *this;
        out.metric = m;
        return out;
    }
};

inline double volume_X(int d) { return std::pow(pi, d) / std::tgamma(d + 1.0); }

// Validated unit vector in C^{d+1}.
struct ModelPoint {
    CVec x;
    explicit ModelPoint(CVec v) : x(std::move(v)) {
        if (std::abs(x.norm() - 1.0) > 1e-14) throw PreconditionError("model point is not a unit vector");
    }
    static ModelPoint normalized(const CVec& v) { return ModelPoint(v / v.norm()); }
};

// ---------------------------------------------------------------- catalog

namespace detail {

inline ProjectiveModel torus_model(std::string id, const Eigen::MatrixXi& W, Vec nu, CVec base) {
    const int r = static_cast<int>(W.rows()), n = static_cast<int>(W.cols());
    ProjectiveModel m{std::move(id), "", n - 1, InvariantMetric(build_group(GroupSpec{GroupKind::torus, r})), {}, {}, {}, {}, 0, 0, 0, {}, {}};
    m.kind = ModelKind::torus_weights;
    m.weights = W;
    const cplx I(0.0, 1.0);
    for (int a = 0; a < r; ++a) {
        CMat B = CMat::Zero(n, n);
        for (int j = 0; j < n; ++j) B(j, j) = I * static_cast<double>(W(a, j));
        m.generators.push_back(B);
    }
    m.rep = [W, r, n](const CMat& g) {
        CMat out = CMat::Identity(n, n);
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < r; ++a) out(j, j) *= std::pow(g(a, a), W(a, j));
        return out;
    };
    std::ostringstream os;
    os << "torus(" << r << ") on CP^" << n - 1 << " with weight matrix rows";
    for (int a = 0; a < r; ++a) {
        os << " (";
        for (int j = 0; j < n; ++j) os << (j ? "," : "") << W(a, j);
        os << ")";
    }
    m.description = os.str();
    m.default_nu = std::move(nu);
    m.base_point = base / base.norm();
    return m;
}

inline ProjectiveModel split_model(std::string id, GroupSpec spec, int d, int a, int b, Vec nu, CVec base) {
    ProjectiveModel m{std::move(id), "", d, InvariantMetric(build_group(spec)), {}, {}, {}, {}, 0, 0, 0, {}, {}};
    const auto& G = m.group();
    const int p = G.matrix_size, n = d + 1, q = n - p;
    if (q < 0) throw ConfigError("split model needs d + 1 >= matrix size");
    m.kind = ModelKind::split;
    m.split_dim = p;
    m.det_a = a;
    m.det_b = b;
    for (int e = 0; e < G.dim; ++e) {
        const CMat& X = G.basis[static_cast<std::size_t>(e)];
        const cplx tr = X.trace();
        CMat B = CMat::Zero(n, n);
        B.topLeftCorner(p, p) = X + static_cast<double>(a) * tr * CMat::Identity(p, p);
        if (q > 0) B.bottomRightCorner(q, q) = static_cast<double>(b) * tr * CMat::Identity(q, q);
        m.generators.push_back(B);
    }
    m.rep = [p, q, n, a, b](const CMat& g) {
        const cplx det = g.determinant();
        CMat out = CMat::Zero(n, n);
        out.topLeftCorner(p, p) = std::pow(det, a) * g;
        if (q > 0) out.bottomRightCorner(q, q) = std::pow(det, b) * CMat::Identity(q, q);
        return out;
    };
    std::ostringstream os;
    os << G.name() << " on CP^" << d << ": standard (x) det^" << a << " on C^" << p;
    if (q > 0) os << ", det^" << b << " on C^" << q;
    m.description = os.str();
    m.default_nu = std::move(nu);
    m.base_point = base / base.norm();
    return m;
}

inline CVec cvec(std::initializer_list<cplx> xs) {
    CVec v(static_cast<int>(xs.size()));
    int i = 0;
    for (const cplx& x : xs) v[i++] = x;
    return v;
}

}  // namespace detail

inline std::vector<std::string> catalog_ids() {
    return {"s1-cp1-w12", "t2-cp2", "su2-cp1", "u2-cp2", "s1-cp2-w123", "u2-cp1"};
}

// Models addressable by id. Circle models also accept any "s1-cp<d>-w<digits>".
inline ProjectiveModel make_model(const std::string& id) {
    using detail::cvec;
    if (id == "t2-cp2" || id == "t2-cp2-w101-011") {
        Eigen::MatrixXi W(2, 3);
        W << 1, 0, 1, 0, 1, 1;
        Vec nu(2);
        nu << 2.0, 1.0;
        return detail::torus_model("t2-cp2", W, nu, cvec({std::sqrt(0.6), std::sqrt(0.2), std::sqrt(0.2)}));
    }
    if (id == "su2-cp1")
        return detail::split_model(id, {GroupKind::special_unitary, 2}, 1, 0, 0, Vec::Ones(1), cvec({0.8, cplx(0, 0.6)}));
    if (id == "u2-cp2") {
        Vec nu(2);
        nu << 1.5, 0.5;
        return detail::split_model(id, {GroupKind::unitary, 2}, 2, 0, 1, nu, cvec({1.0, cplx(0.6, 0.8), 1.0}));
    }
    if (id == "u2-cp1") {
        Vec nu(2);
        nu << 2.5, 0.5;
        return detail::split_model(id, {GroupKind::unitary, 2}, 1, 1, 0, nu, cvec({1.0, 0.0}));
    }
    static const std::regex circle(R"(s1-cp(\d+)-w(\d+))");
    std::smatch mt;
    if (std::regex_match(id, mt, circle)) {
        const int d = std::stoi(mt[1].str());
        const std::string w = mt[2].str();
        if (static_cast<int>(w.size()) != d + 1)
            throw ConfigError("model '" + id + "' needs " + std::to_string(d + 1) + " single-digit weights");
        Eigen::MatrixXi W(1, d + 1);
        for (int j = 0; j <= d; ++j) W(0, j) = w[static_cast<std::size_t>(j)] - '0';
        return detail::torus_model(id, W, Vec::Ones(1), CVec::Ones(d + 1));
    }
    std::string known;
    for (const auto& k : catalog_ids()) known += " " + k;
    throw ConfigError("unknown model '" + id + "'; known:" + known);
}

// ---------------------------------------------------------------- pointwise geometry

inline cplx herm(const CVec& u, const CVec& v) { return v.dot(u); }  // <u, v> = sum u_j conj(v_j)
inline double rho(const CVec& u, const CVec& v) { return herm(u, v).real(); }
inline double omega(const CVec& u, const CVec& v) { return -herm(u, v).imag(); }

// Orthonormal basis of the horizontal space x^perp (complex columns).
inline CMat horizontal_frame(const CVec& x) {
    const int n = static_cast<int>(x.size());
    Eigen::HouseholderQR<CMat> qr(x);
    const CMat Q = qr.householderQ();
    return Q.rightCols(n - 1);
}

// Real coordinates of a horizontal vector w.r.t. {f_1, i f_1, ..., f_d, i f_d}.
inline Vec real_coords(const CMat& frame, const CVec& v) {
    const int d = static_cast<int>(frame.cols());
    Vec c(2 * d);
    for (int i = 0; i < d; ++i) {
        const cplx z = frame.col(i).dot(v);
        c[2 * i] = z.real();
        c[2 * i + 1] = z.imag();
    }
    return c;
}

inline CVec from_real_coords(const CMat& frame, const Vec& c) {
    CVec v = CVec::Zero(frame.rows());
    for (int i = 0; i < frame.cols(); ++i) v += cplx(c[2 * i], c[2 * i + 1]) * frame.col(i);
    return v;
}

inline CVec horizontal_part(const CVec& x, const CVec& u) { return u - herm(u, x) * x; }

inline Vec moment_map(const ProjectiveModel& model, const CVec& x) {
    Vec phi(model.group().dim);
    for (int a = 0; a < phi.size(); ++a) phi[a] = -x.dot(model.lift_generator(a) * x).imag();
    return phi;
}

inline CVec val(const ProjectiveModel& model, const CVec& x, const Vec& xi) {
    return horizontal_part(x, model.lift_generator(xi) * x);
}

inline Mat val_matrix(const ProjectiveModel& model, const CVec& x, const CMat& frame) {
    const int dg = model.group().dim;
    Mat V(2 * model.d, dg);
    for (int a = 0; a < dg; ++a) V.col(a) = real_coords(frame, val(model, x, Vec::Unit(dg, a)));
    return V;
}

inline Mat val_matrix(const ProjectiveModel& model, const CVec& x) { return val_matrix(model, x, horizontal_frame(x)); }

// Smallest singular value of xi -> xi_X(x) on the sphere (local freeness at x).
inline double local_freeness(const ProjectiveModel& model, const CVec& x) {
    const int dg = model.group().dim, n = model.ambient();
    Mat A(2 * n, dg);
    for (int a = 0; a < dg; ++a) {
        const CVec v = model.lift_generator(a) * x;
        for (int j = 0; j < n; ++j) {
            A(2 * j, a) = v[j].real();
            A(2 * j + 1, a) = v[j].imag();
        }
    }
    // measure in phi-orthonormal coordinates
    const Eigen::LLT<Mat> llt(model.metric.gram());
    const Mat Lt_inv = llt.matrixU().solve(Mat::Identity(dg, dg));
    return Eigen::JacobiSVD<Mat>(A * Lt_inv).singularValues().minCoeff();
}

// ---------------------------------------------------------------- cone data

struct CartanRepresentative {
    CMat h;  // Phi = Coad_h(mu)
    Vec mu;  // dominant, Cartan coalgebra coordinates
};

inline CartanRepresentative dominant_representative(const InvariantMetric& metric, const Vec& phi) {
    const auto& G = metric.group();
    if (G.spec.kind == GroupKind::torus) return {CMat::Identity(G.matrix_size, G.matrix_size), phi};
    const Vec ps = sharp(metric, phi).sharp;
    const cplx I(0.0, 1.0);
    Eigen::SelfAdjointEigenSolver<CMat> es(-I * G.to_matrix(ps));
    const int n = G.matrix_size;
    Vec e(n);
    CMat U(n, n);
    for (int j = 0; j < n; ++j) {
        e[j] = es.eigenvalues()[n - 1 - j];
        U.col(j) = es.eigenvectors().col(n - 1 - j);
    }
    if (G.spec.kind == GroupKind::special_unitary) U.col(0) *= std::conj(U.determinant());
    const Vec h_cartan = G.diag_angles_to_cartan(e);
    return {U, metric.flat(G.embed_cartan_vector(h_cartan)).head(G.rank)};
}

// Orthonormal basis (dual metric) of the complement of nu in the Cartan coalgebra.
inline Mat nu_complement_basis(const InvariantMetric& metric, const Vec& nu) {
    const int r = static_cast<int>(nu.size());
    std::vector<Vec> qs = {nu / metric.cartan_dual_norm(nu)};
    for (int a = 0; a < r; ++a) {
        Vec v = Vec::Unit(r, a);
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& q : qs) v -= metric.cartan_dual_inner(q, v) * q;
        const double nv = metric.cartan_dual_norm(v);
        if (nv > 1e-10) qs.push_back(v / nv);
    }
    Mat B(r, r - 1);
    for (int i = 1; i < r; ++i) B.col(i - 1) = qs[static_cast<std::size_t>(i)];
    return B;
}

struct ConeData {
    CartanRepresentative rep;
    double varsigma = 0.0;
    double cone_distance = 0.0;
    double phi_norm = 0.0;
    bool on_cone = false;
};

inline ConeData cone_data(const ProjectiveModel& model, const Vec& nu, const CVec& x, double tol = 1e-9) {
    const auto& metric = model.metric;
    const Vec phi = moment_map(model, x);
    ConeData c;
    c.phi_norm = metric.dual_norm(phi);
    if (c.phi_norm < 1e-12) throw PreconditionError("moment map vanishes at this point (0 must not lie in Phi(M))");
    c.rep = dominant_representative(metric, phi);
    c.varsigma = metric.cartan_dual_inner(c.rep.mu, nu) / metric.cartan_dual_inner(nu, nu);
    c.cone_distance = c.varsigma > 0 ? metric.cartan_dual_norm(c.rep.mu - c.varsigma * nu) : c.phi_norm;
    c.on_cone = c.varsigma > 0 && c.cone_distance <= tol * std::max(1.0, c.phi_norm);
    return c;
}

// Components of the dominant representative orthogonal to nu; M_O is their zero set.
inline Vec cone_defect(const ProjectiveModel& model, const Vec& nu, const CVec& x) {
    const auto rep = dominant_representative(model.metric, moment_map(model, x));
    const Mat B = nu_complement_basis(model.metric, nu);
    Vec f(B.cols());
    for (int i = 0; i < B.cols(); ++i) f[i] = model.metric.cartan_dual_inner(rep.mu, B.col(i));
    return f;
}

inline CVec retract(const CVec& x, const CVec& v) {
    const CVec y = x + v;
    return y / y.norm();
}

// Central-difference derivative of a function on M along the real horizontal frame.
inline Mat fd_jacobian(const std::function<Vec(const CVec&)>& f, const CVec& x, const CMat& frame, double h = 1e-6) {
    const int d2 = 2 * static_cast<int>(frame.cols());
    const Vec f0 = f(x);
    Mat J(f0.size(), d2);
    for (int i = 0; i < d2; ++i) {
        const CVec e = from_real_coords(frame, Vec::Unit(d2, i));
        J.col(i) = (f(retract(x, h * e)) - f(retract(x, -h * e))) / (2.0 * h);
    }
    return J;
}

// Newton projection onto M_O along the horizontal gradient of the cone defect.
inline CVec project_to_locus(const ProjectiveModel& model, const Vec& nu, CVec x, double tol = 1e-13, int max_iter = 40) {
    x /= x.norm();
    const int r = model.group().rank;
    if (r == 1) {
        if (!cone_data(model, nu, x).on_cone) throw PreconditionError("point is off the cone and cannot be projected");
        return x;
    }
    auto F = [&](const CVec& y) { return cone_defect(model, nu, y); };
    for (int it = 0; it < max_iter; ++it) {
        const Vec f = F(x);
        if (f.norm() < tol) {
            if (!cone_data(model, nu, x).on_cone) break;
            return x;
        }
        const CMat frame = horizontal_frame(x);
        const Mat J = fd_jacobian(F, x, frame);
        const Vec step = J.completeOrthogonalDecomposition().solve(-f);
        x = retract(x, from_real_coords(frame, step));
    }
    throw PreconditionError("Newton projection onto the locus did not converge");
}

// ---------------------------------------------------------------- locus samples

struct LocusSample {
    CVec x;
    Vec nu;
    double varsigma = 0.0;
    CMat h;
    Vec phi;
    Vec mu;
    Mat t_basis;       // algebra coordinates, columns Ad_h(H_a)
    Mat tprime_basis;  // phi-orthonormal basis of t_m intersected with Phi(m)^0
    Mat D;
    double calD = 1.0;
};

struct OffCone {
    double cone_distance;
    double varsigma;
};

struct DPhi {
    Mat D;
    double value;
};

inline DPhi d_phi(const ProjectiveModel& model, const CVec& x, const Mat& tprime_basis) {
    const int m = static_cast<int>(tprime_basis.cols());
    DPhi out{Mat(m, m), 1.0};
    std::vector<CVec> v;
    for (int i = 0; i < m; ++i) v.push_back(val(model, x, tprime_basis.col(i)));
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) out.D(i, j) = rho(v[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(j)]);
    if (m > 0) {
        Eigen::SelfAdjointEigenSolver<Mat> es(out.D);
        if (es.eigenvalues().minCoeff() <= 1e-12)
            throw PreconditionError("D^phi(m) is not positive-definite: the action is not transverse to the cone");
        out.value = std::sqrt(out.D.determinant());
    }
    return out;
}

inline DPhi d_phi(const ProjectiveModel& model, const LocusSample& s) { return d_phi(model, s.x, s.tprime_basis); }

inline std::variant<LocusSample, OffCone> locus_decompose(const ProjectiveModel& model, const Vec& nu, const CVec& x,
                                                          double tol = 1e-9) {
    const auto& metric = model.metric;
    const auto& G = metric.group();
    const ConeData c = cone_data(model, nu, x, tol);
    if (!c.on_cone) return OffCone{c.cone_distance, c.varsigma};
    LocusSample s;
    s.x = x;
    s.nu = nu;
    s.varsigma = c.varsigma;
    s.h = c.rep.h;
    s.phi = moment_map(model, x);
    s.mu = c.rep.mu;
    s.t_basis = Mat(G.dim, G.rank);
    for (int a = 0; a < G.rank; ++a) s.t_basis.col(a) = adjoint_action(G, s.h, Vec::Unit(G.dim, a));
    // t_nu = {eta in t : <nu, eta> = 0}, phi-orthonormal, then moved by Ad_h
    std::vector<Vec> qs;
    for (int a = 0; a < G.rank; ++a) {
        Vec v = Vec::Unit(G.rank, a) - (nu[a] / nu.squaredNorm()) * nu;
        Vec full = G.embed_cartan_vector(v);
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& q : qs) full -= metric.inner(q, full) * q;
        const double n = metric.norm(full);
        if (n > 1e-10) qs.push_back(full / n);
    }
    s.tprime_basis = Mat(G.dim, static_cast<int>(qs.size()));
    for (std::size_t i = 0; i < qs.size(); ++i)
        s.tprime_basis.col(static_cast<int>(i)) = adjoint_action(G, s.h, qs[i]);
    const DPhi dp = d_phi(model, x, s.tprime_basis);
    s.D = dp.D;
    s.calD = dp.value;
    return s;
}

inline LocusSample require_on_locus(const ProjectiveModel& model, const Vec& nu, const CVec& x) {
    auto r = locus_decompose(model, nu, x);
    if (auto* off = std::get_if<OffCone>(&r))
        throw PreconditionError("point is off the locus (cone distance " + std::to_string(off->cone_distance) + ")");
    return std::get<LocusSample>(r);
}

// {J eta_M(m)} for eta in the t'_m basis.
inline CMat normal_space(const ProjectiveModel& model, const LocusSample& s) {
    const int m = static_cast<int>(s.tprime_basis.cols());
    const cplx I(0.0, 1.0);
    CMat N(model.ambient(), m);
    for (int i = 0; i < m; ++i) N.col(i) = I * val(model, s.x, s.tprime_basis.col(i));
    if (m > 0) {
        const CMat frame = horizontal_frame(s.x);
        Mat R(2 * model.d, m);
        for (int i = 0; i < m; ++i) R.col(i) = real_coords(frame, N.col(i));
        Eigen::JacobiSVD<Mat> svd(R);
        if (svd.singularValues().minCoeff() < 1e-10)
            throw NumericalError("normal space has dimension below r_G - 1");
    }
    return N;
}

// Real tangent basis of M_O at x (frame coordinates): kernel of the cone-defect Jacobian.
inline Mat locus_tangent_basis(const ProjectiveModel& model, const Vec& nu, const CVec& x, const CMat& frame) {
    const int d2 = 2 * model.d;
    if (model.group().rank == 1) return Mat::Identity(d2, d2);
    const Mat J = fd_jacobian([&](const CVec& y) { return cone_defect(model, nu, y); }, x, frame);
    Eigen::JacobiSVD<Mat> svd(J, Eigen::ComputeFullV);
    return svd.matrixV().rightCols(d2 - J.rows());
}

// Complex orthocomplement of g_M(m) + J g_M(m) in the horizontal space.
inline CMat w_space(const ProjectiveModel& model, const CVec& x) {
    const CMat frame = horizontal_frame(x);
    const int d = model.d, dg = model.group().dim;
    CMat V(d, dg);
    for (int a = 0; a < dg; ++a) V.col(a) = frame.adjoint() * val(model, x, Vec::Unit(dg, a));
    Eigen::JacobiSVD<CMat> svd(V, Eigen::ComputeFullU);
    const Vec sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) rank += sv[i] > 1e-10 ? 1 : 0;
    return frame * svd.matrixU().rightCols(d - rank);
}

inline constexpr double chart_radius = 0.5;

// x + (theta, v) = e^{i theta} (x sqrt(1 - |v|^2) + v) for horizontal v.
inline CVec displace(const CVec& x, double theta, const CVec& v) {
    if (std::abs(herm(v, x)) > 1e-10 * std::max(1.0, v.norm()))
        throw PreconditionError("displacement is not horizontal");
    const double nv = v.norm();
    if (nv >= chart_radius) throw PreconditionError("displacement exceeds the chart radius");
    return std::polar(1.0, theta) * (x * std::sqrt(1.0 - nv * nv) + v);
}

// Smallest singular value of val restricted to Phi(m)^0 (phi-orthonormal domain).
inline double transversality_margin(const ProjectiveModel& model, const CVec& x) {
    const auto& metric = model.metric;
    const auto& G = metric.group();
    const Vec ps = sharp(metric, moment_map(model, x)).unit_sharp;
    std::vector<Vec> qs;
    for (int a = 0; a < G.dim; ++a) {
        Vec v = Vec::Unit(G.dim, a);
        v -= metric.inner(ps, v) * ps;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& q : qs) v -= metric.inner(q, v) * q;
        const double n = metric.norm(v);
        if (n > 1e-10) qs.push_back(v / n);
    }
    const Mat V = val_matrix(model, x);
    Mat Q(G.dim, static_cast<int>(qs.size()));
    for (std::size_t i = 0; i < qs.size(); ++i) Q.col(static_cast<int>(i)) = qs[i];
    if (Q.cols() == 0) return std::numeric_limits<double>::infinity();  // nothing to be injective on
    if (Q.cols() > V.rows()) return 0.0;
    return Eigen::JacobiSVD<Mat>(V * Q).singularValues().minCoeff();
}

// ---------------------------------------------------------------- integration over X and M

inline CVec point_from_simplex(const Vec& s, const Vec& phases) {
    CVec x(s.size());
    for (int j = 0; j < s.size(); ++j) x[j] = std::sqrt(std::max(0.0, s[j])) * std::polar(1.0, j < phases.size() ? phases[j] : 0.0);
    return x;
}

// \int_X f dV_X with dV_X = (Euclidean sphere measure)/(2 pi): simplex x phases.
inline cplx integrate_X(int d, const std::function<cplx(const CVec&)>& f, int n_simplex, int n_phase) {
    const auto simplex = simplex_rule(d, n_simplex);
    std::vector<cplx> terms;
    const int np = d + 1;
    std::vector<int> idx(np, 0);
    const double wphase = std::pow(1.0 / n_phase, np);
    for (const auto& node : simplex) {
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            Vec ph(np);
            for (int j = 0; j < np; ++j) ph[j] = 2.0 * pi * idx[j] / n_phase;
            terms.push_back(std::pow(pi, d) * node.weight * wphase * f(point_from_simplex(node.s, ph)));
            int j = 0;
            while (j < np && ++idx[j] == n_phase) idx[j++] = 0;
            if (j == np) break;
        }
    }
    return pairwise_sum(terms);
}

// \int_M f dV_M for f on M (evaluated on a lift with first phase 0).
inline double integrate_M(int d, const std::function<double(const CVec&)>& f, int n_simplex, int n_phase) {
    const auto simplex = simplex_rule(d, n_simplex);
    std::vector<double> terms;
    std::vector<int> idx(d, 0);
    const double wphase = std::pow(1.0 / n_phase, d);
    for (const auto& node : simplex) {
        std::fill(idx.begin(), idx.end(), 0);
        while (true) {
            Vec ph = Vec::Zero(d + 1);
            for (int j = 0; j < d; ++j) ph[j + 1] = 2.0 * pi * idx[static_cast<std::size_t>(j)] / n_phase;
            terms.push_back(std::pow(pi, d) * node.weight * wphase * f(point_from_simplex(node.s, ph)));
            int j = 0;
            while (j < d && ++idx[static_cast<std::size_t>(j)] == n_phase) idx[static_cast<std::size_t>(j++)] = 0;
            if (j == d) break;
        }
    }
    return pairwise_sum(terms);
}

// ---------------------------------------------------------------- standing assumptions

struct AssumptionReport {
    double min_phi_norm = 0.0;
    bool zero_avoided = false;
    bool locus_nonempty = false;
    int locus_points = 0;
    double min_transversality = 0.0;
    double min_local_freeness = 0.0;
    bool transversal = false;
    std::string message;
    bool ok() const { return zero_avoided && locus_nonempty && transversal; }
};

// Grid scan: 0 not in Phi(M); the locus is non-empty; val is injective on
// Phi(m)^0 along the locus (equivalent to transversality).
inline AssumptionReport check_assumptions(const ProjectiveModel& model, const Vec& nu, int n_simplex = 12, int n_phase = 4) {
    AssumptionReport rep;
    rep.min_phi_norm = 1e300;
    rep.min_transversality = 1e300;
    rep.min_local_freeness = 1e300;
    const int d = model.d;
    const auto simplex = simplex_rule(d, n_simplex);
    std::vector<CVec> seeds;
    const int r = model.group().rank;
    for (const auto& node : simplex) {
        std::vector<int> idx(d, 0);
        while (true) {
            Vec ph = Vec::Zero(d + 1);
            for (int j = 0; j < d; ++j) ph[j + 1] = 2.0 * pi * idx[static_cast<std::size_t>(j)] / n_phase + 0.1 * j;
            const CVec x = point_from_simplex(node.s, ph);
            rep.min_phi_norm = std::min(rep.min_phi_norm, model.metric.dual_norm(moment_map(model, x)));
            seeds.push_back(x);
            int j = 0;
            while (j < d && ++idx[static_cast<std::size_t>(j)] == n_phase) idx[static_cast<std::size_t>(j++)] = 0;
            if (j == d) break;
        }
    }
    rep.zero_avoided = rep.min_phi_norm > 1e-8;
    if (!rep.zero_avoided) {
        rep.message = "0 lies in Phi(M)";
        return rep;
    }
    std::vector<CVec> locus;
    if (r == 1) {
        for (const CVec& x : seeds)
            if (cone_data(model, nu, x).on_cone) locus.push_back(x);
    } else {
        // seeds on the positive side of the cone near a sign change of the defect
        double fmin = 1e300, fmax = -1e300;
        for (const CVec& x : seeds) {
            const ConeData c = cone_data(model, nu, x);
            if (c.varsigma <= 0) continue;
            const double f = cone_defect(model, nu, x)[0];
            fmin = std::min(fmin, f);
            fmax = std::max(fmax, f);
        }
        if (fmin < 0 && fmax > 0) {
            std::vector<std::size_t> order(seeds.size());
            std::iota(order.begin(), order.end(), 0);
            std::vector<double> score(seeds.size(), 1e300);
            for (std::size_t i = 0; i < seeds.size(); ++i) {
                const ConeData c = cone_data(model, nu, seeds[i]);
                if (c.varsigma > 0) score[i] = cone_defect(model, nu, seeds[i]).norm();
            }
            std::sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] < score[b]; });
            for (std::size_t i = 0; i < std::min<std::size_t>(order.size(), 16); ++i) {
                try {
                    locus.push_back(project_to_locus(model, nu, seeds[order[i]]));
                } catch (const PreconditionError&) {
                }
            }
        }
    }
    rep.locus_points = static_cast<int>(locus.size());
    rep.locus_nonempty = !locus.empty();
    if (!rep.locus_nonempty) {
        rep.message = "the locus M_O is empty (Phi(M) misses the cone over the orbit)";
        return rep;
    }
    for (const CVec& x : locus) {
        rep.min_transversality = std::min(rep.min_transversality, transversality_margin(model, x));
        rep.min_local_freeness = std::min(rep.min_local_freeness, local_freeness(model, x));
    }
    rep.transversal = rep.min_transversality > 1e-6;
    if (!rep.transversal) rep.message = "val_m is not injective on Phi(m)^0 along the locus (transversality fails)";
    return rep;
}

}  // namespace eqszego
