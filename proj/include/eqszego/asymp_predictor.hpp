#pragma once

#include "characters.hpp"
#include "model_geometry.hpp"

namespace eqszego {

// Standard omega_0(u, v) = Im(u^* v) on C^d.
inline double omega0(const CVec& u, const CVec& v) { return omega(u, v); }

inline cplx psi2(const CVec& u, const CVec& v) {
    return cplx(-(u - v).squaredNorm() / 2.0, -omega0(u, v));
}

// Factors of the leading coefficient, kept for reports.
struct PsiBreakdown {
    double value = 0.0;
    double phi_norm = 0.0;
    double calD = 1.0;
    double orbit_volume = 0.0;  // vol(O_{nu_u})
    double s_det = 1.0;         // |det S_{nu_u^phi}|
    double vol_torus = 0.0;
    double vol_group = 0.0;
};

inline PsiBreakdown psi_nu_breakdown(const ProjectiveModel& model, const Vec& nu, const LocusSample& s) {
    const auto& metric = model.metric;
    const auto& G = metric.group();
    const int r = G.rank;
    PsiBreakdown b;
    b.phi_norm = metric.dual_norm(s.phi);
    b.calD = s.calD;
    const Vec nu_u = nu / metric.cartan_dual_norm(nu);
    b.orbit_volume = std::pow(2.0 * pi, G.n_g) * weyl_dimension_polynomial(metric, nu_u);
    const Vec nu_u_sharp = sharp(metric, G.embed_cartan_covector(nu_u)).sharp.head(r);
    b.s_det = s_tau(metric, nu_u_sharp).abs_det;
    const GroupVolumes vols = group_volumes(metric);
    b.vol_torus = vols.torus;
    b.vol_group = vols.group;
    if (!(b.phi_norm > 0)) throw NumericalError("psi_nu: ||Phi(m)|| vanishes");
    if (!(b.calD > 0)) throw NumericalError("psi_nu: D^phi(m) vanishes");
    if (!(b.s_det > 0)) throw NumericalError("psi_nu: det S vanishes (nu is not regular)");
    if (!(b.vol_group > 0)) throw NumericalError("psi_nu: vol(G) vanishes");
    b.value = std::pow(2.0, 1.0 + (r - 1) / 2.0) * pi / (b.phi_norm * b.calD) * b.orbit_volume * b.orbit_volume / b.s_det *
              b.vol_torus / (b.vol_group * b.vol_group);
    return b;
}

inline double psi_nu(const ProjectiveModel& model, const Vec& nu, const LocusSample& s) {
    return psi_nu_breakdown(model, nu, s).value;
}

inline double leading_exponent(const ProjectiveModel& model) { return model.d + (1.0 - model.group().rank) / 2.0; }

struct Prediction {
    std::string model_id;
    Vec nu;
    double k = 0.0;
    CVec x, v1, w1, v2, w2;
    cplx value;
    double psi = 0.0;
    double varsigma = 0.0;
    double exponent = 0.0;
    double exponent_factor = 0.0;
    cplx gaussian_factor;
};

struct DisplacementGuard {
    double C = 8.0;
    double epsilon = 0.15;
};

namespace detail {

inline double real_span_residual(const CMat& frame, const CMat& span, const CVec& v) {
    const Vec rv = real_coords(frame, v);
    if (span.cols() == 0) return rv.norm();
    Mat R(rv.size(), span.cols());
    for (int i = 0; i < span.cols(); ++i) R.col(i) = real_coords(frame, span.col(i));
    const Vec c = R.completeOrthogonalDecomposition().solve(rv);
    return (R * c - rv).norm();
}

inline double complex_span_residual(const CMat& W, const CVec& w) {
    if (W.cols() == 0) return w.norm();
    return (w - W * (W.adjoint() * w)).norm();
}

}  // namespace detail

// Leading term of the near-diagonal expansion at x + (v_j + w_j)/sqrt(k).
inline Prediction predict_near_diagonal(const ProjectiveModel& model, const Vec& nu, const LocusSample& s, double k,
                                        const CVec& v1, const CVec& w1, const CVec& v2, const CVec& w2,
                                        DisplacementGuard guard = {}) {
    if (k <= 0) throw ConfigError("k must be positive");
    const CMat frame = horizontal_frame(s.x);
    const CMat N = normal_space(model, s);
    const CMat W = w_space(model, s.x);
    const double tol = 1e-8;
    for (const CVec* v : {&v1, &v2})
        if (detail::real_span_residual(frame, N, *v) > tol * std::max(1.0, v->norm()))
            throw PreconditionError("v displacement is not in the normal space J t'_m");
    for (const CVec* w : {&w1, &w2})
        if (detail::complex_span_residual(W, *w) > tol * std::max(1.0, w->norm()))
            throw PreconditionError("w displacement is not in the w-space");
    const double bound = guard.C * std::pow(k, guard.epsilon);
    for (const CVec* u : {&v1, &w1, &v2, &w2})
        if (u->norm() > bound) throw PreconditionError("displacement exceeds C k^epsilon");

    Prediction p;
    p.model_id = model.id;
    p.nu = nu;
    p.k = k;
    p.x = s.x;
    p.v1 = v1, p.w1 = w1, p.v2 = v2, p.w2 = w2;
    p.psi = psi_nu(model, nu, s);
    p.varsigma = s.varsigma;
    p.exponent = leading_exponent(model);
    p.exponent_factor = std::pow(k / (s.varsigma * pi), p.exponent);
    p.gaussian_factor = std::exp((psi2(w1, w2) - (v1.squaredNorm() + v2.squaredNorm())) / s.varsigma);
    p.value = p.psi * p.exponent_factor * p.gaussian_factor;
    return p;
}

inline Prediction predict_diagonal(const ProjectiveModel& model, const Vec& nu, const LocusSample& s, double k) {
    const CVec z = CVec::Zero(model.ambient());
    return predict_near_diagonal(model, nu, s, k, z, z, z, z);
}

// ---------------------------------------------------------------- dimension coefficient

struct LocusQuadratureLevel {
    int n_simplex = 24;  // r = 1: Gauss-Legendre per collapsed coordinate
    int n_phase = 8;
    int grid = 32;       // r = 2: marching-squares cells per side
    int gl_per_segment = 6;
};

struct DimCoefficient {
    double delta0 = 0.0;
    int locus_nodes = 0;
    int skipped_nodes = 0;
};

namespace detail {

inline double locus_integrand(const ProjectiveModel& model, const Vec& nu, const CVec& x, int* skipped) {
    const auto dec = locus_decompose(model, nu, x);
    if (const auto* ls = std::get_if<LocusSample>(&dec)) {
        const int r = model.group().rank;
        return psi_nu(model, nu, *ls) / std::pow(ls->varsigma, model.d + 1 - r);
    }
    if (skipped) ++*skipped;
    return 0.0;
}

struct Segment {
    Eigen::Vector2d p, q;
};

// Zero crossings of F over the unit square, one segment per cell crossing pair.
inline std::vector<Segment> marching_squares(const std::function<double(double, double)>& F, int n) {
    const double h = 1.0 / n;
    Mat vals(n + 1, n + 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) vals(i, j) = F(i * h, j * h);
    auto root = [&](Eigen::Vector2d a, double fa, Eigen::Vector2d b, double fb) {
        for (int it = 0; it < 60; ++it) {
            const Eigen::Vector2d m = 0.5 * (a + b);
            const double fm = F(m[0], m[1]);
            if (!std::isfinite(fm)) break;
            if ((fm < 0) == (fa < 0)) a = m, fa = fm;
            else b = m, fb = fm;
            if ((b - a).norm() < 1e-15) break;
        }
        return Eigen::Vector2d(0.5 * (a + b));
    };
    std::vector<Segment> segs;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Eigen::Vector2d c[4] = {{i * h, j * h}, {(i + 1) * h, j * h}, {(i + 1) * h, (j + 1) * h}, {i * h, (j + 1) * h}};
            const double f[4] = {vals(i, j), vals(i + 1, j), vals(i + 1, j + 1), vals(i, j + 1)};
            bool finite = true;
            for (double v : f) finite = finite && std::isfinite(v);
            if (!finite) continue;
            std::vector<Eigen::Vector2d> pts;
            for (int e = 0; e < 4; ++e) {
                const int e2 = (e + 1) % 4;
                if ((f[e] < 0) != (f[e2] < 0)) pts.push_back(root(c[e], f[e], c[e2], f[e2]));
            }
            if (pts.size() == 2) {
                segs.push_back({pts[0], pts[1]});
            } else if (pts.size() == 4) {
                // saddle: the centre value decides which corners connect
                const Eigen::Vector2d mid = 0.5 * (c[0] + c[2]);
                const double fc = F(mid[0], mid[1]);
                if ((fc < 0) == (f[0] < 0)) {
                    segs.push_back({pts[0], pts[1]});
                    segs.push_back({pts[2], pts[3]});
                } else {
                    segs.push_back({pts[3], pts[0]});
                    segs.push_back({pts[1], pts[2]});
                }
            }
        }
    return segs;
}

}  // namespace detail

// 2^{-(r-1)/2} \int_{M_O} Psi / varsigma^{d+1-r} dV_{M_O}.
inline DimCoefficient predict_dim_coeff(const ProjectiveModel& model, const Vec& nu, LocusQuadratureLevel level = {}) {
    const int r = model.group().rank, d = model.d;
    DimCoefficient out;
    if (r == 1) {
        int on = 0;
        out.delta0 = integrate_M(
            d,
            [&](const CVec& x) {
                const double v = detail::locus_integrand(model, nu, x, nullptr);
                on += v > 0 ? 1 : 0;
                return v;
            },
            level.n_simplex, level.n_phase);
        out.locus_nodes = on;
        if (on == 0) throw PreconditionError("the locus M_O is empty (Phi(M) misses the cone over the orbit)");
        return out;
    }
    if (r != 2 || d != 2) throw PreconditionError("hypersurface locus quadrature supports rank 2 on CP^2");

    const Rule1D gl = gauss_legendre(level.gl_per_segment, 0.0, 1.0);
    std::vector<double> terms;
    const double wphase = std::pow(1.0 / level.n_phase, d) * std::pow(pi, d);
    for (int i1 = 0; i1 < level.n_phase; ++i1)
        for (int i2 = 0; i2 < level.n_phase; ++i2) {
            Vec ph = Vec::Zero(d + 1);
            ph[1] = 2.0 * pi * i1 / level.n_phase;
            ph[2] = 2.0 * pi * i2 / level.n_phase;
            auto point = [&](double a, double b) {
                CVec x = point_from_simplex(simplex_from_collapsed(Eigen::Vector2d(a, b)), ph);
                return CVec(x / x.norm());
            };
            auto Fx = [&](const CVec& x) {
                try {
                    if (cone_data(model, nu, x).varsigma <= 0) return std::numeric_limits<double>::quiet_NaN();
                    return cone_defect(model, nu, x)[0];
                } catch (const PreconditionError&) {
                    return std::numeric_limits<double>::quiet_NaN();
                }
            };
            auto F = [&](double a, double b) { return Fx(point(a, b)); };
            const double fh = 1e-6;
            auto grad = [&](const Eigen::Vector2d& p) {
                return Eigen::Vector2d((F(p[0] + fh, p[1]) - F(p[0] - fh, p[1])) / (2 * fh),
                                       (F(p[0], p[1] + fh) - F(p[0], p[1] - fh)) / (2 * fh));
            };
            for (const auto& seg : detail::marching_squares(F, level.grid)) {
                const Eigen::Vector2d chord = seg.q - seg.p;
                const double len = chord.norm();
                if (len < 1e-14) continue;
                const Eigen::Vector2d nrm(-chord[1] / len, chord[0] / len);
                for (std::size_t g = 0; g < gl.nodes.size(); ++g) {
                    const Eigen::Vector2d c = seg.p + gl.nodes[g] * chord;
                    // project onto the curve along the chord normal
                    double h = 0.0;
                    bool ok = false;
                    for (int it = 0; it < 30; ++it) {
                        const Eigen::Vector2d y = c + h * nrm;
                        const double f = F(y[0], y[1]);
                        if (!std::isfinite(f)) break;
                        if (std::abs(f) < 1e-14) {
                            ok = true;
                            break;
                        }
                        const double df = grad(y).dot(nrm);
                        if (df == 0.0) break;
                        h -= f / df;
                        ok = std::abs(f / df) < 1e-15;
                        if (ok) break;
                    }
                    const Eigen::Vector2d y = c + h * nrm;
                    if (!ok || y.minCoeff() < 0.0 || y.maxCoeff() > 1.0) {
                        ++out.skipped_nodes;
                        continue;
                    }
                    const Eigen::Vector2d gy = grad(y);
                    const double gn = gy.dot(nrm);
                    if (gn == 0.0) {
                        ++out.skipped_nodes;
                        continue;
                    }
                    // |gamma'(t)| for gamma(t) = p + t chord + h(t) nrm
                    const double dh = -gy.dot(chord) / gn;
                    const double speed = std::hypot(len, dh);
                    const CVec x = point(y[0], y[1]);
                    const double gM = fd_jacobian([&](const CVec& z) { return Vec::Constant(1, Fx(z)); }, x, horizontal_frame(x)).norm();
                    const double integrand = detail::locus_integrand(model, nu, x, &out.skipped_nodes);
                    const double jac = simplex_collapsed_jacobian(Eigen::Vector2d(y[0], y[1]));
                    terms.push_back(wphase * gl.weights[g] * speed * integrand * gM * jac / gy.norm());
                    ++out.locus_nodes;
                }
            }
        }
    if (out.locus_nodes == 0) throw PreconditionError("the locus M_O is empty (Phi(M) misses the cone over the orbit)");
    out.delta0 = pairwise_sum(terms) / std::sqrt(2.0);
    return out;
}

// ---------------------------------------------------------------- Hessian of the phase

struct HessianCheck {
    Mat hessian;       // analytic, variables (u, s, xi'', gamma)
    Mat hessian_fd;    // central differences of the phase
    double det = 0.0;
    double det_formula = 0.0;
    int signature = 0;
    double fd_residual = 0.0;
    double reduction_residual = 0.0;  // |Coad_{h^-1} Phi(m) - varsigma nu|
};

// Phase Upsilon(u, s, xi'', gamma) = phi(u varsigma nu^phi - Ad_{exp(gamma.F)} nu^phi, s nu_u^phi + xi' + xi''.F)
// with F a phi-orthonormal basis of t^perp; critical at (1/varsigma, 0, 0, 0).
inline HessianCheck hessian_check(const ProjectiveModel& model, const Vec& nu, const LocusSample& s, double xi_prime_scale = 0.3) {
    const auto& metric = model.metric;
    const auto& G = metric.group();
    const int r = G.rank;
    HalfWeight(metric, nu);  // throws unless regular and dominant
    HessianCheck out;

    const Vec coad = coadjoint_action(G, s.h.adjoint(), s.phi);
    out.reduction_residual = metric.dual_norm(coad - s.varsigma * G.embed_cartan_covector(nu));

    const Sharp ns = sharp(metric, G.embed_cartan_covector(nu));
    const Vec nphi = ns.sharp, nphi_u = ns.unit_sharp;
    const double varsigma = s.varsigma;
    const STau S = s_tau(metric, nphi.head(r));
    const Mat& F = S.basis;
    const int m = static_cast<int>(F.cols());

    // xi' in t, orthogonal to nu^phi
    Vec xi_prime = Vec::Zero(G.dim);
    for (int a = 0; a < r && r > 1; ++a) {
        Vec v = Vec::Zero(G.dim);
        v[a] = 1.0;
        v -= metric.inner(nphi_u, v) * nphi_u;
        if (metric.norm(v) > 1e-8) {
            xi_prime = xi_prime_scale * v / metric.norm(v);
            break;
        }
    }

    const int n = 2 + 2 * m;
    out.hessian = Mat::Zero(n, n);
    out.hessian(0, 1) = out.hessian(1, 0) = varsigma * ns.norm;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            out.hessian(2 + i, 2 + m + j) = S.matrix(i, j);
            out.hessian(2 + m + j, 2 + i) = S.matrix(i, j);
            const Vec b1 = bracket(G, F.col(i), bracket(G, F.col(j), nphi));
            const Vec b2 = bracket(G, F.col(j), bracket(G, F.col(i), nphi));
            out.hessian(2 + m + i, 2 + m + j) = -0.5 * metric.inner(b1 + b2, xi_prime);
        }

    auto upsilon = [&](const Vec& p) {
        Vec gam = Vec::Zero(G.dim), xi2 = Vec::Zero(G.dim);
        for (int i = 0; i < m; ++i) {
            xi2 += p[2 + i] * F.col(i);
            gam += p[2 + m + i] * F.col(i);
        }
        const CMat g = G.to_matrix(gam).exp();
        const Vec first = p[0] * varsigma * nphi - G.to_coords(g * G.to_matrix(nphi) * g.adjoint());
        return metric.inner(first, p[1] * nphi_u + xi_prime + xi2);
    };
    Vec p0 = Vec::Zero(n);
    p0[0] = 1.0 / varsigma;
    const double hs = 1e-4;
    out.hessian_fd = Mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Vec pp = p0, pm = p0, mp = p0, mm = p0;
            pp[i] += hs, pp[j] += hs;
            pm[i] += hs, pm[j] -= hs;
            mp[i] -= hs, mp[j] += hs;
            mm[i] -= hs, mm[j] -= hs;
            out.hessian_fd(i, j) = (upsilon(pp) - upsilon(pm) - upsilon(mp) + upsilon(mm)) / (4 * hs * hs);
        }
    out.fd_residual = (out.hessian - out.hessian_fd).cwiseAbs().maxCoeff() / std::max(1.0, out.hessian.cwiseAbs().maxCoeff());

    out.det = out.hessian.determinant();
    const double detZ = m == 0 ? 1.0 : S.matrix.determinant();
    out.det_formula = -varsigma * varsigma * ns.norm * ns.norm * detZ * detZ;
    Eigen::SelfAdjointEigenSolver<Mat> es(out.hessian);
    const double eps = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
        const double e = es.eigenvalues()[i];
        if (std::abs(e) <= eps) throw NumericalError("phase Hessian is degenerate");
        out.signature += e > 0 ? 1 : -1;
    }
    return out;
}

}  // namespace eqszego
