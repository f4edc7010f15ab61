#pragma once

#include "model_geometry.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <map>

namespace eqszego {

// A kernel value carried with its logarithmic modulus, which stays finite
// when the value itself under- or overflows.
struct KernelValue {
    cplx value;
    double log_abs = -std::numeric_limits<double>::infinity();
};

namespace detail {

struct LogTerm {
    double log_mag;
    double phase;
};

inline KernelValue sum_log_terms(const std::vector<LogTerm>& terms) {
    KernelValue out{0.0};
    if (terms.empty()) return out;
    double M = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms) M = std::max(M, t.log_mag);
    if (!std::isfinite(M)) return out;
    std::vector<cplx> shifted(terms.size());
    for (std::size_t i = 0; i < terms.size(); ++i) shifted[i] = std::polar(std::exp(terms[i].log_mag - M), terms[i].phase);
    const cplx s = pairwise_sum(shifted);
    out.log_abs = std::abs(s) > 0 ? M + std::log(std::abs(s)) : -std::numeric_limits<double>::infinity();
    out.value = std::abs(s) > 0 ? std::polar(std::exp(out.log_abs), std::arg(s)) : cplx(0.0);
    return out;
}

// log (n+d)!/(d! vol(X)), the prefactor shared by all level-n monomial terms.
inline double log_level_prefactor(int d, int n) {
    return std::lgamma(n + d + 1.0) - std::lgamma(d + 1.0) - std::log(volume_X(d));
}

inline double log_binomial(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

inline void enumerate_level(int parts, int n, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (parts == 1) {
        cur.push_back(n);
        out.push_back(cur);
        cur.pop_back();
        return;
    }
    for (int a = n; a >= 0; --a) {
        cur.push_back(a);
        enumerate_level(parts - 1, n - a, cur, out);
        cur.pop_back();
    }
}

}  // namespace detail

struct LevelBasis {
    int d = 1;
    int n = 0;
    std::vector<std::vector<int>> alphas;
    std::vector<double> log_norm_sq;  // log ||z^alpha||^2

    LevelBasis(int d_, int n_) : d(d_), n(n_) {
        std::vector<int> cur;
        detail::enumerate_level(d + 1, n, cur, alphas);
        for (const auto& a : alphas) log_norm_sq.push_back(log_monomial_norm_sq(d, a));
    }

    static double log_monomial_norm_sq(int d, const std::vector<int>& a) {
        int n = 0;
        double s = std::log(volume_X(d)) + std::lgamma(d + 1.0);
        for (int v : a) {
            s += std::lgamma(v + 1.0);
            n += v;
        }
        return s - std::lgamma(n + d + 1.0);
    }

    std::size_t size() const { return alphas.size(); }
};

inline cplx monomial(const CVec& x, const std::vector<int>& a) {
    cplx p = 1.0;
    for (std::size_t j = 0; j < a.size(); ++j) p *= std::pow(x[static_cast<int>(j)], a[j]);
    return p;
}

// ||z^alpha||^2 by quadrature over X.
inline double monomial_norm_sq_quadrature(int d, const std::vector<int>& a, int n_simplex = 24) {
    return integrate_X(d, [&](const CVec& x) { return cplx(std::norm(monomial(x, a))); }, n_simplex, 1).real();
}

// Level-n Szego kernel, closed form (dim_n / vol) <x, y>^n.
inline KernelValue level_kernel(int d, int n, const CVec& x, const CVec& y) {
    const cplx ip = herm(x, y);
    if (std::abs(ip) == 0.0) return n == 0 ? KernelValue{1.0 / volume_X(d), -std::log(volume_X(d))} : KernelValue{0.0};
    const double lm = detail::log_binomial(n + d, d) - std::log(volume_X(d)) + n * std::log(std::abs(ip));
    return {std::polar(std::exp(lm), n * std::arg(ip)), lm};
}

// Same kernel as an explicit sum over the monomial basis.
inline cplx level_kernel_basis_sum(const LevelBasis& b, const CVec& x, const CVec& y) {
    std::vector<cplx> terms;
    for (std::size_t i = 0; i < b.size(); ++i)
        terms.push_back(monomial(x, b.alphas[i]) * std::conj(monomial(y, b.alphas[i])) / std::exp(b.log_norm_sq[i]));
    return pairwise_sum(terms);
}

// One summand family of an isotypic component for split models: polynomials of
// degree `degree` in the first split_dim coordinates and level - degree in the rest.
struct KernelBlock {
    int level;
    int degree;
    long long dim;
};

struct IsotypicBasis {
    Vec nu;
    int k = 1;
    int d = 1;
    ModelKind kind = ModelKind::torus_weights;
    int split_dim = 0;
    std::vector<std::vector<int>> monomials;  // torus models
    std::vector<KernelBlock> blocks;          // split models
    long long dim = 0;
    long long representation_dim = 0;  // multiplicity x d_{k nu}, for the count invariant
};

namespace detail {

inline long long binomial_ll(int n, int k) {
    if (k < 0 || k > n) return 0;
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// c with c.w_j >= 1 for every weight column; exists iff 0 is not in the weight hull.
inline Vec separating_functional(const Eigen::MatrixXi& W) {
    const int r = static_cast<int>(W.rows());
    const Mat Wd = W.cast<double>();
    Vec best;
    double best_score = 0.0;
    auto consider = [&](Vec c) {
        if (c.norm() == 0.0) return;
        c.normalize();
        const double score = (c.transpose() * Wd).minCoeff();
        if (score > best_score) best_score = score, best = c;
    };
    consider(Wd.rowwise().sum());
    for (int a = 0; a < r; ++a) {
        consider(Vec::Unit(r, a));
        consider(-Vec::Unit(r, a));
    }
    std::mt19937_64 rng(99);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        Vec c(r);
        for (int a = 0; a < r; ++a) c[a] = N(rng);
        consider(c);
    }
    if (best_score <= 1e-12) throw PreconditionError("0 lies in the convex hull of the weights; isotypic components are infinite");
    return best / best_score;
}

}  // namespace detail

inline IsotypicBasis isotypic_basis(const ProjectiveModel& model, const Vec& nu, int k) {
    const auto& G = model.group();
    if (nu.size() != G.rank) throw ConfigError("nu needs " + std::to_string(G.rank) + " coordinates");
    IsotypicBasis b;
    b.nu = nu;
    b.k = k;
    b.d = model.d;
    b.kind = model.kind;
    b.split_dim = model.split_dim;
    const Vec lam = static_cast<double>(k) * nu - G.delta;
    for (int a = 0; a < lam.size(); ++a)
        if (std::abs(lam[a] - std::round(lam[a])) > 1e-9) return b;  // k nu not in E^G: empty

    if (model.kind == ModelKind::torus_weights) {
        const Eigen::MatrixXi& W = model.weights;
        const int r = static_cast<int>(W.rows()), n = static_cast<int>(W.cols());
        Eigen::VectorXi target(r);
        for (int a = 0; a < r; ++a) target[a] = static_cast<int>(std::lround(lam[a]));
        const Vec c = detail::separating_functional(W);
        std::vector<int> cur(static_cast<std::size_t>(n), 0);
        std::function<void(int, Eigen::VectorXi)> rec = [&](int j, Eigen::VectorXi rem) {
            const double cwj = c.dot(W.col(j).cast<double>());
            const double budget = c.dot(rem.cast<double>());
            if (budget < -1e-9) return;
            if (j == n - 1) {
                // solve rem = alpha_j w_j
                const Eigen::VectorXi w = W.col(j);
                int alpha = -1;
                for (int a = 0; a < r; ++a)
                    if (w[a] != 0) {
                        if (rem[a] % w[a] != 0) return;
                        alpha = rem[a] / w[a];
                        break;
                    }
                if (alpha < 0) return;
                if (rem != alpha * w) return;
                cur[static_cast<std::size_t>(j)] = alpha;
                b.monomials.push_back(cur);
                return;
            }
            const int amax = static_cast<int>(std::floor(budget / cwj + 1e-9));
            for (int alpha = 0; alpha <= amax; ++alpha) {
                cur[static_cast<std::size_t>(j)] = alpha;
                rec(j + 1, rem - alpha * W.col(j));
            }
            cur[static_cast<std::size_t>(j)] = 0;
        };
        rec(0, target);
        b.dim = static_cast<long long>(b.monomials.size());
        b.representation_dim = b.dim;  // every d_{k nu} is 1 for tori
        return b;
    }

    // split models: Sym^j(std) (x) det^{j a} (x) polys of degree n - j in q variables (x) det^{b (n - j)}
    const int p = model.split_dim, q = model.d + 1 - p;
    int j = 0;
    long long twist = 0;  // determinant power, only meaningful for U(p)
    if (G.spec.kind == GroupKind::special_unitary) {
        for (int a = 1; a < lam.size(); ++a)
            if (std::lround(lam[a]) != 0) return b;
        j = static_cast<int>(std::lround(lam[0]));
        if (j < 0) return b;
        if (q > 0) throw PreconditionError("SU(n) model with trivial extra coordinates has 0 in Phi(M)");
        b.blocks.push_back({j, j, detail::binomial_ll(j + p - 1, p - 1)});
    } else {
        const long long l1 = std::lround(lam[0]), l2 = std::lround(lam[1]);
        for (int a = 2; a < lam.size(); ++a)
            if (std::lround(lam[a]) != l2) return b;
        j = static_cast<int>(l1 - l2);
        if (j < 0) return b;
        twist = l2 - static_cast<long long>(j) * model.det_a;
        int m = -1;  // n - j
        if (q == 0) {
            if (twist == 0) m = 0;
        } else if (model.det_b == 0) {
            if (twist == 0) throw PreconditionError("infinitely many levels contribute: 0 lies in Phi(M)");
        } else if (twist % model.det_b == 0 && twist / model.det_b >= 0) {
            m = static_cast<int>(twist / model.det_b);
        }
        if (m < 0) return b;
        b.blocks.push_back({j + m, j, detail::binomial_ll(j + p - 1, p - 1) * (q > 0 ? detail::binomial_ll(m + q - 1, q - 1) : 1)});
    }
    const double dk = weyl_dimension(model.metric, static_cast<double>(k) * nu);
    for (const auto& blk : b.blocks) {
        b.dim += blk.dim;
        const int m = blk.level - blk.degree;
        b.representation_dim += static_cast<long long>(dk) * (q > 0 ? detail::binomial_ll(m + q - 1, q - 1) : 1);
    }
    return b;
}

namespace detail {

using Real = boost::multiprecision::cpp_bin_float_100;

struct RealComplex {
    Real re = 0, im = 0;
    RealComplex operator*(const RealComplex& o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
    RealComplex& operator+=(const RealComplex& o) {
        re += o.re;
        im += o.im;
        return *this;
    }
};

inline KernelValue torus_kernel_extended(const IsotypicBasis& b, const CVec& x, const CVec& y) {
    const int n = b.d + 1;
    int top = 0;
    std::vector<int> amax(static_cast<std::size_t>(n), 0);
    for (const auto& a : b.monomials) {
        top = std::max(top, std::accumulate(a.begin(), a.end(), 0));
        for (int j = 0; j < n; ++j) amax[static_cast<std::size_t>(j)] = std::max(amax[static_cast<std::size_t>(j)], a[static_cast<std::size_t>(j)]);
    }
    std::vector<Real> fact(static_cast<std::size_t>(top + b.d + 1), Real(1));
    for (std::size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * static_cast<int>(i);
    // z_j^a / a!
    std::vector<std::vector<RealComplex>> pw(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const RealComplex xj{Real(x[j].real()), Real(x[j].imag())}, yj{Real(y[j].real()), -Real(y[j].imag())};
        const RealComplex z = xj * yj;
        auto& row = pw[static_cast<std::size_t>(j)];
        row.push_back({Real(1), Real(0)});
        for (int a = 1; a <= amax[static_cast<std::size_t>(j)]; ++a) {
            RealComplex next = row.back() * z;
            next.re /= a;
            next.im /= a;
            row.push_back(next);
        }
    }
    const Real vol = boost::multiprecision::pow(boost::math::constants::pi<Real>(), b.d) / fact[static_cast<std::size_t>(b.d)];
    RealComplex sum;
    for (const auto& a : b.monomials) {
        RealComplex t{Real(1), Real(0)};
        int level = 0;
        for (int j = 0; j < n; ++j) {
            t = t * pw[static_cast<std::size_t>(j)][static_cast<std::size_t>(a[static_cast<std::size_t>(j)])];
            level += a[static_cast<std::size_t>(j)];
        }
        const Real c = fact[static_cast<std::size_t>(level + b.d)] / (fact[static_cast<std::size_t>(b.d)] * vol);
        t.re *= c;
        t.im *= c;
        sum += t;
    }
    const Real mod2 = sum.re * sum.re + sum.im * sum.im;
    KernelValue out{0.0};
    if (mod2 == 0) return out;
    out.log_abs = static_cast<double>(boost::multiprecision::log(mod2) / 2);
    out.value = std::polar(std::exp(out.log_abs), static_cast<double>(boost::multiprecision::atan2(sum.im, sum.re)));
    return out;
}

}  // namespace detail

inline long long isotypic_dim(const ProjectiveModel& model, const Vec& nu, int k) { return isotypic_basis(model, nu, k).dim; }

inline KernelValue equivariant_kernel(const IsotypicBasis& b, const CVec& x, const CVec& y) {
    std::vector<detail::LogTerm> terms;
    const int d = b.d;
    if (b.kind == ModelKind::torus_weights) {
        const int n = d + 1;
        std::vector<double> lz(static_cast<std::size_t>(n)), az(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            const cplx z = x[j] * std::conj(y[j]);
            lz[static_cast<std::size_t>(j)] = std::abs(z) > 0 ? std::log(std::abs(z)) : -std::numeric_limits<double>::infinity();
            az[static_cast<std::size_t>(j)] = std::arg(z);
        }
        terms.reserve(b.monomials.size());
        for (const auto& a : b.monomials) {
            int level = 0;
            double lm = 0.0, ph = 0.0;
            bool zero = false;
            for (int j = 0; j < n; ++j) {
                const int aj = a[static_cast<std::size_t>(j)];
                level += aj;
                if (aj == 0) continue;
                if (!std::isfinite(lz[static_cast<std::size_t>(j)])) {
                    zero = true;
                    break;
                }
                lm += aj * lz[static_cast<std::size_t>(j)] - std::lgamma(aj + 1.0);
                ph += aj * az[static_cast<std::size_t>(j)];
            }
            if (zero) continue;
            terms.push_back({lm + detail::log_level_prefactor(d, level), ph});
        }
        const KernelValue fast = detail::sum_log_terms(terms);
        // phases cancel when x and y lie on different orbits; redo the sum with 100 digits then
        double M = -std::numeric_limits<double>::infinity(), mass = 0.0;
        for (const auto& t : terms) M = std::max(M, t.log_mag);
        for (const auto& t : terms) mass += std::exp(t.log_mag - M);
        if (std::isfinite(M) && fast.log_abs < M + std::log(mass) + std::log(1e-10)) return detail::torus_kernel_extended(b, x, y);
        return fast;
    }
    const int p = b.split_dim;
    const cplx ia = y.head(p).dot(x.head(p));
    const cplx ib = d + 1 > p ? y.tail(d + 1 - p).dot(x.tail(d + 1 - p)) : cplx(1.0);
    for (const auto& blk : b.blocks) {
        const int j = blk.degree, m = blk.level - blk.degree;
        if ((j > 0 && std::abs(ia) == 0.0) || (m > 0 && std::abs(ib) == 0.0)) continue;
        double lm = detail::log_level_prefactor(d, blk.level) - std::lgamma(j + 1.0) - std::lgamma(m + 1.0);
        double ph = 0.0;
        if (j > 0) lm += j * std::log(std::abs(ia)), ph += j * std::arg(ia);
        if (m > 0) lm += m * std::log(std::abs(ib)), ph += m * std::arg(ib);
        terms.push_back({lm, ph});
    }
    return detail::sum_log_terms(terms);
}

inline KernelValue equivariant_kernel(const ProjectiveModel& model, const Vec& nu, int k, const CVec& x, const CVec& y) {
    return equivariant_kernel(isotypic_basis(model, nu, k), x, y);
}

// Levels touched by the isotypic component.
inline std::vector<int> isotypic_levels(const IsotypicBasis& b) {
    std::vector<int> levels;
    for (const auto& a : b.monomials) levels.push_back(std::accumulate(a.begin(), a.end(), 0));
    for (const auto& blk : b.blocks) levels.push_back(blk.level);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    return levels;
}

// Independent route: d_{k nu} \int conj(chi_{k nu}(g)) Pi_L(g^{-1} x, y) dg with Pi_L
// the finite sum of the level kernels that can contribute.
inline cplx equivariant_kernel_peter_weyl(const ProjectiveModel& model, const Vec& nu, int k, const CVec& x, const CVec& y,
                                          int n_haar = 32, double tol = 1e-8) {
    const IsotypicBasis b = isotypic_basis(model, nu, k);
    const std::vector<int> levels = isotypic_levels(b);
    auto f = [&](const CMat& g) {
        const CVec gx = model.act(g.adjoint(), x);
        cplx s = 0.0;
        for (int n : levels) s += level_kernel(model.d, n, gx, y).value;
        return s;
    };
    return peter_weyl_projector_weight(model.metric, nu, k, f, n_haar, tol);
}

struct ProfileSample {
    CVec x;
    double value;
    double log_value;
};

inline std::vector<ProfileSample> diag_profile(const IsotypicBasis& b, const std::vector<CVec>& path) {
    std::vector<ProfileSample> out;
    for (const CVec& x : path) {
        const KernelValue v = equivariant_kernel(b, x, x);
        out.push_back({x, v.value.real(), v.log_abs});
    }
    return out;
}

// ---------------------------------------------------------------- orbit separation

inline int group_parameter_count(const CompactGroup& G) {
    if (G.spec.kind == GroupKind::torus) return G.rank;
    if (G.matrix_size == 2) return G.spec.kind == GroupKind::unitary ? 4 : 3;
    throw PreconditionError("orbit distance supports tori, SU(2) and U(2)");
}

inline CMat group_element_from_parameters(const CompactGroup& G, const Vec& p) {
    if (G.spec.kind == GroupKind::torus) {
        CMat g = CMat::Zero(G.rank, G.rank);
        for (int a = 0; a < G.rank; ++a) g(a, a) = std::polar(1.0, p[a]);
        return g;
    }
    CMat g = su2_hopf(p[0], p[1], p[2]);
    if (G.spec.kind == GroupKind::unitary) g *= std::polar(1.0, p[3]);
    return g;
}

// dist_X(G x, G y): dense grid, then compass search.
inline double orbit_distance(const ProjectiveModel& model, const CVec& x, const CVec& y) {
    const auto& G = model.group();
    const int np = group_parameter_count(G);
    auto dist = [&](const Vec& p) {
        const double c = std::clamp(rho(model.act(group_element_from_parameters(G, p), x), y), -1.0, 1.0);
        return std::acos(c);
    };
    int per = 0;
    if (G.spec.kind == GroupKind::torus) per = G.rank == 1 ? 1024 : 96;
    else per = G.spec.kind == GroupKind::unitary ? 16 : 32;
    Vec best_p = Vec::Zero(np);
    double best = 1e300;
    std::vector<int> idx(static_cast<std::size_t>(np), 0);
    Vec span(np);
    for (int a = 0; a < np; ++a) span[a] = 2.0 * pi;
    if (G.spec.kind != GroupKind::torus) span[0] = pi / 2.0;
    while (true) {
        Vec p(np);
        for (int a = 0; a < np; ++a) p[a] = span[a] * (idx[static_cast<std::size_t>(a)] + 0.5 * (a == 0 && G.spec.kind != GroupKind::torus)) / per;
        const double v = dist(p);
        if (v < best) best = v, best_p = p;
        int a = 0;
        while (a < np && ++idx[static_cast<std::size_t>(a)] == per) idx[static_cast<std::size_t>(a++)] = 0;
        if (a == np) break;
    }
    double step = 2.0 * pi / per;
    while (step > 1e-10) {
        bool improved = false;
        for (int a = 0; a < np; ++a)
            for (double s : {step, -step}) {
                Vec p = best_p;
                p[a] += s;
                const double v = dist(p);
                if (v < best) best = v, best_p = p, improved = true;
            }
        if (!improved) step *= 0.5;
    }
    return best;
}

struct OffOrbitValue {
    KernelValue kernel;
    double separation;
};

inline OffOrbitValue off_orbit_value(const ProjectiveModel& model, const IsotypicBasis& b, const CVec& x, const CVec& y) {
    return {equivariant_kernel(b, x, y), orbit_distance(model, x, y)};
}

}  // namespace eqszego
