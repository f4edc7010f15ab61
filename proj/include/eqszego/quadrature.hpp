#pragma once

#include "common.hpp"

#include <cmath>
#include <utility>

namespace eqszego {

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1] by Newton iteration on P_n.
inline Rule1D gauss_legendre(int n) {
    if (n < 1) throw ConfigError("gauss_legendre: need at least one node");
    Rule1D r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // one more derivative evaluation at the converged node
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        r.nodes[i] = -z;
        r.nodes[n - 1 - i] = z;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

inline Rule1D gauss_legendre(int n, double a, double b) {
    Rule1D r = gauss_legendre(n);
    const double h = 0.5 * (b - a), c = 0.5 * (b + a);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = c + h * r.nodes[i];
        r.weights[i] *= h;
    }
    return r;
}

// Periodic trapezoid on [0, 2pi); weights sum to 1 (normalized angle measure).
inline Rule1D periodic_trapezoid(int n) {
    if (n < 1) throw ConfigError("periodic_trapezoid: need at least one node");
    Rule1D r;
    for (int i = 0; i < n; ++i) {
        r.nodes.push_back(2.0 * pi * i / n);
        r.weights.push_back(1.0 / n);
    }
    return r;
}

// Collapsed-coordinate rule on the standard simplex {s_j >= 0, sum s_j = 1} in
// R^{d+1}; weights integrate against ds_1...ds_d (total mass 1/d!).
struct SimplexNode {
    Vec s;
    double weight;
    Vec collapsed;  // the (a_1..a_d) in [0,1]^d that produced s
};

inline Vec simplex_from_collapsed(const Vec& a) {
    const int d = static_cast<int>(a.size());
    Vec s(d + 1);
    double rest = 1.0;
    for (int j = 0; j < d; ++j) {
        s[j] = rest * a[j];
        rest *= 1.0 - a[j];
    }
    s[d] = rest;
    return s;
}

inline double simplex_collapsed_jacobian(const Vec& a) {
    const int d = static_cast<int>(a.size());
    double jac = 1.0;
    for (int j = 0; j < d; ++j) jac *= std::pow(1.0 - a[j], d - 1 - j);
    return jac;
}

inline std::vector<SimplexNode> simplex_rule(int d, int n) {
    std::vector<SimplexNode> out;
    if (d == 0) {
        out.push_back({Vec::Ones(1), 1.0, Vec()});
        return out;
    }
    const Rule1D g = gauss_legendre(n, 0.0, 1.0);
    std::vector<int> idx(d, 0);
    while (true) {
        Vec a(d);
        double w = 1.0;
        for (int j = 0; j < d; ++j) {
            a[j] = g.nodes[idx[j]];
            w *= g.weights[idx[j]];
        }
        out.push_back({simplex_from_collapsed(a), w * simplex_collapsed_jacobian(a), a});
        int j = 0;
        while (j < d && ++idx[j] == n) idx[j++] = 0;
        if (j == d) break;
    }
    return out;
}

// Least-squares line through (x_i, y_i): returns (slope, intercept, rms residual).
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw NumericalError("fit_line: need at least two points");
    Mat A(n, 2);
    Vec b(n);
    for (std::size_t i = 0; i < n; ++i) {
        A(i, 0) = x[i];
        A(i, 1) = 1.0;
        b[i] = y[i];
    }
    const Vec c = A.colPivHouseholderQr().solve(b);
    LineFit f;
    f.slope = c[0];
    f.intercept = c[1];
    f.residual = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(n));
    return f;
}

}  // namespace eqszego
