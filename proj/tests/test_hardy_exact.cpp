#include <catch_amalgamated.hpp>

#include "eqszego/hardy_exact.hpp"

#include <random>

using namespace eqszego;
using Catch::Approx;

namespace {

CVec random_point(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    CVec x(n);
    for (int j = 0; j < n; ++j) x[j] = cplx(N(rng), N(rng));
    return x / x.norm();
}

Vec v1(double a) { return Vec::Constant(1, a); }

}  // namespace

TEST_CASE("level bases: norms and homogeneity", "[hardy-exact]") {
    std::mt19937_64 rng(21);
    for (int d : {1, 2}) {
        for (int n : {0, 1, 3, 6}) {
            const LevelBasis b(d, n);
            CHECK(static_cast<long long>(b.size()) == detail::binomial_ll(n + d, d));
            for (std::size_t i = 0; i < b.size(); ++i)
                CHECK(monomial_norm_sq_quadrature(d, b.alphas[i], 16) == Approx(std::exp(b.log_norm_sq[i])).epsilon(1e-10));
            const double expected = static_cast<double>(detail::binomial_ll(n + d, d)) / volume_X(d);
            for (int t = 0; t < 5; ++t) {
                const CVec x = random_point(d + 1, rng), y = random_point(d + 1, rng);
                CHECK(level_kernel_basis_sum(b, x, x).real() == Approx(expected).epsilon(1e-10));
                CHECK(level_kernel(d, n, x, x).value.real() == Approx(expected).epsilon(1e-12));
                CHECK(std::abs(level_kernel_basis_sum(b, x, y) - level_kernel(d, n, x, y).value) <= 1e-12 * expected);
            }
        }
    }
    CVec a(2), c(2);
    a << 1.0, 0.0;
    c << 0.0, 1.0;
    CHECK(level_kernel(1, 3, a, c).value == cplx(0.0));
}

TEST_CASE("level kernel reproduces itself", "[hardy-exact]") {
    std::mt19937_64 rng(22);
    for (int n : {1, 3, 6}) {
        const CVec y = random_point(2, rng);
        const cplx integral =
            integrate_X(1, [&](const CVec& x) { return cplx(std::norm(level_kernel(1, n, x, y).value)); }, 16, 16);
        CHECK(std::abs(integral - level_kernel(1, n, y, y).value) <= 1e-6);
    }
}

TEST_CASE("isotypic dimensions", "[hardy-exact]") {
    const ProjectiveModel s1 = make_model("s1-cp1-w12");
    CHECK(isotypic_dim(s1, v1(1), 10) == 6);
    for (int k = 1; k <= 40; ++k) CHECK(isotypic_dim(s1, v1(1), k) == k / 2 + 1);
    CHECK(isotypic_dim(s1, v1(-1), 5) == 0);
    const ProjectiveModel su2 = make_model("su2-cp1");
    CHECK(isotypic_dim(su2, v1(1), 7) == 7);
    const IsotypicBasis b7 = isotypic_basis(su2, v1(1), 7);
    REQUIRE(b7.blocks.size() == 1);
    CHECK(b7.blocks[0].level == 6);
    CHECK(b7.representation_dim == 7);
    const ProjectiveModel t2 = make_model("t2-cp2");
    for (int k = 1; k <= 12; ++k) CHECK(isotypic_dim(t2, t2.default_nu, k) == k + 1);
    const ProjectiveModel u2 = make_model("u2-cp2");
    for (int k = 1; k <= 15; k += 2) CHECK(isotypic_dim(u2, u2.default_nu, k) == k);
    CHECK(isotypic_dim(u2, u2.default_nu, 2) == 0);  // 2 nu - delta is not integral
}

TEST_CASE("equivariant kernels: symmetry, positivity, trace", "[hardy-exact]") {
    std::mt19937_64 rng(23);
    for (const char* id : {"s1-cp1-w12", "t2-cp2", "su2-cp1", "u2-cp2", "s1-cp2-w123"}) {
        const ProjectiveModel m = make_model(id);
        const Vec& nu = m.default_nu;
        for (int k : {3, 5, 9}) {
            const IsotypicBasis b = isotypic_basis(m, nu, k);
            for (int t = 0; t < 5; ++t) {
                const CVec x = random_point(m.ambient(), rng), y = random_point(m.ambient(), rng);
                const cplx kxy = equivariant_kernel(b, x, y).value, kyx = equivariant_kernel(b, y, x).value;
                const double kxx = equivariant_kernel(b, x, x).value.real(), kyy = equivariant_kernel(b, y, y).value.real();
                CHECK(std::abs(kxy - std::conj(kyx)) <= 1e-12 * std::max(1.0, std::abs(kxy)));
                CHECK(kxx >= 0.0);
                CHECK(std::norm(kxy) <= kxx * kyy * (1 + 1e-12));
            }
        }
        for (int k : {1, 3}) {
            const IsotypicBasis b = isotypic_basis(m, nu, k);
            const double trace = integrate_X(m.d, [&](const CVec& x) { return equivariant_kernel(b, x, x).value; }, 16, 8).real();
            CHECK(std::abs(trace - static_cast<double>(b.dim)) <= 1e-6);
        }
    }
}

TEST_CASE("kernel agrees with the Peter-Weyl projector", "[hardy-exact]") {
    std::mt19937_64 rng(24);
    for (const char* id : {"s1-cp1-w12", "t2-cp2", "su2-cp1", "u2-cp2"}) {
        const ProjectiveModel m = make_model(id);
        for (int k : {1, 3}) {
            const CVec x = random_point(m.ambient(), rng), y = random_point(m.ambient(), rng);
            const cplx pw = equivariant_kernel_peter_weyl(m, m.default_nu, k, x, y, 16);
            const cplx direct = equivariant_kernel(m, m.default_nu, k, x, y).value;
            CHECK(std::abs(pw - direct) <= 1e-6 * std::max(1.0, std::abs(direct)));
        }
    }
}

TEST_CASE("disjoint isotypic components are orthogonal", "[hardy-exact]") {
    const ProjectiveModel s1 = make_model("s1-cp1-w12");
    std::mt19937_64 rng(25);
    const CVec y = random_point(2, rng), z = random_point(2, rng);
    const IsotypicBasis a = isotypic_basis(s1, v1(1), 4), b = isotypic_basis(s1, v1(1), 5);
    const cplx ip = integrate_X(1, [&](const CVec& x) { return equivariant_kernel(a, x, y).value * std::conj(equivariant_kernel(b, x, z).value); },
                                16, 16);
    CHECK(std::abs(ip) <= 1e-8);
}

TEST_CASE("large k stays finite in log space", "[hardy-exact]") {
    const ProjectiveModel s1 = make_model("s1-cp1-w12");
    const CVec x = CVec::Ones(2) / std::sqrt(2.0);
    const KernelValue v = equivariant_kernel(s1, v1(1), 4096, x, x);
    CHECK(std::isfinite(v.log_abs));
    CHECK(v.value.real() > 0);
    // an orbit-separated pair: the extended-precision path resolves the cancellation
    CVec y(2);
    y << std::sqrt(0.8), std::sqrt(0.2);
    const KernelValue lo = equivariant_kernel(s1, v1(1), 256, x, y), hi = equivariant_kernel(s1, v1(1), 512, x, y);
    // reference values from a separate 60-digit evaluation of the monomial sum
    CHECK(lo.log_abs == Approx(-6.263586556418105).epsilon(1e-9));
    CHECK(hi.log_abs == Approx(-15.654757418604245).epsilon(1e-9));
}

TEST_CASE("chart validation for level kernels", "[hardy-exact]") {
    std::mt19937_64 rng(26);
    const CVec x = random_point(3, rng);
    const CMat frame = horizontal_frame(x);
    const CVec v = 0.7 * frame.col(0) + cplx(0.2, 0.4) * frame.col(1);
    std::vector<double> ns, errs;
    for (int n = 64; n <= 4096; n *= 2) {
        const CVec y = displace(x, 0.0, v / std::sqrt(static_cast<double>(n)));
        const cplx scaled = level_kernel(2, n, y, x).value * volume_X(2) / static_cast<double>(detail::binomial_ll(n + 2, 2));
        const cplx expected = std::exp(cplx(-v.squaredNorm() / 2.0, 0.0));
        ns.push_back(n);
        errs.push_back(std::abs(scaled - expected));
    }
    CHECK(errs.back() < errs.front());
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < ns.size(); ++i) lx.push_back(std::log(ns[i])), ly.push_back(std::log(errs[i]));
    const LineFit f = fit_line(lx, ly);
    CHECK(f.slope <= -0.45);
}

TEST_CASE("orbit separation", "[hardy-exact]") {
    const ProjectiveModel s1 = make_model("s1-cp1-w12");
    const CVec x = CVec::Ones(2) / std::sqrt(2.0);
    std::mt19937_64 rng(27);
    const CMat g = haar_random(s1.group(), rng);
    CHECK(orbit_distance(s1, x, s1.act(g, x)) <= 1e-6);
    CVec y(2);
    y << std::sqrt(0.8), std::sqrt(0.2);
    CHECK(orbit_distance(s1, x, y) > 0.1);
    const ProjectiveModel su2 = make_model("su2-cp1");
    CHECK(orbit_distance(su2, x, random_point(2, rng)) <= 1e-6);
    // mismatched structure weights: the component is empty and the kernel vanishes
    const IsotypicBasis empty = isotypic_basis(s1, v1(-1), 6);
    CHECK(off_orbit_value(s1, empty, x, y).kernel.value == cplx(0.0));
}
