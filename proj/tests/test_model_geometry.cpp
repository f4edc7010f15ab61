#include <catch_amalgamated.hpp>

#include "eqszego/model_geometry.hpp"

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

CVec unit(int n, int j) {
    CVec x = CVec::Zero(n);
    x[j] = 1.0;
    return x;
}

std::vector<std::string> good_models() { return {"s1-cp1-w12", "t2-cp2", "su2-cp1", "u2-cp2", "s1-cp2-w123"}; }

LocusSample base_sample(const ProjectiveModel& m) {
    return require_on_locus(m, m.default_nu, project_to_locus(m, m.default_nu, m.base_point));
}

}  // namespace

TEST_CASE("catalog models are well formed", "[model-geometry]") {
    for (const auto& id : catalog_ids()) {
        const ProjectiveModel m = make_model(id);
        for (const CMat& B : m.generators) CHECK((B + B.adjoint()).norm() < 1e-14);
        CHECK(std::abs(m.base_point.norm() - 1.0) < 1e-15);
        // the structure circle commutes with the lifted action
        std::mt19937_64 rng(5);
        const CMat g = haar_random(m.group(), rng);
        const CVec x = random_point(m.ambient(), rng);
        const cplx e = std::polar(1.0, 0.7);
        CHECK((m.act(g, e * x) - e * m.act(g, x)).norm() < 1e-13);
    }
    CHECK_THROWS_AS(make_model("nope"), ConfigError);
    CHECK_THROWS_AS(make_model("s1-cp2-w12"), ConfigError);
    CHECK(make_model("s1-cp3-w1234").d == 3);
    CHECK_THROWS_AS(ModelPoint(CVec::Ones(2)), PreconditionError);
}

TEST_CASE("vol(X) equals pi^d/d! by quadrature", "[model-geometry]") {
    for (int d : {1, 2, 3}) {
        const cplx v = integrate_X(d, [](const CVec&) { return cplx(1.0); }, 8, 2);
        CHECK(v.real() == Approx(volume_X(d)).epsilon(1e-10));
        CHECK(integrate_M(d, [](const CVec&) { return 1.0; }, 8, 2) == Approx(volume_X(d)).epsilon(1e-10));
    }
}

TEST_CASE("moment map examples", "[model-geometry]") {
    const ProjectiveModel s1 = make_model("s1-cp1-w12");
    CHECK(moment_map(s1, unit(2, 0))[0] == Approx(1.0).epsilon(1e-15));
    CHECK(moment_map(s1, unit(2, 1))[0] == Approx(2.0).epsilon(1e-15));
    // same value from the fiber phase picked up along the lifted flow
    for (int j : {0, 1}) {
        const double h = 1e-6;
        const CVec x = unit(2, j);
        const CVec y = (h * s1.lift_generator(0)).exp() * x;
        CHECK(std::arg(y.dot(x)) / h == Approx(moment_map(s1, x)[0]).epsilon(1e-8));
    }

    const ProjectiveModel su2 = make_model("su2-cp1");
    std::mt19937_64 rng(6);
    for (int t = 0; t < 20; ++t)
        CHECK(su2.metric.dual_norm(moment_map(su2, random_point(2, rng))) == Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    // fixed point of the whole torus: Phi is the weight column
    const ProjectiveModel t2 = make_model("t2-cp2");
    for (int j = 0; j < 3; ++j) {
        const Vec phi = moment_map(t2, unit(3, j));
        CHECK(phi[0] == Approx(t2.weights(0, j)).margin(1e-15));
        CHECK(phi[1] == Approx(t2.weights(1, j)).margin(1e-15));
        CHECK(val_matrix(t2, unit(3, j)).norm() < 1e-15);
        CHECK(w_space(t2, unit(3, j)).cols() == 2);
    }
}

TEST_CASE("moment map equivariance and the Hamilton condition", "[model-geometry]") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> N(0.0, 1.0);
    for (const auto& id : catalog_ids()) {
        const ProjectiveModel m = make_model(id);
        const auto& G = m.group();
        for (int t = 0; t < 10; ++t) {
            const CVec x = random_point(m.ambient(), rng);
            const CMat g = haar_random(G, rng);
            const Vec lhs = moment_map(m, m.act(g, x));
            const Vec rhs = coadjoint_action(G, g, moment_map(m, x));
            CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));

            Vec xi(G.dim);
            for (int a = 0; a < G.dim; ++a) xi[a] = N(rng);
            const CMat frame = horizontal_frame(x);
            const CVec u = from_real_coords(frame, Vec::Unit(2 * m.d, t % (2 * m.d)));
            const double h = 1e-5;
            const double dphi = (moment_map(m, retract(x, h * u)).dot(xi) - moment_map(m, retract(x, -h * u)).dot(xi)) / (2 * h);
            const double two_omega = 2.0 * omega(val(m, x, xi), u);
            CHECK(std::abs(two_omega - dphi) <= 1e-5 * std::max(1.0, std::abs(dphi)));
        }
    }
}

TEST_CASE("val and w-space examples", "[model-geometry]") {
    const ProjectiveModel s1 = make_model("s1-cp1-w12");
    const CVec eq = CVec::Ones(2) / std::sqrt(2.0);
    CHECK(val(s1, eq, Vec::Ones(1)).norm() > 0.1);
    CHECK(w_space(s1, eq).cols() == 0);
    const ProjectiveModel s12 = make_model("s1-cp2-w123");
    std::mt19937_64 rng(9);
    CHECK(w_space(s12, random_point(3, rng)).cols() == 1);
}

TEST_CASE("locus decomposition", "[model-geometry]") {
    const ProjectiveModel su2 = make_model("su2-cp1");
    std::mt19937_64 rng(10);
    for (double nu : {1.0, 3.0}) {
        const Vec v = Vec::Constant(1, nu);
        for (int t = 0; t < 10; ++t) {
            const LocusSample s = require_on_locus(su2, v, random_point(2, rng));
            CHECK(s.varsigma == Approx(1.0 / nu).epsilon(1e-12));
            CHECK(s.calD == 1.0);
        }
    }
    const ProjectiveModel t2 = make_model("t2-cp2");
    const LocusSample st = base_sample(t2);
    CHECK(s_tau(t2.metric, Vec::Ones(2)).abs_det == 1.0);
    CHECK((st.h - CMat::Identity(2, 2)).norm() == 0.0);
    CHECK(st.varsigma == Approx(t2.metric.dual_norm(st.phi) / t2.metric.cartan_dual_norm(t2.default_nu)).epsilon(1e-12));

    for (const auto& id : good_models()) {
        const ProjectiveModel m = make_model(id);
        const auto& G = m.group();
        const LocusSample s = base_sample(m);
        // Phi(m) = varsigma Coad_h(nu)
        const Vec target = s.varsigma * coadjoint_action(G, s.h, G.embed_cartan_covector(m.default_nu));
        CHECK((s.phi - target).norm() <= 1e-10);
        const Vec ps = sharp(m.metric, s.phi).sharp;
        for (int a = 0; a < s.t_basis.cols(); ++a) CHECK(bracket(G, s.t_basis.col(a), ps).norm() <= 1e-10);
        for (int a = 0; a < s.tprime_basis.cols(); ++a) CHECK(std::abs(s.phi.dot(s.tprime_basis.col(a))) <= 1e-10);
        CHECK(s.tprime_basis.cols() == G.rank - 1);
        CHECK(local_freeness(m, s.x) > 1e-3);
        CHECK(transversality_margin(m, s.x) > 1e-3);
    }
    // D^phi(m) does not depend on the orthonormal basis of t'_m
    const ProjectiveModel u2 = make_model("u2-cp2");
    LocusSample s = base_sample(u2);
    const double before = s.calD;
    s.tprime_basis *= -1.0;
    CHECK(d_phi(u2, s).value == Approx(before).epsilon(1e-12));
    CHECK(d_phi(u2, s).value == Approx(u2.metric.norm(Vec(s.tprime_basis.col(0))) * val(u2, s.x, s.tprime_basis.col(0)).norm()).epsilon(1e-12));
}

TEST_CASE("off-cone points and empty loci", "[model-geometry]") {
    const ProjectiveModel t2 = make_model("t2-cp2");
    const CVec x = unit(3, 0);
    const auto r = locus_decompose(t2, t2.default_nu, x);
    REQUIRE(std::holds_alternative<OffCone>(r));
    CHECK(std::get<OffCone>(r).cone_distance > 0.1);
    Vec bad(2);
    bad << 1.0, -1.0;
    const AssumptionReport rep = check_assumptions(t2, bad);
    CHECK_FALSE(rep.ok());
    CHECK_FALSE(rep.locus_nonempty);
    CHECK(check_assumptions(t2, t2.default_nu).ok());
    CHECK_FALSE(check_assumptions(make_model("u2-cp1"), make_model("u2-cp1").default_nu).ok());
}

TEST_CASE("normal space and involution", "[model-geometry]") {
    for (const auto& id : good_models()) {
        const ProjectiveModel m = make_model(id);
        const LocusSample s = base_sample(m);
        const CMat N = normal_space(m, s);
        CHECK(N.cols() == m.group().rank - 1);
        const CMat frame = horizontal_frame(s.x);
        const Mat T = locus_tangent_basis(m, m.default_nu, s.x, frame);
        for (int i = 0; i < N.cols(); ++i) {
            for (int j = 0; j < N.cols(); ++j) CHECK(std::abs(omega(N.col(i), N.col(j))) <= 1e-12);
            // normal to M_O
            const Vec ni = real_coords(frame, N.col(i));
            CHECK((T.transpose() * ni).norm() <= 1e-6 * ni.norm());
            // inside J g_M(m), and transverse to the w-space
            const Mat V = val_matrix(m, s.x, frame);
            Mat JV(V.rows(), V.cols());
            for (int a = 0; a < V.cols(); ++a)
                JV.col(a) = real_coords(frame, cplx(0, 1) * val(m, s.x, Vec::Unit(m.group().dim, a)));
            const Vec c = JV.completeOrthogonalDecomposition().solve(ni);
            CHECK((JV * c - ni).norm() <= 1e-10 * ni.norm());
            const CMat W = w_space(m, s.x);
            if (W.cols() > 0) CHECK((W.adjoint() * N.col(i)).norm() <= (1.0 - 1e-3) * N.col(i).norm());
        }
    }
}

TEST_CASE("Heisenberg chart", "[model-geometry]") {
    std::mt19937_64 rng(11);
    const CVec x = random_point(3, rng);
    CHECK((displace(x, 0.0, CVec::Zero(3)) - x).norm() == 0.0);
    const CMat frame = horizontal_frame(x);
    const CVec v = 0.3 * frame.col(0);
    CHECK((displace(x, 0.4, v) - std::polar(1.0, 0.4) * displace(x, 0.0, v)).norm() < 1e-15);
    // alpha-horizontal at tau = 0: the derivative has no component along i x
    const double h = 1e-6;
    const CVec dx = (displace(x, 0.0, h * v) - displace(x, 0.0, -h * v)) / (2 * h);
    CHECK(std::abs(herm(dx, x).imag()) <= 1e-8);
    CHECK((dx - v).norm() <= 1e-8);
    CHECK_THROWS_AS(displace(x, 0.0, x), PreconditionError);
    CHECK_THROWS_AS(displace(x, 0.0, 0.9 * frame.col(0)), PreconditionError);
}
