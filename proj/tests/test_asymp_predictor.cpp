#include <catch_amalgamated.hpp>

#include "eqszego/asymp_predictor.hpp"
#include "eqszego/hardy_exact.hpp"

#include <random>

using namespace eqszego;
using Catch::Approx;

namespace {

LocusSample sample_at(const ProjectiveModel& m, const Vec& nu, const CVec& x) {
    return require_on_locus(m, nu, project_to_locus(m, nu, x));
}

LocusSample base_sample(const ProjectiveModel& m) { return sample_at(m, m.default_nu, m.base_point); }

std::vector<std::string> good_models() { return {"s1-cp1-w12", "t2-cp2", "su2-cp1", "u2-cp2", "s1-cp2-w123"}; }

}  // namespace

TEST_CASE("psi2 examples", "[asymp-predictor]") {
    CVec u(2), v(2);
    u << 1.0, 0.0;
    v << cplx(0.0, 1.0), 0.0;
    // Im(u^* v) = 1, |u - v|^2 = 2
    CHECK(omega0(u, v) == Approx(1.0));
    CHECK(std::abs(psi2(u, v) - cplx(-1.0, -1.0)) < 1e-15);
    CHECK(std::abs(psi2(u, u)) == 0.0);
    CHECK(std::abs(psi2(u, -u) - cplx(-2.0, 0.0)) < 1e-15);
    std::mt19937_64 rng(31);
    std::normal_distribution<double> N(0.0, 1.0);
    for (int t = 0; t < 10; ++t) {
        CVec a(3), b(3);
        for (int j = 0; j < 3; ++j) a[j] = cplx(N(rng), N(rng)), b[j] = cplx(N(rng), N(rng));
        CHECK(std::abs(psi2(a, b) - std::conj(psi2(b, a))) < 1e-13);
        CHECK(psi2(a, b).real() <= 0.0);
    }
}

TEST_CASE("leading coefficient closed forms", "[asymp-predictor]") {
    // circle: 1 / ||Phi(m)||
    for (const char* id : {"s1-cp1-w12", "s1-cp2-w123"}) {
        const ProjectiveModel m = make_model(id);
        const LocusSample s = base_sample(m);
        CHECK(psi_nu(m, m.default_nu, s) == Approx(1.0 / m.metric.dual_norm(s.phi)).epsilon(1e-12));
    }
    // rank two: 1 / (sqrt 2 pi ||Phi(m)|| D^phi(m))
    for (const char* id : {"t2-cp2", "u2-cp2"}) {
        const ProjectiveModel m = make_model(id);
        const LocusSample s = base_sample(m);
        const double expected = 1.0 / (std::sqrt(2.0) * pi * m.metric.dual_norm(s.phi) * s.calD);
        CHECK(psi_nu(m, m.default_nu, s) == Approx(expected).epsilon(1e-10));
    }
    // SU(2): Psi = 1 for every nu, so the prediction is k nu / pi = dim / vol(X)
    const ProjectiveModel su2 = make_model("su2-cp1");
    for (double nu : {1.0, 2.0, 5.0}) {
        const Vec v = Vec::Constant(1, nu);
        const LocusSample s = sample_at(su2, v, su2.base_point);
        CHECK(psi_nu(su2, v, s) == Approx(1.0).epsilon(1e-12));
        for (int k : {1, 7, 40}) {
            const double pred = predict_diagonal(su2, v, s, k).value.real();
            CHECK(pred == Approx(k * nu / pi).epsilon(1e-12));
            CHECK(equivariant_kernel(su2, v, k, s.x, s.x).value.real() == Approx(pred).epsilon(1e-12));
        }
    }
    CHECK(leading_exponent(make_model("t2-cp2")) == 1.5);
    CHECK(leading_exponent(make_model("s1-cp2-w123")) == 2.0);
}

TEST_CASE("prediction does not depend on the metric scale", "[asymp-predictor]") {
    for (const auto& id : good_models()) {
        const ProjectiveModel m = make_model(id);
        const LocusSample s = base_sample(m);
        const double ref = predict_diagonal(m, m.default_nu, s, 100).value.real();
        for (double c : {2.0, 5.0}) {
            const ProjectiveModel mc = m.with_metric(m.metric.scaled(c));
            const LocusSample sc = sample_at(mc, m.default_nu, s.x);
            CHECK(predict_diagonal(mc, m.default_nu, sc, 100).value.real() == Approx(ref).epsilon(1e-10));
        }
    }
}

TEST_CASE("prediction is constant along orbits", "[asymp-predictor]") {
    std::mt19937_64 rng(32);
    for (const auto& id : good_models()) {
        const ProjectiveModel m = make_model(id);
        const LocusSample s = base_sample(m);
        const double ref = predict_diagonal(m, m.default_nu, s, 64).value.real();
        for (int t = 0; t < 3; ++t) {
            const CVec gx = m.act(haar_random(m.group(), rng), s.x);
            const LocusSample sg = require_on_locus(m, m.default_nu, gx);
            CHECK(predict_diagonal(m, m.default_nu, sg, 64).value.real() == Approx(ref).epsilon(1e-9));
        }
    }
}

TEST_CASE("displacement preconditions", "[asymp-predictor]") {
    const ProjectiveModel t2 = make_model("t2-cp2");
    const LocusSample s = base_sample(t2);
    const CVec z = CVec::Zero(3);
    const CMat N = normal_space(t2, s);
    REQUIRE(N.cols() == 1);
    const CVec v = 0.5 * N.col(0) / N.col(0).norm();
    CHECK_NOTHROW(predict_near_diagonal(t2, t2.default_nu, s, 64, v, z, z, z));
    // i v lies in the tangent space of the locus, not in J t'_m
    CHECK_THROWS_AS(predict_near_diagonal(t2, t2.default_nu, s, 64, cplx(0, 1) * v, z, z, z), PreconditionError);
    // t2 acts freely, so the w-space is trivial
    CHECK_THROWS_AS(predict_near_diagonal(t2, t2.default_nu, s, 64, z, v, z, z), PreconditionError);
    CHECK_THROWS_AS(predict_near_diagonal(t2, t2.default_nu, s, 64, 100.0 * v, z, z, z), PreconditionError);
    CHECK_THROWS_AS(predict_diagonal(t2, t2.default_nu, s, 0), ConfigError);

    const ProjectiveModel s12 = make_model("s1-cp2-w123");
    const LocusSample s2 = base_sample(s12);
    const CMat W = w_space(s12, s2.x);
    REQUIRE(W.cols() == 1);
    const CVec w = 0.4 * W.col(0);
    const Prediction p = predict_near_diagonal(s12, s12.default_nu, s2, 64, z, w, z, -w);
    // w2 = -w1: the modulus is exp(-2|w|^2 / varsigma)
    CHECK(std::abs(p.gaussian_factor) == Approx(std::exp(-2.0 * w.squaredNorm() / s2.varsigma)).epsilon(1e-12));
}

TEST_CASE("dimension coefficient", "[asymp-predictor]") {
    const ProjectiveModel s1 = make_model("s1-cp1-w12");
    CHECK(predict_dim_coeff(s1, s1.default_nu).delta0 == Approx(pi / 2).epsilon(1e-12));
    CHECK(predict_dim_coeff(make_model("su2-cp1"), Vec::Constant(1, 1.0)).delta0 == Approx(pi).epsilon(1e-12));
    CHECK(predict_dim_coeff(make_model("s1-cp2-w123"), Vec::Constant(1, 1.0)).delta0 == Approx(pi * pi / 12).epsilon(1e-9));
    for (const char* id : {"t2-cp2", "u2-cp2"}) {
        const ProjectiveModel m = make_model(id);
        const DimCoefficient dc = predict_dim_coeff(m, m.default_nu);
        CHECK(dc.delta0 == Approx(pi).epsilon(1e-9));
        CHECK(dc.locus_nodes > 0);
    }
    // the count it predicts: k/2 + 1 for the (1,2) circle, so delta0 = pi/2
    CHECK(static_cast<double>(isotypic_dim(s1, s1.default_nu, 1000)) / (1000 / pi) == Approx(pi / 2).epsilon(2e-3));
    Vec bad(2);
    bad << 1.0, -1.0;
    CHECK_THROWS_AS(predict_dim_coeff(make_model("t2-cp2"), bad), PreconditionError);
}

TEST_CASE("phase Hessian at the critical point", "[asymp-predictor]") {
    const ProjectiveModel su2 = make_model("su2-cp1");
    const Vec two = Vec::Constant(1, 2.0);
    const HessianCheck h = hessian_check(su2, two, sample_at(su2, two, su2.base_point));
    CHECK(h.det == Approx(-8.0).epsilon(1e-10));
    CHECK(h.det == Approx(h.det_formula).epsilon(1e-10));
    CHECK(h.signature == 0);
    CHECK(h.fd_residual < 1e-5);
    CHECK(h.reduction_residual < 1e-10);
    for (const auto& id : good_models()) {
        const ProjectiveModel m = make_model(id);
        const HessianCheck c = hessian_check(m, m.default_nu, base_sample(m));
        CHECK(c.det == Approx(c.det_formula).epsilon(1e-8));
        CHECK(c.signature == 0);
        CHECK(c.fd_residual < 1e-5);
        CHECK(c.reduction_residual < 1e-9);
    }
    CHECK_THROWS_AS(hessian_check(su2, Vec::Constant(1, 0.0), sample_at(su2, Vec::Constant(1, 1.0), su2.base_point)),
                    PreconditionError);
}
