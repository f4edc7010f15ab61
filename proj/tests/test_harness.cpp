#include <catch_amalgamated.hpp>

#include "eqszego/harness.hpp"

#include <sstream>

using namespace eqszego;

TEST_CASE("k schedules land on admissible levels", "[harness-cli]") {
    const ProjectiveModel s1 = make_model("s1-cp1-w12");
    CHECK(k_schedule(s1, s1.default_nu, 16, 512, 2.0) == std::vector<int>{16, 32, 64, 128, 256, 512});
    const ProjectiveModel u2 = make_model("u2-cp2");
    const std::vector<int> ks = k_schedule(u2, u2.default_nu, 16, 512, 2.0);
    REQUIRE(ks.size() == 6);
    for (int k : ks) {
        CHECK(k % 2 == 1);
        CHECK(isotypic_dim(u2, u2.default_nu, k) > 0);
    }
    CHECK(std::is_sorted(ks.begin(), ks.end()));
    CHECK_THROWS_AS(k_schedule(s1, s1.default_nu, 0, 10, 2.0), ConfigError);
    CHECK_THROWS_AS(k_schedule(s1, s1.default_nu, 20, 10, 2.0), ConfigError);
    CHECK_THROWS_AS(k_schedule(s1, s1.default_nu, 1, 10, 1.0), ConfigError);
}

TEST_CASE("nu parsing", "[harness-cli]") {
    CHECK(parse_nu("2,1") == (Vec(2) << 2.0, 1.0).finished());
    CHECK(parse_nu("1.5;0.5") == (Vec(2) << 1.5, 0.5).finished());
    CHECK(parse_nu(format_nu((Vec(2) << 0.1, -3.25).finished())) == (Vec(2) << 0.1, -3.25).finished());
    CHECK_THROWS_AS(parse_nu(""), ConfigError);
    CHECK_THROWS_AS(parse_nu("1,x"), ConfigError);
    CHECK_THROWS_AS(parse_nu("1.5abc"), ConfigError);
}

TEST_CASE("top-half fits recover a power law", "[harness-cli]") {
    std::vector<double> ks, vals;
    for (int k = 16; k <= 1024; k *= 2) ks.push_back(k), vals.push_back(3.0 / k + (k < 100 ? 1.0 : 0.0));
    const FitResult f = fit_top_half("err", "m", ks, vals);
    CHECK(f.xs.size() == 4);
    CHECK(f.exponent == Catch::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("csv and json output", "[harness-cli]") {
    SuiteResult r{"demo", {}, {}};
    r.rows.push_back({"t2-cp2", "2;1", 16, "diag_rel_err", 0.1, 0.2, 1.0 / 3.0});
    r.rows.push_back({"t2-cp2", "2;1", 32, "diag_rel_err", std::numeric_limits<double>::infinity(), 0.0, 0.0});
    FitResult f;
    f.quantity = "diag_rel_err";
    f.model = "t2-cp2";
    f.pass = true;
    r.fits.push_back(f);
    std::ostringstream a, b;
    write_csv(a, r.rows);
    write_csv(b, r.rows);
    CHECK(a.str() == b.str());
    CHECK(a.str() ==
          "model,nu,k,quantity,value,predicted,err\n"
          "t2-cp2,2;1,16,diag_rel_err,0.10000000000000001,0.20000000000000001,0.33333333333333331\n"
          "t2-cp2,2;1,32,diag_rel_err,inf,0,0\n");
    const nlohmann::json j = to_json(r);
    CHECK(j["suite"] == "demo");
    CHECK(j["pass"] == true);
    CHECK(j["rows"].size() == 2);
    CHECK(j["rows"][1]["value"].is_null());
    for (const char* key : {"quantity", "model", "exponent", "intercept", "residual", "value", "band", "pass", "note"})
        CHECK(j["fits"][0].contains(key));
    CHECK_FALSE(SuiteResult{"empty", {}, {}}.pass());

    const auto dir = std::filesystem::temp_directory_path() / "eqszego_harness_test";
    std::filesystem::remove_all(dir);
    write_outputs(r, dir.string(), true);
    CHECK(std::filesystem::exists(dir / "demo.csv"));
    CHECK(std::filesystem::exists(dir / "demo.json"));
    CHECK(std::filesystem::exists(dir / "demo.svg"));
    std::ifstream in(dir / "demo.json");
    CHECK(nlohmann::json::parse(in)["fits"].size() == 1);
    std::filesystem::remove_all(dir);
}

TEST_CASE("suites run, pass and are deterministic", "[harness-cli]") {
    ExperimentConfig cfg;  // default schedule 16..512: the diagonal band is set at k = 512
    CHECK(run_suite("dims", cfg).pass());
    for (const char* name : {"characters", "diag"}) {
        const SuiteResult a = run_suite(name, cfg), b = run_suite(name, cfg);
        CHECK(a.pass());
        REQUIRE(a.rows.size() == b.rows.size());
        std::ostringstream ca, cb;
        write_csv(ca, a.rows);
        write_csv(cb, b.rows);
        CHECK(ca.str() == cb.str());
    }
    cfg.model_id = "t2-cp2";
    const SuiteResult d = run_suite("diag", cfg);
    for (const auto& row : d.rows) CHECK(row.model == "t2-cp2");
}

TEST_CASE("configuration and precondition failures", "[harness-cli]") {
    ExperimentConfig cfg;
    CHECK_THROWS_AS(run_suite("nope", cfg), ConfigError);
    cfg.model_id = "nope";
    CHECK_THROWS_AS(run_suite("diag", cfg), ConfigError);
    cfg.model_id = "t2-cp2";
    cfg.nu = (Vec(2) << 1.0, -1.0).finished();
    CHECK_THROWS_AS(run_suite("dims", cfg), PreconditionError);
    cfg.nu = (Vec(1) << 1.0).finished();
    CHECK_THROWS_AS(run_suite("diag", cfg), ConfigError);
    cfg.model_id = "u2-cp1";
    cfg.nu.reset();
    CHECK_THROWS_AS(run_suite("diag", cfg), PreconditionError);
}
