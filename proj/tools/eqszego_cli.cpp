#include "eqszego/eqszego.hpp"
#include "eqszego/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

using namespace eqszego;
using nlohmann::json;

namespace {

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

InvariantMetric metric_for(const std::string& group, double scale) {
    const InvariantMetric m(build_group(group));
    return scale == 1.0 ? m : m.scaled(scale);
}

ProjectiveModel model_for(const std::string& id, double scale) {
    ProjectiveModel m = make_model(id);
    return scale == 1.0 ? m : m.with_metric(m.metric.scaled(scale));
}

Vec nu_or_default(const std::string& s, const Vec& fallback) { return s.empty() ? fallback : parse_nu(s); }

LocusSample base_sample(const ProjectiveModel& model, const Vec& nu) {
    HalfWeight(model.metric, nu);
    const AssumptionReport rep = check_assumptions(model, nu);
    if (!rep.ok()) throw PreconditionError(model.id + ": " + rep.message);
    return require_on_locus(model, nu, project_to_locus(model, nu, model.base_point));
}

int run(int argc, char** argv) {
    CLI::App app{"Equivariant Szego kernel toolkit on projective models"};
    app.require_subcommand(1);
    std::string group = "su2", model_id, nu_s, theta_s, suite_name, out_dir, format = "json";
    double scale = 1.0;
    int k = 1, kmin = 16, kmax = 512;
    double kfactor = 2.0;
    std::uint64_t seed = ExperimentConfig{}.seed;
    bool svg = false;

    auto* gi = app.add_subcommand("group-info", "root data and volumes of a compact group");
    gi->add_option("--group", group, "torusN, suN or uN")->required();
    gi->add_option("--scale", scale, "metric scale c in phi -> c phi");

    auto* dim = app.add_subcommand("dim", "Weyl dimension d_nu, and d_{k nu} with the scaling check");
    dim->add_option("--group", group)->required();
    dim->add_option("--nu", nu_s, "half-weight, comma separated")->required();
    dim->add_option("--k", k);

    auto* ch = app.add_subcommand("character", "Weyl and Kirillov characters on the maximal torus");
    ch->add_option("--group", group)->required();
    ch->add_option("--nu", nu_s)->required();
    ch->add_option("--theta", theta_s, "Cartan coordinates of log t")->required();
    ch->add_option("--seed", seed);

    auto* ov = app.add_subcommand("orbit-volume", "symplectic and Riemannian volumes of O_nu");
    ov->add_option("--group", group)->required();
    ov->add_option("--nu", nu_s)->required();
    ov->add_option("--scale", scale);
    ov->add_option("--seed", seed);

    auto* pn = app.add_subcommand("psi-nu", "leading coefficient at the model's base locus point");
    pn->add_option("--model", model_id)->required();
    pn->add_option("--nu", nu_s);
    pn->add_option("--scale", scale);

    auto* ke = app.add_subcommand("kernel-eval", "exact diagonal kernel against the prediction");
    ke->add_option("--model", model_id)->required();
    ke->add_option("--nu", nu_s);
    ke->add_option("--k", k)->required();

    auto* su = app.add_subcommand("suite", "verification suites");
    su->add_option("name", suite_name, "characters | diag | gaussian | decay | dims | all")->required();
    su->add_option("--model", model_id);
    su->add_option("--nu", nu_s);
    su->add_option("--kmin", kmin);
    su->add_option("--kmax", kmax);
    su->add_option("--kfactor", kfactor);
    su->add_option("--out", out_dir, "directory for CSV/JSON (and SVG) output");
    su->add_option("--format", format, "stdout format: csv or json")->check(CLI::IsMember({"csv", "json"}));
    su->add_option("--seed", seed);
    su->add_flag("--svg", svg, "also write an SVG chart");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 4;
    }

    std::cout << std::setprecision(17);
    if (*gi) {
        const InvariantMetric m = metric_for(group, scale);
        const auto& G = m.group();
        const GroupVolumes v = group_volumes(m);
        json roots = json::array();
        for (const Vec& b : G.positive_roots) roots.push_back(vec_json(b));
        std::cout << json{{"group", G.name()},     {"dim", G.dim},          {"rank", G.rank},
                          {"n_G", G.n_g},          {"delta", vec_json(G.delta)}, {"positive_roots", roots},
                          {"weyl_order", G.weyl_group.size()}, {"vol_group", v.group}, {"vol_torus", v.torus},
                          {"scale", scale}}
                         .dump(2)
                  << '\n';
        return 0;
    }
    if (*dim) {
        const InvariantMetric m = metric_for(group, 1.0);
        const Vec nu = parse_nu(nu_s);
        json j{{"group", m.group().name()}, {"nu", vec_json(nu)}, {"d_nu", weyl_dimension(m, nu)}};
        if (k != 1) {
            const DimScaling ds = dim_scaling(m, nu, k);
            j["k"] = k;
            j["d_k_nu"] = ds.d_k_nu.str();
            j["scaling_law_holds"] = true;
        }
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    if (*ch) {
        const InvariantMetric m = metric_for(group, 1.0);
        const Vec nu = parse_nu(nu_s), theta = parse_nu(theta_s);
        const cplx w = weyl_character(m, nu, theta);
        const KirillovValue kv = kirillov_character(m, orbit_quadrature(m, nu, 1, seed), m.group().embed_cartan_vector(theta));
        std::cout << json{{"weyl", {w.real(), w.imag()}}, {"kirillov", {kv.value.real(), kv.value.imag()}},
                          {"kirillov_std_error", kv.std_error}, {"abs_diff", std::abs(w - kv.value)}}
                         .dump(2)
                  << '\n';
        return 0;
    }
    if (*ov) {
        const InvariantMetric m = metric_for(group, scale);
        const Vec nu = parse_nu(nu_s);
        HalfWeight(m, nu);
        const OrbitQuadrature q = orbit_quadrature(m, nu, 1, seed);
        std::cout << json{{"symplectic", std::pow(2.0 * pi, m.group().n_g) * weyl_dimension_polynomial(m, nu)},
                          {"symplectic_quadrature", q.symplectic_volume},
                          {"riemannian", orbit_volume_riemannian(m, nu)},
                          {"abs_det_S", s_tau(m, sharp(m, m.group().embed_cartan_covector(nu)).sharp.head(m.group().rank)).abs_det}}
                         .dump(2)
                  << '\n';
        return 0;
    }
    if (*pn) {
        const ProjectiveModel model = model_for(model_id, scale);
        const Vec nu = nu_or_default(nu_s, model.default_nu);
        const LocusSample s = base_sample(model, nu);
        const PsiBreakdown b = psi_nu_breakdown(model, nu, s);
        std::cout << json{{"model", model.id},          {"nu", vec_json(nu)},          {"psi_nu", b.value},
                          {"varsigma", s.varsigma},     {"phi_norm", b.phi_norm},      {"D_phi", b.calD},
                          {"orbit_volume", b.orbit_volume}, {"abs_det_S", b.s_det},   {"vol_torus", b.vol_torus},
                          {"vol_group", b.vol_group}}
                         .dump(2)
                  << '\n';
        return 0;
    }
    if (*ke) {
        const ProjectiveModel model = make_model(model_id);
        const Vec nu = nu_or_default(nu_s, model.default_nu);
        const LocusSample s = base_sample(model, nu);
        const KernelValue exact = equivariant_kernel(model, nu, k, s.x, s.x);
        const Prediction p = predict_diagonal(model, nu, s, k);
        json j = to_json(p);
        j["exact"] = {exact.value.real(), exact.value.imag()};
        j["exact_log_abs"] = exact.log_abs;
        j["isotypic_dim"] = isotypic_dim(model, nu, k);
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    ExperimentConfig cfg;
    cfg.model_id = model_id;
    if (!nu_s.empty()) cfg.nu = parse_nu(nu_s);
    cfg.kmin = kmin;
    cfg.kmax = kmax;
    cfg.kfactor = kfactor;
    cfg.out_dir = out_dir;
    cfg.seed = seed;
    if (!model_id.empty()) make_model(model_id);  // unknown ids are configuration errors
    const SuiteResult r = run_suite(suite_name, cfg);
    write_outputs(r, out_dir, svg);
    if (format == "csv") write_csv(std::cout, r.rows);
    else {
        json j = to_json(r);
        j.erase("rows");
        j["row_count"] = r.rows.size();
        std::cout << j.dump(2) << '\n';
    }
    return r.pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 4;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition failed: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
