#pragma once

#include "asymp_predictor.hpp"
#include "characters.hpp"
#include "hardy_exact.hpp"
#include "model_geometry.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>

namespace eqszego {

struct ExperimentConfig {
    std::string model_id;          // empty: the suite's default model list
    std::optional<Vec> nu;         // empty: the model's default
    int kmin = 16;
    int kmax = 512;
    double kfactor = 2.0;
    std::vector<double> displacements = {0.25, 0.5, 0.75, 1.0};
    LocusQuadratureLevel quadrature;
    int orbit_level = 1;
    std::string out_dir;
    std::uint64_t seed = 20240611;
};

struct CsvRow {
    std::string model;
    std::string nu;
    double k = 0.0;
    std::string quantity;
    double value = 0.0;
    double predicted = 0.0;
    double err = 0.0;
};

struct FitResult {
    std::string quantity;
    std::string model;
    double exponent = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    double value = 0.0;  // the statistic compared against the band
    double band_lo = 0.0;
    double band_hi = 0.0;
    bool pass = false;
    std::string note;
    std::vector<double> xs, ys;  // fitted data (log k, log err), kept for plots
};

struct SuiteResult {
    std::string suite;
    std::vector<CsvRow> rows;
    std::vector<FitResult> fits;
    bool pass() const {
        for (const auto& f : fits)
            if (!f.pass) return false;
        return !fits.empty();
    }
    void append(SuiteResult other) {
        rows.insert(rows.end(), other.rows.begin(), other.rows.end());
        fits.insert(fits.end(), other.fits.begin(), other.fits.end());
    }
};

inline std::string format_nu(const Vec& nu) {
    std::ostringstream os;
    os << std::setprecision(17);
    for (int a = 0; a < nu.size(); ++a) os << (a ? ";" : "") << nu[a];
    return os.str();
}

inline Vec parse_nu(const std::string& s) {
    std::vector<double> v;
    std::string tok;
    std::istringstream is(s);
    while (std::getline(is, tok, s.find(';') != std::string::npos ? ';' : ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse nu component '" + tok + "'");
        }
    }
    if (v.empty()) throw ConfigError("nu is empty");
    return Eigen::Map<Vec>(v.data(), static_cast<int>(v.size()));
}

// Geometric schedule; each k is bumped to the next one with k nu in E^G.
inline std::vector<int> k_schedule(const ProjectiveModel& model, const Vec& nu, int kmin, int kmax, double factor) {
    if (kmin < 1 || kmax < kmin) throw ConfigError("need 1 <= kmin <= kmax");
    if (factor <= 1.0) throw ConfigError("k factor must exceed 1");
    const auto& G = model.group();
    std::vector<int> ks;
    for (double k = kmin; k <= kmax * (1 + 1e-12); k *= factor) {
        int kk = static_cast<int>(std::lround(k));
        for (int t = 0; t < 64 && !G.in_lattice(static_cast<double>(kk) * nu - G.delta); ++t) ++kk;
        if (!G.in_lattice(static_cast<double>(kk) * nu - G.delta)) throw ConfigError("no k near the schedule has k nu in E^G");
        if (ks.empty() || kk > ks.back()) ks.push_back(kk);
    }
    return ks;
}

inline FitResult fit_top_half(std::string quantity, std::string model, const std::vector<double>& ks,
                              const std::vector<double>& vals) {
    FitResult f;
    f.quantity = std::move(quantity);
    f.model = std::move(model);
    const std::size_t start = ks.size() / 2;
    for (std::size_t i = start; i < ks.size(); ++i) {
        if (!(vals[i] > 0)) continue;
        f.xs.push_back(std::log(ks[i]));
        f.ys.push_back(std::log(vals[i]));
    }
    if (f.xs.size() >= 2) {
        const LineFit lf = fit_line(f.xs, f.ys);
        f.exponent = lf.slope;
        f.intercept = lf.intercept;
        f.residual = lf.residual;
    }
    return f;
}

// ---------------------------------------------------------------- per-model setup

struct ModelSetup {
    ProjectiveModel model;
    Vec nu;
    LocusSample sample;
    std::vector<int> ks;
};

inline ModelSetup setup_model(const ExperimentConfig& cfg, const std::string& id) {
    ModelSetup s{make_model(id), Vec(), LocusSample{}, {}};
    s.nu = cfg.nu ? *cfg.nu : s.model.default_nu;
    if (s.nu.size() != s.model.group().rank)
        throw ConfigError("nu needs " + std::to_string(s.model.group().rank) + " coordinates for " + id);
    HalfWeight(s.model.metric, s.nu);
    const AssumptionReport rep = check_assumptions(s.model, s.nu);
    if (!rep.ok()) throw PreconditionError(id + ": " + rep.message);
    s.sample = require_on_locus(s.model, s.nu, project_to_locus(s.model, s.nu, s.model.base_point));
    s.ks = k_schedule(s.model, s.nu, cfg.kmin, cfg.kmax, cfg.kfactor);
    return s;
}

inline std::vector<std::string> suite_models(const ExperimentConfig& cfg, const std::vector<std::string>& defaults) {
    if (!cfg.model_id.empty()) return {cfg.model_id};
    return defaults;
}

inline std::vector<std::string> asymptotic_catalog() { return {"s1-cp1-w12", "t2-cp2", "su2-cp1", "u2-cp2", "s1-cp2-w123"}; }

// ---------------------------------------------------------------- characters

inline SuiteResult run_character_suite(const ExperimentConfig& cfg) {
    SuiteResult out{"characters", {}, {}};
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> U(-1.2, 1.2);
    struct Case {
        const char* group;
        Vec nu;
    };
    auto v = [](std::initializer_list<double> xs) {
        Vec r(static_cast<int>(xs.size()));
        int i = 0;
        for (double x : xs) r[i++] = x;
        return r;
    };
    const std::vector<Case> cases = {{"su2", v({3.0})}, {"u2", v({2.5, 0.5})}, {"torus2", v({2.0, 1.0})}};
    for (const auto& c : cases) {
        const InvariantMetric m(build_group(c.group));
        const auto& G = m.group();
        const std::string nu_s = format_nu(c.nu);
        const OrbitQuadrature q = orbit_quadrature(m, c.nu, cfg.orbit_level, cfg.seed);
        const double dnu = weyl_dimension(m, c.nu);
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            // diagonal angles in (-1.2, 1.2): eigenvalue gaps stay below pi
            Vec ang(G.matrix_size);
            for (int j = 0; j < ang.size(); ++j) ang[j] = U(rng);
            if (G.spec.kind == GroupKind::special_unitary) ang.array() -= ang.mean();
            const Vec theta = G.diag_angles_to_cartan(ang);
            const cplx chi = weyl_character(m, c.nu, theta);
            const cplx kir = kirillov_character(m, q, G.embed_cartan_vector(theta)).value;
            const double err = std::abs(kir - chi) / dnu;
            worst = std::max(worst, err);
            out.rows.push_back({c.group, nu_s, 1.0, "kirillov_vs_weyl", kir.real(), chi.real(), err});
        }
        FitResult f;
        f.quantity = "kirillov_vs_weyl_max_rel_err";
        f.model = c.group;
        f.value = worst;
        f.band_hi = 1e-6;
        f.pass = worst <= f.band_hi;
        out.fits.push_back(f);

        const cplx at0 = kirillov_character(m, q, Vec::Zero(G.dim)).value;
        const double rounded = std::round(at0.real());
        FitResult z;
        z.quantity = "kirillov_at_zero_is_dimension";
        z.model = c.group;
        z.value = std::abs(at0 - dnu);
        z.band_hi = 1e-9;
        z.pass = rounded == dnu && z.value <= z.band_hi;
        out.rows.push_back({c.group, nu_s, 1.0, "kirillov_at_zero", at0.real(), dnu, z.value});
        out.fits.push_back(z);
    }
    // scaling law d_{k nu} = k^{n_G} d_nu, exact arithmetic
    const std::vector<Case> scal = {{"torus2", v({2.0, 1.0})}, {"su2", v({1.0})}, {"u2", v({2.5, 0.5})},
                                    {"su3", v({1.0, 1.0})}, {"u3", v({2.0, 0.0, -2.0})}};
    for (const auto& c : scal) {
        const InvariantMetric m(build_group(c.group));
        FitResult f;
        f.quantity = "dimension_scaling_law";
        f.model = c.group;
        f.pass = true;
        for (int k = 1; k <= 64; ++k) {
            const Vec knu = static_cast<double>(k) * c.nu;
            if (!m.group().in_lattice(knu - m.group().delta)) continue;
            try {
                const DimScaling ds = dim_scaling(m, c.nu, k);
                out.rows.push_back({c.group, format_nu(c.nu), static_cast<double>(k), "d_k_nu", ds.d_k_nu.convert_to<double>(),
                                    ds.d_k_nu.convert_to<double>(), 0.0});
            } catch (const NumericalError&) {
                f.pass = false;
            }
        }
        out.fits.push_back(f);
    }
    return out;
}

// ---------------------------------------------------------------- diagonal convergence

inline SuiteResult run_diag_convergence(const ExperimentConfig& cfg) {
    SuiteResult out{"diag", {}, {}};
    for (const auto& id : suite_models(cfg, asymptotic_catalog())) {
        const ModelSetup s = setup_model(cfg, id);
        const std::string nu_s = format_nu(s.nu);
        std::vector<double> ks, errs;
        for (int k : s.ks) {
            const double exact = equivariant_kernel(s.model, s.nu, k, s.sample.x, s.sample.x).value.real();
            const double pred = predict_diagonal(s.model, s.nu, s.sample, k).value.real();
            const double err = std::abs(exact / pred - 1.0);
            out.rows.push_back({id, nu_s, static_cast<double>(k), "diag_ratio", exact, pred, err});
            ks.push_back(k);
            errs.push_back(err);
        }
        FitResult f = fit_top_half("diag_ratio_error_exponent", id, ks, errs);
        const double worst = *std::max_element(errs.begin(), errs.end());
        if (worst <= 1e-12) {
            f.note = "exact agreement at every k";
            f.value = worst;
            f.band_hi = 1e-12;
            f.pass = true;
        } else {
            f.value = f.exponent;
            f.band_lo = -1.2;
            f.band_hi = -0.8;
            f.pass = f.exponent >= f.band_lo && f.exponent <= f.band_hi;
        }
        out.fits.push_back(f);
        FitResult last;
        last.quantity = "diag_ratio_error_at_kmax";
        last.model = id;
        last.value = errs.back();
        last.band_hi = 0.05;
        last.pass = errs.back() <= last.band_hi;
        out.fits.push_back(last);
    }
    return out;
}

// ---------------------------------------------------------------- Gaussian profile

inline SuiteResult run_gaussian_profile(const ExperimentConfig& cfg) {
    SuiteResult out{"gaussian", {}, {}};
    for (const auto& id : suite_models(cfg, {"t2-cp2", "u2-cp2", "s1-cp2-w123"})) {
        const ModelSetup s = setup_model(cfg, id);
        const std::string nu_s = format_nu(s.nu);
        const CVec& x = s.sample.x;
        const CMat N = normal_space(s.model, s.sample);
        const CMat W = w_space(s.model, x);
        const int kmax = s.ks.back();
        if (N.cols() > 0) {
            const CVec vhat = N.col(0) / N.col(0).norm();
            FitResult f;
            f.quantity = "gaussian_v_log_slope";
            f.model = id;
            for (int k : s.ks) {
                const double base = equivariant_kernel(s.model, s.nu, k, x, x).log_abs;
                std::vector<double> t2, lr;
                for (double t : cfg.displacements) {
                    const CVec y = displace(x, 0.0, t * vhat / std::sqrt(static_cast<double>(k)));
                    const double l = equivariant_kernel(s.model, s.nu, k, y, y).log_abs - base;
                    const double pred = -2.0 * t * t / s.sample.varsigma;
                    out.rows.push_back({id, nu_s, static_cast<double>(k), "gaussian_v_t" + std::to_string(t).substr(0, 4), l, pred,
                                        std::abs(l - pred)});
                    t2.push_back(t * t);
                    lr.push_back(l);
                }
                if (k == kmax) {
                    // zero displacement anchors the fit
                    t2.insert(t2.begin(), 0.0);
                    lr.insert(lr.begin(), 0.0);
                    const LineFit lf = fit_line(t2, lr);
                    const double expected = -2.0 / s.sample.varsigma;
                    f.exponent = lf.slope;
                    f.intercept = lf.intercept;
                    f.residual = lf.residual;
                    f.value = lf.slope / expected - 1.0;
                    f.band_lo = -0.1;
                    f.band_hi = 0.1;
                    f.pass = std::abs(f.value) <= 0.1;
                    f.note = "expected slope " + std::to_string(expected);
                }
            }
            out.fits.push_back(f);
        }
        if (W.cols() > 0) {
            const CVec what = W.col(0) / W.col(0).norm();
            FitResult f;
            f.quantity = "gaussian_w_flat_band";
            f.model = id;
            double C = -1.0;
            f.pass = true;
            std::vector<double> ks, devs;
            for (int k : s.ks) {
                const double base = equivariant_kernel(s.model, s.nu, k, x, x).log_abs;
                double dev = 0.0;
                for (double t : cfg.displacements) {
                    const CVec y = displace(x, 0.0, t * what / std::sqrt(static_cast<double>(k)));
                    const double l = equivariant_kernel(s.model, s.nu, k, y, y).log_abs - base;
                    out.rows.push_back({id, nu_s, static_cast<double>(k), "gaussian_w_t" + std::to_string(t).substr(0, 4), l, 0.0,
                                        std::abs(l)});
                    dev = std::max(dev, std::abs(l));
                }
                ks.push_back(k);
                devs.push_back(dev);
                if (C < 0 && k >= 64) C = dev * std::sqrt(static_cast<double>(k));
                if (C >= 0 && dev > C / std::sqrt(static_cast<double>(k)) * (1 + 1e-12)) f.pass = false;
            }
            const FitResult fit = fit_top_half("", id, ks, devs);
            f.exponent = fit.exponent;
            f.intercept = fit.intercept;
            f.residual = fit.residual;
            f.value = devs.back();
            f.band_hi = C / std::sqrt(static_cast<double>(kmax));
            f.note = "band C k^{-1/2}, C calibrated at the first k >= 64";
            f.pass = f.pass && C >= 0;
            out.fits.push_back(f);

            // two-point sample w2 = -w1
            const double t = cfg.displacements.back();
            const double sk = std::sqrt(static_cast<double>(kmax));
            const CVec y1 = displace(x, 0.0, t * what / sk), y2 = displace(x, 0.0, -t * what / sk);
            const IsotypicBasis b = isotypic_basis(s.model, s.nu, kmax);
            const double ratio = std::exp(equivariant_kernel(b, y1, y2).log_abs - equivariant_kernel(b, x, x).log_abs);
            const double pred = std::exp(-2.0 * t * t / s.sample.varsigma);
            FitResult g;
            g.quantity = "gaussian_two_point_modulus";
            g.model = id;
            g.value = ratio / pred - 1.0;
            g.band_lo = -0.1;
            g.band_hi = 0.1;
            g.pass = std::abs(g.value) <= 0.1;
            out.rows.push_back({id, nu_s, static_cast<double>(kmax), "gaussian_two_point", ratio, pred, std::abs(ratio / pred - 1.0)});
            out.fits.push_back(g);
        }
    }
    return out;
}

// ---------------------------------------------------------------- rapid decrease

struct DecayPair {
    CVec x, y;
};

// Local log-log slopes of |K(k)|; pass when the last is below -5 and they decrease.
inline FitResult decay_fit(std::string quantity, const std::string& id, const std::vector<double>& ks,
                           const std::vector<double>& log_abs) {
    FitResult f;
    f.quantity = std::move(quantity);
    f.model = id;
    std::vector<double> slopes;
    for (std::size_t i = 1; i < ks.size(); ++i) {
        const double s = (log_abs[i] - log_abs[i - 1]) / (std::log(ks[i]) - std::log(ks[i - 1]));
        slopes.push_back(std::isfinite(s) ? s : -std::numeric_limits<double>::infinity());
    }
    bool monotone = true;
    for (std::size_t i = 1; i < slopes.size(); ++i) monotone = monotone && slopes[i] < slopes[i - 1];
    f.value = slopes.empty() ? 0.0 : slopes.back();
    f.band_lo = -std::numeric_limits<double>::infinity();
    f.band_hi = -5.0;
    f.pass = !slopes.empty() && f.value < -5.0 && monotone;
    f.note = monotone ? "local slopes strictly decreasing" : "local slopes not monotone";
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        f.xs.push_back(std::log(ks[i + 1]));
        f.ys.push_back(slopes[i]);
    }
    return f;
}

inline SuiteResult run_decay_suite(const ExperimentConfig& cfg) {
    SuiteResult out{"decay", {}, {}};
    for (const auto& id : suite_models(cfg, {"s1-cp1-w12", "t2-cp2", "su2-cp1", "u2-cp2"})) {
        const ModelSetup s = setup_model(cfg, id);
        const std::string nu_s = format_nu(s.nu);
        const CVec& x = s.sample.x;
        const auto& G = s.model.group();
        const int n = s.model.ambient();

        // a second on-locus point well away from the orbit of x
        CVec y;
        double sep = 0.0;
        std::mt19937_64 rng(cfg.seed);
        std::normal_distribution<double> Nd(0.0, 1.0);
        for (int attempt = 0; attempt < 64 && sep < 0.2; ++attempt) {
            CVec z(n);
            for (int j = 0; j < n; ++j) z[j] = cplx(Nd(rng), Nd(rng));
            try {
                const CVec cand = project_to_locus(s.model, s.nu, (x + 0.8 * z / z.norm()).normalized());
                const double d = orbit_distance(s.model, x, cand);
                if (d > sep) sep = d, y = cand;
            } catch (const PreconditionError&) {
            }
        }
        if (sep < 1e-6) {
            // one orbit fills M: every pair has separation 0 and nothing should decay
            FitResult t;
            t.quantity = "off_orbit_decay_slope";
            t.model = id;
            t.value = sep;
            t.pass = true;
            t.note = "action is transitive; no separated pair exists";
            out.fits.push_back(t);
        } else if (sep < 0.2) {
            throw NumericalError(id + ": could not find an orbit-separated pair");
        }
        std::vector<double> ks, logs;
        for (int k : s.ks) {
            if (sep < 1e-6) break;
            const IsotypicBasis b = isotypic_basis(s.model, s.nu, k);
            const OffOrbitValue v = off_orbit_value(s.model, b, x, y);
            out.rows.push_back({id, nu_s, static_cast<double>(k), "off_orbit_log_abs", v.kernel.log_abs, 0.0, v.separation});
            ks.push_back(k);
            logs.push_back(v.kernel.log_abs);
        }
        if (!ks.empty()) {
            FitResult f = decay_fit("off_orbit_decay_slope", id, ks, logs);
            f.note += "; separation " + std::to_string(sep);
            out.fits.push_back(f);
        }

        // same orbit: separation 0, no decay
        std::mt19937_64 grng(cfg.seed + 1);
        const CVec gx = s.model.act(haar_random(G, grng), x);
        const double same_sep = orbit_distance(s.model, x, gx);
        FitResult same;
        same.quantity = "same_orbit_separation";
        same.model = id;
        same.value = same_sep;
        same.band_hi = 1e-6;
        same.pass = same_sep <= 1e-6;
        out.rows.push_back({id, nu_s, static_cast<double>(s.ks.back()), "same_orbit_abs",
                            equivariant_kernel(s.model, s.nu, s.ks.back(), x, gx).log_abs, 0.0, same_sep});
        out.fits.push_back(same);

        // off the locus: only where the locus is a proper subset
        if (G.rank >= 2) {
            const CMat N = normal_space(s.model, s.sample);
            const CVec xo = displace(x, 0.0, 0.3 * N.col(0) / N.col(0).norm());
            const auto dec = locus_decompose(s.model, s.nu, xo);
            if (std::holds_alternative<LocusSample>(dec)) throw NumericalError(id + ": off-locus probe landed on the locus");
            std::vector<double> lk, ll;
            for (int k : s.ks) {
                const double l = equivariant_kernel(s.model, s.nu, k, xo, xo).log_abs;
                out.rows.push_back({id, nu_s, static_cast<double>(k), "off_locus_log_abs", l, 0.0,
                                    std::get<OffCone>(dec).cone_distance});
                lk.push_back(k);
                ll.push_back(l);
            }
            out.fits.push_back(decay_fit("off_locus_decay_slope", id, lk, ll));
        }
    }
    // structure weights that miss k nu entirely give the zero kernel
    if (cfg.model_id.empty() || cfg.model_id == "s1-cp1-w12") {
        const ProjectiveModel m = make_model("s1-cp1-w12");
        const Vec bad = -Vec::Ones(1);
        const IsotypicBasis b = isotypic_basis(m, bad, 8);
        const cplx v = equivariant_kernel(b, m.base_point, m.base_point).value;
        FitResult z;
        z.quantity = "mismatched_weights_zero_kernel";
        z.model = "s1-cp1-w12";
        z.value = std::abs(v);
        z.pass = b.dim == 0 && v == cplx(0.0);
        out.rows.push_back({"s1-cp1-w12", format_nu(bad), 8.0, "mismatched_kernel_abs", std::abs(v), 0.0, std::abs(v)});
        out.fits.push_back(z);
    }
    return out;
}

// ---------------------------------------------------------------- dimension growth

inline SuiteResult run_dim_growth(const ExperimentConfig& cfg) {
    SuiteResult out{"dims", {}, {}};
    for (const auto& id : suite_models(cfg, asymptotic_catalog())) {
        const ModelSetup s = setup_model(cfg, id);
        const std::string nu_s = format_nu(s.nu);
        const DimCoefficient dc = predict_dim_coeff(s.model, s.nu, cfg.quadrature);
        const int p = s.model.d + 1 - s.model.group().rank;
        std::vector<double> ks, errs;
        for (int k : s.ks) {
            const double exact = static_cast<double>(isotypic_dim(s.model, s.nu, k));
            const double pred = std::pow(k / pi, p) * dc.delta0;
            const double err = std::abs(pred - exact) / exact;
            out.rows.push_back({id, nu_s, static_cast<double>(k), "isotypic_dim", exact, pred, err});
            ks.push_back(k);
            errs.push_back(err);
        }
        out.rows.push_back({id, nu_s, 0.0, "delta0", dc.delta0, dc.delta0, 0.0});
        FitResult f = fit_top_half("dim_relative_error_exponent", id, ks, errs);
        const double worst = *std::max_element(errs.begin(), errs.end());
        if (worst <= 1e-10) {
            f.note = "exact agreement at every k";
            f.value = worst;
            f.band_hi = 1e-10;
            f.pass = true;
        } else {
            f.value = f.exponent;
            f.band_lo = -1.2;
            f.band_hi = -0.8;
            f.pass = f.exponent >= f.band_lo && f.exponent <= f.band_hi;
        }
        out.fits.push_back(f);
    }
    return out;
}

inline SuiteResult run_suite(const std::string& name, const ExperimentConfig& cfg) {
    if (name == "characters") return run_character_suite(cfg);
    if (name == "diag") return run_diag_convergence(cfg);
    if (name == "gaussian") return run_gaussian_profile(cfg);
    if (name == "decay") return run_decay_suite(cfg);
    if (name == "dims") return run_dim_growth(cfg);
    if (name == "all") {
        SuiteResult all{"all", {}, {}};
        for (const char* s : {"characters", "diag", "gaussian", "decay", "dims"}) all.append(run_suite(s, cfg));
        return all;
    }
    throw ConfigError("unknown suite '" + name + "'; known: characters diag gaussian decay dims all");
}

// ---------------------------------------------------------------- output

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<CsvRow>& rows) {
    os << "model,nu,k,quantity,value,predicted,err\n";
    for (const auto& r : rows)
        os << r.model << ',' << r.nu << ',' << format_double(r.k) << ',' << r.quantity << ',' << format_double(r.value) << ','
           << format_double(r.predicted) << ',' << format_double(r.err) << '\n';
}

// JSON has no infinities; they become null.
inline nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline nlohmann::json to_json(const FitResult& f) {
    return {{"quantity", f.quantity}, {"model", f.model},         {"exponent", json_number(f.exponent)},
            {"intercept", json_number(f.intercept)}, {"residual", json_number(f.residual)},
            {"value", json_number(f.value)},         {"band", {json_number(f.band_lo), json_number(f.band_hi)}},
            {"pass", f.pass},                        {"note", f.note}};
}

inline nlohmann::json to_json(const SuiteResult& s) {
    nlohmann::json rows = nlohmann::json::array(), fits = nlohmann::json::array();
    for (const auto& r : s.rows)
        rows.push_back({{"model", r.model}, {"nu", r.nu}, {"k", r.k}, {"quantity", r.quantity},
                        {"value", json_number(r.value)}, {"predicted", json_number(r.predicted)}, {"err", json_number(r.err)}});
    for (const auto& f : s.fits) fits.push_back(to_json(f));
    return {{"suite", s.suite}, {"rows", rows}, {"fits", fits}, {"pass", s.pass()}};
}

inline nlohmann::json complex_json(cplx z) { return {json_number(z.real()), json_number(z.imag())}; }

inline nlohmann::json complex_vec_json(const CVec& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(complex_json(v[i]));
    return a;
}

inline nlohmann::json to_json(const Prediction& p) {
    return {{"model", p.model_id},
            {"nu", std::vector<double>(p.nu.data(), p.nu.data() + p.nu.size())},
            {"k", p.k},
            {"x", complex_vec_json(p.x)},
            {"v1", complex_vec_json(p.v1)},
            {"w1", complex_vec_json(p.w1)},
            {"v2", complex_vec_json(p.v2)},
            {"w2", complex_vec_json(p.w2)},
            {"value", complex_json(p.value)},
            {"ingredients",
             {{"psi_nu", p.psi},
              {"varsigma", p.varsigma},
              {"exponent", p.exponent},
              {"exponent_factor", p.exponent_factor},
              {"gaussian_factor", complex_json(p.gaussian_factor)}}}};
}

// Log-log line chart of every fit that carries data.
inline std::string svg_chart(const SuiteResult& s) {
    const double W = 640, H = 400, pad = 50;
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& f : s.fits)
        for (std::size_t i = 0; i < f.xs.size(); ++i) {
            if (!std::isfinite(f.ys[i])) continue;
            x0 = std::min(x0, f.xs[i]), x1 = std::max(x1, f.xs[i]);
            y0 = std::min(y0, f.ys[i]), y1 = std::max(y1, f.ys[i]);
        }
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << pad << "\" y=\"20\" font-size=\"14\">" << s.suite << " (x: log k)</text>\n";
    if (x1 > x0) {
        if (y1 <= y0) y1 = y0 + 1;
        auto X = [&](double v) { return pad + (v - x0) / (x1 - x0) * (W - 2 * pad); };
        auto Y = [&](double v) { return H - pad - (v - y0) / (y1 - y0) * (H - 2 * pad); };
        os << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad << "\" stroke=\"black\"/>\n"
           << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << H - pad << "\" stroke=\"black\"/>\n";
        const char* colors[] = {"#1b6ca8", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#2c3e50"};
        int c = 0, legend = 0;
        for (const auto& f : s.fits) {
            if (f.xs.size() < 2) continue;
            const char* col = colors[c++ % 6];
            os << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
            for (std::size_t i = 0; i < f.xs.size(); ++i)
                if (std::isfinite(f.ys[i])) os << X(f.xs[i]) << ',' << Y(f.ys[i]) << ' ';
            os << "\"/>\n<text x=\"" << W - pad - 200 << "\" y=\"" << pad + 14 * legend++ << "\" font-size=\"11\" fill=\"" << col
               << "\">" << f.model << " " << f.quantity << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

inline void write_outputs(const SuiteResult& s, const std::string& dir, bool svg) {
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    const std::filesystem::path base = std::filesystem::path(dir) / s.suite;
    {
        std::ofstream f(base.string() + ".csv");
        write_csv(f, s.rows);
    }
    {
        std::ofstream f(base.string() + ".json");
        f << to_json(s).dump(2) << '\n';
    }
    if (svg) {
        std::ofstream f(base.string() + ".svg");
        f << svg_chart(s);
    }
}

}  // namespace eqszego
