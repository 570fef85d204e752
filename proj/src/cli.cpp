#include "metaor/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "metaor/classical.hpp"
#include "metaor/events.hpp"
#include "metaor/pipeline.hpp"
#include "metaor/reading.hpp"
#include "metaor/report.hpp"
#include "metaor/sampler.hpp"
#include "metaor/simulate.hpp"
#include "metaor/stats.hpp"
#include "metaor/study.hpp"

namespace metaor {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
}

void write_metadata(const fs::path& dir, const std::string& command, json config) {
    json meta;
    meta["version"] = kVersion;
    meta["command"] = command;
    meta["config"] = config;
    meta["config_hash"] = hex64(fnv1a(config.dump()));
    write_text(dir / "metadata.json", meta.dump(2) + "\n");
}

json result_to_json(const MetaResult& r) {
    json j;
    j["method"] = to_string(r.method);
    j["d_mean"] = r.d_mean;
    j["d_sd"] = r.d_sd;
    j["d_lo"] = r.d_lo;
    j["d_hi"] = r.d_hi;
    j["or_mean"] = r.or_mean;
    j["or_lo"] = r.or_lo;
    j["or_hi"] = r.or_hi;
    j["tau2_mean"] = r.tau2_mean;
    j["tau2_sd"] = r.tau2_sd;
    j["sigma2_mean"] = r.sigma2_mean;
    j["sigma2_sd"] = r.sigma2_sd;
    j["m_mean"] = r.m_mean;
    j["m_sd"] = r.m_sd;
    j["study_effects"] = json::array();
    for (const auto& e : r.study_effects)
        j["study_effects"].push_back(
            {{"id", e.id}, {"log_or", e.log_or}, {"lo", e.lo}, {"hi", e.hi}});
    j["diagnostics"] = r.diagnostics;
    return j;
}

MetaResult result_from_json(const json& j) {
    MetaResult r;
    r.method = method_from_string(j.at("method").get<std::string>());
    r.d_mean = j.at("d_mean").get<double>();
    r.d_sd = j.at("d_sd").get<double>();
    r.d_lo = j.at("d_lo").get<double>();
    r.d_hi = j.at("d_hi").get<double>();
    r.or_mean = j.at("or_mean").get<double>();
    r.or_lo = j.at("or_lo").get<double>();
    r.or_hi = j.at("or_hi").get<double>();
    r.tau2_mean = j.value("tau2_mean", 0.0);
    r.tau2_sd = j.value("tau2_sd", 0.0);
    r.sigma2_mean = j.value("sigma2_mean", 0.0);
    r.sigma2_sd = j.value("sigma2_sd", 0.0);
    r.m_mean = j.value("m_mean", 0.0);
    r.m_sd = j.value("m_sd", 0.0);
    const json effects = j.value("study_effects", json::array());
    for (const auto& e : effects)
        r.study_effects.push_back({e.at("id").get<std::string>(),
                                   e.at("log_or").get<double>(),
                                   e.at("lo").get<double>(), e.at("hi").get<double>()});
    const json diag = j.value("diagnostics", json::object());
    for (const auto& [key, value] : diag.items())
        r.diagnostics[key] = value.get<double>();
    return r;
}

MetaResult classical_result(const MetaDataset& ds, Method method) {
    const auto inputs = naive_event_inputs(ds);
    std::vector<std::string> warnings;
    const auto effects = classical_effects(ds, inputs, &warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    const PooledEstimate fit =
        method == Method::DSL ? dsl_fit(effects) : ml_fit(effects);
    MetaResult r;
    r.method = method;
    r.d_mean = fit.d_hat;
    r.d_sd = std::sqrt(fit.var_d);
    r.d_lo = fit.ci_lo();
    r.d_hi = fit.ci_hi();
    r.or_mean = std::exp(fit.d_hat);
    r.or_lo = std::exp(fit.ci_lo());
    r.or_hi = std::exp(fit.ci_hi());
    r.tau2_mean = fit.tau2_hat;
    r.diagnostics["q_stat"] = fit.q_stat;
    if (method == Method::ML) {
        r.diagnostics["converged"] = fit.converged ? 1.0 : 0.0;
        r.diagnostics["iterations"] = double(fit.iterations);
    }
    for (std::size_t i = 0; i < ds.k(); ++i) {
        const auto& e = effects[i];
        const double half = 1.96 * std::sqrt(e.sigma2_hat);
        r.study_effects.push_back(
            {ds.studies[i].id, e.log_or, e.log_or - half, e.log_or + half});
    }
    return r;
}

double horizon_in_unit(double days, TimeUnit unit) {
    switch (unit) {
        case TimeUnit::Days: return days;
        case TimeUnit::Months: return days / 30.4375;
        case TimeUnit::Years: return days / 365.25;
    }
    return days;
}

struct CommonOptions {
    std::string input;
    std::string output = "out";
    std::string methods = "dsl,ml,naive-bayes,ur-ee";
    std::string reading = "auto";
    bool ur_exact = false;
    double horizon_days = 0.0; // 0 = keep per-study horizons
    Priors priors;
    ChainConfig chain;
};

void print_config(const CommonOptions& o) {
    std::printf("metaor %s | methods=%s reading=%s seed=%llu chains=%d "
                "burn_in=%d iterations=%d thin=%d priors: d~N(%g,%g^2) "
                "m~N(%g,%g^2) tau2,sigma2~IG(%g,%g)\n",
                kVersion, o.methods.c_str(), o.reading.c_str(),
                static_cast<unsigned long long>(o.chain.seed), o.chain.chains,
                o.chain.burn_in, o.chain.iterations, o.chain.thin, o.priors.d_mean,
                o.priors.d_sd, o.priors.m_mean, o.priors.m_sd, o.priors.tau2_shape,
                o.priors.tau2_scale);
}

json config_json(const CommonOptions& o) {
    json j;
    j["input"] = o.input;
    j["methods"] = o.methods;
    j["reading"] = o.reading;
    j["ur_exact"] = o.ur_exact;
    j["horizon_days"] = o.horizon_days;
    j["seed"] = o.chain.seed;
    j["chains"] = o.chain.chains;
    j["burn_in"] = o.chain.burn_in;
    j["iterations"] = o.chain.iterations;
    j["thin"] = o.chain.thin;
    j["threads"] = o.chain.threads;
    j["priors"] = {{"d_mean", o.priors.d_mean},       {"d_sd", o.priors.d_sd},
                   {"m_mean", o.priors.m_mean},       {"m_sd", o.priors.m_sd},
                   {"tau2_shape", o.priors.tau2_shape}, {"tau2_scale", o.priors.tau2_scale},
                   {"sigma2_shape", o.priors.sigma2_shape},
                   {"sigma2_scale", o.priors.sigma2_scale}};
    return j;
}

std::vector<std::string> split_csv_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

MetaDataset prepare_dataset(const CommonOptions& o) {
    MetaDataset ds = load_dataset(o.input);
    const auto violations = validate(ds);
    if (!violations.empty()) {
        std::string msg = "dataset failed validation:";
        for (const auto& v : violations)
            msg += "\n  " + v.study_id + (v.arm.empty() ? "" : "/" + v.arm) + " " +
                   v.field + ": " + v.message;
        throw Error(ErrorKind::BadInput, msg);
    }
    ds = apply_reading_mode(ds, reading_mode_from_string(o.reading));
    if (o.horizon_days > 0.0)
        for (auto& s : ds.studies)
            s.horizon = horizon_in_unit(o.horizon_days, s.time_unit);
    return ds;
}

int cmd_analyze(const CommonOptions& o) {
    const MetaDataset ds = prepare_dataset(o);
    const auto method_names = split_csv_list(o.methods);
    if (method_names.empty())
        throw Error(ErrorKind::BadInput, "no methods requested");

    std::vector<MetaResult> results;
    std::map<std::string, PosteriorDraws> bayes_draws;
    for (const auto& name : method_names) {
        const Method method = method_from_string(name);
        switch (method) {
            case Method::DSL:
            case Method::ML:
                results.push_back(classical_result(ds, method));
                break;
            case Method::NaiveBayes: {
                const auto draws =
                    run_naive(ds, naive_event_inputs(ds), o.priors, o.chain);
                results.push_back(summarize(draws, method));
                bayes_draws.emplace(to_string(method), draws);
                break;
            }
            case Method::UREE: {
                BuildOptions build;
                build.exact_measured_ur = o.ur_exact;
                const ModelInputs inputs = build_model_inputs(ds, build);
                for (const auto& w : inputs.warnings)
                    std::fprintf(stderr, "warning: %s\n", w.c_str());
                const auto draws = run_uree(inputs, o.priors, o.chain);
                results.push_back(summarize(draws, method));
                bayes_draws.emplace(to_string(method), draws);
                break;
            }
        }
    }

    fs::create_directories(o.output);
    const fs::path dir(o.output);
    for (const auto& r : results)
        write_text(dir / ("result_" + to_string(r.method) + ".json"),
                   result_to_json(r).dump(2) + "\n");
    for (const auto& [name, draws] : bayes_draws)
        write_draws_csv(draws, (dir / ("draws_" + name + ".csv")).string());

    const PlotDocument forest = forest_plot(results, results.front().study_effects);
    write_text(dir / "forest.svg", forest.svg);
    write_text(dir / "forest.txt", forest.text);

    const MetaResult* naive = nullptr;
    const MetaResult* uree = nullptr;
    for (const auto& r : results) {
        if (r.method == Method::NaiveBayes) naive = &r;
        if (r.method == Method::UREE) uree = &r;
    }
    if (naive && uree) {
        write_text(dir / "comparison.csv", comparison_table_csv(*naive, *uree));
        const double n_total = ds.total_enrollment();
        const double n_eff = effective_sample_size(naive->d_sd * naive->d_sd,
                                                   uree->d_sd * uree->d_sd, n_total);
        json ess;
        ess["n_total"] = n_total;
        ess["var_naive"] = naive->d_sd * naive->d_sd;
        ess["var_uree"] = uree->d_sd * uree->d_sd;
        ess["n_effective"] = n_eff;
        ess["reduction"] = 1.0 - n_eff / n_total;
        write_text(dir / "ess.json", ess.dump(2) + "\n");
    }

    json config = config_json(o);
    config["total_enrollment"] = ds.total_enrollment();
    write_metadata(dir, "analyze", config);

    for (const auto& r : results)
        std::printf("%-12s d=%+.4f sd=%.4f OR=%.3f [%.3f, %.3f]\n",
                    to_string(r.method).c_str(), r.d_mean, r.d_sd, r.or_mean, r.or_lo,
                    r.or_hi);
    return 0;
}

int cmd_simulate(const SimConfig& sim, const std::string& output) {
    const auto studies = generate_dataset(sim);
    const MetaDataset ds = sim_to_dataset(studies, sim);

    fs::create_directories(output);
    const fs::path dir(output);
    save_dataset(ds, (dir / "dataset.json").string());

    json truth = json::array();
    for (std::size_t i = 0; i < studies.size(); ++i) {
        const auto& st = studies[i];
        truth.push_back({{"id", ds.studies[i].id},
                         {"delta", st.delta},
                         {"u", st.u},
                         {"treatment",
                          {{"n", st.treatment.n},
                           {"s", st.treatment.s},
                           {"e", st.treatment.e},
                           {"lost", st.treatment.lost},
                           {"kappa", st.treatment.kappa}}},
                         {"control",
                          {{"n", st.control.n},
                           {"s", st.control.s},
                           {"e", st.control.e},
                           {"lost", st.control.lost},
                           {"kappa", st.control.kappa}}}});
    }
    write_text(dir / "truth.json", truth.dump(2) + "\n");

    json config;
    config["k"] = sim.k;
    config["mean_arm_size"] = sim.mean_arm_size;
    config["d"] = sim.d;
    config["tau2"] = sim.tau2;
    config["m"] = sim.m;
    config["sigma2"] = sim.sigma2;
    config["psi_treatment"] = sim.psi_treatment;
    config["phi_sd_treatment"] = sim.phi_sd_treatment;
    config["psi_control"] = sim.psi_control;
    config["phi_sd_control"] = sim.phi_sd_control;
    config["horizon"] = sim.horizon;
    config["seed"] = sim.seed;
    write_metadata(dir, "simulate", config);
    std::printf("wrote %zu simulated studies to %s\n", studies.size(), output.c_str());
    return 0;
}

void write_density_csv(const fs::path& path, const UrDensity& ur, int points,
                       const UrDensity* exact, const UrDensity* normal) {
    std::ostringstream out;
    out << "grid,pdf";
    if (exact) out << ",pdf_exact";
    if (normal) out << ",pdf_normal";
    out << "\n";
    const auto [lo, hi] = ur.support();
    if (ur.degenerate() || !(hi > lo)) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "# point mass at %.10g\n", ur.mean());
        out << buf;
    } else {
        const double pad = 0.05 * (hi - lo);
        const double a = std::max(0.0, lo - pad);
        const double b = std::min(ur.n, hi + pad);
        for (int i = 0; i < points; ++i) {
            const double x = a + (b - a) * double(i) / double(points - 1);
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g", x, ur.pdf(x));
            out << buf;
            if (exact) {
                std::snprintf(buf, sizeof(buf), ",%.10g", exact->pdf(x));
                out << buf;
            }
            if (normal) {
                std::snprintf(buf, sizeof(buf), ",%.10g", normal->pdf(x));
                out << buf;
            }
            out << "\n";
        }
    }
    write_text(path, out.str());
}

void write_ee_csv(const fs::path& path, const EeDensity& ee, int points) {
    std::ostringstream out;
    out << "grid,pdf\n";
    if (ee.point_mass()) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "# point mass at %.10g\n", ee.center);
        out << buf;
    } else {
        for (int i = 0; i < points; ++i) {
            const double x =
                ee.lb_sym + (ee.ub_sym - ee.lb_sym) * double(i) / double(points - 1);
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", x,
                          std::exp(ee.logpdf(x)));
            out << buf;
        }
    }
    write_text(path, out.str());
}

int cmd_density(const CommonOptions& o, const std::string& study_filter,
                const std::string& arm_filter, int points) {
    const MetaDataset ds = prepare_dataset(o);
    BuildOptions build;
    build.exact_measured_ur = o.ur_exact;
    const ModelInputs inputs = build_model_inputs(ds, build);
    for (const auto& w : inputs.warnings)
        std::fprintf(stderr, "warning: %s\n", w.c_str());

    fs::create_directories(o.output);
    const fs::path dir(o.output);

    std::ostringstream params;
    params << "study,arm,lambda,c,auc,lb,ub,b,B\n";
    for (const auto& si : inputs.studies) {
        for (const ArmModel* am : {&si.treatment, &si.control}) {
            char buf[256];
            std::snprintf(buf, sizeof(buf), "%s,%s,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g,%.8g\n",
                          si.id.c_str(), am->arm_name.c_str(), am->censoring.lambda,
                          am->censoring.c, am->censoring.auc_fraction, am->ee.lb_raw,
                          am->ee.ub_raw, am->b, am->ee.variance);
            params << buf;

            if (!study_filter.empty() && si.id != study_filter) continue;
            if (arm_filter != "both" && am->arm_name != arm_filter) continue;
            const std::string stem = si.id + "_" + am->arm_name;

            const StudyExtract* src = nullptr;
            for (const auto& st : ds.studies)
                if (st.id == si.id) src = &st;
            const ArmExtract& raw =
                am->arm_name == "treatment" ? src->treatment : src->control;
            UrDensity exact, normal;
            const UrDensity* exact_p = nullptr;
            const UrDensity* normal_p = nullptr;
            if (am->profile.ur_case == UrCase::Measured) {
                exact = ur_measured_exact(*raw.x_star, *raw.y_star, *raw.tick_width,
                                          raw.n);
                normal = ur_measured_normal(*raw.x_star, *raw.y_star, *raw.tick_width,
                                            raw.n);
                exact_p = &exact;
                normal_p = &normal;
            }
            write_density_csv(dir / ("ur_" + stem + ".csv"), am->ur, points, exact_p,
                              normal_p);
            write_ee_csv(dir / ("ee_" + stem + ".csv"), am->ee, points);
        }
    }
    write_text(dir / "ee_params.csv", params.str());

    json config = config_json(o);
    config["study"] = study_filter;
    config["arm"] = arm_filter;
    config["points"] = points;
    write_metadata(dir, "density", config);
    std::printf("density tables written to %s\n", o.output.c_str());
    return 0;
}

struct RunArtifacts {
    MetaResult result;
    PosteriorDraws draws;
    double n_total = 0.0;
};

RunArtifacts load_run_dir(const std::string& dir_path, const std::string& method) {
    const fs::path dir(dir_path);
    std::ifstream meta_in(dir / "metadata.json");
    if (!meta_in)
        throw Error(ErrorKind::Io, "cannot open " + (dir / "metadata.json").string());
    json meta = json::parse(meta_in);
    RunArtifacts out;
    out.n_total = meta.at("config").value("total_enrollment", 0.0);
    std::ifstream res_in(dir / ("result_" + method + ".json"));
    if (!res_in)
        throw Error(ErrorKind::Io,
                    "run dir " + dir_path + " has no result for method " + method);
    out.result = result_from_json(json::parse(res_in));
    out.draws = read_draws_csv((dir / ("draws_" + method + ".csv")).string());
    return out;
}

int cmd_report(const std::string& compare, const std::string& output) {
    const auto dirs = split_csv_list(compare);
    if (dirs.size() != 2)
        throw Error(ErrorKind::BadInput,
                    "--compare expects two analyze output directories");
    RunArtifacts naive = load_run_dir(dirs[0], "naive-bayes");
    RunArtifacts uree = load_run_dir(dirs[1], "ur-ee");
    if (naive.n_total <= 0.0)
        throw Error(ErrorKind::BadInput, "run metadata lacks total enrollment");

    fs::create_directories(output);
    const fs::path dir(output);

    const auto d_naive = naive.draws.pooled_column("d");
    const auto d_uree = uree.draws.pooled_column("d");
    const double var_naive = sd_of(d_naive) * sd_of(d_naive);
    const double var_uree = sd_of(d_uree) * sd_of(d_uree);
    const double n_eff = effective_sample_size(var_naive, var_uree, naive.n_total);

    std::ostringstream ess;
    ess << "quantity,value\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "var_naive,%.8g\n", var_naive);
    ess << buf;
    std::snprintf(buf, sizeof(buf), "var_uree,%.8g\n", var_uree);
    ess << buf;
    std::snprintf(buf, sizeof(buf), "n_total,%.8g\n", naive.n_total);
    ess << buf;
    std::snprintf(buf, sizeof(buf), "n_effective,%.8g\n", n_eff);
    ess << buf;
    std::snprintf(buf, sizeof(buf), "reduction,%.8g\n", 1.0 - n_eff / naive.n_total);
    ess << buf;
    write_text(dir / "ess.csv", ess.str());

    std::ostringstream l1;
    l1 << "parameter,l1,bandwidth\n";
    double bw = 0.0;
    double value = l1_between_draws(d_naive, d_uree, &bw);
    std::snprintf(buf, sizeof(buf), "d,%.6g,%.6g\n", value, bw);
    l1 << buf;
    const auto has_column = [](const PosteriorDraws& draws, const std::string& col) {
        for (const auto& c : draws.columns)
            if (c == col) return true;
        return false;
    };
    const auto inv_logit = [](double x) {
        return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                        : std::exp(x) / (1.0 + std::exp(x));
    };
    for (const auto& col : naive.draws.columns) {
        if (col.rfind("delta_", 0) != 0) continue;
        const std::string id = col.substr(6);
        if (!has_column(uree.draws, col) || !has_column(uree.draws, "u_" + id))
            continue;
        value = l1_between_draws(naive.draws.pooled_column(col),
                                 uree.draws.pooled_column(col), &bw);
        std::snprintf(buf, sizeof(buf), "%s,%.6g,%.6g\n", col.c_str(), value, bw);
        l1 << buf;
        // Per-arm death-probability conditionals, the densities the overlay
        // plots compare.
        const auto pi_draws = [&](const PosteriorDraws& draws, double sign) {
            const auto delta = draws.pooled_column(col);
            const auto u = draws.pooled_column("u_" + id);
            std::vector<double> out(delta.size());
            for (std::size_t i = 0; i < delta.size(); ++i)
                out[i] = inv_logit(u[i] + sign * 0.5 * delta[i]);
            return out;
        };
        for (const auto& [arm, sign] :
             {std::pair<const char*, double>{"treatment", 1.0}, {"control", -1.0}}) {
            value = l1_between_draws(pi_draws(naive.draws, sign),
                                     pi_draws(uree.draws, sign), &bw);
            std::snprintf(buf, sizeof(buf), "pi_%s_%s,%.6g,%.6g\n", id.c_str(), arm,
                          value, bw);
            l1 << buf;
        }
    }
    write_text(dir / "l1.csv", l1.str());

    write_text(dir / "comparison.csv",
               comparison_table_csv(naive.result, uree.result));
    const PlotDocument forest = forest_plot({naive.result, uree.result}, {});
    write_text(dir / "forest.svg", forest.svg);
    write_text(dir / "forest.txt", forest.text);

    json config;
    config["compare"] = compare;
    write_metadata(dir, "report", config);
    std::printf("reduction in effective sample size: %.1f%%\n",
                100.0 * (1.0 - n_eff / naive.n_total));
    return 0;
}

int error_exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io:
            return 4;
        case ErrorKind::NonFiniteLikelihood:
        case ErrorKind::EmptySupport:
        case ErrorKind::InsufficientChains:
            return 3;
        default:
            return 2;
    }
}

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::NoUsableData: return "no_usable_data";
        case ErrorKind::DegenerateCell: return "degenerate_cell";
        case ErrorKind::InvalidMeasurement: return "invalid_measurement";
        case ErrorKind::InvalidSummary: return "invalid_summary";
        case ErrorKind::NoDonorStudies: return "no_donor_studies";
        case ErrorKind::InconsistentBounds: return "inconsistent_bounds";
        case ErrorKind::MissingObservedDeaths: return "missing_observed_deaths";
        case ErrorKind::DomainViolation: return "domain_violation";
        case ErrorKind::NonFiniteLikelihood: return "non_finite_likelihood";
        case ErrorKind::EmptySupport: return "empty_support";
        case ErrorKind::InsufficientChains: return "insufficient_chains";
        case ErrorKind::GridTooCoarse: return "grid_too_coarse";
        case ErrorKind::BadInput: return "bad_input";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

// Machine-readable failure report on stderr; nothing is written to the
// output directory on failure.
void emit_error_report(const char* kind, const std::string& message, int code) {
    json err;
    err["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"meta-analysis of odds ratios from incomplete extracted data"};
    app.require_subcommand(1);
    // Precedence: explicit flags > config file > defaults.
    app.set_config("--config", "", "read options from an INI/TOML file");

    CommonOptions common;
    SimConfig sim;
    std::string study_filter, arm_filter = "both", compare;
    int density_points = 513;
    bool d_literal = false;

    const auto add_common = [&](CLI::App* cmd, bool with_sampler) {
        cmd->add_option("--input", common.input, "study-record JSON file")
            ->required();
        cmd->add_option("--output", common.output, "output directory");
        cmd->add_option("--reading", common.reading,
                        "extraction restriction: auto|km|events");
        cmd->add_flag("--ur-exact", common.ur_exact,
                      "use the exact ratio density for measured readings");
        cmd->add_option("--horizon-days", common.horizon_days,
                        "override every study horizon (days)");
        if (with_sampler) {
            cmd->add_option("--chains", common.chain.chains);
            cmd->add_option("--burn-in", common.chain.burn_in);
            cmd->add_option("--iterations", common.chain.iterations);
            cmd->add_option("--thin", common.chain.thin);
            cmd->add_option("--seed", common.chain.seed);
            cmd->add_option("--threads", common.chain.threads);
            cmd->add_option("--prior-ig-shape", common.priors.tau2_shape,
                            "shared IG shape for tau2 and sigma2");
            cmd->add_option("--prior-ig-scale", common.priors.tau2_scale,
                            "shared IG scale for tau2 and sigma2");
            cmd->add_option("--prior-d-sd", common.priors.d_sd);
            cmd->add_option("--prior-m-sd", common.priors.m_sd);
        }
    };

    CLI::App* analyze = app.add_subcommand("analyze", "fit meta-analysis models");
    add_common(analyze, true);
    analyze->add_option("--method", common.methods,
                        "comma list of dsl,ml,naive-bayes,ur-ee");

    CLI::App* simulate = app.add_subcommand("simulate", "generate a censored dataset");
    simulate->add_option("--output", common.output, "output directory");
    simulate->add_option("--seed", sim.seed);
    simulate->add_option("--studies", sim.k);
    simulate->add_option("--mean-arm-size", sim.mean_arm_size);
    simulate->add_option("--d", sim.d);
    simulate->add_option("--tau2", sim.tau2);
    simulate->add_option("--m", sim.m);
    simulate->add_option("--sigma2", sim.sigma2);
    simulate->add_flag("--d-literal", d_literal,
                       "use d = 1.0 instead of the odds-ratio-one default");
    std::string preset;
    simulate->add_option("--preset", preset, "named preset (fixture-design)")
        ->check(CLI::IsMember({"fixture-design"}));

    CLI::App* density = app.add_subcommand("density", "emit reading/events densities");
    add_common(density, false);
    density->add_option("--study", study_filter, "restrict to one study id");
    density->add_option("--arm", arm_filter, "treatment|control|both");
    density->add_option("--points", density_points, "grid points per density");

    CLI::App* report = app.add_subcommand("report", "compare two analyze runs");
    report->add_option("--compare", compare, "naiveDir,ureeDir")->required();
    report->add_option("--output", common.output, "output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    common.priors.sigma2_shape = common.priors.tau2_shape;
    common.priors.sigma2_scale = common.priors.tau2_scale;
    if (d_literal) sim.d = 1.0;

    try {
        if (analyze->parsed()) {
            print_config(common);
            return cmd_analyze(common);
        }
        if (simulate->parsed()) return cmd_simulate(sim, common.output);
        if (density->parsed()) return cmd_density(common, study_filter, arm_filter,
                                                  density_points);
        if (report->parsed()) return cmd_report(compare, common.output);
    } catch (const Error& e) {
        const int code = error_exit_code(e.kind());
        emit_error_report(error_kind_name(e.kind()), e.what(), code);
        return code;
    } catch (const std::exception& e) {
        emit_error_report("unexpected", e.what(), 2);
        return 2;
    }
    return 2;
}

} // namespace metaor
