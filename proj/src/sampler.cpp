#include "metaor/sampler.hpp"
#include "metaor/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <thread>

namespace metaor {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double inv_logit(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

// Part of the binomial log-likelihood that depends on pi only (the gamma
// terms are constant while s is held fixed).
double binom_loglik_pi(double s, double n, double pi) {
    if (!(pi > 0.0 && pi < 1.0)) return kNegInf;
    return s * std::log(pi) + (n - s) * std::log1p(-pi);
}

double reflect_into(double x, double lo, double hi) {
    if (!(hi > lo)) return lo;
    const double width = hi - lo;
    double t = std::fmod(x - lo, 2.0 * width);
    if (t < 0.0) t += 2.0 * width;
    return t <= width ? lo + t : lo + 2.0 * width - t;
}

// One latent arm: likelihood bookkeeping plus the augmented densities.
struct ArmState {
    double n = 0.0;
    double s = 0.0;       // latent (or observed, naive mode) event count
    double s_plus = 0.0;  // latent KM-implied count
    bool augmented = false;
    const ArmModel* model = nullptr; // null in naive mode
    double splus_lo = 0.0, splus_hi = 0.0; // feasible region for s_plus
};

struct StudyState {
    std::string id;
    double delta = 0.0;
    double u = 0.0;
    ArmState arm[2]; // [0] = treatment, [1] = control
};

struct Block {
    double step;
    long accepts = 0, proposals = 0;
    long window_accepts = 0, window_proposals = 0;
};

void tune(Block& b) {
    if (b.window_proposals == 0) return;
    const double rate = double(b.window_accepts) / double(b.window_proposals);
    if (rate < 0.20)
        b.step *= 0.7;
    else if (rate > 0.50)
        b.step *= 1.4;
    b.step = std::clamp(b.step, 1e-6, 1e3);
    b.window_accepts = b.window_proposals = 0;
}

struct Engine {
    const Priors* priors;
    const ChainConfig* config;
    bool augmented;
    std::vector<StudyState> studies;

    double d = 0.0, tau2 = 1.0, m = 0.0, sigma2 = 1.0;

    std::vector<Block> delta_blocks, u_blocks;
    std::vector<std::array<Block, 2>> s_blocks, splus_blocks;

    double pi_of(const StudyState& st, int j) const {
        // j = 0 treatment (logit u + delta/2), j = 1 control.
        return inv_logit(j == 0 ? st.u + 0.5 * st.delta : st.u - 0.5 * st.delta);
    }

    double arm_loglik(const StudyState& st, int j) const {
        if (config->prior_only) return 0.0;
        return binom_loglik_pi(st.arm[j].s, st.arm[j].n, pi_of(st, j));
    }

    double study_loglik(const StudyState& st) const {
        return arm_loglik(st, 0) + arm_loglik(st, 1);
    }

    void update_delta(StudyState& st, Block& b, Rng& rng) {
        const double cur = st.delta;
        const double cur_target =
            study_loglik(st) + norm_logpdf(cur, d, std::sqrt(tau2));
        const double prop = cur + b.step * rng.normal();
        st.delta = prop;
        const double prop_target =
            study_loglik(st) + norm_logpdf(prop, d, std::sqrt(tau2));
        ++b.proposals;
        ++b.window_proposals;
        if (std::log(rng.uniform()) < prop_target - cur_target) {
            ++b.accepts;
            ++b.window_accepts;
        } else {
            st.delta = cur;
        }
    }

    void update_u(StudyState& st, Block& b, Rng& rng) {
        const double cur = st.u;
        const double cur_target =
            study_loglik(st) + norm_logpdf(cur, m, std::sqrt(sigma2));
        const double prop = cur + b.step * rng.normal();
        st.u = prop;
        const double prop_target =
            study_loglik(st) + norm_logpdf(prop, m, std::sqrt(sigma2));
        ++b.proposals;
        ++b.window_proposals;
        if (std::log(rng.uniform()) < prop_target - cur_target) {
            ++b.accepts;
            ++b.window_accepts;
        } else {
            st.u = cur;
        }
    }

    // Latent true count: continuous binomial times the events density
    // recentered at the current s_plus.
    void update_s(StudyState& st, int j, Block& b, Rng& rng) {
        ArmState& a = st.arm[j];
        const EeDensity ee = ee_recenter(a.model->ee, a.s_plus);
        if (ee.point_mass()) {
            a.s = ee.center;
            return;
        }
        const double pi = pi_of(st, j);
        const auto target = [&](double s) {
            const double lp = ee.logpdf(s);
            if (lp == kNegInf) return kNegInf;
            return cont_binomial_logpmf(s, a.n, pi) + lp;
        };
        const double cur = a.s;
        const double prop =
            reflect_into(cur + b.step * rng.normal(), ee.lb_sym, ee.ub_sym);
        ++b.proposals;
        ++b.window_proposals;
        if (std::log(rng.uniform()) < target(prop) - target(cur)) {
            a.s = prop;
            ++b.accepts;
            ++b.window_accepts;
        }
    }

    // Latent KM-implied count: reading density times the events density of
    // the current s; the truncation (and its normalizer) moves with s_plus.
    void update_splus(StudyState& st, int j, Block& b, Rng& rng) {
        ArmState& a = st.arm[j];
        if (a.model->ur.degenerate() || !(a.splus_hi > a.splus_lo)) return;
        const auto target = [&](double sp) {
            const double lp_ur = a.model->ur.logpdf(sp);
            if (lp_ur == kNegInf) return kNegInf;
            return lp_ur + ee_recenter(a.model->ee, sp).logpdf(a.s);
        };
        const double cur = a.s_plus;
        const double prop =
            reflect_into(cur + b.step * rng.normal(), a.splus_lo, a.splus_hi);
        ++b.proposals;
        ++b.window_proposals;
        if (std::log(rng.uniform()) < target(prop) - target(cur)) {
            a.s_plus = prop;
            ++b.accepts;
            ++b.window_accepts;
        }
    }

    void update_conjugate(Rng& rng) {
        const double k = double(studies.size());
        // d | delta, tau2
        {
            const double prior_prec = 1.0 / (priors->d_sd * priors->d_sd);
            double sum = 0.0;
            for (const auto& st : studies) sum += st.delta;
            const double prec = prior_prec + k / tau2;
            const double mean = (priors->d_mean * prior_prec + sum / tau2) / prec;
            d = rng.normal(mean, std::sqrt(1.0 / prec));
        }
        // tau2 | delta, d
        {
            double ss = 0.0;
            for (const auto& st : studies) ss += (st.delta - d) * (st.delta - d);
            tau2 = rng.inverse_gamma(priors->tau2_shape + 0.5 * k,
                                     priors->tau2_scale + 0.5 * ss);
        }
        // m | u, sigma2
        {
            const double prior_prec = 1.0 / (priors->m_sd * priors->m_sd);
            double sum = 0.0;
            for (const auto& st : studies) sum += st.u;
            const double prec = prior_prec + k / sigma2;
            const double mean = (priors->m_mean * prior_prec + sum / sigma2) / prec;
            m = rng.normal(mean, std::sqrt(1.0 / prec));
        }
        // sigma2 | u, m
        {
            double ss = 0.0;
            for (const auto& st : studies) ss += (st.u - m) * (st.u - m);
            sigma2 = rng.inverse_gamma(priors->sigma2_shape + 0.5 * k,
                                       priors->sigma2_scale + 0.5 * ss);
        }
    }

    void iterate(Rng& rng, bool tuning) {
        for (std::size_t i = 0; i < studies.size(); ++i) {
            update_delta(studies[i], delta_blocks[i], rng);
            update_u(studies[i], u_blocks[i], rng);
        }
        if (augmented && !config->prior_only) {
            for (std::size_t i = 0; i < studies.size(); ++i) {
                for (int j = 0; j < 2; ++j) {
                    ArmState& a = studies[i].arm[j];
                    if (!a.augmented) continue;
                    update_s(studies[i], j, s_blocks[i][j], rng);
                    update_splus(studies[i], j, splus_blocks[i][j], rng);
                }
            }
        }
        update_conjugate(rng);
        if (tuning) {
            for (auto& b : delta_blocks) tune(b);
            for (auto& b : u_blocks) tune(b);
            for (auto& pair : s_blocks)
                for (auto& b : pair) tune(b);
            for (auto& pair : splus_blocks)
                for (auto& b : pair) tune(b);
        }
    }
};

std::uint64_t chain_seed(std::uint64_t seed, int chain) {
    std::uint64_t state = seed;
    (void)splitmix64(state);
    for (int i = 0; i <= chain; ++i) (void)splitmix64(state);
    return splitmix64(state);
}

Engine make_engine(const std::vector<StudyState>& template_states, bool augmented,
                   const Priors& priors, const ChainConfig& config, int chain) {
    Engine e;
    e.priors = &priors;
    e.config = &config;
    e.augmented = augmented;
    e.studies = template_states;

    const double tau2_init =
        priors.tau2_shape > 1.0 ? priors.tau2_scale / (priors.tau2_shape - 1.0) : 1.0;
    const double sigma2_init = priors.sigma2_shape > 1.0
                                   ? priors.sigma2_scale / (priors.sigma2_shape - 1.0)
                                   : 1.0;
    e.d = 0.0;
    e.m = 0.0;
    e.tau2 = tau2_init;
    e.sigma2 = sigma2_init;

    // Chains beyond the first start from points offset in steps of half a
    // prior SD, alternating direction.
    if (chain > 0) {
        const double dir = (chain % 2 == 1) ? 1.0 : -1.0;
        const double mag = 0.5 * double((chain + 1) / 2);
        e.d += dir * mag * priors.d_sd;
        e.m += dir * mag * priors.m_sd;
        e.tau2 *= std::exp(dir * mag);
        e.sigma2 *= std::exp(dir * mag);
        for (auto& st : e.studies) {
            st.delta += dir * mag * std::sqrt(tau2_init);
            st.u += dir * mag * std::sqrt(sigma2_init);
        }
    }

    const std::size_t k = e.studies.size();
    e.delta_blocks.assign(k, Block{config.initial_step});
    e.u_blocks.assign(k, Block{config.initial_step});
    e.s_blocks.assign(k, {Block{1.0}, Block{1.0}});
    e.splus_blocks.assign(k, {Block{1.0}, Block{1.0}});
    for (std::size_t i = 0; i < k; ++i) {
        for (int j = 0; j < 2; ++j) {
            const ArmState& a = e.studies[i].arm[j];
            if (!a.augmented) continue;
            const EeDensity ee = ee_recenter(a.model->ee, a.s_plus);
            const double s_width = ee.ub_sym - ee.lb_sym;
            e.s_blocks[i][j].step =
                std::max(1e-3, std::min(0.5 * std::sqrt(ee.variance), 0.25 * s_width));
            const double sp_width = a.splus_hi - a.splus_lo;
            e.splus_blocks[i][j].step = std::max(1e-4, 0.25 * sp_width);
        }
    }
    return e;
}

std::vector<std::string> column_names(const std::vector<StudyState>& studies,
                                      bool augmented) {
    std::vector<std::string> cols = {"d", "tau2", "m", "sigma2"};
    for (const auto& st : studies) cols.push_back("delta_" + st.id);
    for (const auto& st : studies) cols.push_back("u_" + st.id);
    if (augmented) {
        for (const auto& st : studies) {
            cols.push_back("s_" + st.id + "_treatment");
            cols.push_back("s_" + st.id + "_control");
        }
        for (const auto& st : studies) {
            cols.push_back("s_plus_" + st.id + "_treatment");
            cols.push_back("s_plus_" + st.id + "_control");
        }
    }
    return cols;
}

void record(const Engine& e, std::vector<double>& out) {
    out.push_back(e.d);
    out.push_back(e.tau2);
    out.push_back(e.m);
    out.push_back(e.sigma2);
    for (const auto& st : e.studies) out.push_back(st.delta);
    for (const auto& st : e.studies) out.push_back(st.u);
    if (e.augmented) {
        for (const auto& st : e.studies) {
            out.push_back(st.arm[0].s);
            out.push_back(st.arm[1].s);
        }
        for (const auto& st : e.studies) {
            out.push_back(st.arm[0].s_plus);
            out.push_back(st.arm[1].s_plus);
        }
    }
}

PosteriorDraws run_chains(const std::vector<StudyState>& template_states,
                          bool augmented, const Priors& priors,
                          const ChainConfig& config) {
    if (template_states.empty())
        throw Error(ErrorKind::BadInput, "sampler: dataset has no studies");
    if (config.chains < 1 || config.thin < 1)
        throw Error(ErrorKind::BadInput, "sampler: chains and thin must be >= 1");

    PosteriorDraws draws;
    draws.columns = column_names(template_states, augmented);
    draws.retained_per_chain = config.iterations / config.thin;
    draws.chains.resize(config.chains);

    std::vector<Engine> engines;
    engines.reserve(config.chains);
    for (int c = 0; c < config.chains; ++c)
        engines.push_back(make_engine(template_states, augmented, priors, config, c));

    const auto run_one = [&](int c) {
        Engine& e = engines[c];
        Rng rng(chain_seed(config.seed, c));
        auto& store = draws.chains[c];
        store.reserve(std::size_t(draws.retained_per_chain) * draws.ncol());
        for (int t = 0; t < config.burn_in; ++t)
            e.iterate(rng, (t + 1) % config.tune_interval == 0);
        // Reset counters so reported acceptance is post-burn-in.
        const auto reset = [](Block& b) { b.accepts = b.proposals = 0; };
        for (auto& b : e.delta_blocks) reset(b);
        for (auto& b : e.u_blocks) reset(b);
        for (auto& pair : e.s_blocks)
            for (auto& b : pair) reset(b);
        for (auto& pair : e.splus_blocks)
            for (auto& b : pair) reset(b);
        for (int t = 1; t <= config.iterations; ++t) {
            e.iterate(rng, false);
            if (t % config.thin == 0) record(e, store);
        }
    };

    const int threads = std::max(1, std::min(config.threads, config.chains));
    if (threads == 1) {
        for (int c = 0; c < config.chains; ++c) run_one(c);
    } else {
        std::vector<std::thread> pool;
        for (int c = 0; c < config.chains; ++c) pool.emplace_back(run_one, c);
        for (auto& th : pool) th.join();
    }

    // Pooled acceptance rates per block family.
    const auto pool_rate = [&](const char* name, auto getter) {
        long acc = 0, prop = 0;
        for (const auto& e : engines) {
            for (const auto& b : getter(e)) {
                acc += b.accepts;
                prop += b.proposals;
            }
        }
        if (prop > 0) draws.acceptance[name] = double(acc) / double(prop);
    };
    pool_rate("delta", [](const Engine& e) { return e.delta_blocks; });
    pool_rate("u", [](const Engine& e) { return e.u_blocks; });
    if (augmented) {
        const auto flatten = [](const std::vector<std::array<Block, 2>>& v) {
            std::vector<Block> out;
            for (const auto& pair : v) {
                out.push_back(pair[0]);
                out.push_back(pair[1]);
            }
            return out;
        };
        pool_rate("s", [&](const Engine& e) { return flatten(e.s_blocks); });
        pool_rate("s_plus", [&](const Engine& e) { return flatten(e.splus_blocks); });
    }
    return draws;
}

StudyState init_study(const std::string& id, double n1, double s1, double n0,
                      double s0) {
    StudyState st;
    st.id = id;
    const double l1 = logit((s1 + 0.5) / (n1 + 1.0));
    const double l0 = logit((s0 + 0.5) / (n0 + 1.0));
    st.delta = l1 - l0;
    st.u = 0.5 * (l1 + l0);
    st.arm[0].n = n1;
    st.arm[0].s = s1;
    st.arm[0].s_plus = s1;
    st.arm[1].n = n0;
    st.arm[1].s = s0;
    st.arm[1].s_plus = s0;
    return st;
}

void check_finite_start(const std::vector<StudyState>& studies) {
    for (const auto& st : studies) {
        for (int j = 0; j < 2; ++j) {
            const ArmState& a = st.arm[j];
            if (!(a.s >= 0.0 && a.s <= a.n) || !std::isfinite(a.s))
                throw Error(ErrorKind::NonFiniteLikelihood,
                            "study " + st.id + ": initial event count " +
                                std::to_string(a.s) + " outside [0, n]");
        }
    }
}

} // namespace

int PosteriorDraws::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return int(i);
    throw Error(ErrorKind::BadInput, "no column named " + name);
}

std::vector<double> PosteriorDraws::chain_column(std::size_t chain, int col) const {
    std::vector<double> out;
    out.reserve(retained_per_chain);
    const auto& data = chains.at(chain);
    for (int r = 0; r < retained_per_chain; ++r)
        out.push_back(data[std::size_t(r) * ncol() + std::size_t(col)]);
    return out;
}

std::vector<double> PosteriorDraws::pooled_column(const std::string& name) const {
    const int col = column_index(name);
    std::vector<double> out;
    out.reserve(chains.size() * std::size_t(retained_per_chain));
    for (std::size_t c = 0; c < chains.size(); ++c) {
        auto part = chain_column(c, col);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

PosteriorDraws run_naive(const MetaDataset& dataset,
                         const std::vector<std::pair<double, double>>& s_star,
                         const Priors& priors, const ChainConfig& config) {
    if (s_star.size() != dataset.k())
        throw Error(ErrorKind::BadInput, "run_naive: s_star size mismatch");
    std::vector<StudyState> studies;
    for (std::size_t i = 0; i < dataset.k(); ++i) {
        const auto& s = dataset.studies[i];
        studies.push_back(init_study(s.id, s.treatment.n, s_star[i].first, s.control.n,
                                     s_star[i].second));
    }
    check_finite_start(studies);
    return run_chains(studies, false, priors, config);
}

PosteriorDraws run_uree(const ModelInputs& inputs, const Priors& priors,
                        const ChainConfig& config) {
    std::vector<StudyState> studies;
    for (const auto& si : inputs.studies) {
        StudyState st = init_study(si.id, si.treatment.n, si.treatment.s_star,
                                   si.control.n, si.control.s_star);
        const ArmModel* models[2] = {&si.treatment, &si.control};
        for (int j = 0; j < 2; ++j) {
            ArmState& a = st.arm[j];
            const ArmModel* am = models[j];
            a.model = am;
            a.augmented = !am->latent_fixed;
            // Feasible region for s_plus: reading support meeting the raw
            // event bounds.
            const auto [ur_lo, ur_hi] = am->ur.support();
            a.splus_lo = std::max(ur_lo, am->ee.lb_raw);
            a.splus_hi = std::min(ur_hi, am->ee.ub_raw);
            if (am->ur.degenerate()) {
                a.s_plus = am->ur.mean();
            } else {
                if (a.splus_hi < a.splus_lo)
                    throw Error(ErrorKind::EmptySupport,
                                "study " + si.id + "/" + am->arm_name +
                                    ": reading support and event bounds disjoint");
                a.s_plus = std::clamp(am->ur.mean(), a.splus_lo, a.splus_hi);
            }
            const EeDensity ee0 = ee_recenter(am->ee, a.s_plus);
            a.s = std::clamp(a.s, ee0.lb_sym, ee0.ub_sym);
        }
        studies.push_back(std::move(st));
    }
    check_finite_start(studies);
    return run_chains(studies, true, priors, config);
}

double gelman_rubin(const PosteriorDraws& draws, const std::string& parameter) {
    const std::size_t m_chains = draws.chains.size();
    if (m_chains < 2)
        throw Error(ErrorKind::InsufficientChains, "gelman_rubin needs >= 2 chains");
    const int col = draws.column_index(parameter);
    const double n = double(draws.retained_per_chain);

    std::vector<double> means, vars;
    for (std::size_t c = 0; c < m_chains; ++c) {
        const auto xs = draws.chain_column(c, col);
        means.push_back(mean_of(xs));
        const double sd = sd_of(xs);
        vars.push_back(sd * sd);
    }
    const double w = mean_of(vars);
    const double b_over_n = [&] {
        const double gm = mean_of(means);
        double s = 0.0;
        for (double mu : means) s += (mu - gm) * (mu - gm);
        return s / double(m_chains - 1);
    }();
    if (w <= 0.0)
        return b_over_n > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    const double var_plus = (n - 1.0) / n * w + b_over_n;
    return std::sqrt(var_plus / w);
}

MetaResult summarize(const PosteriorDraws& draws, Method method) {
    if (draws.chains.empty() || draws.retained_per_chain == 0)
        throw Error(ErrorKind::BadInput, "summarize: no draws");
    MetaResult r;
    r.method = method;

    const auto d = draws.pooled_column("d");
    r.d_mean = mean_of(d);
    r.d_sd = sd_of(d);
    r.d_lo = quantile_of(d, 0.025);
    r.d_hi = quantile_of(d, 0.975);
    std::vector<double> ors(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) ors[i] = std::exp(d[i]);
    r.or_mean = mean_of(ors);
    r.or_lo = quantile_of(ors, 0.025);
    r.or_hi = quantile_of(ors, 0.975);

    const auto summarize_param = [&](const char* name, double& mean, double& sd) {
        const auto xs = draws.pooled_column(name);
        mean = mean_of(xs);
        sd = sd_of(xs);
    };
    summarize_param("tau2", r.tau2_mean, r.tau2_sd);
    summarize_param("sigma2", r.sigma2_mean, r.sigma2_sd);
    summarize_param("m", r.m_mean, r.m_sd);

    for (const auto& colname : draws.columns) {
        if (colname.rfind("delta_", 0) != 0) continue;
        const auto xs = draws.pooled_column(colname);
        StudyOrEffect e;
        e.id = colname.substr(6);
        e.log_or = mean_of(xs);
        e.lo = quantile_of(xs, 0.025);
        e.hi = quantile_of(xs, 0.975);
        r.study_effects.push_back(std::move(e));
    }

    if (draws.chains.size() >= 2) {
        for (const char* p : {"d", "tau2", "m", "sigma2"})
            r.diagnostics[std::string("rhat_") + p] = gelman_rubin(draws, p);
    }
    for (const auto& [k, v] : draws.acceptance) r.diagnostics["accept_" + k] = v;
    return r;
}

PosteriorDraws read_draws_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open draws file: " + path);
    PosteriorDraws draws;
    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorKind::BadInput, "empty draws file: " + path);
    std::size_t pos = line.find(',');
    if (pos == std::string::npos || line.substr(0, pos) != "chain")
        throw Error(ErrorKind::BadInput, "draws file missing chain column");
    while (pos != std::string::npos) {
        const std::size_t next = line.find(',', pos + 1);
        draws.columns.push_back(line.substr(
            pos + 1, next == std::string::npos ? std::string::npos : next - pos - 1));
        pos = next;
    }
    std::vector<int> per_chain_rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const char* p = line.c_str();
        char* end = nullptr;
        const long chain = std::strtol(p, &end, 10);
        if (chain >= long(draws.chains.size())) {
            draws.chains.resize(chain + 1);
            per_chain_rows.resize(chain + 1, 0);
        }
        p = end;
        for (std::size_t j = 0; j < draws.ncol(); ++j) {
            ++p; // comma
            draws.chains[chain].push_back(std::strtod(p, &end));
            p = end;
        }
        ++per_chain_rows[chain];
    }
    if (per_chain_rows.empty())
        throw Error(ErrorKind::BadInput, "draws file has no rows: " + path);
    draws.retained_per_chain = per_chain_rows[0];
    for (int rows : per_chain_rows)
        if (rows != draws.retained_per_chain)
            throw Error(ErrorKind::BadInput, "unequal chain lengths in " + path);
    return draws;
}

void write_draws_csv(const PosteriorDraws& draws, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write draws file: " + path);
    out << "chain";
    for (const auto& c : draws.columns) out << "," << c;
    out << "\n";
    char buf[32];
    for (std::size_t c = 0; c < draws.chains.size(); ++c) {
        const auto& data = draws.chains[c];
        for (int r = 0; r < draws.retained_per_chain; ++r) {
            out << c;
            for (std::size_t j = 0; j < draws.ncol(); ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g",
                              data[std::size_t(r) * draws.ncol() + j]);
                out << "," << buf;
            }
            out << "\n";
        }
    }
}

} // namespace metaor
