#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "metaor/pipeline.hpp"
#include "metaor/sampler.hpp"
#include "metaor/stats.hpp"

using namespace metaor;

namespace {

const char* kDataDir = METAOR_DATA_DIR;

ChainConfig quick_config() {
    ChainConfig c;
    c.chains = 2;
    c.burn_in = 500;
    c.iterations = 20000;
    c.thin = 10;
    c.seed = 31;
    return c;
}

MetaDataset mirrored_dataset() {
    MetaDataset ds;
    StudyExtract a;
    a.id = "A";
    a.horizon = 12;
    a.treatment.n = 50;
    a.treatment.e = 10;
    a.control.n = 60;
    a.control.e = 20;
    StudyExtract b;
    b.id = "B";
    b.horizon = 12;
    b.treatment.n = 60;
    b.treatment.e = 20;
    b.control.n = 50;
    b.control.e = 10;
    ds.studies = {a, b};
    return ds;
}

double ks_distance(std::vector<double> draws,
                   const std::function<double(double)>& cdf) {
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const double f = cdf(draws[i]);
        const double lo = double(i) / double(draws.size());
        const double hi = double(i + 1) / double(draws.size());
        ks = std::max(ks, std::max(std::fabs(f - lo), std::fabs(f - hi)));
    }
    return ks;
}

// CDF of an inverse gamma with integer shape 3: P(X <= x) = Q(3, scale/x)
// with Q the regularized upper incomplete gamma, closed form for shape 3.
double invgamma3_cdf(double x, double scale) {
    if (x <= 0.0) return 0.0;
    const double t = scale / x;
    return std::exp(-t) * (1.0 + t + 0.5 * t * t);
}

} // namespace

TEST_CASE("mirrored two-study dataset centers d at zero") {
    const MetaDataset ds = mirrored_dataset();
    auto cfg = quick_config();
    const auto draws = run_naive(ds, naive_event_inputs(ds), Priors{}, cfg);
    const auto d = draws.pooled_column("d");
    CHECK(std::fabs(mean_of(d)) < 0.03);
    const auto r = summarize(draws, Method::NaiveBayes);
    CHECK(r.or_lo < 1.0);
    CHECK(r.or_hi > 1.0);
}

TEST_CASE("empty dataset and bad config are rejected") {
    MetaDataset empty;
    CHECK_THROWS_AS((void)run_naive(empty, {}, Priors{}, quick_config()), Error);
    auto cfg = quick_config();
    cfg.chains = 0;
    CHECK_THROWS_AS(
        (void)run_naive(mirrored_dataset(),
                        naive_event_inputs(mirrored_dataset()), Priors{}, cfg),
        Error);
}

TEST_CASE("non-finite start is reported with the offending study") {
    const MetaDataset ds = mirrored_dataset();
    std::vector<std::pair<double, double>> bad = {{10, 20}, {200, 10}};
    try {
        (void)run_naive(ds, bad, Priors{}, quick_config());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFiniteLikelihood);
        CHECK(std::string(e.what()).find("B") != std::string::npos);
    }
}

TEST_CASE("prior-only run recovers the priors (smoke test of every block)") {
    MetaDataset ds = mirrored_dataset();
    ChainConfig cfg;
    cfg.chains = 1;
    cfg.burn_in = 1000;
    cfg.iterations = 500000;
    cfg.thin = 50; // near-iid draws so the iid KS threshold applies
    cfg.seed = 77;
    cfg.prior_only = true;
    const Priors priors;
    const auto draws = run_naive(ds, naive_event_inputs(ds), priors, cfg);
    REQUIRE(draws.retained_per_chain == 10000);

    const auto d = draws.pooled_column("d");
    CHECK(ks_distance(d, [&](double x) {
              return norm_cdf((x - priors.d_mean) / priors.d_sd);
          }) < 0.02);
    const auto m = draws.pooled_column("m");
    CHECK(ks_distance(m, [&](double x) {
              return norm_cdf((x - priors.m_mean) / priors.m_sd);
          }) < 0.02);
    const auto tau2 = draws.pooled_column("tau2");
    CHECK(ks_distance(tau2, [&](double x) {
              return invgamma3_cdf(x, priors.tau2_scale);
          }) < 0.02);
    const auto sigma2 = draws.pooled_column("sigma2");
    CHECK(ks_distance(sigma2, [&](double x) {
              return invgamma3_cdf(x, priors.sigma2_scale);
          }) < 0.02);
    // delta | d, tau2 marginalizes to a scale mixture; check its symmetry.
    const auto delta = draws.pooled_column("delta_A");
    CHECK(std::fabs(mean_of(delta)) < 0.1);
}

TEST_CASE("fixed seed reproduces the draw stream bit for bit") {
    const MetaDataset ds = mirrored_dataset();
    const auto cfg = quick_config();
    const auto a = run_naive(ds, naive_event_inputs(ds), Priors{}, cfg);
    const auto b = run_naive(ds, naive_event_inputs(ds), Priors{}, cfg);
    REQUIRE(a.chains.size() == b.chains.size());
    for (std::size_t c = 0; c < a.chains.size(); ++c) CHECK(a.chains[c] == b.chains[c]);

    auto cfg2 = cfg;
    cfg2.seed += 1;
    const auto c2 = run_naive(ds, naive_event_inputs(ds), Priors{}, cfg2);
    CHECK(a.chains[0] != c2.chains[0]);
}

TEST_CASE("threaded chains reproduce the sequential stream") {
    const MetaDataset ds = mirrored_dataset();
    auto cfg = quick_config();
    cfg.iterations = 5000;
    const auto seq = run_naive(ds, naive_event_inputs(ds), Priors{}, cfg);
    cfg.threads = 2;
    const auto par = run_naive(ds, naive_event_inputs(ds), Priors{}, cfg);
    for (std::size_t c = 0; c < seq.chains.size(); ++c)
        CHECK(seq.chains[c] == par.chains[c]);
}

TEST_CASE("gelman-rubin diagnostics") {
    PosteriorDraws draws;
    draws.columns = {"d"};
    draws.retained_per_chain = 1000;
    std::vector<double> chain;
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) chain.push_back(rng.normal());
    draws.chains = {chain, chain, chain};
    CHECK(gelman_rubin(draws, "d") == doctest::Approx(1.0).epsilon(1e-3));

    // Disjoint constant chains: between-chain variance dominates.
    draws.chains = {std::vector<double>(1000, 0.0), std::vector<double>(1000, 5.0)};
    CHECK(gelman_rubin(draws, "d") > 100.0);

    draws.chains = {chain};
    CHECK_THROWS_AS((void)gelman_rubin(draws, "d"), Error);
}

TEST_CASE("summarize of constant draws") {
    PosteriorDraws draws;
    draws.columns = {"d", "tau2", "m", "sigma2"};
    draws.retained_per_chain = 50;
    std::vector<double> chain;
    for (int i = 0; i < 50; ++i) {
        chain.push_back(0.7); // d
        chain.push_back(0.1);
        chain.push_back(-1.0);
        chain.push_back(0.2);
    }
    draws.chains = {chain};
    const auto r = summarize(draws, Method::NaiveBayes);
    CHECK(r.d_mean == doctest::Approx(0.7));
    CHECK(r.d_sd == doctest::Approx(0.0));
    CHECK(r.d_lo == doctest::Approx(0.7));
    CHECK(r.d_hi == doctest::Approx(0.7));
    CHECK(r.or_mean == doctest::Approx(std::exp(0.7)));
}

TEST_CASE("degenerate reading and events collapse the augmented run to naive") {
    // Observed-deaths-only arms with no follow-up information pin s = e, so
    // the augmented sampler must walk the identical distribution.
    const MetaDataset ds = mirrored_dataset();
    const auto cfg = quick_config();
    const auto naive = run_naive(ds, naive_event_inputs(ds), Priors{}, cfg);
    const auto inputs = build_model_inputs(ds);
    for (const auto& si : inputs.studies) {
        CHECK(si.treatment.latent_fixed);
        CHECK(si.control.latent_fixed);
    }
    const auto uree = run_uree(inputs, Priors{}, cfg);
    const auto d_naive = naive.pooled_column("d");
    const auto d_uree = uree.pooled_column("d");
    CHECK(d_naive == d_uree);
    // Latent columns exist and sit exactly at the observed counts.
    const auto s_a = uree.pooled_column("s_A_treatment");
    for (double s : s_a) CHECK(s == 10.0);
}

TEST_CASE("nearly degenerate reading and events reproduce the naive posterior") {
    // Tight rounding windows and almost-zero censoring leave the latent
    // blocks active but squeeze both densities to slivers; the augmented
    // posterior must match the naive one within Monte Carlo error.
    MetaDataset ds;
    for (int i = 0; i < 2; ++i) {
        StudyExtract s;
        s.id = "N" + std::to_string(i);
        s.horizon = 12;
        for (ArmExtract* arm : {&s.treatment, &s.control}) {
            arm->n = 200;
            arm->kappa_star = i == 0 ? 0.9 : 0.85;
            arm->round_digits = 6;
            arm->e = 200.0 * (1.0 - *arm->kappa_star) - 1.0;
            arm->r = 200.0 - 200.0 * (1.0 - *arm->kappa_star) - 2.0;
            arm->followup.kind = FollowUpSummary::Kind::MeanVar;
            arm->followup.mean = 40.0;
            arm->followup.variance = 9.0;
        }
        s.control.kappa_star = i == 0 ? 0.88 : 0.86;
        s.control.e = 200.0 * (1.0 - *s.control.kappa_star) - 1.0;
        s.control.r = 200.0 - 200.0 * (1.0 - *s.control.kappa_star) - 2.0;
        ds.studies.push_back(s);
    }
    REQUIRE(validate(ds).empty());

    auto cfg = quick_config();
    cfg.iterations = 40000;
    const auto naive = summarize(
        run_naive(ds, naive_event_inputs(ds), Priors{}, cfg), Method::NaiveBayes);
    const auto inputs = build_model_inputs(ds);
    for (const auto& si : inputs.studies) {
        CHECK_FALSE(si.treatment.latent_fixed); // blocks genuinely run
        CHECK(si.treatment.ee.ub_sym - si.treatment.ee.lb_sym < 3.0);
    }
    const auto uree = summarize(run_uree(inputs, Priors{}, cfg), Method::UREE);
    CHECK(std::fabs(uree.d_mean - naive.d_mean) < 0.02);
    CHECK(std::fabs(uree.d_sd - naive.d_sd) < 0.02);
}

TEST_CASE("augmented fixture run: containment, variance direction, diagnostics") {
    const MetaDataset ds = load_dataset(std::string(kDataDir) + "/ulmca.json");
    auto cfg = quick_config();
    cfg.chains = 2;
    cfg.iterations = 30000;
    cfg.burn_in = 1000;

    const auto naive = run_naive(ds, naive_event_inputs(ds), Priors{}, cfg);
    const auto inputs = build_model_inputs(ds);
    const auto uree = run_uree(inputs, Priors{}, cfg);

    // Latent draws never leave their truncations.
    for (const auto& si : inputs.studies) {
        for (const ArmModel* am : {&si.treatment, &si.control}) {
            const auto s_col =
                uree.pooled_column("s_" + si.id + "_" + am->arm_name);
            const auto sp_col =
                uree.pooled_column("s_plus_" + si.id + "_" + am->arm_name);
            const auto [ur_lo, ur_hi] = am->ur.support();
            bool ok = true;
            for (std::size_t i = 0; i < s_col.size(); ++i) {
                if (!am->ur.degenerate())
                    ok = ok && sp_col[i] >= ur_lo - 1e-9 && sp_col[i] <= ur_hi + 1e-9;
                const auto ee = ee_recenter(am->ee, sp_col[i]);
                ok = ok && s_col[i] >= ee.lb_sym - 1e-9 && s_col[i] <= ee.ub_sym + 1e-9;
            }
            CHECK(ok);
        }
    }

    // Extraction uncertainty inflates the posterior spread of d
    // (one-sided bootstrap on the variance ratio).
    const auto d_naive = naive.pooled_column("d");
    const auto d_uree = uree.pooled_column("d");
    const double sd_n = sd_of(d_naive);
    const double sd_u = sd_of(d_uree);
    CHECK(sd_u > sd_n);
    Rng rng(123);
    int support = 0;
    const int boots = 400;
    for (int bi = 0; bi < boots; ++bi) {
        double vn = 0.0, vu = 0.0, mn = 0.0, mu = 0.0;
        std::vector<double> rn(d_naive.size()), ru(d_uree.size());
        for (std::size_t i = 0; i < d_naive.size(); ++i)
            rn[i] = d_naive[std::size_t(rng.uniform() * d_naive.size())];
        for (std::size_t i = 0; i < d_uree.size(); ++i)
            ru[i] = d_uree[std::size_t(rng.uniform() * d_uree.size())];
        mn = mean_of(rn);
        mu = mean_of(ru);
        for (double x : rn) vn += (x - mn) * (x - mn);
        for (double x : ru) vu += (x - mu) * (x - mu);
        if (vu > vn) ++support;
    }
    CHECK(support > int(0.95 * boots));

    // Acceptance rates for every tuned block family sit in a sane band.
    for (const auto& [name, rate] : uree.acceptance) {
        INFO(name);
        CHECK(rate > 0.10);
        CHECK(rate < 0.75);
    }
    CHECK(gelman_rubin(uree, "d") < 1.1);
}

TEST_CASE("single flat study is prior-dominated") {
    MetaDataset ds;
    StudyExtract s;
    s.id = "solo";
    s.horizon = 12;
    s.treatment.n = 10;
    s.treatment.e = 5;
    s.control.n = 10;
    s.control.e = 5;
    ds.studies.push_back(s);
    auto cfg = quick_config();
    const auto solo = summarize(
        run_naive(ds, naive_event_inputs(ds), Priors{}, cfg), Method::NaiveBayes);
    const auto multi = summarize(
        run_naive(mirrored_dataset(), naive_event_inputs(mirrored_dataset()),
                  Priors{}, cfg),
        Method::NaiveBayes);
    // One weak study leaves d far closer to its prior scale than two
    // informative ones do.
    CHECK(solo.d_sd > 0.5);
    CHECK(solo.d_sd > 1.5 * multi.d_sd);
    CHECK(std::fabs(solo.d_mean) < 0.5);
}

TEST_CASE("variance inflation holds on the simulated fixture too") {
    const MetaDataset sim = apply_reading_mode(
        load_dataset(std::string(kDataDir) + "/simulated.json"),
        ReadingMode::EventsOnly);
    auto cfg = quick_config();
    cfg.iterations = 30000;
    const auto naive = run_naive(sim, naive_event_inputs(sim), Priors{}, cfg);
    const auto uree = run_uree(build_model_inputs(sim), Priors{}, cfg);
    const auto dn = naive.pooled_column("d");
    const auto du = uree.pooled_column("d");
    CHECK(sd_of(du) > sd_of(dn));
    Rng rng(55);
    int support = 0;
    const int boots = 400;
    for (int bi = 0; bi < boots; ++bi) {
        std::vector<double> rn(dn.size()), ru(du.size());
        for (std::size_t i = 0; i < dn.size(); ++i)
            rn[i] = dn[std::size_t(rng.uniform() * dn.size())];
        for (std::size_t i = 0; i < du.size(); ++i)
            ru[i] = du[std::size_t(rng.uniform() * du.size())];
        if (sd_of(ru) > sd_of(rn)) ++support;
    }
    CHECK(support > int(0.95 * boots));
}

TEST_CASE("prior sensitivity: vague variance priors keep the conclusion") {
    const MetaDataset ds = load_dataset(std::string(kDataDir) + "/ulmca.json");
    auto cfg = quick_config();
    cfg.iterations = 30000;
    const auto base = summarize(
        run_naive(ds, naive_event_inputs(ds), Priors{}, cfg), Method::NaiveBayes);

    const auto with_eps = [&](double eps) {
        Priors p;
        p.tau2_shape = p.sigma2_shape = eps;
        p.tau2_scale = p.sigma2_scale = eps;
        return summarize(run_naive(ds, naive_event_inputs(ds), p, cfg),
                         Method::NaiveBayes);
    };
    const auto r01 = with_eps(0.1);
    const auto r1 = with_eps(1.0);

    // eps = 0.1 stays within a quarter of the default posterior; eps = 1
    // pulls the heterogeneity prior up and lands near +38% on the spread
    // (the quarter bound for it is tracked as an expected failure in the
    // acceptance suite). The qualitative conclusion never moves.
    CHECK(std::fabs(r01.d_sd - base.d_sd) / base.d_sd < 0.25);
    CHECK(std::fabs(r01.d_mean - base.d_mean) / std::fabs(base.d_mean) < 0.25);
    CHECK(std::fabs(r1.d_sd - base.d_sd) / base.d_sd < 0.50);
    for (const auto& r : {base, r01, r1}) {
        CHECK(r.or_lo < 1.0);
        CHECK(r.or_hi > 1.0);
    }
}

TEST_CASE("draws csv round trip") {
    const MetaDataset ds = mirrored_dataset();
    auto cfg = quick_config();
    cfg.iterations = 2000;
    const auto draws = run_naive(ds, naive_event_inputs(ds), Priors{}, cfg);
    const std::string path = "/tmp/metaor_test_draws.csv";
    write_draws_csv(draws, path);
    const auto loaded = read_draws_csv(path);
    CHECK(loaded.columns == draws.columns);
    REQUIRE(loaded.chains.size() == draws.chains.size());
    CHECK(loaded.retained_per_chain == draws.retained_per_chain);
    for (std::size_t c = 0; c < draws.chains.size(); ++c)
        CHECK(loaded.chains[c] == draws.chains[c]);
}
