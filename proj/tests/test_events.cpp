#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "metaor/events.hpp"
#include "metaor/pipeline.hpp"
#include "metaor/simulate.hpp"
#include "metaor/stats.hpp"
#include "metaor/study.hpp"

using namespace metaor;

namespace {
const char* kDataDir = METAOR_DATA_DIR;
}

TEST_CASE("mean/variance moment matching round-trips through the lognormal") {
    // Degenerate case.
    const auto fm0 = followup_from_mean_var(1.0, 0.0);
    CHECK(fm0.psi == doctest::Approx(0.0));
    CHECK(fm0.phi_sd == doctest::Approx(0.0));

    // Closed-form lognormal moments as the oracle.
    for (const auto& [m, v] : {std::pair{361.41, 90000.0}, {15.0, 36.0},
                               {26.0, 81.0}, {2.5, 10.0}}) {
        const auto fm = followup_from_mean_var(m, v);
        CHECK(lognorm_mean(fm.psi, fm.phi_sd) ==
              doctest::Approx(m).epsilon(1e-12));
        CHECK(lognorm_var(fm.psi, fm.phi_sd) == doctest::Approx(v).epsilon(1e-12));
    }

    // Mean/median ratio identity: mean = median * exp(phi^2 / 2).
    const auto fm = followup_from_mean_var(20.0, 50.0);
    CHECK(lognorm_mean(fm.psi, fm.phi_sd) / std::exp(fm.psi) ==
          doctest::Approx(std::exp(0.5 * fm.phi_sd * fm.phi_sd)).epsilon(1e-12));

    CHECK_THROWS_AS((void)followup_from_mean_var(0.0, 1.0), Error);
    CHECK_THROWS_AS((void)followup_from_mean_var(1.0, -1.0), Error);
}

TEST_CASE("quartile matching round-trips through lognormal quantiles") {
    const auto fm0 = followup_from_quartiles(7.0, 7.0, 7.0);
    CHECK(fm0.psi == doctest::Approx(std::log(7.0)));
    CHECK(fm0.phi_sd == doctest::Approx(0.0));

    // Feeding the quartiles of a lognormal(0, 1) back recovers (0, 1).
    const double q1 = std::exp(norm_quantile(0.25));
    const double q3 = std::exp(norm_quantile(0.75));
    const auto fm = followup_from_quartiles(q1, 1.0, q3);
    CHECK(fm.psi == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fm.phi_sd == doctest::Approx(1.0).epsilon(1e-12));

    // General quantile round trip at 1e-12 relative.
    const double psi_true = 2.7, phi_true = 0.62;
    const auto fm2 = followup_from_quartiles(
        lognorm_quantile(0.25, psi_true, phi_true),
        lognorm_quantile(0.5, psi_true, phi_true),
        lognorm_quantile(0.75, psi_true, phi_true));
    CHECK(fm2.psi == doctest::Approx(psi_true).epsilon(1e-12));
    CHECK(fm2.phi_sd == doctest::Approx(phi_true).epsilon(1e-12));

    const auto fm3 = followup_from_quartiles(1.0, 2.0, 8.0);
    CHECK(fm3.phi_sd ==
          doctest::Approx(std::log(8.0) / (2.0 * norm_quantile(0.75))));

    CHECK_THROWS_AS((void)followup_from_quartiles(3.0, 2.0, 4.0), Error);
}

TEST_CASE("donor variance borrowing for mean-only summaries") {
    const MetaDataset ds = load_dataset(std::string(kDataDir) + "/ulmca.json");
    std::size_t wu = 0;
    for (std::size_t i = 0; i < ds.k(); ++i)
        if (ds.studies[i].id == "Wu") wu = i;
    const double mean_sd = donor_sd_mean(ds, wu);
    // Arithmetic oracle over the fixture: per-arm SDs 6,6 (Brener), 7,7
    // (Sanmartin), 4,4 (Serryus); pooled SDs 9 (Buszman), 10 (Makikallio).
    CHECK(mean_sd == doctest::Approx((6 + 6 + 7 + 7 + 4 + 4 + 9 + 10) / 8.0));

    // Donors all sharing one SD yield that SD.
    MetaDataset uniform;
    for (int i = 0; i < 3; ++i) {
        StudyExtract s;
        s.id = "U" + std::to_string(i);
        s.horizon = 12;
        s.treatment.n = s.control.n = 10;
        s.treatment.e = s.control.e = 1;
        if (i > 0) {
            for (ArmExtract* a : {&s.treatment, &s.control}) {
                a->followup.kind = FollowUpSummary::Kind::MeanVar;
                a->followup.mean = 20.0;
                a->followup.variance = 25.0;
            }
        }
        uniform.studies.push_back(s);
    }
    CHECK(donor_sd_mean(uniform, 0) == doctest::Approx(5.0));
    MetaDataset lonely;
    lonely.studies.push_back(uniform.studies[0]);
    CHECK_THROWS_AS((void)donor_sd_mean(lonely, 0), Error);
}

TEST_CASE("censoring summary: median at horizon gives lambda one half") {
    FollowUpModel fm;
    fm.psi = std::log(12.0);
    fm.phi_sd = 1e-9;
    const auto cs = censoring_summary(fm, 100.0, 12.0);
    CHECK(cs.lambda == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(cs.c == doctest::Approx(50.0).epsilon(1e-5));
}

TEST_CASE("censoring summary reproduces the simulated-data design rates") {
    // Treatment arm ~50% censored by one year, control ~3%.
    FollowUpModel t{5.89, 0.83, FollowUpCase::MeanVar};
    FollowUpModel c{7.05, 0.63, FollowUpCase::MeanVar};
    const double horizon = 365.25;
    const auto cs_t = censoring_summary(t, 100.0, horizon);
    const auto cs_c = censoring_summary(c, 100.0, horizon);
    // Normal CDF oracle evaluated directly.
    CHECK(cs_t.lambda ==
          doctest::Approx(norm_cdf((std::log(horizon) - 5.89) / 0.83)));
    CHECK(cs_t.lambda == doctest::Approx(0.50).epsilon(0.02));
    CHECK(cs_c.lambda == doctest::Approx(0.03).epsilon(0.35));
    CHECK(std::fabs(cs_c.lambda - 0.03) < 0.01);
}

TEST_CASE("auc fraction: quadrature matches the closed-form lognormal identity") {
    // Integration by parts:
    // int_0^h F(t) dt = h F(h) - exp(psi + phi^2/2) Phi((ln h - psi - phi^2)/phi).
    for (const auto& [psi, phi] : {std::pair{5.89, 0.83}, {7.05, 0.63},
                                   {2.6, 0.42}, {2.48, 0.51}}) {
        FollowUpModel fm{psi, phi, FollowUpCase::MeanVar};
        const double h = psi < 4 ? 12.0 : 365.25;
        const auto cs = censoring_summary(fm, 100.0, h);
        const double closed =
            (h * lognorm_cdf(h, psi, phi) -
             std::exp(psi + 0.5 * phi * phi) *
                 norm_cdf((std::log(h) - psi - phi * phi) / phi)) /
            h;
        CHECK(cs.auc_fraction == doctest::Approx(closed).epsilon(1e-7));
        CHECK(cs.auc_fraction <= cs.lambda);
    }
}

TEST_CASE("auc fraction vanishes when all mass is beyond the horizon") {
    FollowUpModel fm{15.0, 0.3, FollowUpCase::MeanVar};
    const auto cs = censoring_summary(fm, 50.0, 12.0);
    CHECK(cs.lambda < 1e-12);
    CHECK(cs.auc_fraction < 1e-12);
}

TEST_CASE("event bounds by case") {
    CHECK(event_bounds(BoundCase::Both, 100, 5.0, 80.0, 7.0) ==
          std::pair{5.0, 20.0});
    CHECK(event_bounds(BoundCase::DeathsOnly, 100, 10.0, {}, 0.0) ==
          std::pair{10.0, 10.0});
    CHECK(event_bounds(BoundCase::DeathsOnly, 100, 10.0, {}, 6.5) ==
          std::pair{10.0, 16.5});
    CHECK(event_bounds(BoundCase::AtRiskOnly, 100, {}, 80.0, 30.0) ==
          std::pair{0.0, 20.0});
    CHECK(event_bounds(BoundCase::AtRiskOnly, 100, {}, 80.0, 6.0) ==
          std::pair{14.0, 20.0});
    CHECK(event_bounds(BoundCase::Neither, 100, {}, {}, 3.0) ==
          std::pair{0.0, 100.0});
    // Crossed bounds signal incoherent extraction.
    CHECK_THROWS_AS((void)event_bounds(BoundCase::Both, 100, 25.0, 80.0, 3.0), Error);
}

TEST_CASE("km variance regimes") {
    // Greenwood simplified at low censoring.
    auto kv = km_variance(0.9, 100, 10.0, 10.0, 0.05);
    CHECK(kv.regime == KmVarianceRegime::Greenwood);
    CHECK(kv.b == doctest::Approx(0.81 * 10.0 / (100.0 * 90.0)));
    CHECK_FALSE(kv.e_substituted);

    // Missing observed deaths substitutes the reading-implied count.
    kv = km_variance(0.9, 100, {}, 10.0, 0.05);
    CHECK(kv.e_substituted);
    CHECK(kv.b == doctest::Approx(0.81 * 10.0 / (100.0 * 90.0)));

    // Averaged Greenwood / censoring-proportional band.
    kv = km_variance(0.8, 100, 12.0, 30.0, 0.1);
    CHECK(kv.regime == KmVarianceRegime::GreenwoodCensoringAvg);
    const double greenwood = 0.64 * 12.0 / (100.0 * 88.0);
    CHECK(kv.b == doctest::Approx(0.5 * (greenwood + 0.3 * 0.8 * 0.2)));

    // Censoring proportional band.
    kv = km_variance(0.5, 100, {}, 40.0, 0.2);
    CHECK(kv.regime == KmVarianceRegime::CensoringProportional);
    CHECK(kv.b == doctest::Approx(0.4 * 0.25));
    CHECK_FALSE(kv.e_substituted);

    // Censoring / AUC average band.
    kv = km_variance(0.6, 100, {}, 60.0, 0.25);
    CHECK(kv.regime == KmVarianceRegime::CensoringAucAvg);
    CHECK(kv.b ==
          doctest::Approx(0.5 * (0.6 * 0.24 + 0.25 * 0.24)));

    // AUC proportional band.
    kv = km_variance(0.6, 100, {}, 75.0, 0.5);
    CHECK(kv.regime == KmVarianceRegime::AucProportional);
    CHECK(kv.b == doctest::Approx(0.5 * 0.24));

    // Left-closed boundaries.
    CHECK(km_variance(0.5, 100, 5.0, 25.0, 0.1).regime ==
          KmVarianceRegime::GreenwoodCensoringAvg);
    CHECK(km_variance(0.5, 100, 5.0, 35.0, 0.1).regime ==
          KmVarianceRegime::CensoringProportional);
    CHECK(km_variance(0.5, 100, 5.0, 50.0, 0.2).regime ==
          KmVarianceRegime::CensoringAucAvg);
    CHECK(km_variance(0.5, 100, 5.0, 70.0, 0.3).regime ==
          KmVarianceRegime::AucProportional);
}

TEST_CASE("km variance is continuous in kappa and e within a branch") {
    const double b1 = km_variance(0.70, 100, 10.0, 5.0, 0.02).b;
    const double b2 = km_variance(0.70 + 1e-9, 100, 10.0, 5.0, 0.02).b;
    CHECK(std::fabs(b1 - b2) < 1e-10);
    const double b3 = km_variance(0.70, 100, 10.0 + 1e-9, 5.0, 0.02).b;
    CHECK(std::fabs(b1 - b3) < 1e-10);
}

TEST_CASE("confidence-interval override") {
    CHECK(km_variance_from_ci(0.937, 0.979) ==
          doctest::Approx(std::pow(0.021 / 1.96, 2)));
    CHECK_THROWS_AS((void)km_variance_from_ci(0.6, 0.5), Error);
}

TEST_CASE("events density: symmetric truncation construction") {
    // Midpoint center keeps the raw bounds.
    auto d = ee_density(14.0, 0.001, 100.0, 8.0, 20.0);
    CHECK(d.lb_sym == doctest::Approx(8.0));
    CHECK(d.ub_sym == doctest::Approx(20.0));
    CHECK(d.variance == doctest::Approx(10.0));
    CHECK_FALSE(d.clamped);

    // Asymmetric bounds shrink to the nearer side.
    d = ee_density(10.0, 0.001, 100.0, 8.0, 20.0);
    CHECK(d.lb_sym == doctest::Approx(8.0));
    CHECK(d.ub_sym == doctest::Approx(12.0));

    // Point mass when the bounds coincide.
    d = ee_density(10.0, 0.001, 100.0, 10.0, 10.0);
    CHECK(d.point_mass());

    // Clamping when the center escapes the bounds.
    d = ee_density(25.0, 0.001, 100.0, 8.0, 20.0);
    CHECK(d.clamped);
    CHECK(d.center == doctest::Approx(20.0));
    CHECK(d.point_mass());

    // Zero variance collapses to the center, wherever the bounds sit.
    d = ee_density(14.0, 0.0, 100.0, 8.0, 20.0);
    CHECK(d.point_mass());
    CHECK(d.sample(0.3) == 14.0);
    CHECK(d.logpdf(14.0) == 0.0);
    CHECK(std::isinf(d.logpdf(14.5)));
}

TEST_CASE("events density sampling: containment and mean at the center") {
    const auto d = ee_density(10.0, 0.004, 100.0, 8.0, 20.0);
    Rng rng(17);
    double sum = 0.0;
    bool inside = true;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double s = d.sample(rng.uniform());
        inside = inside && s >= d.lb_sym && s <= d.ub_sym;
        sum += s;
    }
    CHECK(inside);
    // Symmetric truncation: mean equals the center within 3 standard errors.
    const double se = std::sqrt(d.variance) / std::sqrt(double(n));
    CHECK(std::fabs(sum / n - 10.0) < 3.0 * se);
}

TEST_CASE("recentring keeps raw bounds and rebuilds the truncation") {
    const auto base = ee_density(10.0, 0.004, 100.0, 8.0, 20.0);
    const auto moved = ee_recenter(base, 18.0);
    CHECK(moved.lb_raw == 8.0);
    CHECK(moved.ub_raw == 20.0);
    CHECK(moved.lb_sym == doctest::Approx(16.0));
    CHECK(moved.ub_sym == doctest::Approx(20.0));
    const auto clamped = ee_recenter(base, 30.0);
    CHECK(clamped.clamped);
    CHECK(clamped.center == 20.0);
}

TEST_CASE("observed-deaths inflation estimate") {
    // Raw fraction in the zero-censoring limit.
    auto est = no_km_death_estimate(10.0, 100.0, 1e-9);
    CHECK(est.k_star == doctest::Approx(0.1).epsilon(1e-6));

    est = no_km_death_estimate(20.0, 100.0, 0.2);
    CHECK(est.domain_ok);
    CHECK(est.k_star == doctest::Approx(0.25));
    CHECK(est.s_plus == doctest::Approx(25.0));

    // Domain violations fall back to the raw fraction, flagged.
    est = no_km_death_estimate(60.0, 100.0, 0.2);
    CHECK_FALSE(est.domain_ok);
    CHECK(est.k_star == doctest::Approx(0.6));
    est = no_km_death_estimate(20.0, 100.0, 0.6);
    CHECK_FALSE(est.domain_ok);
}

TEST_CASE("inflation estimate beats the raw fraction in MSE (smoke grid)") {
    Rng rng(99);
    for (const double p : {0.1, 0.3}) {
        for (const double auc : {0.1, 0.4}) {
            const auto mse = mc_mse_death_probability(p, auc, 100, 4000, rng);
            CHECK(mse.mse_inflated < mse.mse_raw);
        }
    }
}

TEST_CASE("arm assembly across the fixture availability patterns") {
    const MetaDataset ds = load_dataset(std::string(kDataDir) + "/ulmca.json");
    const ModelInputs inputs = build_model_inputs(ds);
    REQUIRE(inputs.studies.size() == 10);
    CHECK(inputs.total_enrollment == doctest::Approx(3773.0));

    const auto find = [&](const char* id) -> const StudyInputs& {
        for (const auto& s : inputs.studies)
            if (s.id == id) return s;
        REQUIRE(false);
        return inputs.studies.front();
    };

    // Reported confidence interval overrides the regime variance.
    const auto& serryus = find("Serryus");
    CHECK(serryus.treatment.ci_override);
    CHECK(serryus.treatment.b ==
          doctest::Approx(std::pow((0.979 - 0.937) / (2 * 1.96), 2)));
    CHECK_FALSE(serryus.treatment.latent_fixed); // bounds (0, n) leave play

    // Observed-deaths-only with no follow-up: everything pinned at e.
    const auto& chieffo = find("Chieffo");
    CHECK(chieffo.treatment.latent_fixed);
    CHECK(chieffo.treatment.s_star == 3.0);
    CHECK(chieffo.treatment.ur.degenerate());
    CHECK(chieffo.treatment.ee.point_mass());
    CHECK(chieffo.treatment.censoring.lambda == 0.0);

    // Mean-only follow-up borrows the donor variance.
    const auto& wu = find("Wu");
    REQUIRE(wu.treatment.followup.has_value());
    const double donor_sd = (6 + 6 + 7 + 7 + 4 + 4 + 9 + 10) / 8.0;
    const auto expected = followup_from_mean_var(22.0, donor_sd * donor_sd);
    CHECK(wu.treatment.followup->psi == doctest::Approx(expected.psi));
    CHECK(wu.treatment.followup->phi_sd == doctest::Approx(expected.phi_sd));
    CHECK(wu.treatment.followup->source_case == FollowUpCase::MeanOnly);

    // Pooled summaries land in both arms identically.
    const auto& buszman = find("Buszman");
    REQUIRE(buszman.treatment.followup.has_value());
    CHECK(buszman.treatment.followup->source_case == FollowUpCase::Pooled);
    CHECK(buszman.treatment.followup->psi ==
          doctest::Approx(buszman.control.followup->psi));

    // Naive inputs reproduce the published extraction values.
    const auto s_star = naive_event_inputs(ds);
    CHECK(s_star[0].first == doctest::Approx(6.52).epsilon(1e-12));
    CHECK(s_star[0].second == doctest::Approx(11.08).epsilon(1e-12));
    CHECK(s_star[9].first == 3.0);
    const auto via_models = naive_event_inputs(inputs);
    for (std::size_t i = 0; i < s_star.size(); ++i) {
        CHECK(s_star[i].first == doctest::Approx(via_models[i].first));
        CHECK(s_star[i].second == doctest::Approx(via_models[i].second));
    }
}

TEST_CASE("reading-mode restrictions") {
    const MetaDataset sim =
        load_dataset(std::string(kDataDir) + "/simulated.json");
    const MetaDataset events = apply_reading_mode(sim, ReadingMode::EventsOnly);
    for (const auto& s : events.studies) {
        CHECK_FALSE(s.treatment.kappa_star.has_value());
        CHECK(s.treatment.e.has_value());
    }
    // Observed-deaths inputs differ from reading-implied ones.
    const auto ev_inputs = naive_event_inputs(events);
    const auto km_inputs = naive_event_inputs(apply_reading_mode(
        sim, ReadingMode::KmReading));
    CHECK(ev_inputs[0].first == 17.0);
    CHECK(km_inputs[0].first == doctest::Approx(45.0 * (1.0 - 0.53)));

    // km mode refuses studies without any reading.
    const MetaDataset ulmca = load_dataset(std::string(kDataDir) + "/ulmca.json");
    CHECK_THROWS_AS((void)apply_reading_mode(ulmca, ReadingMode::KmReading), Error);

    // The no-KM inflation path feeds the events-only augmented model.
    const ModelInputs inputs = build_model_inputs(events);
    const auto& arm = inputs.studies[0].treatment;
    CHECK(arm.profile.ur_case == UrCase::NoKm);
    CHECK(arm.ur.degenerate());
    CHECK(arm.ur.mean() > 17.0); // inflated beyond the observed count
    CHECK_FALSE(arm.ee.point_mass());
}

TEST_CASE("incoherent extraction: disjoint reading support and bounds") {
    MetaDataset ds;
    StudyExtract s;
    s.id = "bad";
    s.horizon = 12;
    s.treatment.n = 100;
    s.treatment.kappa_star = 0.9; // implies about 10 deaths
    s.treatment.round_digits = 3;
    s.treatment.e = 30.0;         // but 30 were observed
    s.treatment.r = 40.0;
    s.treatment.followup.kind = FollowUpSummary::Kind::MeanVar;
    s.treatment.followup.mean = 20.0;
    s.treatment.followup.variance = 25.0;
    s.control = s.treatment;
    s.control.kappa_star = 0.7;
    s.control.e = 25.0;
    ds.studies.push_back(s);
    CHECK_THROWS_AS((void)build_model_inputs(ds), Error);
    try {
        (void)build_model_inputs(ds);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptySupport);
    }
}
