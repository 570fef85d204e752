#include "metaor/simulate.hpp"
#include "metaor/events.hpp"

#include <algorithm>
#include <cmath>

namespace metaor {

namespace {

double inv_logit(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double poisson_count(double lambda, Rng& rng) {
    // Knuth's product method underflows for large means; switch to the
    // normal approximation well before that.
    if (lambda > 500.0)
        return std::max(0.0, std::round(lambda + std::sqrt(lambda) * rng.normal()));
    const double limit = std::exp(-lambda);
    double prod = 1.0;
    double count = -1.0;
    do {
        prod *= rng.uniform();
        count += 1.0;
    } while (prod > limit);
    return count;
}

SimArm simulate_arm(double n, double pi, double psi, double phi_sd, double horizon,
                    Rng& rng) {
    SimArm arm;
    arm.n = n;
    std::vector<double> death_times, censor_times;
    death_times.reserve(std::size_t(n));
    censor_times.reserve(std::size_t(n));
    for (long i = 0; i < long(n); ++i) {
        const bool dies = rng.uniform() < pi;
        // Subjects destined to die by the horizon get a death time uniform
        // over the interval; everyone has a lognormal censoring time.
        const double censor = std::exp(psi + phi_sd * rng.normal());
        if (dies) {
            arm.s += 1.0;
            const double t_death = rng.uniform() * horizon;
            if (t_death <= censor) {
                arm.e += 1.0;
                death_times.push_back(t_death);
            } else {
                arm.lost += censor < horizon ? 1.0 : 0.0;
                censor_times.push_back(std::min(censor, horizon));
            }
        } else {
            if (censor < horizon) arm.lost += 1.0;
            censor_times.push_back(std::min(censor, horizon));
        }
    }
    arm.kappa = km_estimate(death_times, censor_times, horizon).kappa;
    return arm;
}

} // namespace

SimStudy generate_study(const SimConfig& config, Rng& rng) {
    SimStudy study;
    study.delta = rng.normal(config.d, std::sqrt(config.tau2));
    study.u = rng.normal(config.m, std::sqrt(config.sigma2));
    const double pi1 = inv_logit(study.u + 0.5 * study.delta);
    const double pi0 = inv_logit(study.u - 0.5 * study.delta);
    const double n1 = std::max(1.0, poisson_count(config.mean_arm_size, rng));
    const double n0 = std::max(1.0, poisson_count(config.mean_arm_size, rng));
    study.treatment = simulate_arm(n1, pi1, config.psi_treatment,
                                   config.phi_sd_treatment, config.horizon, rng);
    study.control = simulate_arm(n0, pi0, config.psi_control, config.phi_sd_control,
                                 config.horizon, rng);
    return study;
}

std::vector<SimStudy> generate_dataset(const SimConfig& config) {
    Rng rng(config.seed);
    std::vector<SimStudy> out;
    out.reserve(config.k);
    for (int i = 0; i < config.k; ++i) out.push_back(generate_study(config, rng));
    return out;
}

MetaDataset sim_to_dataset(const std::vector<SimStudy>& sims, const SimConfig& config,
                           int kappa_digits) {
    MetaDataset ds;
    const double scale = std::pow(10.0, kappa_digits);
    const auto to_arm = [&](const SimArm& a, double psi, double phi_sd) {
        ArmExtract arm;
        arm.n = a.n;
        arm.e = a.e;
        double kappa = std::round(a.kappa * scale) / scale;
        kappa = std::clamp(kappa, 1.0 / scale, 1.0 - 1.0 / scale);
        arm.kappa_star = kappa;
        arm.round_digits = kappa_digits;
        FollowUpSummary f;
        f.kind = FollowUpSummary::Kind::MeanVar;
        f.mean = lognorm_mean(psi, phi_sd);
        f.variance = lognorm_var(psi, phi_sd);
        arm.followup = f;
        return arm;
    };
    for (std::size_t i = 0; i < sims.size(); ++i) {
        StudyExtract s;
        s.id = "Sim" + std::to_string(i + 1);
        s.time_unit = TimeUnit::Days;
        s.horizon = config.horizon;
        s.treatment = to_arm(sims[i].treatment, config.psi_treatment,
                             config.phi_sd_treatment);
        s.control = to_arm(sims[i].control, config.psi_control, config.phi_sd_control);
        ds.studies.push_back(std::move(s));
    }
    return ds;
}

KmEstimate km_estimate(const std::vector<double>& death_times,
                       const std::vector<double>& censor_times, double horizon) {
    struct Entry {
        double t;
        bool event;
    };
    std::vector<Entry> entries;
    entries.reserve(death_times.size() + censor_times.size());
    for (double t : death_times) entries.push_back({t, true});
    for (double t : censor_times) entries.push_back({t, false});
    // Deaths precede censorings at tied times: censored subjects are still
    // at risk at their censoring time.
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.event && !b.event;
    });

    KmEstimate out;
    out.kappa = 1.0;
    double var_sum = 0.0;
    double at_risk = double(entries.size());
    std::size_t i = 0;
    while (i < entries.size() && entries[i].t <= horizon) {
        const double t = entries[i].t;
        double deaths = 0.0, censored = 0.0;
        while (i < entries.size() && entries[i].t == t) {
            if (entries[i].event)
                deaths += 1.0;
            else
                censored += 1.0;
            ++i;
        }
        if (deaths > 0.0 && at_risk > 0.0) {
            out.kappa *= 1.0 - deaths / at_risk;
            if (at_risk > deaths) var_sum += deaths / (at_risk * (at_risk - deaths));
        }
        at_risk -= deaths + censored;
    }
    out.greenwood_var = out.kappa * out.kappa * var_sum;
    return out;
}

SimulatedFixture load_simulated_fixture() {
    // Ten studies, both arms: n, observed deaths e, true deaths s, KM
    // survival at year 1, and the lost-to-follow-up count.
    struct Row {
        double n1, e1, s1, k1, l1;
        double n0, e0, s0, k0, l0;
    };
    static const Row rows[] = {
        {45, 17, 23, 0.53, 16, 32, 12, 12, 0.63, 0},
        {139, 21, 31, 0.82, 60, 36, 6, 6, 0.83, 0},
        {75, 25, 30, 0.59, 29, 15, 4, 4, 0.73, 0},
        {80, 31, 35, 0.53, 22, 23, 10, 10, 0.57, 0},
        {156, 43, 55, 0.66, 66, 187, 72, 73, 0.61, 4},
        {87, 23, 30, 0.68, 35, 90, 19, 20, 0.79, 5},
        {183, 21, 24, 0.87, 72, 116, 32, 32, 0.72, 3},
        {141, 26, 29, 0.78, 62, 70, 22, 22, 0.69, 0},
        {158, 27, 32, 0.80, 68, 168, 63, 64, 0.62, 2},
        {120, 38, 45, 0.60, 47, 48, 20, 20, 0.58, 1},
    };

    SimConfig config; // carries the follow-up parameters and horizon
    SimulatedFixture fixture;
    int index = 0;
    for (const Row& row : rows) {
        ++index;
        StudyExtract s;
        s.id = "Sim" + std::to_string(index);
        s.time_unit = TimeUnit::Days;
        s.horizon = config.horizon;

        const auto make_arm = [](double n, double e, double kappa, double psi,
                                 double phi_sd) {
            ArmExtract arm;
            arm.n = n;
            arm.e = e;
            arm.kappa_star = kappa;
            arm.round_digits = 2;
            FollowUpSummary f;
            f.kind = FollowUpSummary::Kind::MeanVar;
            f.mean = lognorm_mean(psi, phi_sd);
            f.variance = lognorm_var(psi, phi_sd);
            arm.followup = f;
            return arm;
        };
        s.treatment = make_arm(row.n1, row.e1, row.k1, config.psi_treatment,
                               config.phi_sd_treatment);
        s.control = make_arm(row.n0, row.e0, row.k0, config.psi_control,
                             config.phi_sd_control);
        fixture.dataset.studies.push_back(std::move(s));
        fixture.truth.push_back({row.s1, row.s0, row.l1, row.l0});
    }
    return fixture;
}

MseComparison mc_mse_death_probability(double death_prob, double auc_target,
                                       int subjects_per_study, int replicates,
                                       Rng& rng) {
    const double phi_sd = 0.75;
    const double psi = solve_psi_for_auc(auc_target, phi_sd);
    const double n = double(subjects_per_study);

    double se_inflated = 0.0, se_raw = 0.0;
    for (int rep = 0; rep < replicates; ++rep) {
        double s = 0.0, e = 0.0;
        for (int i = 0; i < subjects_per_study; ++i) {
            if (rng.uniform() >= death_prob) continue;
            s += 1.0;
            const double t_death = rng.uniform();
            const double censor = std::exp(psi + phi_sd * rng.normal());
            if (t_death <= censor) e += 1.0;
        }
        const double truth = s / n;
        const double raw = e / n;
        const double inflated = raw / (1.0 - auc_target);
        se_raw += (raw - truth) * (raw - truth);
        se_inflated += (inflated - truth) * (inflated - truth);
    }
    return {se_inflated / double(replicates), se_raw / double(replicates)};
}

double solve_psi_for_auc(double auc_target, double phi_sd) {
    if (!(auc_target > 0.0 && auc_target < 1.0))
        throw Error(ErrorKind::BadInput, "solve_psi_for_auc: target outside (0,1)");
    const auto auc_of = [&](double psi) {
        const auto cdf = [&](double t) { return lognorm_cdf(t, psi, phi_sd); };
        return integrate(cdf, 0.0, 1.0, 1e-10);
    };
    double lo = -12.0, hi = 12.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (auc_of(mid) > auc_target)
            lo = mid; // larger psi -> later censoring -> smaller auc
        else
            hi = mid;
        if (hi - lo < 1e-12) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace metaor
