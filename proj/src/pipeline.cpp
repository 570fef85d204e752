#include "metaor/pipeline.hpp"

#include <algorithm>
#include <cmath>

namespace metaor {

ReadingMode reading_mode_from_string(const std::string& s) {
    if (s == "auto") return ReadingMode::Auto;
    if (s == "km") return ReadingMode::KmReading;
    if (s == "events") return ReadingMode::EventsOnly;
    throw Error(ErrorKind::BadInput, "unknown reading mode: " + s);
}

MetaDataset apply_reading_mode(const MetaDataset& dataset, ReadingMode mode) {
    if (mode == ReadingMode::Auto) return dataset;
    MetaDataset out = dataset;
    for (auto& s : out.studies) {
        for (ArmExtract* arm : {&s.treatment, &s.control}) {
            if (mode == ReadingMode::EventsOnly) {
                if (!arm->e)
                    throw Error(ErrorKind::NoUsableData,
                                "events-only mode but study " + s.id +
                                    " reports no observed deaths");
                arm->kappa_star.reset();
                arm->round_digits.reset();
                arm->x_star.reset();
                arm->y_star.reset();
                arm->tick_width.reset();
                arm->ci_lo.reset();
                arm->ci_hi.reset();
            } else { // KmReading
                if (!arm->kappa_star && !(arm->x_star && arm->y_star))
                    throw Error(ErrorKind::NoUsableData,
                                "km mode but study " + s.id +
                                    " has no survival reading");
            }
        }
    }
    return out;
}

namespace {

ArmModel build_arm(const MetaDataset& dataset, std::size_t study_index,
                   const ArmExtract& arm, const std::string& arm_name,
                   const BuildOptions& options, std::vector<std::string>& warnings) {
    const StudyExtract& study = dataset.studies[study_index];
    ArmModel m;
    m.study_id = study.id;
    m.arm_name = arm_name;
    m.n = arm.n;
    m.profile = availability_profile(arm);
    const auto warn = [&](const std::string& msg) {
        warnings.push_back(study.id + "/" + arm_name + ": " + msg);
    };

    // Follow-up and censoring. No information at all means the no-censoring
    // default (s = e exactly for observed-deaths arms).
    if (m.profile.followup_case != FollowUpCase::Absent) {
        std::optional<double> donor;
        if (m.profile.followup_case == FollowUpCase::MeanOnly) {
            const double sd = donor_sd_mean(dataset, study_index);
            donor = sd * sd;
        }
        m.followup = followup_model(arm.followup, donor);
        m.censoring = censoring_summary(*m.followup, arm.n, study.horizon);
    } else if (m.profile.ur_case != UrCase::NoKm) {
        throw Error(ErrorKind::NoUsableData,
                    study.id + "/" + arm_name +
                        ": survival reading without any follow-up information");
    }

    // Reading: naive input and the uncertain-reading density.
    double kappa_reading = 0.0;
    switch (m.profile.ur_case) {
        case UrCase::Rounded: {
            kappa_reading = *arm.kappa_star;
            const int digits = arm.round_digits.value_or(options.default_round_digits);
            m.s_star = arm.n * (1.0 - kappa_reading);
            m.ur = ur_rounded(kappa_reading, digits, arm.n);
            break;
        }
        case UrCase::Measured: {
            if (!arm.tick_width)
                throw Error(ErrorKind::InvalidMeasurement,
                            study.id + "/" + arm_name +
                                ": measured reading requires tick_width");
            kappa_reading = *arm.x_star / *arm.y_star;
            m.s_star = arm.n * (1.0 - kappa_reading);
            m.ur = options.exact_measured_ur
                       ? ur_measured_exact(*arm.x_star, *arm.y_star, *arm.tick_width,
                                           arm.n)
                       : ur_measured_normal(*arm.x_star, *arm.y_star, *arm.tick_width,
                                            arm.n);
            break;
        }
        case UrCase::NoKm: {
            m.s_star = *arm.e;
            if (m.followup) {
                const auto est =
                    no_km_death_estimate(*arm.e, arm.n, m.censoring.auc_fraction);
                if (!est.domain_ok)
                    warn("observed-deaths inflation outside its domain; using e/n");
                kappa_reading = 1.0 - est.k_star;
                m.ur = ur_degenerate(est.s_plus, arm.n);
            } else {
                kappa_reading = 1.0 - *arm.e / arm.n;
                m.ur = ur_degenerate(*arm.e, arm.n);
            }
            break;
        }
    }

    // Bounds and KM variance feed the estimated-events density.
    const auto [lb, ub] =
        event_bounds(m.profile.bound_case, arm.n, arm.e, arm.r, m.censoring.c);
    if (arm.ci_lo && arm.ci_hi) {
        m.b = km_variance_from_ci(*arm.ci_lo, *arm.ci_hi);
        m.ci_override = true;
    } else {
        const auto kv = km_variance(kappa_reading, arm.n, arm.e, m.censoring.c,
                                    m.censoring.auc_fraction);
        if (kv.e_substituted)
            warn("Greenwood variance without observed deaths; substituted the "
                 "reading-implied count");
        m.b = kv.b;
    }
    m.ee = ee_density(m.ur.mean(), m.b, arm.n, lb, ub);
    if (m.ee.clamped)
        warn("reading-implied deaths fall outside the event bounds; clamped");

    // Latent support coherence: the reading support must intersect the raw
    // event bounds or the augmented model has no admissible state.
    const auto [ur_lo, ur_hi] = m.ur.support();
    if (ur_hi < lb || ur_lo > ub) {
        if (!m.ur.degenerate())
            throw Error(ErrorKind::EmptySupport,
                        study.id + "/" + arm_name +
                            ": reading support and event bounds are disjoint");
        // Degenerate readings were already clamped into the bounds above.
    }
    m.latent_fixed = m.ur.degenerate() && m.ee.point_mass();
    return m;
}

} // namespace

ModelInputs build_model_inputs(const MetaDataset& dataset, const BuildOptions& options) {
    ModelInputs out;
    out.total_enrollment = dataset.total_enrollment();
    for (std::size_t i = 0; i < dataset.k(); ++i) {
        const auto& s = dataset.studies[i];
        StudyInputs si;
        si.id = s.id;
        si.treatment =
            build_arm(dataset, i, s.treatment, "treatment", options, out.warnings);
        si.control = build_arm(dataset, i, s.control, "control", options, out.warnings);
        out.studies.push_back(std::move(si));
    }
    return out;
}

std::vector<std::pair<double, double>> naive_event_inputs(const ModelInputs& inputs) {
    std::vector<std::pair<double, double>> out;
    out.reserve(inputs.studies.size());
    for (const auto& s : inputs.studies)
        out.emplace_back(s.treatment.s_star, s.control.s_star);
    return out;
}

namespace {
double arm_s_star(const ArmExtract& arm) {
    const auto profile = availability_profile(arm);
    switch (profile.ur_case) {
        case UrCase::Rounded: return arm.n * (1.0 - *arm.kappa_star);
        case UrCase::Measured: return arm.n * (1.0 - *arm.x_star / *arm.y_star);
        case UrCase::NoKm: return *arm.e;
    }
    return 0.0;
}
} // namespace

std::vector<std::pair<double, double>> naive_event_inputs(const MetaDataset& dataset) {
    std::vector<std::pair<double, double>> out;
    out.reserve(dataset.k());
    for (const auto& s : dataset.studies)
        out.emplace_back(arm_s_star(s.treatment), arm_s_star(s.control));
    return out;
}

} // namespace metaor
