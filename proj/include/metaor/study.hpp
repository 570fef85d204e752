#pragma once

// Domain types for extracted study data: what a meta-analyst could pull out
// of each publication (enrollment, observed deaths, at-risk counts, survival
// readings, plot measurements, follow-up summaries), plus dataset validation
// and the per-arm availability profile that selects the reading / events
// construction for each study.

#include <optional>
#include <string>
#include <vector>

namespace metaor {

enum class TimeUnit { Days, Months, Years };

std::string to_string(TimeUnit u);
TimeUnit time_unit_from_string(const std::string& s);

// Follow-up time summary as published. Times are in the study's time unit.
struct FollowUpSummary {
    enum class Kind { None, MeanVar, Quartiles, MeanOnly };
    Kind kind = Kind::None;
    double mean = 0.0;     // MeanVar, MeanOnly
    double variance = 0.0; // MeanVar
    double q1 = 0.0, q2 = 0.0, q3 = 0.0; // Quartiles
    bool pooled = false;   // summary covers both arms jointly
};

// One arm's extracted fields. Absent fields were not extractable.
struct ArmExtract {
    double n = 0.0;                       // enrolled at baseline
    std::optional<double> e;              // observed deaths by horizon
    std::optional<double> r;              // at risk at horizon
    std::optional<double> kappa_star;     // rounded KM survival reading
    std::optional<int> round_digits;      // decimal places of kappa_star
    std::optional<double> x_star, y_star; // plot measurements (length units)
    std::optional<double> tick_width;     // ruler tick spacing w
    std::optional<double> ci_lo, ci_hi;   // reported KM confidence interval
    FollowUpSummary followup;
};

struct StudyExtract {
    std::string id;
    ArmExtract treatment; // j = 1
    ArmExtract control;   // j = 0
    TimeUnit time_unit = TimeUnit::Months;
    double horizon = 0.0; // analysis time point, in time_unit
};

struct MetaDataset {
    std::vector<StudyExtract> studies;
    std::size_t k() const { return studies.size(); }
    double total_enrollment() const;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
    std::string study_id;
    std::string arm;   // "treatment", "control", or "" for study-level
    std::string field;
    std::string message;
};

std::vector<Violation> validate(const MetaDataset& dataset);

// ---------------------------------------------------------------------------
// Availability profile: which survival-reading construction and which
// follow-up / bound cases apply to an arm, from its presence pattern alone.
// ---------------------------------------------------------------------------

enum class UrCase {
    Rounded,   // kappa_star present: rounded reading
    Measured,  // x_star/y_star present: ruler measurement off the plot
    NoKm,      // only observed deaths e: inflate via the censoring AUC
};

enum class FollowUpCase {
    MeanVar = 1,   // mean and variance per arm
    Quartiles = 2, // median and quartiles per arm
    Pooled = 3,    // joint summary copied to both arms
    MeanOnly = 4,  // mean only; variance borrowed from donor studies
    Absent = 0,    // nothing reported
};

enum class BoundCase {
    Both = 1,     // e and r given
    DeathsOnly = 2,
    AtRiskOnly = 3,
    Neither = 4,
};

struct AvailabilityProfile {
    UrCase ur_case = UrCase::NoKm;
    FollowUpCase followup_case = FollowUpCase::Absent;
    BoundCase bound_case = BoundCase::Neither;
};

// Throws Error(NoUsableData) when neither kappa_star, (x_star, y_star),
// nor e is present.
AvailabilityProfile availability_profile(const ArmExtract& arm);

// ---------------------------------------------------------------------------
// JSON ingestion. One object per study, per-arm sub-objects using exactly the
// field names above; absent fields are omitted. A study-level "followup"
// object is a pooled summary stored once and copied to both arms.
// ---------------------------------------------------------------------------

MetaDataset load_dataset(const std::string& path);
MetaDataset parse_dataset(const std::string& json_text);
std::string dataset_to_json(const MetaDataset& dataset);
void save_dataset(const MetaDataset& dataset, const std::string& path);

} // namespace metaor
