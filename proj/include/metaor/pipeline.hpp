#pragma once

// Per-arm model assembly: walks a dataset and, for each arm, resolves the
// availability profile into a follow-up model, censoring summary, uncertain-
// reading density, and estimated-events density. This is the bridge between
// the extraction types and the samplers / density emitters.

#include <optional>
#include <string>
#include <vector>

#include "metaor/events.hpp"
#include "metaor/reading.hpp"
#include "metaor/study.hpp"

namespace metaor {

// Restricting the extraction simulates datasets where some components were
// not available: EventsOnly drops every survival-reading field (forcing the
// observed-deaths path), KmReading requires a reading in every arm.
enum class ReadingMode { Auto, KmReading, EventsOnly };

ReadingMode reading_mode_from_string(const std::string& s);
MetaDataset apply_reading_mode(const MetaDataset& dataset, ReadingMode mode);

struct BuildOptions {
    bool exact_measured_ur = false; // exact ratio density instead of the normal approximation
    int default_round_digits = 3;
};

struct ArmModel {
    std::string study_id;
    std::string arm_name; // "treatment" or "control"
    double n = 0.0;
    AvailabilityProfile profile;
    std::optional<FollowUpModel> followup;
    CensoringSummary censoring; // zeros when no follow-up information
    double s_star = 0.0;        // naive event-count input
    UrDensity ur;
    EeDensity ee;
    double b = 0.0;             // KM variance actually used
    bool ci_override = false;   // b taken from a reported confidence interval
    bool latent_fixed = false;  // both densities degenerate: no latent updates
};

struct StudyInputs {
    std::string id;
    ArmModel treatment;
    ArmModel control;
};

struct ModelInputs {
    std::vector<StudyInputs> studies;
    std::vector<std::string> warnings;
    double total_enrollment = 0.0;
};

ModelInputs build_model_inputs(const MetaDataset& dataset,
                               const BuildOptions& options = {});

// Naive per-study event-count inputs (treatment, control).
std::vector<std::pair<double, double>> naive_event_inputs(const ModelInputs& inputs);

// Same inputs computed directly from the extraction, without building the
// events machinery (classical and naive fits need no follow-up data).
std::vector<std::pair<double, double>> naive_event_inputs(const MetaDataset& dataset);

} // namespace metaor
