#include "metaor/study.hpp"
#include "metaor/stats.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace metaor {

using nlohmann::json;

std::string to_string(TimeUnit u) {
    switch (u) {
        case TimeUnit::Days: return "days";
        case TimeUnit::Months: return "months";
        case TimeUnit::Years: return "years";
    }
    return "months";
}

TimeUnit time_unit_from_string(const std::string& s) {
    if (s == "days") return TimeUnit::Days;
    if (s == "months") return TimeUnit::Months;
    if (s == "years") return TimeUnit::Years;
    throw Error(ErrorKind::BadInput, "unknown time_unit: " + s);
}

double MetaDataset::total_enrollment() const {
    double total = 0.0;
    for (const auto& s : studies) total += s.treatment.n + s.control.n;
    return total;
}

namespace {

void check_followup(const FollowUpSummary& f, const std::string& study,
                    const std::string& arm, std::vector<Violation>& out) {
    using Kind = FollowUpSummary::Kind;
    switch (f.kind) {
        case Kind::MeanVar:
            if (!(f.mean > 0.0))
                out.push_back({study, arm, "followup.mean", "mean must be > 0"});
            if (f.variance < 0.0)
                out.push_back({study, arm, "followup.variance", "variance must be >= 0"});
            break;
        case Kind::Quartiles:
            if (!(f.q1 > 0.0 && f.q1 <= f.q2 && f.q2 <= f.q3))
                out.push_back({study, arm, "followup.quartiles",
                               "quartiles must satisfy 0 < q1 <= q2 <= q3"});
            break;
        case Kind::MeanOnly:
            if (!(f.mean > 0.0))
                out.push_back({study, arm, "followup.mean", "mean must be > 0"});
            break;
        case Kind::None:
            break;
    }
}

void check_arm(const ArmExtract& a, const std::string& study, const std::string& arm,
               std::vector<Violation>& out) {
    if (!(a.n >= 1.0))
        out.push_back({study, arm, "n", "baseline count must be >= 1"});
    if (a.e && (*a.e < 0.0 || *a.e > a.n))
        out.push_back({study, arm, "e", "observed deaths must lie in [0, n]"});
    if (a.r && (*a.r < 0.0 || *a.r > a.n))
        out.push_back({study, arm, "r", "at-risk count must lie in [0, n]"});
    if (a.kappa_star && !(*a.kappa_star > 0.0 && *a.kappa_star < 1.0))
        out.push_back({study, arm, "kappa_star", "survival reading must lie in (0,1)"});
    if (a.round_digits && *a.round_digits < 1)
        out.push_back({study, arm, "round_digits", "round_digits must be >= 1"});
    if (a.x_star && a.y_star && !(*a.x_star > 0.0 && *a.x_star <= *a.y_star))
        out.push_back({study, arm, "x_star", "x_star must satisfy 0 < x_star <= y_star"});
    if ((a.x_star && !a.y_star) || (a.y_star && !a.x_star))
        out.push_back({study, arm, "x_star", "x_star and y_star must appear together"});
    if (a.tick_width) {
        if (!(*a.tick_width > 0.0))
            out.push_back({study, arm, "tick_width", "tick_width must be > 0"});
        else if (a.x_star && !(*a.tick_width < 2.0 * *a.x_star))
            out.push_back({study, arm, "tick_width", "tick_width must be < 2*x_star"});
    }
    if (a.ci_lo && a.ci_hi && a.kappa_star &&
        !(*a.ci_lo <= *a.kappa_star && *a.kappa_star <= *a.ci_hi))
        out.push_back({study, arm, "ci_lo", "CI must bracket kappa_star"});
    check_followup(a.followup, study, arm, out);
}

} // namespace

std::vector<Violation> validate(const MetaDataset& dataset) {
    std::vector<Violation> out;
    if (dataset.studies.empty())
        out.push_back({"", "", "studies", "dataset must contain at least one study"});
    std::set<std::string> ids;
    for (const auto& s : dataset.studies) {
        if (!ids.insert(s.id).second)
            out.push_back({s.id, "", "id", "duplicate study id"});
        if (!(s.horizon > 0.0))
            out.push_back({s.id, "", "horizon", "horizon must be > 0"});
        check_arm(s.treatment, s.id, "treatment", out);
        check_arm(s.control, s.id, "control", out);
        if (s.treatment.followup.pooled != s.control.followup.pooled)
            out.push_back({s.id, "", "followup.pooled",
                           "pooled summaries must be present in both arms"});
    }
    return out;
}

AvailabilityProfile availability_profile(const ArmExtract& arm) {
    AvailabilityProfile p;
    const bool has_measurement = arm.x_star && arm.y_star;
    if (arm.kappa_star)
        p.ur_case = UrCase::Rounded;
    else if (has_measurement)
        p.ur_case = UrCase::Measured;
    else if (arm.e)
        p.ur_case = UrCase::NoKm;
    else
        throw Error(ErrorKind::NoUsableData,
                    "arm has neither a survival reading, plot measurements, nor "
                    "observed deaths");

    using Kind = FollowUpSummary::Kind;
    if (arm.followup.pooled && arm.followup.kind != Kind::None)
        p.followup_case = FollowUpCase::Pooled;
    else if (arm.followup.kind == Kind::MeanVar)
        p.followup_case = FollowUpCase::MeanVar;
    else if (arm.followup.kind == Kind::Quartiles)
        p.followup_case = FollowUpCase::Quartiles;
    else if (arm.followup.kind == Kind::MeanOnly)
        p.followup_case = FollowUpCase::MeanOnly;
    else
        p.followup_case = FollowUpCase::Absent;

    if (arm.e && arm.r)
        p.bound_case = BoundCase::Both;
    else if (arm.e)
        p.bound_case = BoundCase::DeathsOnly;
    else if (arm.r)
        p.bound_case = BoundCase::AtRiskOnly;
    else
        p.bound_case = BoundCase::Neither;
    return p;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

FollowUpSummary followup_from_json(const json& j, bool pooled_default) {
    FollowUpSummary f;
    const std::string kind = j.at("kind").get<std::string>();
    using Kind = FollowUpSummary::Kind;
    if (kind == "mean_var") {
        f.kind = Kind::MeanVar;
        f.mean = j.at("mean").get<double>();
        f.variance = j.at("variance").get<double>();
    } else if (kind == "quartiles") {
        f.kind = Kind::Quartiles;
        f.q1 = j.at("q1").get<double>();
        f.q2 = j.at("q2").get<double>();
        f.q3 = j.at("q3").get<double>();
    } else if (kind == "mean_only") {
        f.kind = Kind::MeanOnly;
        f.mean = j.at("mean").get<double>();
    } else if (kind == "none") {
        f.kind = Kind::None;
    } else {
        throw Error(ErrorKind::BadInput, "unknown followup kind: " + kind);
    }
    f.pooled = j.value("pooled", pooled_default);
    return f;
}

json followup_to_json(const FollowUpSummary& f) {
    json j;
    using Kind = FollowUpSummary::Kind;
    switch (f.kind) {
        case Kind::MeanVar:
            j["kind"] = "mean_var";
            j["mean"] = f.mean;
            j["variance"] = f.variance;
            break;
        case Kind::Quartiles:
            j["kind"] = "quartiles";
            j["q1"] = f.q1;
            j["q2"] = f.q2;
            j["q3"] = f.q3;
            break;
        case Kind::MeanOnly:
            j["kind"] = "mean_only";
            j["mean"] = f.mean;
            break;
        case Kind::None:
            j["kind"] = "none";
            break;
    }
    if (f.pooled) j["pooled"] = true;
    return j;
}

ArmExtract arm_from_json(const json& j) {
    ArmExtract a;
    a.n = j.at("n").get<double>();
    if (j.contains("e")) a.e = j.at("e").get<double>();
    if (j.contains("r")) a.r = j.at("r").get<double>();
    if (j.contains("kappa_star")) a.kappa_star = j.at("kappa_star").get<double>();
    if (j.contains("round_digits")) a.round_digits = j.at("round_digits").get<int>();
    if (j.contains("x_star")) a.x_star = j.at("x_star").get<double>();
    if (j.contains("y_star")) a.y_star = j.at("y_star").get<double>();
    if (j.contains("tick_width")) a.tick_width = j.at("tick_width").get<double>();
    if (j.contains("ci_lo")) a.ci_lo = j.at("ci_lo").get<double>();
    if (j.contains("ci_hi")) a.ci_hi = j.at("ci_hi").get<double>();
    if (j.contains("followup")) a.followup = followup_from_json(j.at("followup"), false);
    return a;
}

json arm_to_json(const ArmExtract& a) {
    json j;
    j["n"] = a.n;
    if (a.e) j["e"] = *a.e;
    if (a.r) j["r"] = *a.r;
    if (a.kappa_star) j["kappa_star"] = *a.kappa_star;
    if (a.round_digits) j["round_digits"] = *a.round_digits;
    if (a.x_star) j["x_star"] = *a.x_star;
    if (a.y_star) j["y_star"] = *a.y_star;
    if (a.tick_width) j["tick_width"] = *a.tick_width;
    if (a.ci_lo) j["ci_lo"] = *a.ci_lo;
    if (a.ci_hi) j["ci_hi"] = *a.ci_hi;
    if (a.followup.kind != FollowUpSummary::Kind::None && !a.followup.pooled)
        j["followup"] = followup_to_json(a.followup);
    return j;
}

} // namespace

MetaDataset parse_dataset(const std::string& json_text) {
    json root = json::parse(json_text);
    MetaDataset ds;
    for (const auto& js : root.at("studies")) {
        StudyExtract s;
        s.id = js.at("id").get<std::string>();
        s.time_unit = time_unit_from_string(js.value("time_unit", std::string("months")));
        s.horizon = js.at("horizon").get<double>();
        s.treatment = arm_from_json(js.at("treatment"));
        s.control = arm_from_json(js.at("control"));
        if (js.contains("followup")) {
            // Pooled summary stored once at study level; copy to both arms.
            FollowUpSummary pooled = followup_from_json(js.at("followup"), true);
            pooled.pooled = true;
            s.treatment.followup = pooled;
            s.control.followup = pooled;
        }
        ds.studies.push_back(std::move(s));
    }
    return ds;
}

MetaDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open dataset file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_dataset(ss.str());
}

std::string dataset_to_json(const MetaDataset& dataset) {
    json root;
    root["studies"] = json::array();
    for (const auto& s : dataset.studies) {
        json js;
        js["id"] = s.id;
        js["time_unit"] = to_string(s.time_unit);
        js["horizon"] = s.horizon;
        js["treatment"] = arm_to_json(s.treatment);
        js["control"] = arm_to_json(s.control);
        if (s.treatment.followup.pooled &&
            s.treatment.followup.kind != FollowUpSummary::Kind::None)
            js["followup"] = followup_to_json(s.treatment.followup);
        root["studies"].push_back(std::move(js));
    }
    return root.dump(2);
}

void save_dataset(const MetaDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::Io, "cannot write dataset file: " + path);
    out << dataset_to_json(dataset) << "\n";
}

} // namespace metaor
