#include "metaor/classical.hpp"
#include "metaor/stats.hpp"

#include <cmath>

namespace metaor {

double PooledEstimate::ci_lo() const { return d_hat - 1.96 * std::sqrt(var_d); }
double PooledEstimate::ci_hi() const { return d_hat + 1.96 * std::sqrt(var_d); }

namespace {
bool degenerate(double s, double n) { return !(s > 0.0) || !(s < n); }
} // namespace

double log_odds(double s1, double n1, double s0, double n0) {
    if (degenerate(s1, n1) || degenerate(s0, n0))
        throw Error(ErrorKind::DegenerateCell, "log_odds: zero or full cell");
    return std::log((s1 / (n1 - s1)) / (s0 / (n0 - s0)));
}

double sampling_variance(double s1, double n1, double s0, double n0) {
    if (degenerate(s1, n1) || degenerate(s0, n0))
        throw Error(ErrorKind::DegenerateCell, "sampling_variance: zero or full cell");
    return 1.0 / s1 + 1.0 / (n1 - s1) + 1.0 / s0 + 1.0 / (n0 - s0);
}

StudyEffect study_effect(double s1, double n1, double s0, double n0, bool* corrected) {
    bool fix = degenerate(s1, n1) || degenerate(s0, n0);
    if (corrected) *corrected = fix;
    if (fix) {
        // 0.5 added to all four cells of the 2x2 table.
        s1 += 0.5;
        s0 += 0.5;
        n1 += 1.0;
        n0 += 1.0;
    }
    return {log_odds(s1, n1, s0, n0), sampling_variance(s1, n1, s0, n0)};
}

namespace {

// Fixed-effect weighted mean with weights 1/(sigma2 + tau2).
void weighted_mean(const std::vector<StudyEffect>& effects, double tau2, double& d_hat,
                   double& var_d) {
    double sw = 0.0, swo = 0.0;
    for (const auto& e : effects) {
        const double w = 1.0 / (e.sigma2_hat + tau2);
        sw += w;
        swo += w * e.log_or;
    }
    d_hat = swo / sw;
    var_d = 1.0 / sw;
}

} // namespace

PooledEstimate dsl_fit(const std::vector<StudyEffect>& effects) {
    if (effects.empty())
        throw Error(ErrorKind::BadInput, "dsl_fit: need at least one study");
    const std::size_t k = effects.size();

    PooledEstimate out;
    out.method = PoolMethod::DSL;

    double sa = 0.0, sa2 = 0.0, sao = 0.0;
    for (const auto& e : effects) {
        const double a = 1.0 / e.sigma2_hat;
        sa += a;
        sa2 += a * a;
        sao += a * e.log_or;
    }
    const double d_fixed = sao / sa;
    double q = 0.0;
    for (const auto& e : effects) {
        const double a = 1.0 / e.sigma2_hat;
        q += a * (e.log_or - d_fixed) * (e.log_or - d_fixed);
    }
    out.q_stat = q;
    if (k == 1) {
        out.tau2_hat = 0.0;
    } else {
        const double denom = sa - sa2 / sa;
        out.tau2_hat = std::max(0.0, (q - (double(k) - 1.0)) / denom);
    }
    weighted_mean(effects, out.tau2_hat, out.d_hat, out.var_d);
    return out;
}

PooledEstimate ml_fit(const std::vector<StudyEffect>& effects, const MlOptions& options) {
    if (effects.empty())
        throw Error(ErrorKind::BadInput, "ml_fit: need at least one study");

    PooledEstimate out;
    out.method = PoolMethod::ML;
    out.converged = false;

    double tau2 = 0.0;
    double d_hat = 0.0, var_d = 0.0;
    weighted_mean(effects, tau2, d_hat, var_d);

    for (int it = 1; it <= options.max_iterations; ++it) {
        weighted_mean(effects, tau2, d_hat, var_d);
        double num = 0.0, den = 0.0;
        for (const auto& e : effects) {
            const double v = e.sigma2_hat + tau2;
            num += ((e.log_or - d_hat) * (e.log_or - d_hat) - e.sigma2_hat) / v;
            den += 1.0 / v;
        }
        const double tau2_next = std::max(0.0, num / den);
        const double dt = std::fabs(tau2_next - tau2);
        tau2 = tau2_next;
        double d_next, var_next;
        weighted_mean(effects, tau2, d_next, var_next);
        const double dd = std::fabs(d_next - d_hat);
        out.iterations = it;
        if (dt < options.tolerance && dd < options.tolerance) {
            out.converged = true;
            d_hat = d_next;
            var_d = var_next;
            break;
        }
        d_hat = d_next;
        var_d = var_next;
    }
    out.tau2_hat = tau2;
    out.d_hat = d_hat;
    out.var_d = var_d;
    double q = 0.0, sa = 0.0, sao = 0.0;
    for (const auto& e : effects) {
        sa += 1.0 / e.sigma2_hat;
        sao += e.log_or / e.sigma2_hat;
    }
    const double d_fixed = sao / sa;
    for (const auto& e : effects)
        q += (e.log_or - d_fixed) * (e.log_or - d_fixed) / e.sigma2_hat;
    out.q_stat = q;
    return out;
}

std::vector<StudyEffect> classical_effects(
    const MetaDataset& dataset, const std::vector<std::pair<double, double>>& s_star,
    std::vector<std::string>* warnings) {
    if (s_star.size() != dataset.k())
        throw Error(ErrorKind::BadInput, "classical_effects: s_star size mismatch");
    std::vector<StudyEffect> effects;
    effects.reserve(dataset.k());
    for (std::size_t i = 0; i < dataset.k(); ++i) {
        const auto& s = dataset.studies[i];
        bool corrected = false;
        effects.push_back(study_effect(s_star[i].first, s.treatment.n,
                                       s_star[i].second, s.control.n, &corrected));
        if (corrected && warnings)
            warnings->push_back(s.id +
                                ": zero or full cell; 0.5 continuity correction "
                                "applied to all four cells");
    }
    return effects;
}

} // namespace metaor
