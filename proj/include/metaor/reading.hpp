#pragma once

// Uncertain-reading densities: the distribution of the KM-implied death
// count s+ given what was actually extracted (a rounded survival value or a
// pair of ruler measurements off the plot). Three constructions: rounding
// uniforms, the exact ratio-of-two-uniforms density, and its normal
// approximation.

#include <utility>

#include "metaor/stats.hpp"

namespace metaor {

class Rng;

struct UrDensity {
    enum class Kind { RoundedUniform, RatioOfUniforms, NormalApprox, Degenerate };
    Kind kind = Kind::Degenerate;

    double n = 0.0;      // arm size; support always within [0, n]
    double center = 0.0; // s* (mean for uniform/normal kinds, point mass otherwise)
    // RoundedUniform: uniform endpoints on the s+ scale.
    double lo = 0.0, hi = 0.0;
    // NormalApprox: standard deviation on the s+ scale.
    double sd = 0.0;
    // RatioOfUniforms: measurement geometry, half-width convention.
    double x = 0.0, y = 0.0, half_w = 0.0, half_z = 0.0;

    bool degenerate() const { return kind == Kind::Degenerate; }
    // Support on the s+ scale (clipped to [0, n]).
    std::pair<double, double> support() const;
    double pdf(double s_plus) const;
    double logpdf(double s_plus) const;
    double mean() const;
    double sample(Rng& rng) const;
};

// Rounded reading: kappa+ ~ Unif(kappa* -/+ h) with h = 0.5 * 10^-digits,
// hence s+ ~ Unif(s* -/+ h*n), s* = n(1 - kappa*).
UrDensity ur_rounded(double kappa_star, int digits, double n);

// Support of the ratio of two tick-width-w measurements:
// [(x*-w/2)/(y*+w/2), (x*+w/2)/(y*-w/2)]. w is the full tick spacing.
std::pair<double, double> ratio_uniform_support(double x_star, double y_star, double w);

// Density of p = X/Y with X ~ Unif(x-w, x+w), Y ~ Unif(y-z, y+z); here w and
// z are HALF-widths and must satisfy x > w > 0, y > z > 0. Piecewise form
// validated against Monte Carlo sampling of the defining ratio.
double ratio_uniform_pdf(double p, double x, double y, double w, double z);

// Exact measured-reading density on the s+ scale (tick width w on both axes).
UrDensity ur_measured_exact(double x_star, double y_star, double w, double n);

// Normal approximation: mean s* = n(1 - x*/y*), sd chosen so +/-3 sd spans
// the support image.
UrDensity ur_measured_normal(double x_star, double y_star, double w, double n);

UrDensity ur_degenerate(double s_plus, double n);

} // namespace metaor
