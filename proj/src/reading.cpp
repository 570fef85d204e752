#include "metaor/reading.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metaor {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::pair<double, double> UrDensity::support() const {
    switch (kind) {
        case Kind::RoundedUniform:
            return {std::max(0.0, lo), std::min(n, hi)};
        case Kind::NormalApprox:
            return {std::max(0.0, center - 6.0 * sd), std::min(n, center + 6.0 * sd)};
        case Kind::RatioOfUniforms: {
            const double p_lo = (x - half_w) / (y + half_z);
            const double p_hi = (x + half_w) / (y - half_z);
            return {std::max(0.0, n * (1.0 - p_hi)), std::min(n, n * (1.0 - p_lo))};
        }
        case Kind::Degenerate:
            return {center, center};
    }
    return {center, center};
}

double UrDensity::pdf(double s_plus) const {
    const double lp = logpdf(s_plus);
    return lp == kNegInf ? 0.0 : std::exp(lp);
}

double UrDensity::logpdf(double s_plus) const {
    if (s_plus < 0.0 || s_plus > n) return kNegInf;
    switch (kind) {
        case Kind::RoundedUniform: {
            const double a = std::max(0.0, lo);
            const double b = std::min(n, hi);
            if (s_plus < a || s_plus > b || !(b > a)) return kNegInf;
            return -std::log(b - a);
        }
        case Kind::NormalApprox: {
            // Normal clipped to [0, n]; renormalization over the clip is
            // negligible for realistic geometries but kept exact.
            const double mass =
                norm_cdf((n - center) / sd) - norm_cdf((0.0 - center) / sd);
            return norm_logpdf(s_plus, center, sd) - std::log(mass);
        }
        case Kind::RatioOfUniforms: {
            const double p = 1.0 - s_plus / n;
            const double g = ratio_uniform_pdf(p, x, y, half_w, half_z);
            return g > 0.0 ? std::log(g / n) : kNegInf;
        }
        case Kind::Degenerate:
            return s_plus == center ? 0.0 : kNegInf;
    }
    return kNegInf;
}

double UrDensity::mean() const { return center; }

double UrDensity::sample(Rng& rng) const {
    switch (kind) {
        case Kind::RoundedUniform: {
            const double a = std::max(0.0, lo);
            const double b = std::min(n, hi);
            return rng.uniform(a, b);
        }
        case Kind::NormalApprox: {
            for (;;) {
                const double s = rng.normal(center, sd);
                if (s >= 0.0 && s <= n) return s;
            }
        }
        case Kind::RatioOfUniforms: {
            // Definitional sampling: ratio of the two measurement uniforms.
            for (;;) {
                const double xt = rng.uniform(x - half_w, x + half_w);
                const double yt = rng.uniform(y - half_z, y + half_z);
                const double s = n * (1.0 - xt / yt);
                if (s >= 0.0 && s <= n) return s;
            }
        }
        case Kind::Degenerate:
            return center;
    }
    return center;
}

UrDensity ur_rounded(double kappa_star, int digits, double n) {
    if (!(kappa_star > 0.0 && kappa_star < 1.0))
        throw Error(ErrorKind::BadInput, "ur_rounded: kappa_star must be in (0,1)");
    if (digits < 1)
        throw Error(ErrorKind::BadInput, "ur_rounded: digits must be >= 1");
    const double h = 0.5 * std::pow(10.0, -digits);
    const double s_star = n * (1.0 - kappa_star);
    UrDensity d;
    d.kind = UrDensity::Kind::RoundedUniform;
    d.n = n;
    d.center = s_star;
    d.lo = s_star - h * n;
    d.hi = s_star + h * n;
    return d;
}

std::pair<double, double> ratio_uniform_support(double x_star, double y_star, double w) {
    if (!(w > 0.0 && x_star > 0.5 * w && y_star > 0.5 * w))
        throw Error(ErrorKind::InvalidMeasurement,
                    "ratio_uniform_support: need x* > w/2 > 0 and y* > w/2");
    return {(x_star - 0.5 * w) / (y_star + 0.5 * w),
            (x_star + 0.5 * w) / (y_star - 0.5 * w)};
}

double ratio_uniform_pdf(double p, double x, double y, double w, double z) {
    if (!(x > w && w > 0.0 && y > z && z > 0.0))
        throw Error(ErrorKind::InvalidMeasurement,
                    "ratio_uniform_pdf: need x > w > 0 and y > z > 0");
    const double p_min = (x - w) / (y + z);
    const double p_max = (x + w) / (y - z);
    if (p <= p_min || p >= p_max) return 0.0;

    const double lo_break = (x - w) / (y - z); // where the lower edge leaves play
    const double hi_break = (x + w) / (y + z); // where the upper edge starts to bind
    const double denom = 8.0 * w * z;

    if (lo_break <= hi_break) {
        if (p <= lo_break)
            return ((y + z) * (y + z) - (x - w) * (x - w) / (p * p)) / denom;
        if (p <= hi_break) return y / (2.0 * w);
        return ((x + w) * (x + w) / (p * p) - (y - z) * (y - z)) / denom;
    }
    // Reversed breakpoint order: middle branch is x/(2 z p^2).
    if (p <= hi_break)
        return ((y + z) * (y + z) - (x - w) * (x - w) / (p * p)) / denom;
    if (p <= lo_break) return x / (2.0 * z * p * p);
    return ((x + w) * (x + w) / (p * p) - (y - z) * (y - z)) / denom;
}

UrDensity ur_measured_exact(double x_star, double y_star, double w, double n) {
    ratio_uniform_support(x_star, y_star, w); // validates geometry
    UrDensity d;
    d.kind = UrDensity::Kind::RatioOfUniforms;
    d.n = n;
    d.center = n * (1.0 - x_star / y_star);
    d.x = x_star;
    d.y = y_star;
    d.half_w = 0.5 * w;
    d.half_z = 0.5 * w;
    return d;
}

UrDensity ur_measured_normal(double x_star, double y_star, double w, double n) {
    const auto [lo, hi] = ratio_uniform_support(x_star, y_star, w);
    UrDensity d;
    d.kind = UrDensity::Kind::NormalApprox;
    d.n = n;
    d.center = n * (1.0 - x_star / y_star);
    d.sd = (n / 6.0) * (hi - lo);
    if (d.sd <= 0.0) {
        d.kind = UrDensity::Kind::Degenerate;
    }
    return d;
}

UrDensity ur_degenerate(double s_plus, double n) {
    UrDensity d;
    d.kind = UrDensity::Kind::Degenerate;
    d.n = n;
    d.center = s_plus;
    return d;
}

} // namespace metaor
