#include "metaor/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace metaor {

double norm_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double norm_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double norm_logpdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * kPi);
}

// AS241 (Wichura 1988), double-precision branch.
double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorKind::BadInput, "norm_quantile: p must be in (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                  3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

double lognorm_cdf(double t, double log_mean, double log_sd) {
    if (t <= 0.0) return 0.0;
    if (log_sd <= 0.0) return std::log(t) < log_mean ? 0.0 : (std::log(t) > log_mean ? 1.0 : 0.5);
    return norm_cdf((std::log(t) - log_mean) / log_sd);
}

double lognorm_mean(double log_mean, double log_sd) {
    return std::exp(log_mean + 0.5 * log_sd * log_sd);
}

double lognorm_var(double log_mean, double log_sd) {
    const double s2 = log_sd * log_sd;
    return (std::exp(s2) - 1.0) * std::exp(2.0 * log_mean + s2);
}

double lognorm_quantile(double p, double log_mean, double log_sd) {
    return std::exp(log_mean + log_sd * norm_quantile(p));
}

double TruncNormal::log_mass() const {
    const double a = (lo - mean) / sd;
    const double b = (hi - mean) / sd;
    const double mass = norm_cdf(b) - norm_cdf(a);
    return std::log(std::max(mass, std::numeric_limits<double>::min()));
}

double TruncNormal::pdf(double x) const {
    if (point_mass()) return x == lo ? std::numeric_limits<double>::infinity() : 0.0;
    if (x < lo || x > hi) return 0.0;
    return std::exp(logpdf(x));
}

double TruncNormal::logpdf(double x) const {
    if (point_mass() || x < lo || x > hi)
        return -std::numeric_limits<double>::infinity();
    return norm_logpdf(x, mean, sd) - log_mass();
}

double TruncNormal::sample(double u01) const {
    if (point_mass()) return lo;
    const double a = norm_cdf((lo - mean) / sd);
    const double b = norm_cdf((hi - mean) / sd);
    double u = a + u01 * (b - a);
    u = std::clamp(u, std::numeric_limits<double>::min(), 1.0 - 1e-16);
    return mean + sd * norm_quantile(u);
}

double cont_binomial_logpmf(double s, double n, double p) {
    if (s < 0.0 || s > n || !(p > 0.0 && p < 1.0))
        return -std::numeric_limits<double>::infinity();
    return std::lgamma(n + 1.0) - std::lgamma(s + 1.0) - std::lgamma(n - s + 1.0) +
           s * std::log(p) + (n - s) * std::log1p(-p);
}

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Minimal mt19937_64 core (state-compatible with the standard definition).
namespace {
constexpr int kNN = 312;
constexpr int kMM = 156;
constexpr uint64_t kMatrixA = 0xB5026F5AA96619E9ULL;
constexpr uint64_t kUpperMask = 0xFFFFFFFF80000000ULL;
constexpr uint64_t kLowerMask = 0x7FFFFFFFULL;
} // namespace

Rng::Rng(uint64_t seed) : index_(kNN) {
    state_[0] = seed;
    for (int i = 1; i < kNN; ++i)
        state_[i] = 6364136223846793005ULL * (state_[i - 1] ^ (state_[i - 1] >> 62)) +
                    static_cast<uint64_t>(i);
}

void Rng::refill() {
    for (int i = 0; i < kNN; ++i) {
        const uint64_t x =
            (state_[i] & kUpperMask) | (state_[(i + 1) % kNN] & kLowerMask);
        uint64_t xa = x >> 1;
        if (x & 1ULL) xa ^= kMatrixA;
        state_[i] = state_[(i + kMM) % kNN] ^ xa;
    }
    index_ = 0;
}

uint64_t Rng::next_u64() {
    if (index_ >= kNN) refill();
    uint64_t x = state_[index_++];
    x ^= (x >> 29) & 0x5555555555555555ULL;
    x ^= (x << 17) & 0x71D67FFFEDA60000ULL;
    x ^= (x << 37) & 0xFFF7EEE000000000ULL;
    x ^= x >> 43;
    return x;
}

double Rng::uniform() {
    // 53-bit mantissa, shifted into (0,1).
    const double u = ((next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    return u;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() { return norm_quantile(uniform()); }

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

double Rng::gamma(double shape, double scale) {
    if (shape <= 0.0 || scale <= 0.0)
        throw Error(ErrorKind::BadInput, "gamma: shape and scale must be positive");
    if (shape < 1.0) {
        const double u = uniform();
        return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
}

double Rng::inverse_gamma(double shape, double rate) {
    return rate / gamma(shape, 1.0);
}

namespace {
double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double fa, double b,
                double fb, double m, double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = simpson(a, fa, b, fb, fm);
    return adaptive(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

} // namespace metaor
