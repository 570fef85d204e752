#pragma once

// Shared numeric kernels: normal/lognormal/truncated-normal distributions,
// a deterministic RNG toolkit, the continuous binomial extension, and
// adaptive quadrature. Everything here is reentrant and allocation-free.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace metaor {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Normal distribution
// ---------------------------------------------------------------------------

double norm_pdf(double x);
double norm_cdf(double x);

// Inverse standard normal CDF (Wichura's AS241, ~1e-15 accurate).
double norm_quantile(double p);

double norm_logpdf(double x, double mean, double sd);

// ---------------------------------------------------------------------------
// Lognormal helpers (parameterized by log-scale mean/sd)
// ---------------------------------------------------------------------------

double lognorm_cdf(double t, double log_mean, double log_sd);
double lognorm_mean(double log_mean, double log_sd);
double lognorm_var(double log_mean, double log_sd);
double lognorm_quantile(double p, double log_mean, double log_sd);

// ---------------------------------------------------------------------------
// Truncated normal on [lo, hi]
// ---------------------------------------------------------------------------

struct TruncNormal {
    double mean = 0.0;
    double sd = 1.0;
    double lo = 0.0;
    double hi = 0.0;

    bool point_mass() const { return !(lo < hi) || sd <= 0.0; }
    double pdf(double x) const;
    double logpdf(double x) const;
    // Log of the normalizing mass Phi((hi-mean)/sd) - Phi((lo-mean)/sd).
    double log_mass() const;
    double sample(double u01) const; // inverse-CDF given a uniform draw
};

// ---------------------------------------------------------------------------
// Continuous binomial extension: gamma-function binomial "pmf" evaluated at
// real-valued event counts s in [0, n].
// ---------------------------------------------------------------------------

double cont_binomial_logpmf(double s, double n, double p);

// ---------------------------------------------------------------------------
// Deterministic RNG: mt19937_64-backed with explicit inverse-CDF transforms
// so streams are bit-identical across platforms and standard libraries.
// ---------------------------------------------------------------------------

uint64_t splitmix64(uint64_t& state);

class Rng {
public:
    explicit Rng(uint64_t seed);

    // Uniform on (0, 1), never returning an endpoint.
    double uniform();
    double uniform(double lo, double hi);
    double normal();
    double normal(double mean, double sd);
    // Marsaglia-Tsang; shape > 0, scale is the usual Gamma scale.
    double gamma(double shape, double scale);
    // Inverse-gamma with density ~ x^{-shape-1} exp(-rate/x).
    double inverse_gamma(double shape, double rate);
    uint64_t next_u64();

private:
    uint64_t state_[312];
    int index_;
    void refill();
};

// ---------------------------------------------------------------------------
// Adaptive Simpson quadrature
// ---------------------------------------------------------------------------

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-10, int max_depth = 60);

// ---------------------------------------------------------------------------
// Error type shared across modules
// ---------------------------------------------------------------------------

enum class ErrorKind {
    NoUsableData,
    DegenerateCell,
    InvalidMeasurement,
    InvalidSummary,
    NoDonorStudies,
    InconsistentBounds,
    MissingObservedDeaths,
    DomainViolation,
    NonFiniteLikelihood,
    EmptySupport,
    InsufficientChains,
    GridTooCoarse,
    BadInput,
    Io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace metaor
