#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "hydrofeat/decomp.hpp"
#include "hydrofeat/series.hpp"

namespace hydrofeat {

inline constexpr std::size_t feature_count = 8;

/// Column names of the feature table, in declaration order. This order is
/// also the tie-break order wherever features are ranked.
inline constexpr std::array<std::string_view, feature_count> feature_names = {
    "lag1_ac",      "ac_summary", "seasonal_ac",    "temp_variation",
    "spec_entropy", "hurst",      "trend_strength", "seasonality_strength"};

struct FeatureVector {
    double lag1_autocorrelation = 0.0;
    double autocorrelation_summary = 0.0;
    double seasonal_autocorrelation = 0.0;
    double temporal_variation = 0.0;
    double spectral_entropy = 0.0;
    double hurst_exponent = 0.0;
    double trend_strength = 0.0;
    double seasonality_strength = 0.0;

    std::array<double, feature_count> as_array() const;
    static FeatureVector from_array(const std::array<double, feature_count>& values);

    /// True when every declared range holds.
    bool within_bounds() const;

    bool operator==(const FeatureVector&) const = default;
};

/// Fractional Gaussian noise fitted by profile likelihood.
struct FgnModel {
    double hurst = 0.5;
    double mu = 0.0;
    double sigma = 1.0;
    double log_likelihood = 0.0;
};

/// Sample autocorrelations r_1..r_max_lag (biased, common-denominator form),
/// computed through a zero-padded FFT.
std::vector<double> sample_acf(std::span<const double> values, std::size_t max_lag);

struct AcfFeatures {
    double lag1 = 0.0;
    double summary = 0.0;  // sum of r_k^2 for k = 1..10
    double lag4 = 0.0;
};

AcfFeatures acf_features(std::span<const double> standardized);

/// Sample sd of the first differences.
double temporal_variation(std::span<const double> standardized);

struct SpectralOptions {
    /// Half-width m of a modified Daniell smoother on the periodogram; 0 keeps it raw.
    int daniell_half_width = 0;
};

/// Raw periodogram I(j/n) for j = 1..floor(n/2) of the demeaned series.
std::vector<double> periodogram(std::span<const double> values);

/// Shannon entropy of the normalized spectral estimate over ln(floor(n/2)).
double spectral_entropy(std::span<const double> values, const SpectralOptions& options = {});

double fgn_autocorrelation(long lag, double hurst);

/// Exact Gaussian log-likelihood of fGn at `hurst` with mean and scale profiled
/// out (GLS mean, sigma^2 = residual quadratic form / n), via Durbin-Levinson.
FgnModel fgn_profile_likelihood(std::span<const double> values, double hurst);

struct HurstSearch {
    double lower = 0.01;
    double upper = 0.99;
    double grid_step = 0.01;
    double tolerance = 1e-4;
};

/// Maximum-likelihood Hurst exponent: coarse grid, then golden-section
/// refinement around the best grid point. Saturates at the search bounds.
FgnModel hurst_ml(std::span<const double> deseasonalized, const HurstSearch& search = {});

/// Exact fGn sample through the Cholesky factor of its Toeplitz covariance.
std::vector<double> simulate_fgn(std::size_t n, double hurst, std::uint64_t seed);

struct Strengths {
    double trend = 0.0;
    double seasonality = 0.0;
};

/// One minus the remainder variance over the variance of trend + remainder
/// (resp. seasonal + remainder), clamped to [0, 1].
Strengths strengths(std::span<const double> series, const Decomposition& stl);

struct FeatureOptions {
    StlParams stl;
    SpectralOptions spectral;
    HurstSearch hurst;
    int period = 4;
};

FeatureVector extract_features(std::span<const double> values, const FeatureOptions& options = {});

/// As above; errors carry the station id.
FeatureVector extract_features(const QuarterlySeries& series, const FeatureOptions& options = {});

} // namespace hydrofeat
