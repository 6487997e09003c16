#include "hydrofeat/features.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "fft.hpp"
#include "hydrofeat/error.hpp"

namespace hydrofeat {

namespace {

void check_hurst(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
        throw DomainError("Hurst parameter must lie in (0, 1)");
    }
}

double sum_of_squares_about_mean(std::span<const double> values, double m) {
    double ss = 0.0;
    for (double v : values) {
        ss += (v - m) * (v - m);
    }
    return ss;
}

} // namespace

std::array<double, feature_count> FeatureVector::as_array() const {
    return {lag1_autocorrelation, autocorrelation_summary, seasonal_autocorrelation,
            temporal_variation,   spectral_entropy,        hurst_exponent,
            trend_strength,       seasonality_strength};
}

FeatureVector FeatureVector::from_array(const std::array<double, feature_count>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

bool FeatureVector::within_bounds() const {
    const auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    return in(lag1_autocorrelation, -1.0, 1.0) && in(autocorrelation_summary, 0.0, 10.0) &&
           in(seasonal_autocorrelation, -1.0, 1.0) && temporal_variation >= 0.0 &&
           std::isfinite(temporal_variation) && in(spectral_entropy, 0.0, 1.0) &&
           hurst_exponent > 0.0 && hurst_exponent < 1.0 && in(trend_strength, 0.0, 1.0) &&
           in(seasonality_strength, 0.0, 1.0);
}

std::vector<double> sample_acf(std::span<const double> values, std::size_t max_lag) {
    const auto n = values.size();
    if (max_lag >= n) {
        throw LengthError("max_lag must be smaller than the series length");
    }
    const double m = mean(values);
    const double c0 = sum_of_squares_about_mean(values, m);
    double scale = 0.0;
    for (double v : values) {
        scale = std::max(scale, std::abs(v - m));
    }
    if (!(c0 > 0.0) || scale == 0.0) {
        throw DegenerateError("zero variance");
    }

    // Zero padding to >= 2n turns the circular correlation into the linear one.
    const std::size_t padded = std::bit_ceil(2 * n);
    std::vector<double> centred(padded, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        centred[t] = values[t] - m;
    }
    auto bins = detail::real_fft(centred);
    for (auto& b : bins) {
        b = std::norm(b);
    }
    const auto acov = detail::inverse_real_fft(bins, padded);
    const double c0_fft = acov[0];

    std::vector<double> r(max_lag);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        r[k - 1] = acov[k] / c0_fft;
    }
    return r;
}

AcfFeatures acf_features(std::span<const double> standardized) {
    if (standardized.size() < 12) {
        throw LengthError("autocorrelation features need at least 12 values");
    }
    const auto r = sample_acf(standardized, 10);
    AcfFeatures out;
    out.lag1 = r[0];
    out.lag4 = r[3];
    for (double v : r) {
        out.summary += v * v;
    }
    return out;
}

double temporal_variation(std::span<const double> standardized) {
    if (standardized.size() < 3) {
        throw LengthError("temporal variation needs at least 3 values");
    }
    return sample_sd(first_difference(standardized));
}

std::vector<double> periodogram(std::span<const double> values) {
    const auto n = values.size();
    const double m = mean(values);
    std::vector<double> centred(n);
    for (std::size_t t = 0; t < n; ++t) {
        centred[t] = values[t] - m;
    }
    const auto bins = detail::real_fft(centred);
    std::vector<double> out(n / 2);
    for (std::size_t j = 1; j <= n / 2; ++j) {
        out[j - 1] = std::norm(bins[j]) / static_cast<double>(n);
    }
    return out;
}

double spectral_entropy(std::span<const double> values, const SpectralOptions& options) {
    const auto n = values.size();
    if (n < 8) {
        throw LengthError("spectral entropy needs at least 8 values");
    }
    if (options.daniell_half_width < 0) {
        throw ParameterError("Daniell half-width must be >= 0");
    }
    auto spec = periodogram(values);
    const auto count = static_cast<long>(spec.size());

    if (const int half = options.daniell_half_width; half > 0) {
        // The full periodogram is symmetric (I_{-j} = I_j, I_{n-j} = I_j) and
        // I_0 = 0 after demeaning, so the kernel wraps by reflection.
        const auto nn = static_cast<long>(n);
        const auto ordinate = [&](long j) {
            j = ((j % nn) + nn) % nn;
            if (j > nn / 2) {
                j = nn - j;
            }
            return j == 0 ? 0.0 : spec[static_cast<std::size_t>(j - 1)];
        };
        std::vector<double> smoothed(spec.size());
        for (long j = 1; j <= count; ++j) {
            double acc = 0.0;
            for (long k = -half; k <= half; ++k) {
                const double weight = (k == -half || k == half) ? 0.5 : 1.0;
                acc += weight * ordinate(j + k);
            }
            smoothed[static_cast<std::size_t>(j - 1)] = acc / (2.0 * half);
        }
        spec = std::move(smoothed);
    }

    double total = 0.0;
    for (double v : spec) {
        total += v;
    }
    double scale = 0.0;
    const double m = mean(values);
    for (double v : values) {
        scale = std::max(scale, std::abs(v - m));
    }
    if (!(total > 0.0) || scale == 0.0) {
        throw DegenerateError("zero variance");
    }
    double entropy = 0.0;
    for (double v : spec) {
        const double p = v / total;
        if (p > 0.0) {
            entropy -= p * std::log(p);
        }
    }
    return std::clamp(entropy / std::log(static_cast<double>(count)), 0.0, 1.0);
}

double fgn_autocorrelation(long lag, double hurst) {
    check_hurst(hurst);
    if (lag == 0) {
        return 1.0;
    }
    const double k = static_cast<double>(std::abs(lag));
    const double e = 2.0 * hurst;
    return 0.5 * (std::pow(k + 1.0, e) - 2.0 * std::pow(k, e) + std::pow(k - 1.0, e));
}

FgnModel fgn_profile_likelihood(std::span<const double> values, double hurst) {
    check_hurst(hurst);
    const auto n = values.size();
    if (n < 2) {
        throw LengthError("fGn likelihood needs at least two values");
    }
    std::vector<double> rho(n);
    for (std::size_t k = 0; k < n; ++k) {
        rho[k] = fgn_autocorrelation(static_cast<long>(k), hurst);
    }

    // Durbin-Levinson: phi holds the order-t prediction coefficients,
    // phi[j-1] multiplying the value j steps back. Innovations of x and of the
    // all-ones vector yield x'R^-1 x, 1'R^-1 x and 1'R^-1 1 in one pass.
    std::vector<double> phi, prev;
    phi.reserve(n);
    prev.reserve(n);
    double variance = 1.0;
    double log_det = 0.0;
    double xx = 0.0;
    double ox = 0.0;
    double oo = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) {
            double num = rho[t];
            for (std::size_t j = 1; j < t; ++j) {
                num -= prev[j - 1] * rho[t - j];
            }
            const double reflection = num / variance;
            phi.assign(t, 0.0);
            for (std::size_t j = 1; j < t; ++j) {
                phi[j - 1] = prev[j - 1] - reflection * prev[t - j - 1];
            }
            phi[t - 1] = reflection;
            variance *= 1.0 - reflection * reflection;
            std::swap(phi, prev);
        }
        if (!(variance > 0.0) || !std::isfinite(variance)) {
            throw ConditioningError("fGn correlation matrix is numerically singular");
        }
        double pred_x = 0.0;
        double pred_o = 0.0;
        for (std::size_t j = 1; j <= t; ++j) {
            pred_x += prev[j - 1] * values[t - j];
            pred_o += prev[j - 1];
        }
        const double ex = values[t] - pred_x;
        const double eo = 1.0 - pred_o;
        xx += ex * ex / variance;
        ox += eo * ex / variance;
        oo += eo * eo / variance;
        log_det += std::log(variance);
    }

    FgnModel model;
    model.hurst = hurst;
    model.mu = ox / oo;
    const double quad = xx - ox * ox / oo;
    if (!(quad > 0.0)) {
        throw DegenerateError("zero variance");
    }
    const double dn = static_cast<double>(n);
    const double sigma2 = quad / dn;
    model.sigma = std::sqrt(sigma2);
    model.log_likelihood =
        -0.5 * dn * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0) - 0.5 * log_det;
    if (!std::isfinite(model.log_likelihood)) {
        throw ConditioningError("non-finite fGn likelihood");
    }
    return model;
}

FgnModel hurst_ml(std::span<const double> deseasonalized, const HurstSearch& search) {
    if (!(search.lower > 0.0 && search.upper < 1.0 && search.lower < search.upper) ||
        !(search.grid_step > 0.0) || !(search.tolerance > 0.0)) {
        throw ParameterError("invalid Hurst search settings");
    }
    if (deseasonalized.size() < 2) {
        throw LengthError("Hurst estimation needs at least two values");
    }
    {
        const double m = mean(deseasonalized);
        double spread = 0.0;
        double scale = 0.0;
        for (double v : deseasonalized) {
            spread = std::max(spread, std::abs(v - m));
            scale = std::max(scale, std::abs(v));
        }
        if (!(spread > 1e-13 * scale)) {
            throw DegenerateError("zero variance");
        }
    }

    const auto grid_points =
        static_cast<int>(std::floor((search.upper - search.lower) / search.grid_step + 1e-9));
    FgnModel best = fgn_profile_likelihood(deseasonalized, search.lower);
    for (int i = 1; i <= grid_points; ++i) {
        const double h = std::min(search.lower + i * search.grid_step, search.upper);
        auto model = fgn_profile_likelihood(deseasonalized, h);
        if (model.log_likelihood > best.log_likelihood) {
            best = model;
        }
    }
    if (search.lower + grid_points * search.grid_step < search.upper - 1e-12) {
        auto model = fgn_profile_likelihood(deseasonalized, search.upper);
        if (model.log_likelihood > best.log_likelihood) {
            best = model;
        }
    }

    // Golden-section refinement inside the neighbouring grid cells.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = std::max(search.lower, best.hurst - search.grid_step);
    double b = std::min(search.upper, best.hurst + search.grid_step);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    auto fc = fgn_profile_likelihood(deseasonalized, c);
    auto fd = fgn_profile_likelihood(deseasonalized, d);
    while (b - a > search.tolerance) {
        if (fc.log_likelihood >= fd.log_likelihood) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = fgn_profile_likelihood(deseasonalized, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = fgn_profile_likelihood(deseasonalized, d);
        }
    }
    const auto& refined = fc.log_likelihood >= fd.log_likelihood ? fc : fd;
    return refined.log_likelihood > best.log_likelihood ? refined : best;
}

std::vector<double> simulate_fgn(std::size_t n, double hurst, std::uint64_t seed) {
    check_hurst(hurst);
    if (n < 2) {
        throw LengthError("simulate_fgn needs n >= 2");
    }
    const auto size = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd cov(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        for (Eigen::Index j = 0; j < size; ++j) {
            cov(i, j) = fgn_autocorrelation(static_cast<long>(i - j), hurst);
        }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw ConditioningError("fGn covariance is not positive definite");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        z(i) = normal(rng);
    }
    const Eigen::VectorXd x = llt.matrixL() * z;
    return std::vector<double>(x.data(), x.data() + size);
}

Strengths strengths(std::span<const double> series, const Decomposition& stl) {
    const auto n = series.size();
    if (stl.seasonal.size() != n || stl.trend.size() != n || stl.remainder.size() != n) {
        throw LengthError("decomposition does not match the series length");
    }
    std::vector<double> trend_plus(n);
    std::vector<double> seasonal_plus(n);
    for (std::size_t t = 0; t < n; ++t) {
        trend_plus[t] = stl.trend[t] + stl.remainder[t];
        seasonal_plus[t] = stl.seasonal[t] + stl.remainder[t];
    }
    const double var_r = sample_variance(stl.remainder);
    const double var_tr = sample_variance(trend_plus);
    const double var_sr = sample_variance(seasonal_plus);
    if (!(var_tr > 0.0) || !(var_sr > 0.0)) {
        throw DegenerateError("degenerate decomposition");
    }
    return {std::clamp(1.0 - var_r / var_tr, 0.0, 1.0),
            std::clamp(1.0 - var_r / var_sr, 0.0, 1.0)};
}

FeatureVector extract_features(std::span<const double> values, const FeatureOptions& options) {
    const auto z = standardize(values);
    const auto acf = acf_features(z.values);

    FeatureVector f;
    f.lag1_autocorrelation = acf.lag1;
    f.autocorrelation_summary = acf.summary;
    f.seasonal_autocorrelation = acf.lag4;
    f.temporal_variation = temporal_variation(z.values);
    f.spectral_entropy = spectral_entropy(z.values, options.spectral);

    const auto classical = classical_decompose(z.values, options.period);
    f.hurst_exponent = hurst_ml(classical.deseasonalized(z.values), options.hurst).hurst;

    StlParams stl_params = options.stl;
    stl_params.period = options.period;
    const auto stl = stl_decompose(z.values, stl_params);
    const auto s = strengths(z.values, stl);
    f.trend_strength = s.trend;
    f.seasonality_strength = s.seasonality;
    return f;
}

FeatureVector extract_features(const QuarterlySeries& series, const FeatureOptions& options) {
    try {
        return extract_features(series.values, options);
    } catch (Error& e) {
        e.attach_station(series.station.station_id);
        throw;
    }
}

} // namespace hydrofeat
