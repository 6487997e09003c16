#include "hydrofeat/decomp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "hydrofeat/error.hpp"

namespace hydrofeat {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

double tricube(double u) {
    const double a = 1.0 - u * u * u;
    return a * a * a;
}

// Weighted least-squares polynomial in (x - x0) / scale; returns the intercept,
// i.e. the fitted value at x0. Drops to lower degrees when the normal
// equations are singular, as happens when the weight sits on too few points.
std::optional<double> local_poly_fit(std::span<const double> x, std::span<const double> y,
                                     std::span<const double> w, double x0, double scale,
                                     int degree) {
    if (scale <= 0.0) {
        scale = 1.0;
    }
    for (int d = degree; d >= 0; --d) {
        const int m = d + 1;
        std::array<std::array<double, 4>, 3> a{};  // augmented normal equations
        for (std::size_t j = 0; j < x.size(); ++j) {
            if (w[j] <= 0.0) {
                continue;
            }
            const double u = (x[j] - x0) / scale;
            std::array<double, 5> powers{1.0, u, u * u, u * u * u, u * u * u * u};
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < m; ++c) {
                    a[r][c] += w[j] * powers[r + c];
                }
                a[r][3] += w[j] * powers[r] * y[j];
            }
        }
        const double total = a[0][0];
        if (!(total > 0.0)) {
            return std::nullopt;
        }
        bool singular = false;
        for (int col = 0; col < m && !singular; ++col) {
            int pivot = col;
            for (int r = col + 1; r < m; ++r) {
                if (std::abs(a[r][col]) > std::abs(a[pivot][col])) {
                    pivot = r;
                }
            }
            if (std::abs(a[pivot][col]) <= 1e-10 * total) {
                singular = true;
                break;
            }
            std::swap(a[col], a[pivot]);
            for (int r = 0; r < m; ++r) {
                if (r == col) {
                    continue;
                }
                const double f = a[r][col] / a[col][col];
                for (int c = col; c < m; ++c) {
                    a[r][c] -= f * a[col][c];
                }
                a[r][3] -= f * a[col][3];
            }
        }
        if (singular) {
            continue;
        }
        return a[0][3] / a[0][0];
    }
    return std::nullopt;
}

// STL-style Loess on unit-spaced positions 1..n, evaluated at integer xs
// (which may lie one step outside the data). q is the window length.
std::optional<double> stl_loess_at(std::span<const double> y, long xs, long q, int degree,
                                   std::vector<double>& pos, std::vector<double>& w) {
    const long n = static_cast<long>(y.size());
    long nleft = 1;
    long nright = n;
    if (q < n) {
        nleft = std::clamp(xs - (q - 1) / 2, 1L, n - q + 1);
        nright = nleft + q - 1;
    }
    double h = static_cast<double>(std::max(xs - nleft, nright - xs));
    if (q > n) {
        h += static_cast<double>((q - n) / 2);
    }
    const double h9 = 0.999 * h;
    const double h1 = 0.001 * h;

    const auto count = static_cast<std::size_t>(nright - nleft + 1);
    pos.resize(count);
    w.resize(count);
    for (long j = nleft; j <= nright; ++j) {
        const auto k = static_cast<std::size_t>(j - nleft);
        pos[k] = static_cast<double>(j);
        const double r = std::abs(static_cast<double>(j - xs));
        if (r <= h9) {
            w[k] = r <= h1 ? 1.0 : tricube(r / h);
        } else {
            w[k] = 0.0;
        }
    }
    return local_poly_fit(pos, y.subspan(static_cast<std::size_t>(nleft - 1), count), w,
                          static_cast<double>(xs), std::max(h, 1.0), degree);
}

std::vector<double> stl_loess(std::span<const double> y, long q, int degree) {
    std::vector<double> out(y.size());
    std::vector<double> pos, w;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const auto fit = stl_loess_at(y, static_cast<long>(i) + 1, q, degree, pos, w);
        out[i] = fit ? *fit : y[i];
    }
    return out;
}

std::vector<double> moving_average(std::span<const double> x, std::size_t len) {
    std::vector<double> out(x.size() - len + 1);
    double sum = std::accumulate(x.begin(), x.begin() + static_cast<long>(len), 0.0);
    out[0] = sum / static_cast<double>(len);
    for (std::size_t i = 1; i < out.size(); ++i) {
        sum += x[i + len - 1] - x[i - 1];
        out[i] = sum / static_cast<double>(len);
    }
    return out;
}

int next_odd(int v) { return v % 2 == 0 ? v + 1 : v; }

void check_window(int window, const char* name) {
    if (window < 3 || window % 2 == 0) {
        throw ParameterError(std::string(name) + " must be odd and >= 3");
    }
}

void check_degree(int degree, const char* name) {
    if (degree < 0 || degree > 2) {
        throw ParameterError(std::string(name) + " must be 0, 1 or 2");
    }
}

} // namespace

std::vector<double> Decomposition::deseasonalized(std::span<const double> input) const {
    std::vector<double> out(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
        out[i] = input[i] - seasonal[i];
    }
    return out;
}

Decomposition classical_decompose(std::span<const double> series, int period) {
    if (period < 2) {
        throw ParameterError("period must be >= 2");
    }
    const auto n = series.size();
    const auto p = static_cast<std::size_t>(period);
    if (n < 2 * p) {
        throw LengthError("classical decomposition needs at least two full periods");
    }

    Decomposition d;
    d.method = DecompositionMethod::classical_additive;
    d.trend.assign(n, nan);

    // Centered moving average: 2xp for even p, plain p-term for odd p.
    const std::size_t half = p / 2;
    for (std::size_t t = half; t + half < n; ++t) {
        double sum = 0.0;
        if (p % 2 == 0) {
            sum = 0.5 * (series[t - half] + series[t + half]);
            for (std::size_t k = t - half + 1; k < t + half; ++k) {
                sum += series[k];
            }
        } else {
            for (std::size_t k = t - half; k <= t + half; ++k) {
                sum += series[k];
            }
        }
        d.trend[t] = sum / static_cast<double>(p);
    }

    std::vector<double> sums(p, 0.0);
    std::vector<int> counts(p, 0);
    for (std::size_t t = half; t + half < n; ++t) {
        sums[t % p] += series[t] - d.trend[t];
        ++counts[t % p];
    }
    d.seasonal_indices.resize(p);
    for (std::size_t s = 0; s < p; ++s) {
        d.seasonal_indices[s] = sums[s] / counts[s];
    }
    const double centre =
        std::accumulate(d.seasonal_indices.begin(), d.seasonal_indices.end(), 0.0) /
        static_cast<double>(p);
    for (auto& v : d.seasonal_indices) {
        v -= centre;
    }

    d.seasonal.resize(n);
    d.remainder.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        d.seasonal[t] = d.seasonal_indices[t % p];
        d.remainder[t] = series[t] - d.seasonal[t] - d.trend[t];
    }
    return d;
}

std::vector<double> loess_smooth(std::span<const double> x, std::span<const double> y,
                                 double span, int degree) {
    const auto n = x.size();
    if (y.size() != n) {
        throw LengthError("loess: x and y differ in length");
    }
    check_degree(degree, "loess degree");
    if (!(span > 0.0 && span <= 1.0)) {
        throw ParameterError("loess span must lie in (0, 1]");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x[i] > x[i - 1])) {
            throw ParameterError("loess: x must be strictly increasing");
        }
    }
    const auto q = static_cast<std::size_t>(std::floor(span * static_cast<double>(n) + 1e-9));
    if (q < static_cast<std::size_t>(degree) + 1 || q == 0) {
        throw FitError("loess: span covers fewer than degree + 1 points");
    }

    std::vector<double> out(n);
    std::vector<double> w;
    std::size_t lo = 0;  // window [lo, lo + q)
    for (std::size_t i = 0; i < n; ++i) {
        const double x0 = x[i];
        // Slide right while the point entering is strictly closer than the one leaving.
        while (lo + q < n && x[lo + q] - x0 < x0 - x[lo]) {
            ++lo;
        }
        const std::size_t hi = lo + q;
        const double h = std::max(x0 - x[lo], x[hi - 1] - x0);
        w.assign(q, 0.0);
        std::size_t positive = 0;
        for (std::size_t j = lo; j < hi; ++j) {
            const double r = std::abs(x[j] - x0);
            w[j - lo] = h > 0.0 ? (r < h ? tricube(r / h) : 0.0) : 1.0;
            positive += w[j - lo] > 0.0 ? 1 : 0;
        }
        if (positive < static_cast<std::size_t>(degree) + 1) {
            throw FitError("loess: fewer than degree + 1 weighted points in window");
        }
        const auto fit = local_poly_fit(x.subspan(lo, q), y.subspan(lo, q), w, x0,
                                        h > 0.0 ? h : 1.0, degree);
        if (!fit) {
            throw FitError("loess: singular local fit");
        }
        out[i] = *fit;
    }
    return out;
}

int conventional_trend_window(int period, int seasonal_window) {
    const double ratio = seasonal_window == 0 ? 1.0 : 1.0 - 1.5 / seasonal_window;
    return next_odd(static_cast<int>(std::ceil(1.5 * period / ratio - 1e-12)));
}

Decomposition stl_decompose(std::span<const double> series, const StlParams& params) {
    const int np = params.period;
    if (np < 2) {
        throw ParameterError("period must be >= 2");
    }
    const bool periodic = params.seasonal_window == 0;
    if (!periodic) {
        check_window(params.seasonal_window, "seasonal window");
    }
    const int nt = params.trend_window == 0
                       ? conventional_trend_window(np, params.seasonal_window)
                       : params.trend_window;
    const int nl = params.lowpass_window == 0 ? next_odd(np) : params.lowpass_window;
    check_window(nt, "trend window");
    check_window(nl, "low-pass window");
    check_degree(params.seasonal_degree, "seasonal degree");
    check_degree(params.trend_degree, "trend degree");
    check_degree(params.lowpass_degree, "low-pass degree");
    if (params.inner_iterations < 1) {
        throw ParameterError("inner iterations must be >= 1");
    }
    const auto n = series.size();
    const auto p = static_cast<std::size_t>(np);
    if (n < 2 * p) {
        throw LengthError("STL needs at least two full periods");
    }

    std::vector<double> trend(n, 0.0);
    std::vector<double> seasonal(n, 0.0);
    std::vector<double> detrended(n);
    std::vector<double> cycle(n + 2 * p, 0.0);
    std::vector<double> sub;
    std::vector<double> pos, w;

    for (int iter = 0; iter < params.inner_iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            detrended[i] = series[i] - trend[i];
        }

        // Cycle-subseries smoothing, extended one cycle at each end.
        for (std::size_t s = 0; s < p; ++s) {
            sub.clear();
            for (std::size_t i = s; i < n; i += p) {
                sub.push_back(detrended[i]);
            }
            const auto k = static_cast<long>(sub.size());
            if (periodic) {
                const double m = std::accumulate(sub.begin(), sub.end(), 0.0) /
                                 static_cast<double>(k);
                for (long j = 0; j <= k + 1; ++j) {
                    cycle[s + static_cast<std::size_t>(j) * p] = m;
                }
                continue;
            }
            for (long j = 0; j <= k + 1; ++j) {
                auto fit = stl_loess_at(sub, j, params.seasonal_window, params.seasonal_degree,
                                        pos, w);
                if (!fit) {
                    fit = sub[static_cast<std::size_t>(std::clamp(j, 1L, k) - 1)];
                }
                cycle[s + static_cast<std::size_t>(j) * p] = *fit;
            }
        }

        // Low-pass filter of the cycle-subseries: MA(p), MA(p), MA(3), then Loess.
        auto low = moving_average(cycle, p);
        low = moving_average(low, p);
        low = moving_average(low, 3);
        low = stl_loess(low, nl, params.lowpass_degree);

        for (std::size_t i = 0; i < n; ++i) {
            seasonal[i] = cycle[p + i] - low[i];
        }
        std::vector<double> deseason(n);
        for (std::size_t i = 0; i < n; ++i) {
            deseason[i] = series[i] - seasonal[i];
        }
        trend = stl_loess(deseason, nt, params.trend_degree);
    }

    Decomposition d;
    d.method = DecompositionMethod::stl;
    d.remainder.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.remainder[i] = series[i] - seasonal[i] - trend[i];
    }
    d.seasonal = std::move(seasonal);
    d.trend = std::move(trend);
    return d;
}

} // namespace hydrofeat
