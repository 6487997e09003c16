#include "hydrofeat/series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hydrofeat/error.hpp"

namespace hydrofeat {

namespace {

// Season s of window year k covers three consecutive months starting at
// Dec(start+k-1) + 3s, counted from January of first_year.
long first_month_index(const MonthlySeries& series, int start_year, int k, int season) {
    const long dec_before = static_cast<long>(start_year + k - 1 - series.first_year) * 12 + 11;
    return dec_before + 3L * season;
}

} // namespace

std::variant<QuarterlySeries, NotQualified> aggregate_quarterly(const MonthlySeries& series,
                                                                Window window,
                                                                const WindowPolicy& policy) {
    if (window.years <= 0) {
        throw ParameterError("window length must be positive");
    }
    const long begin = first_month_index(series, window.start_year, 0, 0);
    const long end = begin + 12L * window.years;
    if (begin < 0 || end > static_cast<long>(series.values.size())) {
        return NotQualified{"window extends beyond record"};
    }

    QuarterlySeries out;
    out.station = series.station;
    out.first_winter_year = window.start_year;
    out.values.reserve(static_cast<std::size_t>(window.years) * seasons_per_year);
    int missing = 0;
    for (int k = 0; k < window.years; ++k) {
        for (int s = 0; s < seasons_per_year; ++s) {
            const long m0 = first_month_index(series, window.start_year, k, s);
            double sum = 0.0;
            int present = 0;
            for (long m = m0; m < m0 + 3; ++m) {
                if (const auto& v = series.values[static_cast<std::size_t>(m)]) {
                    sum += *v;
                    ++present;
                }
            }
            missing += 3 - present;
            if (present == 0 || missing > policy.max_missing_months) {
                return NotQualified{"missing months in window"};
            }
            out.values.push_back(sum / present);
        }
    }
    return out;
}

std::optional<Window> find_qualifying_window(const MonthlySeries& series,
                                             const WindowPolicy& policy) {
    const int years = policy.years;
    if (years <= 0 || series.values.empty()) {
        return std::nullopt;
    }
    // Latest start: Nov(start + years - 1) is the last month of the record.
    // Earliest start: Dec(start - 1) is the first December in the record.
    const int latest = series.last_year() - years + 1;
    const int earliest = series.first_year + 1;

    if (policy.max_missing_months == 0) {
        // Prefix counts make each candidate O(1).
        std::vector<int> missing_before(series.values.size() + 1, 0);
        for (std::size_t i = 0; i < series.values.size(); ++i) {
            missing_before[i + 1] = missing_before[i] + (series.values[i] ? 0 : 1);
        }
        for (int start = latest; start >= earliest; --start) {
            const long begin = first_month_index(series, start, 0, 0);
            const long end = begin + 12L * years;
            if (missing_before[static_cast<std::size_t>(end)] ==
                missing_before[static_cast<std::size_t>(begin)]) {
                return Window{start, years};
            }
        }
        return std::nullopt;
    }

    for (int start = latest; start >= earliest; --start) {
        const Window w{start, years};
        if (std::holds_alternative<QuarterlySeries>(aggregate_quarterly(series, w, policy))) {
            return w;
        }
    }
    return std::nullopt;
}

double mean(std::span<const double> values) {
    if (values.empty()) {
        throw LengthError("mean of empty sequence");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    if (values.size() < 2) {
        throw LengthError("sample variance needs at least two values");
    }
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - m) * (v - m);
    }
    return ss / static_cast<double>(values.size() - 1);
}

double sample_sd(std::span<const double> values) { return std::sqrt(sample_variance(values)); }

StandardizedSeries standardize(std::span<const double> values) {
    StandardizedSeries out;
    out.original_mean = mean(values);
    out.original_sd = sample_sd(values);
    // Relative guard: rounding leaves ~1e-16 spread on constant input.
    double scale = 0.0;
    for (double v : values) {
        scale = std::max(scale, std::abs(v));
    }
    if (!(out.original_sd > 1e-13 * std::max(scale, 1e-300))) {
        throw DegenerateError("zero variance");
    }
    out.values.reserve(values.size());
    for (double v : values) {
        out.values.push_back((v - out.original_mean) / out.original_sd);
    }
    return out;
}

std::vector<double> first_difference(std::span<const double> values) {
    if (values.size() < 2) {
        throw LengthError("first difference needs at least two values");
    }
    std::vector<double> out(values.size() - 1);
    for (std::size_t t = 0; t + 1 < values.size(); ++t) {
        out[t] = values[t + 1] - values[t];
    }
    return out;
}

} // namespace hydrofeat
