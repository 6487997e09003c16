#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hydrofeat/ingest.hpp"

namespace hydrofeat {

inline constexpr int seasons_per_year = 4;
inline constexpr int default_window_years = 39;

/// Seasonal 3-month means ordered winter (DJF), spring, summer, fall.
/// Winter of year Y is {Dec(Y-1), Jan(Y), Feb(Y)}.
struct QuarterlySeries {
    StationRecord station;
    int first_winter_year = 0;
    std::vector<double> values;
};

struct StandardizedSeries {
    std::vector<double> values;
    double original_mean = 0.0;
    double original_sd = 0.0;  // sample sd, n-1 denominator
};

struct Window {
    int start_year = 0;  // year of the first winter's January
    int years = default_window_years;

    bool operator==(const Window&) const = default;
};

struct NotQualified {
    std::string reason;
};

/// Station selection knobs. The default is the strict policy: the most recent
/// window with every month present.
struct WindowPolicy {
    int years = default_window_years;
    /// Missing months tolerated inside a window. A quarter with some months
    /// missing is averaged over the months present; a quarter with none
    /// present always disqualifies.
    int max_missing_months = 0;
};

std::variant<QuarterlySeries, NotQualified> aggregate_quarterly(const MonthlySeries& series,
                                                                Window window,
                                                                const WindowPolicy& policy = {});

/// Most recent window satisfying the policy, or nullopt.
std::optional<Window> find_qualifying_window(const MonthlySeries& series,
                                             const WindowPolicy& policy = {});

/// z-scores with the sample mean and sample sd. Throws DegenerateError when sd == 0.
StandardizedSeries standardize(std::span<const double> values);
inline StandardizedSeries standardize(const QuarterlySeries& series) {
    return standardize(series.values);
}

std::vector<double> first_difference(std::span<const double> values);

double mean(std::span<const double> values);
/// Sample variance (n-1 denominator).
double sample_variance(std::span<const double> values);
double sample_sd(std::span<const double> values);

} // namespace hydrofeat
