#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hydrofeat/table.hpp"

namespace hydrofeat {

/// Tukey boxplot with type-7 quartiles and 1.5 IQR whiskers.
struct BoxplotStats {
    double min_whisker = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max_whisker = 0.0;
    std::vector<double> outliers;
    std::size_t n = 0;
    double mean = 0.0;
};

/// Quantile by linear interpolation of order statistics (type 7). `sorted` must be ascending.
double quantile_type7(std::span<const double> sorted, double p);

BoxplotStats boxplot_stats(std::span<const double> values);

enum class Grouping { climate_class, climate_zone, region, global };

std::string_view to_string(Grouping grouping);

inline constexpr const char* unclassified_group = "unclassified";

/// Group key of a row, or nullopt when it lacks the label. Global rows map to "global".
std::optional<std::string> group_key(const FeatureRow& row, Grouping grouping);

/// Rows per group; rows without the label are counted under "unclassified",
/// so the counts always sum to rows.size().
std::map<std::string, std::size_t> group_counts(std::span<const FeatureRow> rows,
                                                Grouping grouping);

struct GroupSummary {
    Grouping grouping = Grouping::global;
    std::map<std::string, std::array<BoxplotStats, feature_count>> groups;
    /// Groups dropped by the representativeness filter, with their sizes.
    std::map<std::string, std::size_t> excluded;
};

/// Boxplot stats per (group, feature). Class and zone groupings keep only
/// groups with at least `min_count` rows; region and global keep all.
GroupSummary group_summarize(std::span<const FeatureRow> rows, Grouping grouping,
                             std::size_t min_count = default_min_group_size);

enum class RankAxis { per_column, per_row };

struct RankedMeanTable {
    Grouping grouping = Grouping::global;
    RankAxis axis = RankAxis::per_column;
    std::vector<std::string> groups;
    std::vector<std::array<double, feature_count>> means;
    /// 1 = smallest; ties share the smallest applicable rank.
    std::vector<std::array<int, feature_count>> ranks;
    static constexpr const char* tie_rule = "min";
};

/// Ascending min-ranks ("1 = smallest", ties share the lowest rank).
std::vector<int> min_ranks(std::span<const double> values);

RankedMeanTable ranked_mean_table(std::span<const FeatureRow> rows, Grouping grouping,
                                  RankAxis axis, std::size_t min_count = default_min_group_size);

struct Histogram {
    std::vector<double> edges;  // bin_count + 1 values
    std::vector<std::size_t> counts;
    /// Values below/above the range, already folded into the edge bins.
    std::size_t clamped_low = 0;
    std::size_t clamped_high = 0;
};

inline constexpr std::size_t default_histogram_bins = 30;

/// Equal-width bins, left-closed except the last, which is closed on both sides.
Histogram histogram(std::span<const double> values, std::size_t bin_count = default_histogram_bins,
                    std::optional<std::pair<double, double>> shared_range = std::nullopt);

struct CorrelationMatrix {
    /// Pearson correlations; NaN marks rows/columns of zero-variance features.
    std::array<std::array<double, feature_count>, feature_count> values{};
    std::size_t rows_used = 0;
};

CorrelationMatrix feature_correlations(std::span<const FeatureRow> rows);

/// Pearson correlations between arbitrary columns of equal length.
std::vector<std::vector<double>> correlation_matrix(const std::vector<std::vector<double>>& columns);

} // namespace hydrofeat
