#include "hydrofeat/summary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hydrofeat/error.hpp"

namespace hydrofeat {

double quantile_type7(std::span<const double> sorted, double p) {
    if (sorted.empty()) {
        throw LengthError("quantile of empty sequence");
    }
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

BoxplotStats boxplot_stats(std::span<const double> values) {
    if (values.empty()) {
        throw LengthError("boxplot of empty sequence");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    BoxplotStats b;
    b.n = sorted.size();
    b.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(b.n);
    b.q1 = quantile_type7(sorted, 0.25);
    b.median = quantile_type7(sorted, 0.5);
    b.q3 = quantile_type7(sorted, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr;
    const double hi_fence = b.q3 + 1.5 * iqr;
    b.min_whisker = b.q1;
    b.max_whisker = b.q3;
    bool low_set = false;
    for (double v : sorted) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
            continue;
        }
        if (!low_set) {
            b.min_whisker = v;
            low_set = true;
        }
        b.max_whisker = v;
    }
    return b;
}

std::string_view to_string(Grouping grouping) {
    switch (grouping) {
    case Grouping::climate_class:
        return "climate_class";
    case Grouping::climate_zone:
        return "climate_zone";
    case Grouping::region:
        return "region";
    case Grouping::global:
        return "global";
    }
    return "unknown";
}

std::optional<std::string> group_key(const FeatureRow& row, Grouping grouping) {
    switch (grouping) {
    case Grouping::climate_class:
        if (row.climate) {
            return row.climate->class_code;
        }
        return std::nullopt;
    case Grouping::climate_zone:
        if (row.climate) {
            return std::string(1, row.climate->zone);
        }
        return std::nullopt;
    case Grouping::region:
        return row.region;
    case Grouping::global:
        return std::string("global");
    }
    return std::nullopt;
}

std::map<std::string, std::size_t> group_counts(std::span<const FeatureRow> rows,
                                                Grouping grouping) {
    std::map<std::string, std::size_t> counts;
    for (const auto& row : rows) {
        ++counts[group_key(row, grouping).value_or(unclassified_group)];
    }
    return counts;
}

namespace {

bool filtered(Grouping grouping) {
    return grouping == Grouping::climate_class || grouping == Grouping::climate_zone;
}

// Feature columns per eligible group, plus the groups that fell below the threshold.
struct Partition {
    std::map<std::string, std::array<std::vector<double>, feature_count>> columns;
    std::map<std::string, std::size_t> excluded;
};

Partition partition(std::span<const FeatureRow> rows, Grouping grouping, std::size_t min_count) {
    Partition out;
    for (const auto& row : rows) {
        const auto key = group_key(row, grouping);
        if (!key) {
            continue;
        }
        const auto values = row.features.as_array();
        auto& cols = out.columns[*key];
        for (std::size_t f = 0; f < feature_count; ++f) {
            cols[f].push_back(values[f]);
        }
    }
    if (filtered(grouping)) {
        std::map<std::string, std::size_t> counts;
        for (const auto& [key, cols] : out.columns) {
            counts[key] = cols[0].size();
        }
        const auto eligible = representativeness_filter(counts, min_count);
        for (const auto& [key, count] : counts) {
            if (!eligible.contains(key)) {
                out.excluded[key] = count;
                out.columns.erase(key);
            }
        }
    }
    return out;
}

} // namespace

GroupSummary group_summarize(std::span<const FeatureRow> rows, Grouping grouping,
                             std::size_t min_count) {
    auto parts = partition(rows, grouping, min_count);
    GroupSummary summary;
    summary.grouping = grouping;
    summary.excluded = std::move(parts.excluded);
    for (const auto& [key, cols] : parts.columns) {
        auto& stats = summary.groups[key];
        for (std::size_t f = 0; f < feature_count; ++f) {
            stats[f] = boxplot_stats(cols[f]);
        }
    }
    return summary;
}

std::vector<int> min_ranks(std::span<const double> values) {
    std::vector<int> ranks(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        int smaller = 0;
        for (double v : values) {
            smaller += v < values[i] ? 1 : 0;
        }
        ranks[i] = smaller + 1;
    }
    return ranks;
}

RankedMeanTable ranked_mean_table(std::span<const FeatureRow> rows, Grouping grouping,
                                  RankAxis axis, std::size_t min_count) {
    const auto parts = partition(rows, grouping, min_count);
    RankedMeanTable table;
    table.grouping = grouping;
    table.axis = axis;
    for (const auto& [key, cols] : parts.columns) {
        table.groups.push_back(key);
        std::array<double, feature_count> means{};
        for (std::size_t f = 0; f < feature_count; ++f) {
            // Same summation order as boxplot_stats, so the means agree exactly.
            std::vector<double> sorted = cols[f];
            std::sort(sorted.begin(), sorted.end());
            means[f] = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                       static_cast<double>(sorted.size());
        }
        table.means.push_back(means);
    }
    table.ranks.assign(table.groups.size(), {});
    if (axis == RankAxis::per_row) {
        for (std::size_t g = 0; g < table.groups.size(); ++g) {
            const auto r = min_ranks(table.means[g]);
            std::copy(r.begin(), r.end(), table.ranks[g].begin());
        }
    } else {
        for (std::size_t f = 0; f < feature_count; ++f) {
            std::vector<double> column;
            for (const auto& m : table.means) {
                column.push_back(m[f]);
            }
            const auto r = min_ranks(column);
            for (std::size_t g = 0; g < r.size(); ++g) {
                table.ranks[g][f] = r[g];
            }
        }
    }
    return table;
}

Histogram histogram(std::span<const double> values, std::size_t bin_count,
                    std::optional<std::pair<double, double>> shared_range) {
    if (values.empty()) {
        throw LengthError("histogram of empty sequence");
    }
    if (bin_count < 1) {
        throw ParameterError("histogram needs at least one bin");
    }
    Histogram h;
    double lo = 0.0;
    double hi = 0.0;
    if (shared_range) {
        std::tie(lo, hi) = *shared_range;
        if (!(lo < hi)) {
            throw ParameterError("histogram range must satisfy lo < hi");
        }
    } else {
        const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
        lo = *mn;
        hi = *mx;
        if (lo == hi) {
            const double eps = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo));
            h.edges = {lo, lo + eps};
            h.counts = {values.size()};
            return h;
        }
    }
    const double width = (hi - lo) / static_cast<double>(bin_count);
    h.edges.resize(bin_count + 1);
    for (std::size_t i = 0; i <= bin_count; ++i) {
        h.edges[i] = lo + width * static_cast<double>(i);
    }
    h.edges.back() = hi;
    h.counts.assign(bin_count, 0);
    for (double v : values) {
        std::size_t bin = 0;
        if (v < lo) {
            ++h.clamped_low;
        } else if (v > hi) {
            ++h.clamped_high;
            bin = bin_count - 1;
        } else {
            bin = std::min(static_cast<std::size_t>((v - lo) / width), bin_count - 1);
            // Guard against rounding across an edge.
            while (bin > 0 && v < h.edges[bin]) {
                --bin;
            }
            while (bin + 1 < bin_count && v >= h.edges[bin + 1]) {
                ++bin;
            }
        }
        ++h.counts[bin];
    }
    return h;
}

std::vector<std::vector<double>> correlation_matrix(
    const std::vector<std::vector<double>>& columns) {
    const auto p = columns.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::vector<double>> out(p, std::vector<double>(p, nan));
    if (p == 0) {
        return out;
    }
    const auto n = columns[0].size();
    std::vector<std::vector<double>> centred(p);
    std::vector<double> norm(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        if (columns[j].size() != n) {
            throw LengthError("correlation columns differ in length");
        }
        const double m = std::accumulate(columns[j].begin(), columns[j].end(), 0.0) /
                         static_cast<double>(n);
        centred[j].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            centred[j][i] = columns[j][i] - m;
            norm[j] += centred[j][i] * centred[j][i];
        }
    }
    for (std::size_t a = 0; a < p; ++a) {
        if (!(norm[a] > 0.0)) {
            continue;
        }
        out[a][a] = 1.0;
        for (std::size_t b = a + 1; b < p; ++b) {
            if (!(norm[b] > 0.0)) {
                continue;
            }
            double cross = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cross += centred[a][i] * centred[b][i];
            }
            const double r = std::clamp(cross / std::sqrt(norm[a] * norm[b]), -1.0, 1.0);
            out[a][b] = r;
            out[b][a] = r;
        }
    }
    return out;
}

CorrelationMatrix feature_correlations(std::span<const FeatureRow> rows) {
    std::vector<std::vector<double>> columns(feature_count);
    CorrelationMatrix m;
    for (const auto& row : rows) {
        const auto v = row.features.as_array();
        if (!std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
            continue;
        }
        for (std::size_t f = 0; f < feature_count; ++f) {
            columns[f].push_back(v[f]);
        }
        ++m.rows_used;
    }
    if (m.rows_used < 3) {
        throw LengthError("feature correlations need at least 3 complete rows");
    }
    const auto c = correlation_matrix(columns);
    for (std::size_t a = 0; a < feature_count; ++a) {
        for (std::size_t b = 0; b < feature_count; ++b) {
            m.values[a][b] = c[a][b];
        }
    }
    return m;
}

} // namespace hydrofeat
