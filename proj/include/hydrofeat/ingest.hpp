#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hydrofeat {

enum class VariableKind { temperature, precipitation, river_flow };

inline constexpr VariableKind all_variable_kinds[] = {
    VariableKind::temperature, VariableKind::precipitation, VariableKind::river_flow};

std::string_view to_string(VariableKind kind);

/// Parses "temperature", "precipitation" or "river_flow"; throws ConfigError otherwise.
VariableKind parse_variable_kind(std::string_view name);

struct StationRecord {
    std::string station_id;
    double latitude = 0.0;
    double longitude = 0.0;
    VariableKind variable_kind = VariableKind::temperature;

    bool operator==(const StationRecord&) const = default;
};

/// Monthly record aligned January..December from first_year onwards.
/// An empty optional marks a missing month.
struct MonthlySeries {
    StationRecord station;
    int first_year = 0;
    std::vector<std::optional<double>> values;

    int year_count() const { return static_cast<int>(values.size() / 12); }
    int last_year() const { return first_year + year_count() - 1; }

    /// Month slot for (year, month 1..12), or nullopt when outside the record.
    std::optional<double> at(int year, int month) const;

    bool operator==(const MonthlySeries&) const = default;
};

struct RejectedRow {
    std::size_t line = 0;
    std::string station_id;
    std::string reason;
};

struct MonthlyDataset {
    VariableKind variable_kind = VariableKind::temperature;
    std::vector<MonthlySeries> series;  // in order of first appearance
    std::vector<RejectedRow> rejected;
};

inline constexpr std::string_view default_missing_code = "-9999";

/// Loads the canonical CSV (station_id,lat,lon,year,m01..m12, one row per
/// station-year). Absent years inside a record become twelve missing slots.
/// Rows with unparseable numbers are dropped and listed in `rejected`.
MonthlyDataset load_monthly_dataset(const std::filesystem::path& path, VariableKind kind,
                                    std::string_view missing_code = default_missing_code);

MonthlyDataset parse_monthly_dataset(std::string_view text, VariableKind kind,
                                     std::string_view missing_code = default_missing_code);

/// Writes the canonical CSV; fully missing years are written as sentinel rows.
void write_monthly_dataset(const std::filesystem::path& path, const MonthlyDataset& dataset,
                           std::string_view missing_code = default_missing_code);

std::string format_monthly_dataset(const MonthlyDataset& dataset,
                                   std::string_view missing_code = default_missing_code);

} // namespace hydrofeat
