#include "hydrofeat/ingest.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "hydrofeat/error.hpp"
#include "hydrofeat/text.hpp"

namespace hydrofeat {

namespace {

constexpr std::string_view canonical_header[] = {"station_id", "lat", "lon", "year", "m01",
                                                 "m02",        "m03", "m04", "m05",  "m06",
                                                 "m07",        "m08", "m09", "m10",  "m11",
                                                 "m12"};
constexpr std::size_t column_count = std::size(canonical_header);

struct StationRows {
    StationRecord station;
    std::map<int, std::vector<std::optional<double>>> years;
};

} // namespace

std::string_view to_string(VariableKind kind) {
    switch (kind) {
    case VariableKind::temperature:
        return "temperature";
    case VariableKind::precipitation:
        return "precipitation";
    case VariableKind::river_flow:
        return "river_flow";
    }
    return "unknown";
}

VariableKind parse_variable_kind(std::string_view name) {
    for (auto kind : all_variable_kinds) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ConfigError("unknown variable kind '" + std::string(name) + "'");
}

std::optional<double> MonthlySeries::at(int year, int month) const {
    if (year < first_year || month < 1 || month > 12) {
        return std::nullopt;
    }
    const auto index = static_cast<std::size_t>(year - first_year) * 12 + (month - 1);
    if (index >= values.size()) {
        return std::nullopt;
    }
    return values[index];
}

MonthlyDataset parse_monthly_dataset(std::string_view text, VariableKind kind,
                                     std::string_view missing_code) {
    const auto lines = text::split_lines(text);
    std::size_t first = 0;
    while (first < lines.size() && text::trim(lines[first]).empty()) {
        ++first;
    }
    if (first == lines.size()) {
        throw FormatError("missing header row");
    }
    auto header_line = lines[first];
    if (header_line.substr(0, 3) == "\xEF\xBB\xBF") {
        header_line.remove_prefix(3);
    }
    const auto header = text::split_fields(header_line);
    if (header.size() != column_count ||
        !std::equal(header.begin(), header.end(), std::begin(canonical_header))) {
        throw FormatError("header does not match station_id,lat,lon,year,m01..m12");
    }

    // "-9999.0" must not slip through when the sentinel is "-9999".
    const auto numeric_sentinel = text::parse_double(missing_code);

    MonthlyDataset dataset;
    dataset.variable_kind = kind;
    std::vector<StationRows> stations;
    std::unordered_map<std::string, std::size_t> index_of;

    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        const auto line_no = i + 1;
        if (text::trim(lines[i]).empty()) {
            continue;
        }
        const auto fields = text::split_fields(lines[i]);
        const std::string id(fields.empty() ? std::string_view{} : fields[0]);
        if (fields.size() != column_count) {
            dataset.rejected.push_back({line_no, id, "expected 16 fields"});
            continue;
        }
        if (id.empty()) {
            dataset.rejected.push_back({line_no, id, "empty station_id"});
            continue;
        }
        const auto lat = text::parse_double(fields[1]);
        const auto lon = text::parse_double(fields[2]);
        const auto year = text::parse_long(fields[3]);
        if (!lat || !lon || !year) {
            dataset.rejected.push_back({line_no, id, "unparseable lat/lon/year"});
            continue;
        }
        if (*lat < -90.0 || *lat > 90.0 || *lon < -180.0 || *lon > 180.0) {
            throw DataError("station " + id + ": coordinates out of range on line " +
                            std::to_string(line_no));
        }

        std::vector<std::optional<double>> months(12);
        bool parse_failed = false;
        for (std::size_t m = 0; m < 12; ++m) {
            const auto cell = fields[4 + m];
            if (cell.empty() || cell == missing_code) {
                continue;
            }
            const auto value = text::parse_double(cell);
            if (!value) {
                parse_failed = true;
                break;
            }
            if (numeric_sentinel && *value == *numeric_sentinel) {
                continue;
            }
            months[m] = *value;
        }
        if (parse_failed) {
            dataset.rejected.push_back({line_no, id, "unparseable monthly value"});
            continue;
        }

        auto [it, inserted] = index_of.try_emplace(id, stations.size());
        if (inserted) {
            stations.push_back({StationRecord{id, *lat, *lon, kind}, {}});
        }
        auto& rows = stations[it->second];
        if (rows.station.latitude != *lat || rows.station.longitude != *lon) {
            throw DataError("station " + id + ": inconsistent coordinates on line " +
                            std::to_string(line_no));
        }
        const int y = static_cast<int>(*year);
        if (!rows.years.try_emplace(y, std::move(months)).second) {
            throw DataError("station " + id + ": duplicate year " + std::to_string(y) +
                            " on line " + std::to_string(line_no));
        }
    }

    dataset.series.reserve(stations.size());
    for (auto& rows : stations) {
        MonthlySeries series;
        series.station = rows.station;
        if (!rows.years.empty()) {
            const int first_year = rows.years.begin()->first;
            const int last_year = rows.years.rbegin()->first;
            series.first_year = first_year;
            series.values.assign(static_cast<std::size_t>(last_year - first_year + 1) * 12,
                                 std::nullopt);
            for (const auto& [year, months] : rows.years) {
                std::copy(months.begin(), months.end(),
                          series.values.begin() + (year - first_year) * 12);
            }
        }
        dataset.series.push_back(std::move(series));
    }
    return dataset;
}

MonthlyDataset load_monthly_dataset(const std::filesystem::path& path, VariableKind kind,
                                    std::string_view missing_code) {
    if (!std::filesystem::exists(path)) {
        throw DependencyError("input file not found: " + path.string());
    }
    return parse_monthly_dataset(text::read_file(path), kind, missing_code);
}

std::string format_monthly_dataset(const MonthlyDataset& dataset, std::string_view missing_code) {
    std::string out;
    for (std::size_t i = 0; i < column_count; ++i) {
        out += canonical_header[i];
        out += i + 1 < column_count ? ',' : '\n';
    }
    for (const auto& series : dataset.series) {
        const auto& st = series.station;
        for (int y = 0; y < series.year_count(); ++y) {
            out += st.station_id;
            out += ',' + text::format_double(st.latitude);
            out += ',' + text::format_double(st.longitude);
            out += ',' + std::to_string(series.first_year + y);
            for (int m = 0; m < 12; ++m) {
                const auto& v = series.values[static_cast<std::size_t>(y) * 12 + m];
                out += ',';
                out += v ? text::format_double(*v) : std::string(missing_code);
            }
            out += '\n';
        }
    }
    return out;
}

void write_monthly_dataset(const std::filesystem::path& path, const MonthlyDataset& dataset,
                           std::string_view missing_code) {
    text::write_file(path, format_monthly_dataset(dataset, missing_code));
}

} // namespace hydrofeat
