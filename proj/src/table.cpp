#include "hydrofeat/table.hpp"

#include "hydrofeat/error.hpp"
#include "hydrofeat/text.hpp"

namespace hydrofeat {

namespace {

constexpr std::size_t leading_columns = 4;

std::string header() {
    std::string h = "station_id,variable_kind,lat,lon";
    for (auto name : feature_names) {
        h += ',';
        h += name;
    }
    return h;
}

} // namespace

std::string format_feature_table(const FeatureTable& table) {
    std::string out = header() + '\n';
    for (const auto& row : table.rows) {
        out += row.station.station_id;
        out += ',';
        out += to_string(table.variable_kind);
        out += ',' + text::format_double(row.station.latitude);
        out += ',' + text::format_double(row.station.longitude);
        for (double v : row.features.as_array()) {
            out += ',' + text::format_double(v);
        }
        out += '\n';
    }
    return out;
}

FeatureTable parse_feature_table(std::string_view contents) {
    const auto lines = text::split_lines(contents);
    if (lines.empty() || text::trim(lines[0]) != header()) {
        throw FormatError("feature table header mismatch");
    }
    FeatureTable table;
    bool kind_seen = false;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) {
            continue;
        }
        const auto fields = text::split_fields(lines[i]);
        if (fields.size() != leading_columns + feature_count) {
            throw FormatError("feature table line " + std::to_string(i + 1) +
                              ": wrong field count");
        }
        const auto kind = parse_variable_kind(fields[1]);
        if (kind_seen && kind != table.variable_kind) {
            throw DataError("feature table mixes variable kinds");
        }
        table.variable_kind = kind;
        kind_seen = true;

        FeatureRow row;
        row.station.station_id = std::string(fields[0]);
        row.station.variable_kind = kind;
        const auto lat = text::parse_double(fields[2]);
        const auto lon = text::parse_double(fields[3]);
        if (!lat || !lon) {
            throw FormatError("feature table line " + std::to_string(i + 1) +
                              ": bad coordinates");
        }
        row.station.latitude = *lat;
        row.station.longitude = *lon;
        std::array<double, feature_count> values{};
        for (std::size_t f = 0; f < feature_count; ++f) {
            const auto v = text::parse_double(fields[leading_columns + f]);
            if (!v) {
                throw FormatError("feature table line " + std::to_string(i + 1) +
                                  ": bad value for " + std::string(feature_names[f]));
            }
            values[f] = *v;
        }
        row.features = FeatureVector::from_array(values);
        table.rows.push_back(std::move(row));
    }
    return table;
}

FeatureTable load_feature_table(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw DependencyError("missing feature table " + path.string());
    }
    return parse_feature_table(text::read_file(path));
}

void label_rows(FeatureTable& table, const ClimateGrid& grid, const RegionConfig& regions,
                int search_radius_cells) {
    for (auto& row : table.rows) {
        const auto& st = row.station;
        row.climate = grid.classify(st.latitude, st.longitude, search_radius_cells);
        row.region = assign_region(regions, table.variable_kind, st.latitude, st.longitude);
    }
}

std::string format_labels(const FeatureTable& table) {
    std::string out = "station_id,class,zone,region\n";
    for (const auto& row : table.rows) {
        out += row.station.station_id;
        out += ',';
        if (row.climate) {
            out += row.climate->class_code;
            out += ',';
            out += row.climate->zone;
        } else {
            out += ',';
        }
        out += ',';
        out += row.region.value_or("");
        out += '\n';
    }
    return out;
}

} // namespace hydrofeat
