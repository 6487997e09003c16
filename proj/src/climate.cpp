#include "hydrofeat/climate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "hydrofeat/error.hpp"
#include "hydrofeat/text.hpp"

namespace hydrofeat {

namespace {

constexpr std::string_view koppen_tail_letters = "WSfswmhkabcdFT";

// Coarse continental boxes per variable kind, not surveyed coordinates.
// Replace with a surveyed config for serious work.
constexpr std::string_view default_regions_json = R"({
  "approximate": true,
  "regions": [
    {"id": "T1", "variable_kind": "temperature", "boxes": [{"south": 25, "north": 55, "west": -130, "east": -60}]},
    {"id": "T2", "variable_kind": "temperature", "boxes": [{"south": 35, "north": 72, "west": -12, "east": 45}]},
    {"id": "T3", "variable_kind": "temperature", "boxes": [{"south": 20, "north": 55, "west": 100, "east": 145}]},
    {"id": "P1", "variable_kind": "precipitation", "boxes": [{"south": 15, "north": 60, "west": -130, "east": -55}]},
    {"id": "P2", "variable_kind": "precipitation", "boxes": [{"south": -40, "north": 5, "west": -80, "east": -35}]},
    {"id": "P3", "variable_kind": "precipitation", "boxes": [{"south": 35, "north": 72, "west": -12, "east": 45}]},
    {"id": "P4", "variable_kind": "precipitation", "boxes": [{"south": -15, "north": 15, "west": -20, "east": 45}]},
    {"id": "P5", "variable_kind": "precipitation", "boxes": [{"south": -35, "north": -15, "west": 10, "east": 40}]},
    {"id": "P6", "variable_kind": "precipitation", "boxes": [{"south": 5, "north": 35, "west": 65, "east": 92}]},
    {"id": "P7", "variable_kind": "precipitation", "boxes": [{"south": 20, "north": 55, "west": 100, "east": 145}]},
    {"id": "P8", "variable_kind": "precipitation", "boxes": [{"south": -45, "north": -10, "west": 110, "east": 155}]},
    {"id": "R1", "variable_kind": "river_flow", "boxes": [{"south": 25, "north": 60, "west": -130, "east": -60}]},
    {"id": "R2", "variable_kind": "river_flow", "boxes": [{"south": -35, "north": 5, "west": -75, "east": -35}]},
    {"id": "R3", "variable_kind": "river_flow", "boxes": [{"south": 35, "north": 72, "west": -12, "east": 45}]}
  ]
})";

} // namespace

bool is_koppen_code(std::string_view code) {
    if (code.size() < 2 || code.size() > 4) {
        return false;
    }
    if (code[0] < 'A' || code[0] > 'E') {
        return false;
    }
    return std::all_of(code.begin() + 1, code.end(), [](char c) {
        return koppen_tail_letters.find(c) != std::string_view::npos;
    });
}

ClimateGrid::ClimateGrid(double resolution) : resolution_(resolution) {
    if (!(resolution > 0.0) || resolution > 180.0) {
        throw ParameterError("grid resolution must lie in (0, 180]");
    }
}

long ClimateGrid::column_count() const {
    return static_cast<long>(std::llround(360.0 / resolution_));
}

long ClimateGrid::row_of(double lat) const {
    const long rows = static_cast<long>(std::llround(180.0 / resolution_));
    return std::clamp(static_cast<long>(std::floor((lat + 90.0) / resolution_)), 0L, rows - 1);
}

long ClimateGrid::col_of(double lon) const {
    const long cols = column_count();
    const long col = static_cast<long>(std::floor((lon + 180.0) / resolution_));
    return ((col % cols) + cols) % cols;
}

double ClimateGrid::lat_center(long row) const { return -90.0 + (row + 0.5) * resolution_; }
double ClimateGrid::lon_center(long col) const { return -180.0 + (col + 0.5) * resolution_; }

void ClimateGrid::add_cell(double lat, double lon, std::string_view class_code) {
    if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
        throw FormatError("grid cell coordinates out of range");
    }
    const Key key{row_of(lat), col_of(lon)};
    constexpr double snap = 1e-6;
    if (std::abs(lat - lat_center(key.row)) > snap ||
        std::abs(lon - lon_center(key.col)) > snap) {
        throw FormatError("coordinate (" + text::format_double(lat) + ", " +
                          text::format_double(lon) + ") is not a grid cell center");
    }
    if (!is_koppen_code(class_code)) {
        throw DataError("unknown climate class '" + std::string(class_code) + "'");
    }
    auto [it, inserted] = cells_.try_emplace(key, class_code);
    if (!inserted && it->second != class_code) {
        throw DataError("conflicting classes for cell (" + text::format_double(lat) + ", " +
                        text::format_double(lon) + ")");
    }
}

std::optional<std::string> ClimateGrid::cell_at(double lat, double lon) const {
    const auto it = cells_.find({row_of(lat), col_of(lon)});
    if (it == cells_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<ClimateLabel> ClimateGrid::classify(double lat, double lon, int radius_cells) const {
    const long row = row_of(lat);
    const long col = col_of(lon);
    const long rows = static_cast<long>(std::llround(180.0 / resolution_));
    const long cols = column_count();

    const std::string* best = nullptr;
    double best_distance = std::numeric_limits<double>::infinity();
    for (long dr = -radius_cells; dr <= radius_cells; ++dr) {
        const long r = row + dr;
        if (r < 0 || r >= rows) {
            continue;
        }
        for (long dc = -radius_cells; dc <= radius_cells; ++dc) {
            const long c = ((col + dc) % cols + cols) % cols;
            const auto it = cells_.find({r, c});
            if (it == cells_.end()) {
                continue;
            }
            double dlon = std::abs(lon - lon_center(c));
            dlon = std::min(dlon, 360.0 - dlon);
            const double dlat = lat - lat_center(r);
            const double distance = std::hypot(dlat, dlon);
            // Strict comparison keeps the first hit in (row, col) scan order on ties.
            if (distance < best_distance) {
                best_distance = distance;
                best = &it->second;
            }
        }
    }
    if (best == nullptr) {
        return std::nullopt;
    }
    return ClimateLabel{*best, (*best)[0]};
}

ClimateGrid parse_climate_grid(std::string_view text_in, double resolution) {
    ClimateGrid grid(resolution);
    const auto lines = text::split_lines(text_in);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::trim(lines[i]).empty()) {
            continue;
        }
        const auto fields = text::split_fields(lines[i]);
        if (fields.size() != 3) {
            throw FormatError("climate grid line " + std::to_string(i + 1) +
                              ": expected lat,lon,class");
        }
        const auto lat = text::parse_double(fields[0]);
        const auto lon = text::parse_double(fields[1]);
        if (!lat || !lon) {
            if (i == 0 && fields[0] == "lat") {
                continue;  // header
            }
            throw FormatError("climate grid line " + std::to_string(i + 1) +
                              ": unparseable coordinates");
        }
        grid.add_cell(*lat, *lon, fields[2]);
    }
    return grid;
}

ClimateGrid load_climate_grid(const std::filesystem::path& path, double resolution) {
    return parse_climate_grid(text::read_file(path), resolution);
}

bool BoundingBox::contains(double lat, double lon) const {
    if (lat < south || lat > north) {
        return false;
    }
    if (west <= east) {
        return lon >= west && lon <= east;
    }
    return lon >= west || lon <= east;
}

RegionConfig parse_region_config(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("region config: ") + e.what());
    }
    RegionConfig config;
    try {
        config.approximate = doc.value("approximate", false);
        for (const auto& r : doc.at("regions")) {
            Region region;
            region.id = r.at("id").get<std::string>();
            region.variable_kind = parse_variable_kind(r.at("variable_kind").get<std::string>());
            for (const auto& b : r.at("boxes")) {
                BoundingBox box{b.at("south").get<double>(), b.at("north").get<double>(),
                                b.at("west").get<double>(), b.at("east").get<double>()};
                if (!(box.south < box.north)) {
                    throw DataError("region " + region.id + ": box south must be below north");
                }
                region.boxes.push_back(box);
            }
            for (const auto& existing : config.regions) {
                if (existing.id == region.id && existing.variable_kind == region.variable_kind) {
                    throw DataError("duplicate region id " + region.id);
                }
            }
            config.regions.push_back(std::move(region));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("region config: ") + e.what());
    }
    return config;
}

RegionConfig load_region_config(const std::filesystem::path& path) {
    return parse_region_config(text::read_file(path));
}

RegionConfig default_region_config() { return parse_region_config(default_regions_json); }

std::optional<std::string> assign_region(const RegionConfig& config, VariableKind kind,
                                         double lat, double lon) {
    for (const auto& region : config.regions) {
        if (region.variable_kind != kind) {
            continue;
        }
        for (const auto& box : region.boxes) {
            if (box.contains(lat, lon)) {
                return region.id;
            }
        }
    }
    return std::nullopt;
}

std::set<std::string> representativeness_filter(const std::map<std::string, std::size_t>& counts,
                                                 std::size_t min_count) {
    std::set<std::string> eligible;
    for (const auto& [group, count] : counts) {
        if (count >= min_count) {
            eligible.insert(group);
        }
    }
    return eligible;
}

} // namespace hydrofeat
