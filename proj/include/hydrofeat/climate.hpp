#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hydrofeat/ingest.hpp"

namespace hydrofeat {

struct ClimateLabel {
    std::string class_code;  // e.g. "Dfb"
    char zone = 'A';         // class_code[0]

    bool operator==(const ClimateLabel&) const = default;
};

/// True for 2-4 letter Köppen-Geiger codes: main climate A-E followed by
/// precipitation/temperature letters from the classification's alphabet.
bool is_koppen_code(std::string_view code);

/// Köppen-Geiger classes on a regular lat/lon grid of cell centers.
class ClimateGrid {
public:
    explicit ClimateGrid(double resolution = 0.5);

    double resolution() const { return resolution_; }
    std::size_t size() const { return cells_.size(); }

    /// Adds the cell whose center is (lat, lon). Throws FormatError for an
    /// off-grid center, DataError for an unknown code or a conflicting duplicate.
    void add_cell(double lat, double lon, std::string_view class_code);

    std::optional<std::string> cell_at(double lat, double lon) const;

    /// Class of the nearest cell center; when that cell is empty, the nearest
    /// populated center within `radius_cells` rings. nullopt beyond.
    std::optional<ClimateLabel> classify(double lat, double lon, int radius_cells = 1) const;

private:
    struct Key {
        long row;
        long col;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<long>()(k.row * 1000003L + k.col);
        }
    };

    long row_of(double lat) const;
    long col_of(double lon) const;
    double lat_center(long row) const;
    double lon_center(long col) const;
    long column_count() const;

    double resolution_;
    std::unordered_map<Key, std::string, KeyHash> cells_;
};

/// Reads "lat,lon,class" rows (header optional).
ClimateGrid load_climate_grid(const std::filesystem::path& path, double resolution = 0.5);
ClimateGrid parse_climate_grid(std::string_view text, double resolution = 0.5);

inline std::optional<ClimateLabel> classify_location(const ClimateGrid& grid, double lat,
                                                     double lon, int radius_cells = 1) {
    return grid.classify(lat, lon, radius_cells);
}

struct BoundingBox {
    double south = 0.0;
    double north = 0.0;
    double west = 0.0;  // west > east wraps across the antimeridian
    double east = 0.0;

    bool contains(double lat, double lon) const;
};

struct Region {
    std::string id;
    VariableKind variable_kind = VariableKind::temperature;
    std::vector<BoundingBox> boxes;
};

/// Named station groups per variable kind, in declared order.
struct RegionConfig {
    std::vector<Region> regions;
    bool approximate = false;
};

/// JSON: {"approximate": bool, "regions": [{"id", "variable_kind",
/// "boxes": [{"south", "north", "west", "east"}]}]}.
RegionConfig load_region_config(const std::filesystem::path& path);
RegionConfig parse_region_config(std::string_view json_text);

/// Built-in coarse continental boxes. Approximate; meant to be replaced.
RegionConfig default_region_config();

/// First declared region of that kind containing the point.
std::optional<std::string> assign_region(const RegionConfig& config, VariableKind kind,
                                         double lat, double lon);

inline constexpr std::size_t default_min_group_size = 30;

/// Groups with count >= min_count.
std::set<std::string> representativeness_filter(const std::map<std::string, std::size_t>& counts,
                                                 std::size_t min_count = default_min_group_size);

} // namespace hydrofeat
