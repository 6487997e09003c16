#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hydrofeat/climate.hpp"
#include "hydrofeat/features.hpp"
#include "hydrofeat/ingest.hpp"

namespace hydrofeat {

/// One station's features plus its grouping labels (filled by label_rows).
struct FeatureRow {
    StationRecord station;
    FeatureVector features;
    std::optional<ClimateLabel> climate;
    std::optional<std::string> region;
};

struct FeatureTable {
    VariableKind variable_kind = VariableKind::temperature;
    std::vector<FeatureRow> rows;
};

/// CSV columns: station_id,variable_kind,lat,lon followed by the feature names.
std::string format_feature_table(const FeatureTable& table);
FeatureTable parse_feature_table(std::string_view text);
FeatureTable load_feature_table(const std::filesystem::path& path);

/// Attaches climate and region labels in place.
void label_rows(FeatureTable& table, const ClimateGrid& grid, const RegionConfig& regions,
                int search_radius_cells = 1);

/// CSV columns: station_id,class,zone,region; empty cells mark "no label".
std::string format_labels(const FeatureTable& table);

} // namespace hydrofeat
