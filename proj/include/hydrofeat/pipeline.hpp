#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hydrofeat/climate.hpp"
#include "hydrofeat/features.hpp"
#include "hydrofeat/forest.hpp"
#include "hydrofeat/ingest.hpp"
#include "hydrofeat/series.hpp"
#include "hydrofeat/summary.hpp"

namespace hydrofeat {

/// Everything a pipeline run needs. A config file that only names the inputs,
/// the climate grid and the seed reproduces every module default.
struct PipelineConfig {
    std::map<VariableKind, std::filesystem::path> inputs;
    std::string missing_code = std::string(default_missing_code);
    std::filesystem::path climate_grid;
    double grid_resolution = 0.5;
    int grid_search_radius = 1;
    std::optional<std::filesystem::path> regions;  // built-in boxes when absent
    WindowPolicy window;
    FeatureOptions features;
    ForestParams forest;
    std::size_t min_group_size = default_min_group_size;
    std::size_t histogram_bins = default_histogram_bins;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "out";
    unsigned threads = 1;
};

/// Parses the JSON config; relative paths resolve against `base_dir`.
/// Throws ConfigError on unknown keys, missing required keys or bad values.
PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir);

/// Loads and validates (referenced input files must exist).
PipelineConfig load_config(const std::filesystem::path& path);

void validate_config(const PipelineConfig& config);

/// Every output file name, relative to the output directory.
namespace output_files {
std::string features(VariableKind kind);        // features_<kind>.csv
std::string skipped(VariableKind kind);         // skipped_<kind>.csv
inline constexpr const char* features_log = "features_log.json";
inline constexpr const char* ingest_report = "ingest_report.json";
inline constexpr const char* summary_dir = "summary";
inline constexpr const char* importance_dir = "importance";
} // namespace output_files

struct StageReport {
    std::vector<std::string> written;  // paths relative to the output directory
    std::vector<std::string> notices;
};

/// Loads every input and reports loaded stations, rejected rows and
/// qualifying windows; writes ingest_report.json.
StageReport cmd_ingest_check(const PipelineConfig& config);

/// ingest -> window selection -> quarterly aggregation -> features, per
/// variable kind. Writes feature tables, skip logs and features_log.json.
StageReport cmd_features(const PipelineConfig& config);

/// Global histograms and means, grouped boxplots, ranked mean tables, group
/// counts and correlation matrices under summary/.
StageReport cmd_summarize(const PipelineConfig& config);

/// Six classification problems, two importance measures each, under importance/.
StageReport cmd_importance(const PipelineConfig& config);

StageReport cmd_all(const PipelineConfig& config);

/// Reads the feature tables written by cmd_features and attaches labels.
/// Throws DependencyError naming the first missing table.
std::vector<FeatureTable> load_labeled_tables(const PipelineConfig& config);

/// Trains one forest per problem and ranks features by both measures.
/// Degenerate problems are skipped and reported, never fatal.
struct ImportanceRun {
    std::vector<ImportanceReport> reports;
    std::vector<SkippedProblem> skipped;
    std::map<std::string, OobError> oob;  // keyed by "<kind>/<target>"
};

ImportanceRun run_importance(std::span<const FeatureTable> labeled_tables,
                             const ForestParams& params, std::uint64_t seed);

} // namespace hydrofeat
