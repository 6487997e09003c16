#include "hydrofeat/pipeline.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "hydrofeat/error.hpp"
#include "hydrofeat/parallel.hpp"
#include "hydrofeat/table.hpp"
#include "hydrofeat/text.hpp"

namespace hydrofeat {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

void notice(StageReport& report, std::string message) {
    report.notices.push_back(std::move(message));
}

// Region groups built from boxes flagged approximate never pass silently.
bool note_approximate_regions(const PipelineConfig& config, StageReport& report) {
    const auto regions = config.regions ? load_region_config(*config.regions) : default_region_config();
    if (regions.approximate) {
        notice(report, "region groups use approximate boxes; supply a surveyed 'regions' file");
    }
    return regions.approximate;
}

void write_output(const PipelineConfig& config, StageReport& report, const std::string& name,
                  std::string_view contents) {
    text::write_file(config.output_dir / name, contents);
    report.written.push_back(name);
}

void check_keys(const nlohmann::json& object, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
    if (!object.is_object()) {
        throw ConfigError(std::string(where) + " must be an object");
    }
    for (const auto& [key, value] : object.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown config key '" + std::string(where) + "." + key + "'");
        }
    }
}

template <typename T>
void read_value(const nlohmann::json& object, const char* key, T& target) {
    if (object.contains(key)) {
        try {
            target = object.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(std::string("config key '") + key + "' has the wrong type");
        }
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string setting_id(VariableKind kind, Target target) {
    return std::string(to_string(kind)) + "/" + std::string(to_string(target));
}

std::string_view axis_name(RankAxis axis) {
    return axis == RankAxis::per_column ? "per_column" : "per_row";
}

ojson boxplot_json(const BoxplotStats& b) {
    ojson j;
    j["n"] = b.n;
    j["mean"] = b.mean;
    j["min_whisker"] = b.min_whisker;
    j["q1"] = b.q1;
    j["median"] = b.median;
    j["q3"] = b.q3;
    j["max_whisker"] = b.max_whisker;
    j["outliers"] = b.outliers;
    return j;
}

std::string dump(const ojson& j) { return j.dump(2) + '\n'; }

} // namespace

namespace output_files {
std::string features(VariableKind kind) { return "features_" + std::string(to_string(kind)) + ".csv"; }
std::string skipped(VariableKind kind) { return "skipped_" + std::string(to_string(kind)) + ".csv"; }
} // namespace output_files

PipelineConfig parse_config(std::string_view json_text, const fs::path& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc,
               {"inputs", "missing_code", "climate_grid", "grid_resolution", "grid_search_radius",
                "regions", "window", "stl", "spectral", "forest", "summary", "seed", "output_dir",
                "threads"},
               "config");

    PipelineConfig c;
    if (!doc.contains("inputs") || !doc["inputs"].is_object() || doc["inputs"].empty()) {
        throw ConfigError("config needs a non-empty 'inputs' object");
    }
    for (const auto& [kind, path] : doc["inputs"].items()) {
        if (!path.is_string()) {
            throw ConfigError("inputs." + kind + " must be a path");
        }
        c.inputs[parse_variable_kind(kind)] = resolve(base_dir, path.get<std::string>());
    }
    if (!doc.contains("climate_grid")) {
        throw ConfigError("config needs 'climate_grid'");
    }
    if (!doc.contains("seed") || !doc["seed"].is_number_unsigned()) {
        throw ConfigError("config needs a non-negative integer 'seed'");
    }
    c.seed = doc["seed"].get<std::uint64_t>();

    std::string grid;
    read_value(doc, "climate_grid", grid);
    c.climate_grid = resolve(base_dir, grid);
    read_value(doc, "missing_code", c.missing_code);
    read_value(doc, "grid_resolution", c.grid_resolution);
    read_value(doc, "grid_search_radius", c.grid_search_radius);
    if (doc.contains("regions")) {
        std::string regions;
        read_value(doc, "regions", regions);
        c.regions = resolve(base_dir, regions);
    }
    std::string out = c.output_dir.string();
    read_value(doc, "output_dir", out);
    c.output_dir = resolve(base_dir, out);
    read_value(doc, "threads", c.threads);

    if (doc.contains("window")) {
        const auto& w = doc["window"];
        check_keys(w, {"years", "max_missing_months"}, "window");
        read_value(w, "years", c.window.years);
        read_value(w, "max_missing_months", c.window.max_missing_months);
    }
    if (doc.contains("stl")) {
        const auto& s = doc["stl"];
        check_keys(s,
                   {"seasonal_window", "seasonal_degree", "trend_window", "trend_degree",
                    "lowpass_window", "lowpass_degree", "inner_iterations"},
                   "stl");
        auto& p = c.features.stl;
        read_value(s, "seasonal_window", p.seasonal_window);
        read_value(s, "seasonal_degree", p.seasonal_degree);
        read_value(s, "trend_window", p.trend_window);
        read_value(s, "trend_degree", p.trend_degree);
        read_value(s, "lowpass_window", p.lowpass_window);
        read_value(s, "lowpass_degree", p.lowpass_degree);
        read_value(s, "inner_iterations", p.inner_iterations);
    }
    if (doc.contains("spectral")) {
        const auto& s = doc["spectral"];
        check_keys(s, {"daniell_half_width"}, "spectral");
        read_value(s, "daniell_half_width", c.features.spectral.daniell_half_width);
    }
    if (doc.contains("forest")) {
        const auto& f = doc["forest"];
        check_keys(f, {"n_trees", "mtry", "min_node_size", "permutation_repeats"}, "forest");
        read_value(f, "n_trees", c.forest.n_trees);
        read_value(f, "mtry", c.forest.mtry);
        read_value(f, "min_node_size", c.forest.min_node_size);
        read_value(f, "permutation_repeats", c.forest.permutation_repeats);
    }
    if (doc.contains("summary")) {
        const auto& s = doc["summary"];
        check_keys(s, {"min_group_size", "histogram_bins"}, "summary");
        read_value(s, "min_group_size", c.min_group_size);
        read_value(s, "histogram_bins", c.histogram_bins);
    }
    return c;
}

void validate_config(const PipelineConfig& c) {
    for (const auto& [kind, path] : c.inputs) {
        if (!fs::exists(path)) {
            throw ConfigError("input for " + std::string(to_string(kind)) +
                              " not found: " + path.string());
        }
    }
    if (!fs::exists(c.climate_grid)) {
        throw ConfigError("climate grid not found: " + c.climate_grid.string());
    }
    if (c.regions && !fs::exists(*c.regions)) {
        throw ConfigError("region config not found: " + c.regions->string());
    }
    if (c.window.years < 1 || c.window.max_missing_months < 0) {
        throw ConfigError("window.years must be >= 1 and max_missing_months >= 0");
    }
    if (!(c.grid_resolution > 0.0) || c.grid_search_radius < 0) {
        throw ConfigError("invalid climate grid settings");
    }
    if (c.forest.n_trees < 1 || c.forest.mtry < 0 ||
        c.forest.mtry > static_cast<int>(feature_count) || c.forest.min_node_size < 1 ||
        c.forest.permutation_repeats < 1) {
        throw ConfigError("invalid forest settings");
    }
    if (c.histogram_bins < 1) {
        throw ConfigError("summary.histogram_bins must be >= 1");
    }
    if (c.threads < 1) {
        throw ConfigError("threads must be >= 1");
    }
    try {
        // Surfaces bad STL settings before any output is written.
        const std::vector<double> probe{0.0, 1.0, 0.5, 2.0, 1.5, 0.0, 1.0, 3.0,
                                        0.2, 1.2, 0.4, 2.5, 0.9, 1.1, 0.3, 2.2};
        StlParams stl = c.features.stl;
        stl.period = seasons_per_year;
        (void)stl_decompose(probe, stl);
    } catch (const ParameterError& e) {
        throw ConfigError("stl: " + e.reason());
    } catch (const LengthError&) {
    }
    if (c.features.spectral.daniell_half_width < 0) {
        throw ConfigError("spectral.daniell_half_width must be >= 0");
    }
}

PipelineConfig load_config(const fs::path& path) {
    if (!fs::exists(path)) {
        throw ConfigError("config file not found: " + path.string());
    }
    auto c = parse_config(text::read_file(path), fs::absolute(path).parent_path());
    validate_config(c);
    return c;
}

StageReport cmd_ingest_check(const PipelineConfig& config) {
    validate_config(config);
    StageReport report;
    ojson out;
    for (const auto& [kind, path] : config.inputs) {
        const auto dataset = load_monthly_dataset(path, kind, config.missing_code);
        std::size_t qualifying = 0;
        for (const auto& s : dataset.series) {
            qualifying += find_qualifying_window(s, config.window) ? 1 : 0;
        }
        ojson k;
        k["stations"] = dataset.series.size();
        k["qualifying_stations"] = qualifying;
        ojson rejected = ojson::array();
        for (const auto& r : dataset.rejected) {
            rejected.push_back({{"line", r.line}, {"station_id", r.station_id}, {"reason", r.reason}});
        }
        k["rejected_rows"] = rejected;
        out[std::string(to_string(kind))] = k;
        notice(report, std::string(to_string(kind)) + ": " + std::to_string(dataset.series.size()) +
                           " stations, " + std::to_string(qualifying) + " qualifying, " +
                           std::to_string(dataset.rejected.size()) + " rejected rows");
    }
    write_output(config, report, output_files::ingest_report, dump(out));
    return report;
}

StageReport cmd_features(const PipelineConfig& config) {
    validate_config(config);
    StageReport report;
    ojson log;
    for (const auto& [kind, path] : config.inputs) {
        const auto dataset = load_monthly_dataset(path, kind, config.missing_code);
        const auto n = dataset.series.size();
        std::vector<std::optional<FeatureVector>> features(n);
        std::vector<std::string> reasons(n);

        parallel_for(n, config.threads, [&](std::size_t i) {
            const auto& series = dataset.series[i];
            const auto window = find_qualifying_window(series, config.window);
            if (!window) {
                reasons[i] = "no qualifying window";
                return;
            }
            auto quarterly = aggregate_quarterly(series, *window, config.window);
            if (auto* nq = std::get_if<NotQualified>(&quarterly)) {
                reasons[i] = nq->reason;
                return;
            }
            try {
                features[i] = extract_features(std::get<QuarterlySeries>(quarterly), config.features);
            } catch (const Error& e) {
                reasons[i] = e.reason();
            }
        });

        FeatureTable table;
        table.variable_kind = kind;
        std::string skipped = "station_id,reason\n";
        std::size_t n_skipped = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (features[i]) {
                table.rows.push_back({dataset.series[i].station, *features[i], {}, {}});
            } else {
                skipped += dataset.series[i].station.station_id + "," + reasons[i] + "\n";
                ++n_skipped;
            }
        }
        write_output(config, report, output_files::features(kind), format_feature_table(table));
        write_output(config, report, output_files::skipped(kind), skipped);

        ojson k;
        k["input_stations"] = n;
        k["processed"] = table.rows.size();
        k["skipped"] = n_skipped;
        k["rejected_rows"] = dataset.rejected.size();
        log[std::string(to_string(kind))] = k;
        notice(report, std::string(to_string(kind)) + ": " + std::to_string(table.rows.size()) +
                           " of " + std::to_string(n) + " stations processed");
    }
    write_output(config, report, output_files::features_log, dump(log));
    return report;
}

std::vector<FeatureTable> load_labeled_tables(const PipelineConfig& config) {
    const auto grid = load_climate_grid(config.climate_grid, config.grid_resolution);
    const auto regions = config.regions ? load_region_config(*config.regions) : default_region_config();
    std::vector<FeatureTable> tables;
    for (const auto& [kind, path] : config.inputs) {
        const auto file = config.output_dir / output_files::features(kind);
        if (!fs::exists(file)) {
            throw DependencyError("missing upstream table " + file.string() +
                                  " (run the features stage first)");
        }
        auto table = load_feature_table(file);
        if (!table.rows.empty() && table.variable_kind != kind) {
            throw DataError(file.string() + " holds another variable kind");
        }
        table.variable_kind = kind;
        label_rows(table, grid, regions, config.grid_search_radius);
        tables.push_back(std::move(table));
    }
    return tables;
}

StageReport cmd_summarize(const PipelineConfig& config) {
    validate_config(config);
    StageReport report;
    const auto tables = load_labeled_tables(config);
    const std::string dir = output_files::summary_dir;
    ojson log;
    log["notices"] = ojson::array();
    if (note_approximate_regions(config, report)) {
        log["notices"].push_back(report.notices.back());
    }

    // Shared per-feature histogram ranges pooled over all variable kinds.
    std::array<std::pair<double, double>, feature_count> ranges;
    ranges.fill({std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for (const auto& t : tables) {
        for (const auto& row : t.rows) {
            const auto v = row.features.as_array();
            for (std::size_t f = 0; f < feature_count; ++f) {
                ranges[f].first = std::min(ranges[f].first, v[f]);
                ranges[f].second = std::max(ranges[f].second, v[f]);
            }
        }
    }

    ojson histograms;
    std::string means = "variable_kind,n";
    for (auto name : feature_names) {
        means += ',' + std::string(name);
    }
    means += '\n';
    for (std::size_t f = 0; f < feature_count; ++f) {
        ojson feature;
        const auto [lo, hi] = ranges[f];
        const bool shared = lo < hi;
        feature["range"] = shared ? ojson::array({lo, hi}) : ojson(nullptr);
        for (const auto& t : tables) {
            if (t.rows.empty()) {
                continue;
            }
            std::vector<double> values;
            for (const auto& row : t.rows) {
                values.push_back(row.features.as_array()[f]);
            }
            const auto h = histogram(values, config.histogram_bins,
                                     shared ? std::optional(ranges[f]) : std::nullopt);
            feature[std::string(to_string(t.variable_kind))] = {
                {"edges", h.edges},
                {"counts", h.counts},
                {"clamped_low", h.clamped_low},
                {"clamped_high", h.clamped_high}};
        }
        histograms[std::string(feature_names[f])] = feature;
    }
    write_output(config, report, dir + "/global_histograms.json", dump(histograms));

    for (const auto& t : tables) {
        const auto kind = std::string(to_string(t.variable_kind));
        write_output(config, report, dir + "/labels_" + kind + ".csv", format_labels(t));
        if (t.rows.empty()) {
            notice(report, kind + ": empty feature table, summaries skipped");
            log["notices"].push_back(report.notices.back());
            continue;
        }

        const auto global = group_summarize(t.rows, Grouping::global);
        means += kind + "," + std::to_string(t.rows.size());
        for (const auto& b : global.groups.at("global")) {
            means += ',' + text::format_double(b.mean);
        }
        means += '\n';

        std::string counts = "grouping,group,count\n";
        for (auto g : {Grouping::climate_class, Grouping::climate_zone, Grouping::region}) {
            for (const auto& [group, count] : group_counts(t.rows, g)) {
                counts += std::string(to_string(g)) + "," + group + "," + std::to_string(count) + "\n";
            }
        }
        write_output(config, report, dir + "/group_counts_" + kind + ".csv", counts);

        for (auto g : {Grouping::global, Grouping::climate_class, Grouping::climate_zone,
                       Grouping::region}) {
            const auto summary = group_summarize(t.rows, g, config.min_group_size);
            const auto gname = std::string(to_string(g));
            if (summary.groups.empty()) {
                notice(report, kind + ": no eligible groups for " + gname + ", files omitted");
                log["notices"].push_back(report.notices.back());
                continue;
            }
            std::string csv =
                "group,feature,n,mean,min_whisker,q1,median,q3,max_whisker,n_outliers\n";
            ojson json;
            json["grouping"] = gname;
            json["variable_kind"] = kind;
            json["min_group_size"] = config.min_group_size;
            ojson excluded;
            for (const auto& [group, n] : summary.excluded) {
                excluded[group] = n;
            }
            json["excluded_groups"] = excluded.is_null() ? ojson::object() : excluded;
            ojson groups;
            for (const auto& [group, stats] : summary.groups) {
                ojson per_feature;
                for (std::size_t f = 0; f < feature_count; ++f) {
                    const auto& b = stats[f];
                    csv += group + "," + std::string(feature_names[f]) + "," +
                           std::to_string(b.n) + "," + text::format_double(b.mean) + "," +
                           text::format_double(b.min_whisker) + "," + text::format_double(b.q1) +
                           "," + text::format_double(b.median) + "," + text::format_double(b.q3) +
                           "," + text::format_double(b.max_whisker) + "," +
                           std::to_string(b.outliers.size()) + "\n";
                    per_feature[std::string(feature_names[f])] = boxplot_json(b);
                }
                groups[group] = per_feature;
            }
            json["groups"] = groups;
            const auto stem = dir + "/boxplots_" + gname + "_" + kind;
            write_output(config, report, stem + ".csv", csv);
            write_output(config, report, stem + ".json", dump(json));

            if (g == Grouping::global) {
                continue;
            }
            for (auto axis : {RankAxis::per_column, RankAxis::per_row}) {
                const auto table = ranked_mean_table(t.rows, g, axis, config.min_group_size);
                std::string r = "group";
                for (auto name : feature_names) {
                    r += ",mean_" + std::string(name);
                }
                for (auto name : feature_names) {
                    r += ",rank_" + std::string(name);
                }
                r += '\n';
                for (std::size_t i = 0; i < table.groups.size(); ++i) {
                    r += table.groups[i];
                    for (double m : table.means[i]) {
                        r += ',' + text::format_double(m);
                    }
                    for (int k : table.ranks[i]) {
                        r += ',' + std::to_string(k);
                    }
                    r += '\n';
                }
                write_output(config, report,
                             dir + "/ranked_" + gname + "_" + kind + "_" +
                                 std::string(axis_name(axis)) + ".csv",
                             r);
            }
        }

        if (t.rows.size() >= 3) {
            const auto corr = feature_correlations(t.rows);
            std::string c = "feature";
            for (auto name : feature_names) {
                c += ',' + std::string(name);
            }
            c += '\n';
            for (std::size_t a = 0; a < feature_count; ++a) {
                c += std::string(feature_names[a]);
                for (std::size_t b = 0; b < feature_count; ++b) {
                    c += ',' + text::format_double(corr.values[a][b]);
                }
                c += '\n';
            }
            write_output(config, report, dir + "/correlations_" + kind + ".csv", c);
        } else {
            notice(report, kind + ": fewer than 3 rows, correlation matrix omitted");
            log["notices"].push_back(report.notices.back());
        }
    }
    write_output(config, report, dir + "/global_means.csv", means);
    write_output(config, report, dir + "/summary_log.json", dump(log));
    return report;
}

ImportanceRun run_importance(std::span<const FeatureTable> labeled_tables,
                             const ForestParams& params, std::uint64_t seed) {
    ImportanceRun run;
    auto set = build_classification_problems(labeled_tables);
    run.skipped = std::move(set.skipped);
    for (const auto& problem : set.problems) {
        const auto problem_seed = derive_seed(seed, static_cast<std::uint64_t>(problem.variable_kind),
                                              static_cast<std::uint64_t>(problem.target));
        Forest forest;
        try {
            forest = train(problem, params, problem_seed);
        } catch (const Error& e) {
            run.skipped.push_back({problem.variable_kind, problem.target, e.reason()});
            continue;
        }
        run.oob[setting_id(problem.variable_kind, problem.target)] = oob_error(forest, problem);
        const auto mda = mean_decrease_accuracy(forest, problem, problem_seed);
        const auto mdg = mean_decrease_gini(forest);
        run.reports.push_back(rank_features(mda, problem.feature_names, problem.variable_kind,
                                            problem.target,
                                            ImportanceMeasure::mean_decrease_accuracy));
        run.reports.push_back(rank_features(mdg, problem.feature_names, problem.variable_kind,
                                            problem.target, ImportanceMeasure::mean_decrease_gini));
    }
    // Stable order: kind, target, then measure.
    std::stable_sort(run.reports.begin(), run.reports.end(), [](const auto& a, const auto& b) {
        return std::tie(a.variable_kind, a.target, a.measure) <
               std::tie(b.variable_kind, b.target, b.measure);
    });
    std::stable_sort(run.skipped.begin(), run.skipped.end(), [](const auto& a, const auto& b) {
        return std::tie(a.variable_kind, a.target) < std::tie(b.variable_kind, b.target);
    });
    return run;
}

StageReport cmd_importance(const PipelineConfig& config) {
    validate_config(config);
    StageReport report;
    const auto tables = load_labeled_tables(config);
    ForestParams params = config.forest;
    params.threads = config.threads;
    const auto run = run_importance(tables, params, config.seed);
    const bool approximate = note_approximate_regions(config, report);

    const std::string dir = output_files::importance_dir;
    std::string csv = "setting,measure,feature,score,rank\n";
    ojson json;
    json["scores_comparable_across_settings"] = false;
    json["tie_rule"] = "feature order";
    json["reports"] = ojson::array();
    for (const auto& r : run.reports) {
        const auto setting = setting_id(r.variable_kind, r.target);
        ojson features = ojson::array();
        for (std::size_t f = 0; f < r.scores.size(); ++f) {
            csv += setting + "," + std::string(to_string(r.measure)) + "," + r.feature_names[f] +
                   "," + text::format_double(r.scores[f]) + "," + std::to_string(r.ranks[f]) + "\n";
            features.push_back(
                {{"feature", r.feature_names[f]}, {"score", r.scores[f]}, {"rank", r.ranks[f]}});
        }
        json["reports"].push_back({{"setting", setting},
                                   {"variable_kind", std::string(to_string(r.variable_kind))},
                                   {"target", std::string(to_string(r.target))},
                                   {"measure", std::string(to_string(r.measure))},
                                   {"features", features}});
    }
    ojson log;
    log["reports"] = run.reports.size();
    log["region_boxes_approximate"] = approximate;
    log["oob_error"] = ojson::object();
    for (const auto& [setting, oob] : run.oob) {
        log["oob_error"][setting] = {{"rate", oob.rate},
                                     {"voted_rows", oob.voted_rows},
                                     {"unvoted_rows", oob.unvoted_rows}};
    }
    log["skipped"] = ojson::array();
    for (const auto& s : run.skipped) {
        const auto setting = setting_id(s.variable_kind, s.target);
        log["skipped"].push_back({{"setting", setting}, {"reason", s.reason}});
        notice(report, "skipped " + setting + ": " + s.reason);
    }
    write_output(config, report, dir + "/importance.csv", csv);
    write_output(config, report, dir + "/importance.json", dump(json));
    write_output(config, report, dir + "/importance_log.json", dump(log));
    return report;
}

StageReport cmd_all(const PipelineConfig& config) {
    StageReport report;
    for (auto* stage : {&cmd_features, &cmd_summarize, &cmd_importance}) {
        auto r = stage(config);
        report.written.insert(report.written.end(), r.written.begin(), r.written.end());
        report.notices.insert(report.notices.end(), r.notices.begin(), r.notices.end());
    }
    return report;
}

} // namespace hydrofeat
