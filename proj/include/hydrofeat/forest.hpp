#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hydrofeat/ingest.hpp"
#include "hydrofeat/table.hpp"

namespace hydrofeat {

enum class Target { zone, region };
enum class ImportanceMeasure { mean_decrease_accuracy, mean_decrease_gini };

std::string_view to_string(Target target);
std::string_view to_string(ImportanceMeasure measure);

/// Rows of predictors with integer-coded labels (index into label_set).
struct ClassificationProblem {
    VariableKind variable_kind = VariableKind::temperature;
    Target target = Target::zone;
    std::vector<std::string> feature_names;
    std::vector<std::string> label_set;  // sorted
    std::vector<std::string> row_ids;
    std::size_t n_rows = 0;
    std::vector<double> x;  // column-major: x[f * n_rows + i]
    std::vector<int> y;

    std::size_t n_features() const { return feature_names.size(); }
    double at(std::size_t row, std::size_t feature) const { return x[feature * n_rows + row]; }
};

/// Builds a problem from row-major predictors and string labels. Rows whose
/// label is nullopt are dropped. Throws DegenerateError with fewer than two classes.
ClassificationProblem make_problem(std::vector<std::string> feature_names,
                                   std::span<const std::vector<double>> rows,
                                   std::span<const std::optional<std::string>> labels,
                                   std::span<const std::string> row_ids = {});

/// Zone or region problem from a labeled feature table.
ClassificationProblem make_problem(const FeatureTable& table, Target target);

struct SkippedProblem {
    VariableKind variable_kind;
    Target target;
    std::string reason;
};

struct ProblemSet {
    std::vector<ClassificationProblem> problems;
    std::vector<SkippedProblem> skipped;
};

/// {temperature, precipitation, river_flow} x {zone, region}. Kinds without a
/// table and degenerate problems land in `skipped`.
ProblemSet build_classification_problems(std::span<const FeatureTable> labeled_tables);

struct ForestParams {
    int n_trees = 500;
    int mtry = 0;  // 0 selects floor(sqrt(p))
    int min_node_size = 1;
    int permutation_repeats = 1;
    unsigned threads = 1;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // x <= threshold goes left
    int left = -1;
    int right = -1;
    int prediction = 0;
    std::size_t counts_offset = 0;  // into Tree::leaf_counts, leaves only
};

struct Tree {
    std::vector<TreeNode> nodes;
    std::vector<int> leaf_counts;  // per-leaf class counts, n_classes each
    std::vector<double> gini_decrease;  // per feature
    std::vector<std::uint32_t> oob_rows;  // sorted
    std::uint64_t seed = 0;

    int predict(const ClassificationProblem& problem, std::size_t row) const;
};

struct Forest {
    std::vector<Tree> trees;
    ForestParams params;
    std::uint64_t seed = 0;
    std::size_t n_classes = 0;
    std::size_t n_features = 0;
    std::size_t n_rows = 0;

    /// Out-of-bag mask of one tree over the training rows.
    std::vector<bool> oob_mask(std::size_t tree) const;

    /// Majority vote of all trees; ties go to the lowest class index.
    int predict(const ClassificationProblem& problem, std::size_t row) const;
};

/// Bootstrap CART forest grown to purity with Gini splits on mtry sampled
/// features per node. Per-tree seeds derive from `seed`, so results do not
/// depend on params.threads.
Forest train(const ClassificationProblem& problem, const ForestParams& params, std::uint64_t seed);

struct OobError {
    double rate = 0.0;
    std::size_t voted_rows = 0;
    std::size_t unvoted_rows = 0;  // never out-of-bag, excluded from the rate
};

OobError oob_error(const Forest& forest, const ClassificationProblem& problem);

/// Per-tree OOB error increase after permuting each feature, averaged over
/// trees and divided by the sd of the per-tree increases (undivided when sd is 0).
std::vector<double> mean_decrease_accuracy(const Forest& forest,
                                           const ClassificationProblem& problem,
                                           std::uint64_t seed);

/// Total weighted Gini decrease per feature, averaged over trees.
std::vector<double> mean_decrease_gini(const Forest& forest);

struct ImportanceReport {
    VariableKind variable_kind = VariableKind::temperature;
    Target target = Target::zone;
    ImportanceMeasure measure = ImportanceMeasure::mean_decrease_gini;
    std::vector<std::string> feature_names;
    std::vector<double> scores;
    std::vector<int> ranks;  // 1 = most important
    /// Magnitudes are only meaningful within one setting.
    static constexpr bool scores_comparable_across_settings = false;
};

/// Rank 1 = largest score; ties keep the feature order.
ImportanceReport rank_features(std::span<const double> scores,
                               std::vector<std::string> feature_names, VariableKind kind,
                               Target target, ImportanceMeasure measure);

std::vector<int> descending_ranks(std::span<const double> scores);

} // namespace hydrofeat
