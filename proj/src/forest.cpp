#include "hydrofeat/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "hydrofeat/error.hpp"
#include "hydrofeat/parallel.hpp"

namespace hydrofeat {

std::string_view to_string(Target target) {
    return target == Target::zone ? "zone" : "region";
}

std::string_view to_string(ImportanceMeasure measure) {
    return measure == ImportanceMeasure::mean_decrease_accuracy ? "mean_decrease_accuracy"
                                                                : "mean_decrease_gini";
}

ClassificationProblem make_problem(std::vector<std::string> feature_names,
                                   std::span<const std::vector<double>> rows,
                                   std::span<const std::optional<std::string>> labels,
                                   std::span<const std::string> row_ids) {
    if (rows.size() != labels.size() || (!row_ids.empty() && row_ids.size() != rows.size())) {
        throw LengthError("rows, labels and ids differ in length");
    }
    ClassificationProblem p;
    p.feature_names = std::move(feature_names);
    std::set<std::string> label_set;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != p.feature_names.size()) {
            throw LengthError("row width does not match the feature names");
        }
        if (labels[i]) {
            label_set.insert(*labels[i]);
            kept.push_back(i);
        }
    }
    if (label_set.size() < 2) {
        throw DegenerateError("fewer than two classes");
    }
    p.label_set.assign(label_set.begin(), label_set.end());
    p.n_rows = kept.size();
    p.x.resize(p.n_rows * p.n_features());
    p.y.resize(p.n_rows);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const auto i = kept[k];
        for (std::size_t f = 0; f < p.n_features(); ++f) {
            p.x[f * p.n_rows + k] = rows[i][f];
        }
        const auto it = std::lower_bound(p.label_set.begin(), p.label_set.end(), *labels[i]);
        p.y[k] = static_cast<int>(it - p.label_set.begin());
        p.row_ids.push_back(row_ids.empty() ? std::to_string(i) : row_ids[i]);
    }
    return p;
}

ClassificationProblem make_problem(const FeatureTable& table, Target target) {
    std::vector<std::vector<double>> rows;
    std::vector<std::optional<std::string>> labels;
    std::vector<std::string> ids;
    for (const auto& row : table.rows) {
        const auto f = row.features.as_array();
        rows.emplace_back(f.begin(), f.end());
        if (target == Target::zone) {
            labels.push_back(row.climate ? std::optional<std::string>(std::string(1, row.climate->zone))
                                         : std::nullopt);
        } else {
            labels.push_back(row.region);
        }
        ids.push_back(row.station.station_id);
    }
    auto p = make_problem(std::vector<std::string>(feature_names.begin(), feature_names.end()), rows,
                          labels, ids);
    p.variable_kind = table.variable_kind;
    p.target = target;
    return p;
}

ProblemSet build_classification_problems(std::span<const FeatureTable> labeled_tables) {
    ProblemSet set;
    for (auto kind : all_variable_kinds) {
        const FeatureTable* table = nullptr;
        for (const auto& t : labeled_tables) {
            if (t.variable_kind == kind) {
                table = &t;
            }
        }
        for (auto target : {Target::zone, Target::region}) {
            if (table == nullptr) {
                set.skipped.push_back({kind, target, "no feature table"});
                continue;
            }
            try {
                set.problems.push_back(make_problem(*table, target));
            } catch (const Error& e) {
                set.skipped.push_back({kind, target, e.reason()});
            }
        }
    }
    return set;
}

namespace {

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // sum_c L_c^2 / n_L + sum_c R_c^2 / n_R
};

class TreeBuilder {
public:
    TreeBuilder(const ClassificationProblem& problem, const ForestParams& params, std::size_t mtry)
        : problem_(problem),
          params_(params),
          mtry_(mtry),
          k_(problem.label_set.size()),
          left_(k_),
          right_(k_),
          features_(problem.n_features()) {}

    Tree build(std::uint64_t seed) {
        Tree tree;
        tree.seed = seed;
        tree.gini_decrease.assign(problem_.n_features(), 0.0);
        std::mt19937_64 rng(seed);
        const auto n = problem_.n_rows;

        std::vector<std::uint32_t> in_bag(n, 0);
        std::uniform_int_distribution<std::size_t> draw(0, n - 1);
        idx_.resize(n);
        for (auto& i : idx_) {
            i = static_cast<std::uint32_t>(draw(rng));
            ++in_bag[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (in_bag[i] == 0) {
                tree.oob_rows.push_back(static_cast<std::uint32_t>(i));
            }
        }

        struct Pending {
            int node;
            std::size_t begin;
            std::size_t end;
        };
        std::vector<Pending> stack;
        tree.nodes.push_back({});
        stack.push_back({0, 0, n});
        std::vector<int> counts(k_);
        while (!stack.empty()) {
            const auto [node, begin, end] = stack.back();
            stack.pop_back();

            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t j = begin; j < end; ++j) {
                ++counts[static_cast<std::size_t>(problem_.y[idx_[j]])];
            }
            const auto size = end - begin;
            const auto nonzero = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; });

            std::optional<SplitCandidate> split;
            if (nonzero > 1 && size > static_cast<std::size_t>(params_.min_node_size)) {
                split = best_split(begin, end, rng);
            }
            if (!split) {
                auto& leaf = tree.nodes[static_cast<std::size_t>(node)];
                leaf.feature = -1;
                leaf.counts_offset = tree.leaf_counts.size();
                tree.leaf_counts.insert(tree.leaf_counts.end(), counts.begin(), counts.end());
                leaf.prediction =
                    static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
                continue;
            }

            double parent_sq = 0.0;
            for (int c : counts) {
                parent_sq += static_cast<double>(c) * c;
            }
            const auto f = static_cast<std::size_t>(split->feature);
            tree.gini_decrease[f] += split->score - parent_sq / static_cast<double>(size);

            const auto mid = std::partition(idx_.begin() + static_cast<long>(begin),
                                            idx_.begin() + static_cast<long>(end),
                                            [&](std::uint32_t row) {
                                                return problem_.at(row, f) <= split->threshold;
                                            }) -
                             idx_.begin();
            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            tree.nodes.push_back({});
            auto& parent = tree.nodes[static_cast<std::size_t>(node)];
            parent.feature = split->feature;
            parent.threshold = split->threshold;
            parent.left = left;
            parent.right = left + 1;
            parent.prediction =
                static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
            stack.push_back({left + 1, static_cast<std::size_t>(mid), end});
            stack.push_back({left, begin, static_cast<std::size_t>(mid)});
        }
        return tree;
    }

private:
    std::optional<SplitCandidate> best_split(std::size_t begin, std::size_t end,
                                             std::mt19937_64& rng) {
        std::iota(features_.begin(), features_.end(), 0);
        const auto p = features_.size();
        for (std::size_t i = 0; i < mtry_; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, p - 1);
            std::swap(features_[i], features_[pick(rng)]);
        }

        std::optional<SplitCandidate> best;
        const auto size = end - begin;
        buffer_.resize(size);
        for (std::size_t s = 0; s < mtry_; ++s) {
            const auto f = static_cast<std::size_t>(features_[s]);
            for (std::size_t j = 0; j < size; ++j) {
                const auto row = idx_[begin + j];
                buffer_[j] = {problem_.at(row, f), problem_.y[row]};
            }
            std::sort(buffer_.begin(), buffer_.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (buffer_.front().first == buffer_.back().first) {
                continue;
            }

            std::fill(left_.begin(), left_.end(), 0.0);
            std::fill(right_.begin(), right_.end(), 0.0);
            for (const auto& [v, c] : buffer_) {
                right_[static_cast<std::size_t>(c)] += 1.0;
            }
            double left_sq = 0.0;
            double right_sq = 0.0;
            for (double c : right_) {
                right_sq += c * c;
            }
            for (std::size_t j = 0; j + 1 < size; ++j) {
                const auto c = static_cast<std::size_t>(buffer_[j].second);
                left_sq += 2.0 * left_[c] + 1.0;
                right_sq -= 2.0 * right_[c] - 1.0;
                left_[c] += 1.0;
                right_[c] -= 1.0;
                const double lo = buffer_[j].first;
                const double hi = buffer_[j + 1].first;
                if (!(lo < hi)) {
                    continue;
                }
                const double n_left = static_cast<double>(j + 1);
                const double score = left_sq / n_left + right_sq / (static_cast<double>(size) - n_left);
                if (!best || score > best->score) {
                    double threshold = lo + (hi - lo) / 2.0;
                    if (!(threshold < hi)) {
                        threshold = lo;
                    }
                    best = SplitCandidate{static_cast<int>(f), threshold, score};
                }
            }
        }
        return best;
    }

    const ClassificationProblem& problem_;
    const ForestParams& params_;
    std::size_t mtry_;
    std::size_t k_;
    std::vector<double> left_;
    std::vector<double> right_;
    std::vector<int> features_;
    std::vector<std::uint32_t> idx_;
    std::vector<std::pair<double, int>> buffer_;
};

// Leaf prediction with feature values supplied by `value(feature)`.
template <typename Value>
int traverse(const Tree& tree, Value&& value) {
    std::size_t node = 0;
    while (tree.nodes[node].feature >= 0) {
        const auto& n = tree.nodes[node];
        node = static_cast<std::size_t>(value(static_cast<std::size_t>(n.feature)) <= n.threshold
                                            ? n.left
                                            : n.right);
    }
    return tree.nodes[node].prediction;
}

constexpr std::uint64_t permutation_stream = 0x5045524DULL;

} // namespace

int Tree::predict(const ClassificationProblem& problem, std::size_t row) const {
    return traverse(*this, [&](std::size_t f) { return problem.at(row, f); });
}

std::vector<bool> Forest::oob_mask(std::size_t tree) const {
    std::vector<bool> mask(n_rows, false);
    for (auto r : trees.at(tree).oob_rows) {
        mask[r] = true;
    }
    return mask;
}

int Forest::predict(const ClassificationProblem& problem, std::size_t row) const {
    std::vector<int> votes(n_classes, 0);
    for (const auto& tree : trees) {
        ++votes[static_cast<std::size_t>(tree.predict(problem, row))];
    }
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

Forest train(const ClassificationProblem& problem, const ForestParams& params, std::uint64_t seed) {
    if (problem.label_set.size() < 2) {
        throw DegenerateError("fewer than two classes");
    }
    if (problem.n_rows < 10) {
        throw DegenerateError("fewer than 10 rows");
    }
    if (params.n_trees < 1 || params.min_node_size < 1 || params.permutation_repeats < 1 ||
        params.mtry < 0) {
        throw ParameterError("invalid forest parameters");
    }
    const auto p = problem.n_features();
    if (static_cast<std::size_t>(params.mtry) > p) {
        throw ParameterError("mtry exceeds the number of features");
    }
    std::size_t mtry = params.mtry == 0
                           ? static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p))))
                           : static_cast<std::size_t>(params.mtry);
    mtry = std::clamp<std::size_t>(mtry, 1, p);

    Forest forest;
    forest.params = params;
    forest.seed = seed;
    forest.n_classes = problem.label_set.size();
    forest.n_features = p;
    forest.n_rows = problem.n_rows;
    forest.trees.resize(static_cast<std::size_t>(params.n_trees));

    // One builder (scratch buffers) per chunk of trees.
    const unsigned workers = std::max(1u, params.threads);
    const std::size_t n_trees = forest.trees.size();
    const std::size_t chunk = (n_trees + workers - 1) / workers;
    parallel_for(workers, workers, [&](std::size_t w) {
        TreeBuilder builder(problem, params, mtry);
        for (std::size_t t = w * chunk; t < std::min(n_trees, (w + 1) * chunk); ++t) {
            forest.trees[t] = builder.build(derive_seed(seed, t));
        }
    });
    return forest;
}

OobError oob_error(const Forest& forest, const ClassificationProblem& problem) {
    std::vector<int> votes(problem.n_rows * forest.n_classes, 0);
    for (const auto& tree : forest.trees) {
        for (auto row : tree.oob_rows) {
            ++votes[row * forest.n_classes +
                    static_cast<std::size_t>(tree.predict(problem, row))];
        }
    }
    OobError out;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < problem.n_rows; ++i) {
        const auto begin = votes.begin() + static_cast<long>(i * forest.n_classes);
        const auto end = begin + static_cast<long>(forest.n_classes);
        if (std::all_of(begin, end, [](int v) { return v == 0; })) {
            ++out.unvoted_rows;
            continue;
        }
        ++out.voted_rows;
        if (std::max_element(begin, end) - begin != problem.y[i]) {
            ++wrong;
        }
    }
    out.rate = out.voted_rows == 0 ? 0.0
                                   : static_cast<double>(wrong) / static_cast<double>(out.voted_rows);
    return out;
}

std::vector<double> mean_decrease_accuracy(const Forest& forest,
                                           const ClassificationProblem& problem,
                                           std::uint64_t seed) {
    const auto p = forest.n_features;
    const auto n_trees = forest.trees.size();
    const int repeats = forest.params.permutation_repeats;
    // diffs[t * p + f]; NaN for trees without out-of-bag rows.
    std::vector<double> diffs(n_trees * p, std::numeric_limits<double>::quiet_NaN());

    parallel_for(n_trees, std::max(1u, forest.params.threads), [&](std::size_t t) {
        const auto& tree = forest.trees[t];
        const auto& oob = tree.oob_rows;
        if (oob.empty()) {
            return;
        }
        const double m = static_cast<double>(oob.size());
        int base_wrong = 0;
        for (auto row : oob) {
            base_wrong += tree.predict(problem, row) != problem.y[row] ? 1 : 0;
        }
        std::vector<std::uint32_t> perm(oob.size());
        for (std::size_t f = 0; f < p; ++f) {
            double increase = 0.0;
            for (int r = 0; r < repeats; ++r) {
                std::mt19937_64 rng(derive_seed(seed ^ tree.seed, permutation_stream + f,
                                                static_cast<std::uint64_t>(r)));
                perm.assign(oob.begin(), oob.end());
                std::shuffle(perm.begin(), perm.end(), rng);
                int wrong = 0;
                for (std::size_t k = 0; k < oob.size(); ++k) {
                    const auto row = oob[k];
                    const auto source = perm[k];
                    const int pred = traverse(tree, [&](std::size_t feature) {
                        return problem.at(feature == f ? source : row, feature);
                    });
                    wrong += pred != problem.y[row] ? 1 : 0;
                }
                increase += static_cast<double>(wrong - base_wrong) / m;
            }
            diffs[t * p + f] = increase / repeats;
        }
    });

    std::vector<double> scores(p, 0.0);
    for (std::size_t f = 0; f < p; ++f) {
        double sum = 0.0;
        std::size_t used = 0;
        for (std::size_t t = 0; t < n_trees; ++t) {
            const double d = diffs[t * p + f];
            if (!std::isnan(d)) {
                sum += d;
                ++used;
            }
        }
        if (used == 0) {
            continue;
        }
        const double mean = sum / static_cast<double>(used);
        double ss = 0.0;
        for (std::size_t t = 0; t < n_trees; ++t) {
            const double d = diffs[t * p + f];
            if (!std::isnan(d)) {
                ss += (d - mean) * (d - mean);
            }
        }
        const double sd = used > 1 ? std::sqrt(ss / static_cast<double>(used - 1)) : 0.0;
        scores[f] = sd > 0.0 ? mean / sd : mean;
    }
    return scores;
}

std::vector<double> mean_decrease_gini(const Forest& forest) {
    std::vector<double> scores(forest.n_features, 0.0);
    for (const auto& tree : forest.trees) {
        for (std::size_t f = 0; f < forest.n_features; ++f) {
            scores[f] += tree.gini_decrease[f];
        }
    }
    for (auto& s : scores) {
        s /= static_cast<double>(forest.trees.size());
    }
    return scores;
}

std::vector<int> descending_ranks(std::span<const double> scores) {
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<int> ranks(scores.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        ranks[order[r]] = static_cast<int>(r) + 1;
    }
    return ranks;
}

ImportanceReport rank_features(std::span<const double> scores,
                               std::vector<std::string> feature_names, VariableKind kind,
                               Target target, ImportanceMeasure measure) {
    if (scores.size() != feature_names.size()) {
        throw LengthError("one score per feature expected");
    }
    ImportanceReport report;
    report.variable_kind = kind;
    report.target = target;
    report.measure = measure;
    report.feature_names = std::move(feature_names);
    report.scores.assign(scores.begin(), scores.end());
    report.ranks = descending_ranks(scores);
    return report;
}

} // namespace hydrofeat
