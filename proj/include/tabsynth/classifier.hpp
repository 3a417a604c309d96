#pragma once

// Second-order gradient-boosted trees on the logistic loss, the f1 metric,
// and the hyperparameter grid search that freezes the classifier per dataset.

#include <cstdint>
#include <span>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "tabsynth/kernels.hpp"
#include "tabsynth/tabular.hpp"

namespace tabsynth::gbt {

struct BoostConfig {
    int n_estimators = 100;
    int max_depth = 3;
    double learning_rate = 0.3;
    double min_child_weight = 1.0;
    double l2 = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
    // Grid tie-break order.
    auto key() const { return std::tie(n_estimators, max_depth, learning_rate, min_child_weight, l2); }
    nlohmann::json to_json() const;
    static BoostConfig from_json(const nlohmann::json& j);
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double weight = 0.0;  // leaf logit contribution, learning rate applied

    bool leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> row) const;
};

class BoostModel {
public:
    double base_score = 0.0;
    std::size_t width = 0;
    std::vector<Tree> trees;

    // Base score plus summed leaf logits per row.
    std::vector<double> decision(const Matrix& rows) const;
    std::vector<double> predict_proba(const Matrix& rows) const;
    // 1 when the probability is at least 0.5.
    std::vector<int> predict(const Matrix& rows) const;

    nlohmann::json to_json() const;
};

BoostModel fit(const Matrix& x, std::span<const int> y, const BoostConfig& config,
               kernels::Exec exec = kernels::default_exec());
BoostModel fit(const Dataset& data, const BoostConfig& config, kernels::Exec exec = kernels::default_exec());

// Mean logistic loss of the model on (x, y).
double log_loss(const BoostModel& model, const Matrix& x, std::span<const int> y);

// f1 of the positive class; 0 when there is no true positive.
double f1_score(std::span<const int> predicted, std::span<const int> labels);

std::vector<BoostConfig> default_grid();

struct GridScore {
    BoostConfig config;
    double mean_test_f1 = 0.0;
};

struct GridSearchResult {
    BoostConfig best;
    std::vector<GridScore> scores;  // in grid order
};

// Mean test f1 over folds per config; the highest wins, ties go to the
// lexicographically smallest key().
GridSearchResult grid_search(const Dataset& data, const FoldSplit& folds, std::span<const BoostConfig> grid,
                             int jobs = 1);

}  // namespace tabsynth::gbt
