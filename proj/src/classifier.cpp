#include "tabsynth/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tabsynth::gbt {

using nlohmann::json;

void BoostConfig::validate() const {
    if (n_estimators < 1) throw ConfigError("n_estimators must be at least 1");
    if (max_depth < 1) throw ConfigError("max_depth must be at least 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw ConfigError("learning_rate must lie in (0, 1]");
    if (min_child_weight < 0.0) throw ConfigError("min_child_weight must be non-negative");
    if (l2 < 0.0) throw ConfigError("l2 must be non-negative");
}

json BoostConfig::to_json() const {
    return {{"n_estimators", n_estimators}, {"max_depth", max_depth},   {"learning_rate", learning_rate},
            {"min_child_weight", min_child_weight}, {"l2", l2}, {"seed", seed}};
}

BoostConfig BoostConfig::from_json(const json& j) {
    BoostConfig c;
    c.n_estimators = j.value("n_estimators", c.n_estimators);
    c.max_depth = j.value("max_depth", c.max_depth);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.min_child_weight = j.value("min_child_weight", c.min_child_weight);
    c.l2 = j.value("l2", c.l2);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
}

double Tree::predict(std::span<const double> row) const {
    if (nodes.empty()) return 0.0;
    int at = 0;
    while (!nodes[static_cast<std::size_t>(at)].leaf()) {
        const auto& n = nodes[static_cast<std::size_t>(at)];
        at = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(at)].weight;
}

namespace {

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::span<const double> row_span(const Matrix& m, Eigen::Index r) {
    return {m.data() + r * m.cols(), static_cast<std::size_t>(m.cols())};
}

json node_json(const Tree& tree, int at) {
    const auto& n = tree.nodes[static_cast<std::size_t>(at)];
    if (n.leaf()) return {{"leaf", n.weight}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"left", node_json(tree, n.left)},
            {"right", node_json(tree, n.right)}};
}

}  // namespace

std::vector<double> BoostModel::decision(const Matrix& rows) const {
    if (static_cast<std::size_t>(rows.cols()) != width)
        throw ShapeError("classifier expects width " + std::to_string(width) + ", got " + std::to_string(rows.cols()));
    std::vector<double> out(static_cast<std::size_t>(rows.rows()), base_score);
    for (Eigen::Index r = 0; r < rows.rows(); ++r)
        for (const auto& t : trees) out[static_cast<std::size_t>(r)] += t.predict(row_span(rows, r));
    return out;
}

std::vector<double> BoostModel::predict_proba(const Matrix& rows) const {
    auto z = decision(rows);
    for (double& v : z) v = sigmoid(v);
    return z;
}

std::vector<int> BoostModel::predict(const Matrix& rows) const {
    const auto p = predict_proba(rows);
    std::vector<int> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= 0.5 ? 1 : 0;
    return out;
}

json BoostModel::to_json() const {
    json trees_json = json::array();
    for (const auto& t : trees) trees_json.push_back(t.nodes.empty() ? json{{"leaf", 0.0}} : node_json(t, 0));
    return {{"format", "tabsynth.gbt"}, {"version", 1}, {"base_score", base_score}, {"width", width}, {"trees", trees_json}};
}

BoostModel fit(const Matrix& x, std::span<const int> y, const BoostConfig& config, kernels::Exec exec) {
    config.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    if (y.size() != n) throw ShapeError("fit: label count differs from row count");
    const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    if (positives == 0 || positives == n) throw DegenerateLabels("classifier training set has a single class");

    BoostModel model;
    model.width = static_cast<std::size_t>(x.cols());
    const double prior = static_cast<double>(positives) / static_cast<double>(n);
    model.base_score = std::log(prior / (1.0 - prior));

    std::vector<std::vector<std::uint32_t>> sorted(model.width);
    for (std::size_t f = 0; f < model.width; ++f) {
        auto& order = sorted[f];
        order.resize(n);
        std::iota(order.begin(), order.end(), 0u);
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return x(a, static_cast<Eigen::Index>(f)) < x(b, static_cast<Eigen::Index>(f));
        });
    }

    std::vector<double> score(n, model.base_score), g(n), h(n);
    std::vector<int> node_of_row(n);
    for (int round = 0; round < config.n_estimators; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(score[i]);
            g[i] = p - y[i];
            h[i] = p * (1.0 - p);
        }
        Tree tree;
        tree.nodes.emplace_back();
        std::vector<int> open{0};  // tree node of each open slot
        kernels::NodeTotals root;
        for (std::size_t i = 0; i < n; ++i) {
            root.g += g[i];
            root.h += h[i];
        }
        std::vector<kernels::NodeTotals> totals{root};
        std::fill(node_of_row.begin(), node_of_row.end(), 0);
        auto make_leaf = [&](int node, const kernels::NodeTotals& t) {
            tree.nodes[static_cast<std::size_t>(node)].weight = -t.g / (t.h + config.l2) * config.learning_rate;
        };

        for (int depth = 0; depth < config.max_depth && !open.empty(); ++depth) {
            const auto splits = kernels::best_splits(x, sorted, node_of_row, g, h, totals, config.l2,
                                                     config.min_child_weight, exec);
            std::vector<int> next_open;
            std::vector<kernels::NodeTotals> next_totals;
            std::vector<int> left_slot(open.size(), -1);
            for (std::size_t s = 0; s < open.size(); ++s) {
                const int node = open[s];
                if (!splits[s].valid()) {
                    make_leaf(node, totals[s]);
                    continue;
                }
                const int left = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes.emplace_back();
                auto& parent = tree.nodes[static_cast<std::size_t>(node)];
                parent.feature = splits[s].feature;
                parent.threshold = splits[s].threshold;
                parent.left = left;
                parent.right = left + 1;
                left_slot[s] = static_cast<int>(next_open.size());
                next_open.push_back(left);
                next_open.push_back(left + 1);
                const kernels::NodeTotals l{splits[s].left_g, splits[s].left_h};
                next_totals.push_back(l);
                next_totals.push_back({totals[s].g - l.g, totals[s].h - l.h});
            }
            for (std::size_t i = 0; i < n; ++i) {
                const int s = node_of_row[i];
                if (s < 0) continue;
                const int slot = left_slot[static_cast<std::size_t>(s)];
                if (slot < 0) {
                    node_of_row[i] = -1;
                    continue;
                }
                const auto& split = splits[static_cast<std::size_t>(s)];
                node_of_row[i] = x(static_cast<Eigen::Index>(i), split.feature) < split.threshold ? slot : slot + 1;
            }
            open = std::move(next_open);
            totals = std::move(next_totals);
        }
        for (std::size_t s = 0; s < open.size(); ++s) make_leaf(open[s], totals[s]);

        for (std::size_t i = 0; i < n; ++i) score[i] += tree.predict(row_span(x, static_cast<Eigen::Index>(i)));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

BoostModel fit(const Dataset& data, const BoostConfig& config, kernels::Exec exec) {
    return fit(data.features, data.labels, config, exec);
}

double log_loss(const BoostModel& model, const Matrix& x, std::span<const int> y) {
    const auto z = model.decision(x);
    double total = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        // log(1 + exp(-s z)) with s = +-1, computed stably.
        const double m = y[i] == 1 ? z[i] : -z[i];
        total += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    return total / static_cast<double>(z.size());
}

double f1_score(std::span<const int> predicted, std::span<const int> labels) {
    if (predicted.size() != labels.size()) throw ShapeError("f1: prediction and label counts differ");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (predicted[i] == 1 && labels[i] == 1) ++tp;
        else if (predicted[i] == 1) ++fp;
        else if (labels[i] == 1) ++fn;
    }
    if (tp == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

std::vector<BoostConfig> default_grid() {
    std::vector<BoostConfig> grid;
    for (int depth : {2, 3, 4, 6})
        for (int estimators : {50, 100, 200})
            for (double lr : {0.1, 0.3}) {
                BoostConfig c;
                c.max_depth = depth;
                c.n_estimators = estimators;
                c.learning_rate = lr;
                grid.push_back(c);
            }
    return grid;
}

GridSearchResult grid_search(const Dataset& data, const FoldSplit& folds, std::span<const BoostConfig> grid, int jobs) {
    if (grid.empty()) throw ConfigError("empty classifier grid");
    for (const auto& c : grid) c.validate();
    const auto configs = static_cast<long>(grid.size());
    const auto fold_count = static_cast<long>(folds.fold_count);
    std::vector<double> f1(static_cast<std::size_t>(configs * fold_count), 0.0);
    std::vector<Dataset> train(folds.fold_count), test(folds.fold_count);
    for (std::size_t f = 0; f < folds.fold_count; ++f) {
        train[f] = data.subset(folds.train_indices(f));
        test[f] = data.subset(folds.test_indices(f));
    }
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
    for (long job = 0; job < configs * fold_count; ++job) {
        try {
            const auto c = static_cast<std::size_t>(job / fold_count), f = static_cast<std::size_t>(job % fold_count);
            const auto model = fit(train[f], grid[c], kernels::Exec::Serial);
            f1[static_cast<std::size_t>(job)] = f1_score(model.predict(test[f].features), test[f].labels);
        } catch (...) {
#pragma omp critical(tabsynth_grid_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    GridSearchResult result;
    for (long c = 0; c < configs; ++c) {
        double sum = 0.0;
        for (long f = 0; f < fold_count; ++f) sum += f1[static_cast<std::size_t>(c * fold_count + f)];
        result.scores.push_back({grid[static_cast<std::size_t>(c)], sum / static_cast<double>(fold_count)});
    }
    const GridScore* best = &result.scores.front();
    for (const auto& s : result.scores)
        if (s.mean_test_f1 > best->mean_test_f1 || (s.mean_test_f1 == best->mean_test_f1 && s.config.key() < best->config.key()))
            best = &s;
    result.best = best->config;
    return result;
}

}  // namespace tabsynth::gbt
