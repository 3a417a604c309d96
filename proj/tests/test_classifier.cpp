#include <doctest.h>

#include "support.hpp"
#include "tabsynth/classifier.hpp"

using namespace tabsynth;

TEST_SUITE("classifier") {

TEST_CASE("f1 score") {
    CHECK(gbt::f1_score(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 1, 0}) == doctest::Approx(0.5));
    CHECK(gbt::f1_score(std::vector<int>{0, 0}, std::vector<int>{1, 0}) == 0.0);
    CHECK(gbt::f1_score(std::vector<int>{1, 1, 1}, std::vector<int>{1, 1, 1}) == 1.0);
}

TEST_CASE("separable data is learned exactly") {
    Rng rng(1);
    Matrix x = uniform_matrix(200, 3, rng);
    std::vector<int> y(200);
    for (Eigen::Index i = 0; i < 200; ++i) y[static_cast<std::size_t>(i)] = x(i, 1) > 0.4 ? 1 : 0;
    gbt::BoostConfig cfg;
    cfg.n_estimators = 20;
    const auto model = gbt::fit(x, y, cfg);
    CHECK(gbt::f1_score(model.predict(x), y) == 1.0);
    REQUIRE_FALSE(model.trees.empty());
    CHECK(model.trees[0].nodes[0].feature == 1);
}

TEST_CASE("more boosting rounds lower the training loss") {
    const Dataset d = testing::small_mixed(300, 0.3, 2);
    gbt::BoostConfig few, many;
    few.n_estimators = 5;
    many.n_estimators = 50;
    CHECK(gbt::log_loss(gbt::fit(d, many), d.features, d.labels) < gbt::log_loss(gbt::fit(d, few), d.features, d.labels));
}

TEST_CASE("base score is the prior log-odds") {
    const Dataset d = testing::small_mixed(200, 0.25, 3);
    gbt::BoostConfig cfg;
    cfg.n_estimators = 1;
    const auto model = gbt::fit(d, cfg);
    const double p = static_cast<double>(d.count(1)) / static_cast<double>(d.rows());
    CHECK(model.base_score == doctest::Approx(std::log(p / (1 - p))));
}

TEST_CASE("serial and parallel fits are identical") {
    const Dataset d = testing::small_mixed(400, 0.3, 4);
    gbt::BoostConfig cfg;
    cfg.max_depth = 4;
    const auto a = gbt::fit(d, cfg, kernels::Exec::Serial).to_json().dump();
    const auto b = gbt::fit(d, cfg, kernels::Exec::Parallel).to_json().dump();
    CHECK(a == b);
}

TEST_CASE("invalid inputs") {
    const Dataset d = testing::small_mixed(50, 0.3, 5);
    std::vector<int> one(50, 1);
    CHECK_THROWS_AS(gbt::fit(d.features, one, gbt::BoostConfig{}), DegenerateLabels);
    gbt::BoostConfig bad;
    bad.max_depth = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("grid search is deterministic across job counts") {
    const Dataset d = testing::small_mixed(240, 0.3, 6);
    const FoldSplit folds = make_folds(d, 3, 0.0, 1);
    std::vector<gbt::BoostConfig> grid;
    for (int depth : {2, 3})
        for (int n : {10, 30}) {
            gbt::BoostConfig c;
            c.max_depth = depth;
            c.n_estimators = n;
            grid.push_back(c);
        }
    const auto a = gbt::grid_search(d, folds, grid, 1);
    const auto b = gbt::grid_search(d, folds, grid, 3);
    REQUIRE(a.scores.size() == 4);
    CHECK(a.best.to_json() == b.best.to_json());
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.scores[i].mean_test_f1 == b.scores[i].mean_test_f1);
    double top = -1.0;
    for (const auto& s : a.scores) top = std::max(top, s.mean_test_f1);
    for (const auto& s : a.scores)
        if (s.config.to_json() == a.best.to_json()) CHECK(s.mean_test_f1 == top);
}

TEST_CASE("default grid covers depth, rounds and learning rate") {
    const auto grid = gbt::default_grid();
    CHECK(grid.size() == 24);
    const auto cfg = gbt::BoostConfig::from_json(grid[5].to_json());
    CHECK(cfg.key() == grid[5].key());
}

}  // TEST_SUITE
