#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tabsynth/protocol.hpp"

using namespace tabsynth;
using namespace tabsynth::protocol;

namespace {

GridConfig fast_config() {
    GridConfig c;
    gbt::BoostConfig clf;
    clf.n_estimators = 15;
    c.classifier = clf;
    c.folds = 3;
    c.seed = 4;
    c.model.hidden_sizes = {8};
    c.model.latent_size = 4;
    c.model.embedding_size = 3;
    c.model.training.epochs = 2;
    c.model.training.pretrain_epochs = 1;
    return c;
}

}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("default ratio grids") {
    CHECK(default_ratio_grid(0.33) == std::vector<double>{0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
    CHECK(default_ratio_grid(0.3).front() == 0.3);
    const auto tiny = default_ratio_grid(0.002);
    REQUIRE(tiny.size() == 6);
    CHECK(tiny.front() == doctest::Approx(0.004));
    CHECK(tiny.back() == doctest::Approx(0.128));
}

TEST_CASE("invalid grids name the offending value") {
    try {
        validate_grids({0.5, 1.7}, {}, 0.2);
        FAIL("expected RatioError");
    } catch (const RatioError& e) {
        CHECK(std::string(e.what()).find("1.7") != std::string::npos);
    }
    CHECK_THROWS_AS(validate_grids({0.1}, {}, 0.2), RatioError);
    CHECK_THROWS_AS(validate_grids({0.5}, {std::nan("")}, 0.2), RatioError);
}

TEST_CASE("effective ratios") {
    CHECK(effective_usr(0.25, 0.25, 0.2412) == 0.2412);
    CHECK(effective_usr(0.3, 0.25, 0.31) == 0.31);
    CHECK(effective_usr(0.5, 0.25, 0.31) == 0.5);
    CHECK(effective_osr(0.5, 0.5, 0.52) == 0.52);
    CHECK(effective_osr(0.7, 0.5, 0.52) == 0.7);
}

TEST_CASE("seeds depend on their key only") {
    CHECK(undersample_seed(1, "d", 0, 0.5) == undersample_seed(1, "d", 0, 0.5));
    CHECK(undersample_seed(1, "d", 0, 0.5) != undersample_seed(1, "d", 1, 0.5));
    CHECK(undersample_seed(1, "d", 0, 0.5) != undersample_seed(1, "d", 0, 0.6));
    CHECK(generator_seed(1, "d", "mv-vae", "minority", 0) != generator_seed(1, "d", "mv-vae", "conditional", 0));
}

TEST_CASE("record counts of a small grid") {
    const Dataset d = testing::small_mixed(300, 0.3, 1);
    GridConfig c = fast_config();
    c.folds = 10;
    c.methods = {"random_over"};
    c.usr_grid = {0.5};
    c.osr_grid = {0.6};
    const GridRun run = run_grid(d, c);
    std::map<std::string, int> per_method;
    for (const auto& r : run.records) ++per_method[r.method];
    CHECK(per_method[kBaseline] == 10);
    CHECK(per_method[kUndersample] == 10);
    CHECK(per_method["random_over"] == 10);
    CHECK(run.records.size() == 30);
    CHECK(std::is_sorted(run.records.begin(), run.records.end(), canonical_less));
}

TEST_CASE("usr at the dataset IR reproduces the baseline") {
    const Dataset d = testing::small_mixed(240, 0.25, 2);
    GridConfig c = fast_config();
    const double ir = compute_ir(d.labels);
    c.usr_grid = {ir, 0.8};
    const GridRun run = run_grid(d, c);
    std::map<std::size_t, double> base, under;
    for (const auto& r : run.records) {
        if (r.method == kBaseline) base[r.fold] = r.test_f1;
        if (r.method == kUndersample && r.usr == ir) under[r.fold] = r.test_f1;
    }
    REQUIRE(base.size() == 3);
    CHECK(base == under);
}

TEST_CASE("generator training rows never include test rows") {
    const Dataset d = testing::small_mixed(200, 0.3, 3);
    GridConfig c = fast_config();
    c.methods = {"mv-vae"};
    c.sampling = {SamplingKind::Minority, SamplingKind::Rejection};
    c.usr_grid = {0.6};
    const GridRun run = run_grid(d, c);
    const FoldSplit folds = make_folds(d, c.folds, c.validation_fraction, c.seed);
    REQUIRE(run.generator_rows.size() == 6);
    for (const auto& [key, rows] : run.generator_rows) {
        const std::size_t fold = static_cast<std::size_t>(key.back() - '0');
        CAPTURE(key);
        for (auto r : rows) CHECK(folds.assignments[r] != static_cast<int>(fold));
    }
}

TEST_CASE("results CSV round trip and timeouts") {
    std::vector<ExperimentRecord> records;
    ExperimentRecord a;
    a.dataset = "d";
    a.method = "smote";
    a.usr = 0.5;
    a.osr = 0.7;
    a.fold = 1;
    a.train_f1 = 0.9;
    a.test_f1 = 0.75;
    records.push_back(a);
    ExperimentRecord t = a;
    t.method = "mv-vae";
    t.sampling = "rejection";
    t.status = Status::Timeout;
    t.train_f1 = t.test_f1 = std::nan("");
    records.push_back(t);
    const auto dir = testing::scratch_dir("protocol-results");
    write_results_csv(records, dir / "r.csv", false);
    const auto back = read_results_csv(dir / "r.csv");
    REQUIRE(back.size() == 2);
    CHECK(back[0].test_f1 == 0.75);
    CHECK(back[0].usr == 0.5);
    CHECK(back[1].status == Status::Timeout);
    CHECK(std::isnan(back[1].test_f1));
    const auto rows = summarize(back);
    REQUIRE(rows.size() == 2);
    const std::string md = summary_markdown(rows, "d", 0.3);
    CHECK(md.find("| Model | Sampling | USR | OSR | Train f1 | Test f1 |") != std::string::npos);
    CHECK(md.find("Timeout") != std::string::npos);
    CHECK(md.find("SMOTE") != std::string::npos);
}

TEST_CASE("summaries pick the best cell and keep the smallest on ties") {
    std::vector<ExperimentRecord> records;
    auto add = [&](double usr, double osr, std::size_t fold, double f1) {
        ExperimentRecord r;
        r.dataset = "d";
        r.method = "smote";
        r.usr = usr;
        r.osr = osr;
        r.fold = fold;
        r.test_f1 = f1;
        r.train_f1 = f1;
        records.push_back(r);
    };
    add(0.5, 0.5, 0, 0.6);
    add(0.5, 0.5, 1, 0.8);
    add(0.5, 0.7, 0, 0.7);
    add(0.5, 0.7, 1, 0.7);
    add(0.6, 0.8, 0, 0.5);
    add(0.6, 0.8, 1, 0.5);
    const auto cells = summarize_cells(records);
    REQUIRE(cells.size() == 3);
    CHECK(cells[0].test_mean == doctest::Approx(0.7));
    CHECK(cells[0].test_sd == doctest::Approx(std::sqrt(0.02)));
    const auto rows = summarize(records);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].best.osr == 0.5);
}

TEST_CASE("grid config JSON round trip") {
    GridConfig c = fast_config();
    c.methods = {"smote", "mv-wgan-gp"};
    c.sampling = {SamplingKind::Rejection};
    c.usr_grid = {0.4, 0.8};
    c.draw_limit = 123;
    const GridConfig back = GridConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    nlohmann::json bad = c.to_json();
    bad["methods"] = {"svm_smote"};
    CHECK_THROWS_AS(GridConfig::from_json(bad), ConfigError);
}

TEST_CASE("display names") {
    CHECK(display_name(kBaseline) == "Only classifier");
    CHECK(display_name(kUndersample) == "Undersampling and classifier");
    CHECK(display_name("random_over") == "RandomOverSampler");
    CHECK(display_name("mv-wgan-gp") == "MV-WGAN-GP");
}

}  // TEST_SUITE
