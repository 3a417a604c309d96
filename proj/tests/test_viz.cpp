#include <doctest.h>

#include <cmath>
#include <random>
#include <regex>

#include "support.hpp"
#include "tabsynth/svg.hpp"
#include "tabsynth/viz.hpp"

using namespace tabsynth;

namespace {

std::size_t occurrences(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

}  // namespace

TEST_SUITE("viz-report") {

TEST_CASE("jacobi eigen matches a known spectrum") {
    const Matrix a{{2.0, 1.0}, {1.0, 2.0}};
    const auto e = viz::jacobi_eigen(a);
    REQUIRE(e.values.size() == 2);
    CHECK(e.values[0] == doctest::Approx(3.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("pca recovers the dominant direction") {
    Rng rng(1);
    std::normal_distribution<double> standard_normal;
    Matrix rows(300, 3);
    for (Eigen::Index i = 0; i < 300; ++i) {
        const double t = standard_normal(rng);
        rows(i, 0) = 3.0 * t;
        rows(i, 1) = -3.0 * t + 0.1 * standard_normal(rng);
        rows(i, 2) = 0.1 * standard_normal(rng);
    }
    const auto p = viz::pca2(rows);
    CHECK(p.coordinates.rows() == 300);
    CHECK(p.variances[0] > 10.0 * p.variances[1]);
    CHECK(std::abs(p.axes(2, 0)) < 0.05);
    // Sign convention: the largest loading is positive.
    const Eigen::Index top = p.axes.col(0).cwiseAbs().maxCoeff() == std::abs(p.axes(0, 0)) ? 0 : 1;
    CHECK(p.axes(top, 0) > 0.0);
}

TEST_CASE("affinities hit the target perplexity") {
    Rng rng(2);
    const Matrix rows = normal_matrix(80, 4, rng);
    const auto a = viz::conditional_affinities(rows, 10.0);
    for (Eigen::Index i = 0; i < 80; ++i) {
        CHECK(a.conditional.row(i).sum() == doctest::Approx(1.0));
        CHECK(a.conditional(i, i) == 0.0);
        CHECK(viz::row_perplexity(a.conditional, i) == doctest::Approx(10.0).epsilon(1e-3));
    }
}

TEST_CASE("t-SNE lowers the KL divergence and is reproducible") {
    Rng rng(3);
    const Matrix rows = normal_matrix(60, 5, rng);
    viz::TsneConfig cfg;
    cfg.perplexity = 10.0;
    cfg.iterations = 300;
    cfg.learning_rate = 50.0;
    cfg.seed = 5;
    const auto a = viz::tsne2(rows, cfg, kernels::Exec::Serial);
    const auto b = viz::tsne2(rows, cfg, kernels::Exec::Parallel);
    CHECK(a.embedding == b.embedding);
    CHECK(a.kl_trace.back() < a.kl_trace.front());
    CHECK(a.embedding.allFinite());
}

TEST_CASE("som counts partition the tagged rows") {
    const Dataset d = testing::small_mixed(150, 0.3, 4);
    const auto sample = viz::diagnostic_sample(
        d, [&](std::size_t n, Rng& rng) { return uniform_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d.width()), rng); },
        100, 50, 7);
    REQUIRE(sample.rows.rows() == 150);
    viz::SomConfig cfg;
    cfg.epochs = 10;
    auto som = viz::som_fit(sample.rows, cfg);
    viz::som_count(som, sample.rows, sample.tags);
    std::array<std::size_t, 3> total{};
    for (const auto& c : som.counts)
        for (int t = 0; t < 3; ++t) total[static_cast<std::size_t>(t)] += c[static_cast<std::size_t>(t)];
    CHECK(total[2] == 50);
    CHECK(total[0] + total[1] == 100);
    CHECK(som.quantization_error.back() <= som.quantization_error.front());
}

TEST_CASE("heatmap masks the lower triangle") {
    std::vector<protocol::CellSummary> cells;
    for (double u : {0.4, 0.6, 0.8})
        for (double o : {0.4, 0.6, 0.8}) {
            if (o < u) continue;
            protocol::CellSummary c;
            c.method = "smote";
            c.usr = u;
            c.osr = o;
            c.test_mean = u + o / 10.0;
            cells.push_back(c);
        }
    const auto map = svg::heatmap_for(cells, "smote", "", "SMOTE");
    const std::string text = svg::heatmap(map);
    CHECK(testing::xml_error(text).empty());
    CHECK(occurrences(text, "class=\"cell\"") == 6);
    CHECK(occurrences(text, "class=\"missing\"") == 0);
    CHECK(text.find("data-usr=\"0.4\" data-osr=\"0.8\" data-value=\"0.480000\"") != std::string::npos);
}

TEST_CASE("som pies cover every unit with full circles") {
    viz::SomGrid som;
    som.grid_rows = som.grid_cols = 10;
    som.counts.assign(100, {});
    for (std::size_t u = 0; u < 100; ++u) som.counts[u] = {u % 3, u % 5, 1};
    const std::string text = svg::som_pies(som, "som & co");
    CHECK(testing::xml_error(text).empty());
    CHECK(occurrences(text, "class=\"pie\"") == 100);
    CHECK(text.find("som &amp; co") != std::string::npos);
    const std::regex pie(R"re(<g class="pie"[^>]*>([\s\S]*?)</g>)re");
    const std::regex angle(R"re(data-angle="([0-9.eE+-]+)")re");
    std::size_t pies = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), pie); it != std::sregex_iterator(); ++it, ++pies) {
        const std::string body = (*it)[1];
        double sum = 0.0;
        for (auto a = std::sregex_iterator(body.begin(), body.end(), angle); a != std::sregex_iterator(); ++a)
            sum += std::stod((*a)[1]);
        CHECK(sum == doctest::Approx(360.0).epsilon(1e-6));
    }
    CHECK(pies == 100);
}

TEST_CASE("scatter output is valid and deterministic") {
    Rng rng(6);
    const Matrix coords = normal_matrix(20, 2, rng);
    std::vector<viz::Tag> tags(20, viz::Tag::Synthetic);
    tags[0] = viz::Tag::Positive;
    const std::string a = svg::scatter(coords, tags, "<pca>");
    CHECK(a == svg::scatter(coords, tags, "<pca>"));
    CHECK(testing::xml_error(a).empty());
    CHECK(occurrences(a, "<circle") >= 20);
}

TEST_CASE("figure names are file safe") {
    CHECK(svg::figure_name("adult", "mv-vae", "minority", "heatmap") == "adult_mv-vae_minority_heatmap.svg");
    CHECK(svg::figure_name("a b/c", "smote", "", "heatmap") == "a-b-c_smote_none_heatmap.svg");
    CHECK_THROWS_AS(svg::write_file("/nonexistent-dir/x.svg", "x"), IoError);
}

}  // TEST_SUITE
