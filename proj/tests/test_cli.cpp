#include <doctest.h>
#include <fmt/format.h>
#include <sys/wait.h>

#include <fstream>
#include <random>

#include "support.hpp"

using namespace tabsynth;
namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
    const std::string cmd = fmt::format("{} {} > /dev/null 2>&1", TABSYNTH_CLI, args);
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t line_count(const fs::path& path) {
    const std::string text = testing::read_file(path);
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Raw CSV and metadata with a 20% positive class.
fs::path raw_fixture() {
    const fs::path dir = testing::scratch_dir("cli-raw");
    Rng rng(3);
    std::normal_distribution<double> standard_normal;
    std::ofstream csv(dir / "toy.csv");
    csv << "color,flag,x1,x2,target\n";
    for (int i = 0; i < 250; ++i) {
        const bool pos = i % 5 == 0;
        csv << "abc"[i % 3] << ',' << (uniform01(rng) < 0.6 ? "yes" : "no") << ','
            << fmt::format("{:.4f},{:.3f}", (pos ? 1.0 : 0.0) + standard_normal(rng), 50.0 + 3.0 * uniform01(rng)) << ','
            << (pos ? "pos" : "neg") << '\n';
    }
    std::ofstream(dir / "toy.meta.json")
        << R"({"label": "target", "positive_class": "pos", "variables": [)"
           R"({"name": "color", "kind": "categorical", "categories": ["a", "b", "c"]},)"
           R"({"name": "flag", "kind": "binary", "categories": ["no", "yes"]},)"
           R"({"name": "x1", "kind": "numerical"}, {"name": "x2", "kind": "numerical"}]})";
    return dir;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors and error kinds map to exit codes") {
    CHECK(cli("") == 2);
    CHECK(cli("no-such-command") == 2);
    CHECK(cli("grid --data /nonexistent.csv --meta /nonexistent.json --out /tmp/x") == 2);
    // Empty metadata is a schema error.
    CHECK(cli("preprocess --csv /dev/null --metadata /dev/null --out /tmp/x --name t") == 11);
    CHECK(cli("--version") == 0);
}

TEST_CASE("preprocess, train, sample and grid end to end") {
    const fs::path dir = raw_fixture();
    const std::string d = dir.string();
    REQUIRE(cli(fmt::format("preprocess --csv {0}/toy.csv --metadata {0}/toy.meta.json --out {0}/enc --name toy", d)) == 0);
    CHECK(fs::exists(dir / "enc/toy.csv"));
    CHECK(fs::exists(dir / "enc/toy.meta.json"));
    CHECK(line_count(dir / "enc/toy.csv") == 251);

    const std::string data = fmt::format("--data {0}/enc/toy.csv --meta {0}/enc/toy.meta.json", d);
    const std::string train = fmt::format("train {} --model mv-vae --strategy minority --epochs 3 --seed 5", data);
    REQUIRE(cli(fmt::format("{} --out {}/m1.json", train, d)) == 0);
    REQUIRE(cli(fmt::format("{} --out {}/m2.json", train, d)) == 0);
    CHECK(testing::read_file(dir / "m1.json") == testing::read_file(dir / "m2.json"));

    REQUIRE(cli(fmt::format("sample --model {0}/m1.json --meta {0}/enc/toy.meta.json --n 100 --seed 2 --out {0}/s.csv", d)) ==
            0);
    CHECK(line_count(dir / "s.csv") == 101);
    CHECK(testing::read_file(dir / "s.csv").rfind("color,flag,x1,x2,target\n", 0) == 0);
    // An output path below a regular file cannot be created.
    CHECK(cli(fmt::format("sample --model {0}/m1.json --n 5 --out /dev/null/x/s.csv", d)) == 23);
    // A minority model cannot serve rejection sampling.
    CHECK(cli(fmt::format("sample --model {0}/m1.json --strategy rejection --n 10 --out {0}/r.csv", d)) == 22);

    const std::string grid = fmt::format(
        "grid {} --methods smote,random_over,mv-vae --sampling minority --usr-grid 0.4,1 --folds 3 --epochs 2 --seed 1 --quiet",
        data);
    REQUIRE(cli(fmt::format("{} --out {}/g1", grid, d)) == 0);
    REQUIRE(cli(fmt::format("{} --jobs 2 --out {}/g2", grid, d)) == 0);
    for (const char* f : {"results.csv", "summary.md", "summary.csv"})
        CHECK(testing::read_file(dir / "g1" / f) == testing::read_file(dir / "g2" / f));
    // An invalid ratio grid is a RatioError.
    CHECK(cli(fmt::format("grid {} --usr-grid 0.05 --out {}/g3", data, d)) == 18);

    REQUIRE(cli(fmt::format("viz --kind heatmap --results {0}/g1/results.csv --dataset toy --out {0}/fig", d)) == 0);
    std::size_t heatmaps = 0;
    for (const auto& entry : fs::directory_iterator(dir / "fig"))
        if (entry.path().filename().string().ends_with("_heatmap.svg")) ++heatmaps;
    CHECK(heatmaps == 3);

    REQUIRE(cli(fmt::format("report --results {0}/g1/results.csv {1} --dataset toy --out {0}/rep", d, data)) == 0);
    CHECK(testing::read_file(dir / "rep/summary.md") == testing::read_file(dir / "g1/summary.md"));
}

}  // TEST_SUITE
