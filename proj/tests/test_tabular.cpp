#include <doctest.h>

#include <cstring>
#include <sstream>

#include "support.hpp"
#include "tabsynth/csv.hpp"
#include "tabsynth/tabular.hpp"

using namespace tabsynth;

namespace {

Dataset load(const std::string& csv_text, const std::string& meta_text) {
    std::istringstream csv(csv_text), meta(meta_text);
    return load_raw(csv, meta, "t");
}

const char* kMeta = R"({"label": "y", "positive_class": "1", "variables": [
    {"name": "n", "kind": "numerical"},
    {"name": "c", "kind": "categorical", "categories": ["a", "b", "c"]},
    {"name": "b", "kind": "binary", "categories": ["no", "yes"]}]})";

}  // namespace

TEST_SUITE("tabular") {

TEST_CASE("numerical columns are min-max scaled") {
    const Dataset d = load("n,c,b,y\n10,a,no,0\n20,b,yes,1\n30,c,no,0\n", kMeta);
    CHECK(d.features(0, 0) == 0.0);
    CHECK(d.features(1, 0) == 0.5);
    CHECK(d.features(2, 0) == 1.0);
    CHECK(d.meta[0].scale_min == 10.0);
    CHECK(d.meta[0].scale_max == 30.0);
}

TEST_CASE("categoricals are one-hot and binaries take one column") {
    const Dataset d = load("n,c,b,y\n10,a,no,0\n20,b,yes,1\n30,c,no,0\n", kMeta);
    REQUIRE(d.width() == 5);
    CHECK(d.meta[1].width == 3);
    CHECK(d.meta[2].width == 1);
    for (Eigen::Index r = 0; r < 3; ++r) CHECK(d.features.row(r).segment(1, 3).sum() == 1.0);
    CHECK(d.features(1, 2) == 1.0);
    CHECK(d.features(0, 4) == 0.0);
    CHECK(d.features(1, 4) == 1.0);
    CHECK(d.labels == std::vector<int>{0, 1, 0});
}

TEST_CASE("constant numerical columns map to zero") {
    const Dataset d = load("n,c,b,y\n5,a,no,0\n5,b,yes,1\n5,c,no,1\n", kMeta);
    CHECK(d.features.col(0).isZero());
}

TEST_CASE("decode errors name the row and column") {
    CHECK_THROWS_AS(load("n,c,b,y\n10,z,no,0\n20,b,yes,1\n", kMeta), DecodeError);
    CHECK_THROWS_AS(load("n,c,b,y\n10,a,,0\n20,b,yes,1\n", kMeta), DecodeError);
    try {
        load("n,c,b,y\n10,a,no,0\n20,q,yes,1\n", kMeta);
        FAIL("expected DecodeError");
    } catch (const DecodeError& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
        CHECK(std::string(e.what()).find("'c'") != std::string::npos);
    }
}

TEST_CASE("schema mismatches are SchemaError") {
    CHECK_THROWS_AS(load("n,c,b,extra,y\n1,a,no,3,0\n", kMeta), SchemaError);
    CHECK_THROWS_AS(load("n,c,y\n1,a,0\n", kMeta), SchemaError);
    CHECK_THROWS_AS(load("n,c,b,y\n1,a,no,0\n", R"({"variables": []})"), SchemaError);
    CHECK_THROWS_AS(load("n,c,b,y\n1,a,no,0\n", "not json"), SchemaError);
    // Two categories must be declared binary.
    CHECK_THROWS_AS(load("n,y\na,0\nb,1\n",
                         R"({"label":"y","positive_class":"1","variables":[{"name":"n","kind":"categorical"}]})"),
                    SchemaError);
}

TEST_CASE("metadata invariants") {
    CHECK_NOTHROW(check_metadata({VariableMeta::categorical("c", {"a", "b", "c"})}));
    VariableMeta bad = VariableMeta::categorical("c", {"a", "b", "c"});
    bad.width = 2;
    CHECK_THROWS_AS(check_metadata({bad}), SchemaError);
    const Metadata meta{VariableMeta::categorical("c", {"a", "b", "c"}), VariableMeta::binary("b"),
                        VariableMeta::numerical("x", 2.0, 4.0)};
    CHECK(total_width(meta) == 5);
    CHECK(variable_offsets(meta) == std::vector<std::size_t>{0, 3, 4});
    const Metadata back = metadata_from_json(metadata_to_json(meta));
    REQUIRE(back.size() == 3);
    CHECK(back[2].scale_max == 4.0);
    CHECK(back[0].categories == meta[0].categories);
}

TEST_CASE("imbalance ratio") {
    std::vector<int> labels(400, 0);
    std::fill(labels.begin(), labels.begin() + 100, 1);
    CHECK(compute_ir(labels) == doctest::Approx(1.0 / 3.0));
    std::vector<int> flipped(400, 1);
    std::fill(flipped.begin(), flipped.begin() + 100, 0);
    CHECK(compute_ir(flipped) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(compute_ir(std::vector<int>(5, 1)), DegenerateLabels);
    CHECK_THROWS_AS(compute_ir(std::vector<int>{}), DegenerateLabels);
}

TEST_CASE("folds are stratified and partition the rows") {
    const Dataset d = testing::small_mixed(503, 0.17, 3);
    const FoldSplit folds = make_folds(d, 10, 0.1, 9);
    const double global = static_cast<double>(d.count(1)) / static_cast<double>(d.rows());
    std::vector<int> seen(d.rows(), 0);
    for (std::size_t f = 0; f < 10; ++f) {
        const auto test = folds.test_indices(f);
        std::size_t pos = 0;
        for (auto i : test) {
            ++seen[i];
            pos += static_cast<std::size_t>(d.labels[i]);
        }
        CHECK(std::abs(static_cast<double>(pos) - global * static_cast<double>(test.size())) <= 1.0);
        // Validation rows come from the training part only.
        const auto train = folds.train_indices(f);
        const auto fit = folds.fit_indices(f);
        CHECK(fit.size() + folds.validation[f].size() == train.size());
        for (auto v : folds.validation[f]) CHECK(folds.assignments[v] != static_cast<int>(f));
    }
    for (int s : seen) CHECK(s == 1);
    const FoldSplit again = make_folds(d, 10, 0.1, 9);
    CHECK(again.assignments == folds.assignments);
}

TEST_CASE("encode and decode round trip") {
    const std::string csv = "n,c,b,y\n10,a,no,0\n20,b,yes,1\n30,c,no,0\n";
    const Dataset d = load(csv, kMeta);
    const RawTable back = decode(d);
    CHECK(back.rows[1][0] == "20");
    CHECK(back.rows[1][1] == "b");
    CHECK(back.rows[1][2] == "yes");
}

TEST_CASE("encoded datasets persist exactly") {
    const Dataset d = testing::small_mixed(50, 0.3, 4);
    const auto dir = testing::scratch_dir("tabular-persist");
    save_encoded(d, dir / "d.csv", dir / "d.json");
    const Dataset back = load_encoded(dir / "d.csv", dir / "d.json");
    REQUIRE(back.features.rows() == d.features.rows());
    CHECK(std::memcmp(back.features.data(), d.features.data(), sizeof(double) * static_cast<std::size_t>(d.features.size())) == 0);
    CHECK(back.labels == d.labels);
    CHECK(back.meta.size() == d.meta.size());
}

TEST_CASE("discretize restores the encoding invariants") {
    const Metadata meta{VariableMeta::categorical("c", {"a", "b", "c"}), VariableMeta::binary("b"), VariableMeta::numerical("x")};
    Matrix soft{{0.2, 0.5, 0.3, 0.7, 1.3}, {0.4, 0.4, 0.2, 0.2, -0.1}};
    std::string why;
    CHECK_FALSE(is_valid_encoding(soft, meta, &why));
    const Matrix hard = discretize(soft, meta);
    CHECK(is_valid_encoding(hard, meta));
    CHECK(hard.row(0) == RowVector{{0, 1, 0, 1, 1}});
    // Ties go to the lowest index.
    CHECK(hard.row(1) == RowVector{{1, 0, 0, 0, 0}});
}

TEST_CASE("csv fields round trip") {
    CHECK(csv::split_line(R"(a,"b,c","d""e",)") == std::vector<std::string>{"a", "b,c", "d\"e", ""});
    std::ostringstream out;
    csv::write_row(out, {"x", "y,z", "q\"r"});
    CHECK(out.str() == "x,\"y,z\",\"q\"\"r\"\n");
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789}) CHECK(std::stod(csv::format_double(v)) == v);
}

}  // TEST_SUITE
