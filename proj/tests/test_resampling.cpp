#include <doctest.h>

#include <set>

#include "support.hpp"
#include "tabsynth/resampling.hpp"

using namespace tabsynth;
using namespace tabsynth::resample;

namespace {

Dataset two_blobs(std::size_t majority, std::size_t minority, std::uint64_t seed) {
    Rng rng(seed);
    Dataset d;
    d.meta = {VariableMeta::numerical("a"), VariableMeta::numerical("b")};
    d.features.resize(static_cast<Eigen::Index>(majority + minority), 2);
    d.labels.assign(majority + minority, 0);
    for (std::size_t i = 0; i < majority + minority; ++i) {
        const bool pos = i >= majority;
        d.labels[i] = pos ? 1 : 0;
        d.features(static_cast<Eigen::Index>(i), 0) = (pos ? 0.6 : 0.2) + 0.3 * uniform01(rng);
        d.features(static_cast<Eigen::Index>(i), 1) = uniform01(rng);
    }
    return d;
}

Matrix class_rows(const Dataset& d, int label) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.rows(); ++i)
        if (d.labels[i] == label) idx.push_back(i);
    return d.subset(idx).features;
}

}  // namespace

TEST_SUITE("classic-resampling") {

TEST_CASE("round half up and ratio targets") {
    CHECK(round_half_up(2.5) == 3);
    CHECK(round_half_up(2.4999) == 2);
    CHECK(round_half_up(0.3 / 0.1 * 0.5) == 2);  // 1.4999999999999998 is a half in disguise
    CHECK(undersample_target(100, 0.5) == 200);
    CHECK(undersample_target(10, 0.3) == 33);
    CHECK(required_synthetic(200, 100, 0.6) == 20);
    CHECK(required_synthetic(200, 100, 0.4) == 0);
}

TEST_CASE("random undersampling keeps minority rows and row order") {
    const Dataset d = two_blobs(300, 30, 1);
    Rng rng(2);
    const Dataset u = random_undersample(d, 0.25, rng);
    CHECK(u.count(1) == 30);
    CHECK(u.count(0) == 120);
    CHECK_THROWS_AS(random_undersample(d, 0.05, rng), RatioError);
    CHECK_THROWS_AS(random_undersample(d, 1.5, rng), RatioError);
    // Rows keep their relative order: the minority rows stay a suffix.
    for (std::size_t i = 0; i < 120; ++i) CHECK(u.labels[i] == 0);
}

TEST_CASE("smote interpolates between minority neighbours") {
    Rng rng(3);
    const Matrix m = uniform_matrix(20, 3, rng);
    const Matrix s = smote(m, 50, 5, rng, 0.0);
    // lambda = 0 reproduces source rows.
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        bool found = false;
        for (Eigen::Index j = 0; j < m.rows(); ++j) found = found || (s.row(i) - m.row(j)).norm() == 0.0;
        CHECK(found);
    }
    CHECK_THROWS_AS(smote(m.topRows(5), 3, 5, rng), InsufficientClassRows);
}

TEST_CASE("largest remainder quotas") {
    CHECK(largest_remainder({1.0, 1.0, 1.0}, 10) == std::vector<std::size_t>{4, 3, 3});
    CHECK(largest_remainder({0.0, 0.0}, 3) == std::vector<std::size_t>{2, 1});
    CHECK(largest_remainder({3.0, 1.0}, 8) == std::vector<std::size_t>{6, 2});
}

TEST_CASE("danger rows sit on the border") {
    // Minority row 0 sits among majority rows, the others among minority rows.
    Matrix minority{{0.0, 0.0}, {10.0, 10.0}, {10.1, 10.0}, {10.0, 10.1}, {10.1, 10.1}};
    Matrix majority{{0.1, 0.0}, {0.0, 0.1}, {-0.1, 0.0}, {0.05, 0.05}, {0.3, 0.3}};
    const auto danger = danger_rows(minority, majority, 3);
    // Row 0 has 3 of 3 majority neighbours: noise, not danger.
    CHECK(danger.empty());
    // With k = 6 one far minority row joins its neighbourhood: 5 of 6 is danger.
    const auto danger6 = danger_rows(minority, majority, 6);
    CHECK(std::find(danger6.begin(), danger6.end(), std::size_t{0}) != danger6.end());
    Matrix mixed_majority{{0.1, 0.0}, {0.0, 0.1}, {0.1, 0.1}};
    Matrix mixed_minority{{0.0, 0.0}, {0.05, 0.0}, {5.0, 5.0}, {5.1, 5.0}};
    const auto d2 = danger_rows(mixed_minority, mixed_majority, 4);
    CHECK(std::find(d2.begin(), d2.end(), std::size_t{0}) != d2.end());
}

TEST_CASE("every oversampler returns the requested rows") {
    const Dataset d = two_blobs(200, 40, 4);
    for (auto method : all_methods()) {
        CAPTURE(to_string(method));
        Rng rng(5);
        const auto out = oversample(method, d, 37, Params{}, rng);
        CHECK(out.rows.rows() == 37);
        CHECK(out.rows.cols() == 2);
        CHECK(out.rows.allFinite());
        CHECK(method_from_string(to_string(method)) == method);
    }
    CHECK_THROWS_AS(method_from_string("svm_smote"), ConfigError);
}

TEST_CASE("adasyn falls back to smote without a generation region") {
    // Classes far apart: no minority row has majority neighbours.
    Dataset d = two_blobs(50, 20, 6);
    for (std::size_t i = 0; i < d.rows(); ++i)
        if (d.labels[i] == 1) d.features(static_cast<Eigen::Index>(i), 0) += 100.0;
    Rng rng(7);
    CHECK_THROWS_AS(adasyn(class_rows(d, 1), class_rows(d, 0), 10, Params{}, rng), EmptyGenerationRegion);
    const auto out = oversample(Method::Adasyn, d, 10, Params{}, rng);
    CHECK(out.fell_back);
    CHECK_FALSE(out.warning.empty());
    CHECK(out.rows.rows() == 10);
}

TEST_CASE("kmeans clusters separated blobs") {
    Rng rng(8);
    Matrix rows(60, 2);
    for (Eigen::Index i = 0; i < 60; ++i) {
        rows(i, 0) = (i < 30 ? 0.0 : 5.0) + 0.1 * uniform01(rng);
        rows(i, 1) = 0.1 * uniform01(rng);
    }
    const Kmeans km = kmeans(rows, 2, 50, rng);
    for (Eigen::Index i = 1; i < 30; ++i) CHECK(km.assignment[static_cast<std::size_t>(i)] == km.assignment[0]);
    CHECK(km.assignment[30] != km.assignment[0]);
}

TEST_CASE("smote-nc takes the categorical mode of the neighbours") {
    const Metadata meta{VariableMeta::numerical("x"), VariableMeta::categorical("c", {"a", "b", "c"}), VariableMeta::binary("b")};
    Matrix m(8, 5);
    m.setZero();
    for (Eigen::Index i = 0; i < 8; ++i) {
        m(i, 0) = 0.1 * static_cast<double>(i);
        m(i, i < 6 ? 2 : 3) = 1.0;  // mostly "b"
        m(i, 4) = 1.0;
    }
    Params p;
    p.k = 5;
    Rng rng(9);
    const Matrix s = smote_nc(m, 40, meta, p, rng);
    CHECK(is_valid_encoding(s, meta));
    for (Eigen::Index i = 0; i < s.rows(); ++i) CHECK(s(i, 4) == 1.0);
}

TEST_CASE("resample reaches the requested ratios") {
    const Dataset d = two_blobs(400, 40, 10);
    Rng under(1), over(2);
    const Dataset out = resample::resample(
        d, 0.2, 0.5, [](const Dataset& u, std::size_t n, Rng& r) { return random_oversample(class_rows(u, 1), n, r); }, under,
        over);
    CHECK(out.count(0) == 200);
    CHECK(out.count(1) == 100);
    CHECK_THROWS_AS(resample::resample(d, 0.5, 0.4, {}, under, over), RatioError);
    // A synthesizer returning the wrong shape is a ShapeError.
    CHECK_THROWS_AS(resample::resample(d, 0.2, 0.5, [](const Dataset&, std::size_t n, Rng&) { return Matrix(static_cast<Eigen::Index>(n), 5); },
                             under, over),
                    ShapeError);
}

}  // TEST_SUITE
