#include <doctest.h>

#include "support.hpp"
#include "tabsynth/samplers.hpp"

using namespace tabsynth;

namespace {

// Label-as-variable stub emitting a fixed label column value.
class FixedLabel : public RowGenerator {
public:
    FixedLabel(Metadata meta, double label) : meta_(std::move(meta)), label_(label) {
        meta_.push_back(VariableMeta::binary("label"));
    }
    Matrix generate(std::size_t n, Rng& rng, std::optional<int>) const override {
        ++calls;
        Matrix m = uniform_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(total_width(meta_)), rng);
        m.col(m.cols() - 1).setConstant(label_);
        return m;
    }
    const Metadata& output_meta() const override { return meta_; }
    bool conditional() const override { return false; }
    bool label_as_variable() const override { return true; }

    mutable int calls = 0;

private:
    Metadata meta_;
    double label_;
};

ModelSpec quick(SamplingKind kind) {
    ModelSpec s;
    s.hidden_sizes = {8};
    s.latent_size = 4;
    s.embedding_size = 3;
    s.training.epochs = 2;
    return spec_for(s, kind);
}

}  // namespace

TEST_SUITE("samplers") {

TEST_CASE("training views per strategy") {
    const Dataset data = testing::small_mixed(100, 0.3, 1);
    const TrainingView minority = training_view(data, SamplingKind::Minority);
    CHECK(static_cast<std::size_t>(minority.rows.rows()) == data.count(1));
    CHECK(minority.condition.size() == 0);
    const TrainingView conditional = training_view(data, SamplingKind::Conditional);
    CHECK(static_cast<std::size_t>(conditional.rows.rows()) == data.rows());
    CHECK(conditional.condition.cols() == 2);
    CHECK(conditional.condition.rowwise().sum().isOnes());
    const TrainingView rejection = training_view(data, SamplingKind::Rejection);
    CHECK(rejection.rows.cols() == static_cast<Eigen::Index>(data.width() + 1));
    CHECK(rejection.meta.back().kind == VariableKind::Binary);
    for (std::size_t i = 0; i < data.rows(); ++i)
        CHECK(rejection.rows(static_cast<Eigen::Index>(i), rejection.rows.cols() - 1) == data.labels[i]);
    // Index subsets keep their dataset indices.
    const std::vector<std::size_t> pick{3, 7, 50};
    CHECK(training_view(data, SamplingKind::Conditional, pick).source_rows == pick);
}

TEST_CASE("strategy flags") {
    CHECK(quick(SamplingKind::Conditional).conditional);
    CHECK(quick(SamplingKind::Rejection).label_as_variable);
    CHECK_FALSE(quick(SamplingKind::Minority).conditional);
    CHECK(sampling_from_string("rejection") == SamplingKind::Rejection);
    CHECK_THROWS_AS(sampling_from_string("bogus"), ConfigError);
}

TEST_CASE("minority and conditional draws are discretized") {
    const Dataset data = testing::small_mixed(120, 0.4, 2);
    const auto gen = train(quick(SamplingKind::Minority), training_view(data, SamplingKind::Minority), nullptr, 1);
    Rng rng(1);
    const Matrix rows = draw_minority(gen, 100, rng);
    CHECK(rows.rows() == 100);
    CHECK(is_valid_encoding(rows, data.meta));
    CHECK_THROWS_AS(draw_conditional(gen, 5, 1, rng), StrategyMismatch);
    CHECK_THROWS_AS(check_compatible(gen, SamplingKind::Rejection), StrategyMismatch);

    const auto cgen = train(quick(SamplingKind::Conditional), training_view(data, SamplingKind::Conditional), nullptr, 1);
    const Matrix c = draw_conditional(cgen, 30, 0, rng);
    CHECK(c.rows() == 30);
    CHECK(is_valid_encoding(c, data.meta));
}

TEST_CASE("rejection keeps matching rows and strips the label") {
    const Metadata meta{VariableMeta::numerical("a"), VariableMeta::binary("b")};
    FixedLabel positive(meta, 1.0);
    SamplingStrategy s{SamplingKind::Rejection, 1000, 64};
    Rng rng(2);
    const auto got = draw_rejection(positive, 100, 1, s, rng);
    CHECK(got.rows.rows() == 100);
    CHECK(got.rows.cols() == 2);
    CHECK(got.draws == 128);
    CHECK(got.batches == 2);
}

TEST_CASE("rejection gives up after the draw limit") {
    const Metadata meta{VariableMeta::numerical("a")};
    FixedLabel negative(meta, 0.0);
    SamplingStrategy s{SamplingKind::Rejection, 1000, 300};
    Rng rng(3);
    try {
        draw_rejection(negative, 5, 1, s, rng);
        FAIL("expected DrawLimitExceeded");
    } catch (const DrawLimitExceeded& e) {
        CHECK(e.draws() == 1000);
        CHECK(e.kept() == 0);
    }
    // Last batch is trimmed to the limit: 300 + 300 + 300 + 100.
    CHECK(negative.calls == 4);
}

TEST_CASE("minority draws require the positive class") {
    const Metadata meta{VariableMeta::numerical("a")};
    FixedLabel stub(meta, 1.0);
    Rng rng(4);
    CHECK_THROWS_AS(draw(stub, SamplingStrategy{SamplingKind::Minority}, 3, 0, rng), StrategyMismatch);
}

}  // TEST_SUITE
