#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tabsynth/architectures.hpp"
#include "tabsynth/models.hpp"
#include "tabsynth/samplers.hpp"

using namespace tabsynth;

namespace {

ModelSpec quick(const std::string& name) {
    ModelSpec s;
    std::tie(s.architecture, s.variant) = parse_model_name(name);
    s.hidden_sizes = {16};
    s.latent_size = 8;
    s.embedding_size = 4;
    s.training.epochs = 3;
    s.training.pretrain_epochs = 2;
    s.training.batch_size = 16;
    return s;
}

const std::vector<std::string> kModels{"vae", "mv-vae", "gan", "mv-wgan", "mv-wgan-gp", "medgan", "mv-medgan", "arae", "mv-arae"};

}  // namespace

TEST_SUITE("generative-models") {

TEST_CASE("model names round trip") {
    for (const auto& name : kModels) {
        const auto [arch, variant] = parse_model_name(name);
        CHECK(model_name(arch, variant) == name);
        CHECK(is_model_name(name));
    }
    CHECK_FALSE(is_model_name("smote"));
    CHECK_THROWS_AS(parse_model_name("mv-gan"), ConfigError);
}

TEST_CASE("illegal combinations are rejected") {
    ModelSpec s;
    s.architecture = Architecture::Wgan;
    s.variant = Variant::Plain;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.architecture = Architecture::Gan;
    s.variant = Variant::MultiVariable;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.variant = Variant::Plain;
    s.conditional = true;
    s.label_as_variable = true;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.label_as_variable = false;
    s.tau = 0.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("spec JSON round trip") {
    ModelSpec s = quick("mv-wgan-gp");
    s.conditional = true;
    s.training.penalty_weight = 3.5;
    const ModelSpec back = ModelSpec::from_json(s.to_json());
    CHECK(back.name() == "mv-wgan-gp");
    CHECK(back.conditional);
    CHECK(back.training.penalty_weight == 3.5);
    CHECK(back.hidden_sizes == s.hidden_sizes);
}

TEST_CASE("reconstruction loss sums per-variable terms") {
    const Metadata meta{VariableMeta::categorical("c", {"a", "b", "c"}), VariableMeta::binary("b"), VariableMeta::numerical("x")};
    const ad::Var out = ad::constant(Matrix{{0.2, 0.5, 0.3, 0.8, 0.4}});
    const ad::Var target = ad::constant(Matrix{{0.0, 1.0, 0.0, 1.0, 0.1}});
    const double expect = -std::log(0.5) - std::log(0.8) + 0.09;
    CHECK(reconstruction_loss(out, target, meta).scalar() == doctest::Approx(expect));
    CHECK_THROWS_AS(reconstruction_loss(ad::constant(Matrix::Ones(1, 4)), target, meta), ShapeError);
}

TEST_CASE("multi-variable heads emit valid blocks") {
    const Metadata meta{VariableMeta::categorical("c", {"a", "b", "c"}), VariableMeta::binary("b"), VariableMeta::numerical("x")};
    Rng rng(1);
    nn::ParamSet params;
    std::vector<nn::Dense> heads{nn::make_dense(params, "h0", 5, 3, rng), nn::make_dense(params, "h1", 5, 1, rng),
                                nn::make_dense(params, "h2", 5, 1, rng)};
    const ad::Var hidden = ad::constant(normal_matrix(7, 5, rng));
    for (auto mode : {HeadMode::Reconstruct, HeadMode::Relaxed, HeadMode::Sample}) {
        const Matrix out = build_heads(hidden, meta, heads, 0.66, mode, rng).value();
        REQUIRE(out.cols() == 5);
        for (Eigen::Index r = 0; r < 7; ++r) CHECK(out.row(r).head(3).sum() == doctest::Approx(1.0));
        CHECK((out.array() >= 0.0).all());
        CHECK((out.array() <= 1.0).all());
    }
}

TEST_CASE("every model trains, samples and persists") {
    const Dataset data = testing::small_mixed(120, 0.5, 2);
    const TrainingView view = training_view(data, SamplingKind::Minority);
    const auto dir = testing::scratch_dir("models-persist");
    for (const auto& name : kModels) {
        CAPTURE(name);
        const TrainedGenerator gen = train(quick(name), view, &view, 3);
        CHECK(gen.params().all_finite());
        Rng a(4), b(4);
        const Matrix x = gen.generate(9, a);
        CHECK(x.rows() == 9);
        CHECK(x.cols() == 6);
        CHECK(x.allFinite());
        gen.save(dir / (name + ".json"));
        const TrainedGenerator back = TrainedGenerator::load(dir / (name + ".json"));
        CHECK(back.generate(9, b) == x);
        CHECK(back.fingerprint() == gen.fingerprint());
        CHECK_FALSE(gen.history().empty());
    }
}

TEST_CASE("training is deterministic in the seed") {
    const Dataset data = testing::small_mixed(80, 0.5, 5);
    const TrainingView view = training_view(data, SamplingKind::Minority);
    const auto a = train(quick("mv-wgan-gp"), view, nullptr, 11).to_json().dump();
    const auto b = train(quick("mv-wgan-gp"), view, nullptr, 11).to_json().dump();
    const auto c = train(quick("mv-wgan-gp"), view, nullptr, 12).to_json().dump();
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("generation errors") {
    const Dataset data = testing::small_mixed(60, 0.5, 6);
    const TrainedGenerator gen = train(quick("vae"), training_view(data, SamplingKind::Minority), nullptr, 1);
    Rng rng(1);
    CHECK_THROWS_AS(gen.generate(0, rng), ConfigError);
    CHECK_THROWS_AS(gen.generate(3, rng, 1), StrategyMismatch);
}

TEST_CASE("conditional models need a condition") {
    const Dataset data = testing::small_mixed(80, 0.4, 7);
    ModelSpec spec = spec_for(quick("mv-vae"), SamplingKind::Conditional);
    CHECK(spec.conditional);
    const TrainedGenerator gen = train(spec, training_view(data, SamplingKind::Conditional), nullptr, 1);
    Rng rng(1);
    CHECK(gen.generate(4, rng, 0).rows() == 4);
    CHECK_THROWS_AS(gen.generate(4, rng), StrategyMismatch);
    CHECK_THROWS_AS(detail::one_hot_condition(2, 2), ConfigError);
}

TEST_CASE("one optimizer step lowers the autoencoder loss") {
    const Dataset data = testing::small_mixed(64, 0.5, 8);
    auto net = detail::build_network(quick("mv-vae"), data.meta, 1);
    auto phases = net->phases();
    auto& obj = phases.at(0).objectives.at(0);
    detail::Batch batch{data.features, {}};
    auto loss_at = [&] {
        Rng rng(3);
        return obj.loss(batch, rng);
    };
    const ad::Var before = loss_at();
    const auto grads = ad::grad(before, obj.params);
    nn::AdamConfig cfg;
    cfg.lr = 1e-3;
    nn::adam_step(obj.params, grads, obj.state, cfg);
    CHECK(loss_at().scalar() < before.scalar());
}

}  // TEST_SUITE
