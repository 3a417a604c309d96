#include "tabsynth/architectures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

namespace tabsynth::detail {

namespace {

using nn::Activation;
using nn::Dense;

Var with_condition(const Var& x, const Matrix& cond) {
    if (cond.size() == 0) return x;
    const Var parts[] = {x, ad::constant(cond)};
    return ad::concat_cols(parts);
}

struct Mlp {
    std::vector<Dense> layers;
    Activation act = Activation::Relu;

    Var operator()(Var x) const {
        for (const auto& l : layers) x = l(x, act);
        return x;
    }
};

Mlp make_mlp(nn::ParamSet& params, const std::string& name, Eigen::Index in, const std::vector<int>& sizes,
             Activation act, Rng& rng) {
    Mlp m;
    m.act = act;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        m.layers.push_back(nn::make_dense(params, name + ".hidden" + std::to_string(i), in, sizes[i], rng));
        in = sizes[i];
    }
    return m;
}

std::vector<int> reversed(std::vector<int> v) {
    std::reverse(v.begin(), v.end());
    return v;
}

// Raw rows for plain variants, per-variable embeddings for multi-variable ones.
struct InputLayer {
    Variant variant = Variant::Plain;
    Metadata meta;
    std::vector<Dense> embeddings;
    Eigen::Index width = 0;

    Var operator()(const Var& x) const {
        if (variant == Variant::Plain) return x;
        return build_inputs(x, meta, embeddings);
    }
};

InputLayer make_input(nn::ParamSet& params, const std::string& name, const ModelSpec& spec, const Metadata& meta,
                      Rng& rng) {
    InputLayer in;
    in.variant = spec.variant;
    in.meta = meta;
    if (spec.variant == Variant::Plain) {
        in.width = static_cast<Eigen::Index>(total_width(meta));
        return in;
    }
    for (const auto& v : meta)
        in.embeddings.push_back(
            nn::make_dense(params, name + "." + v.name, static_cast<Eigen::Index>(v.width), spec.embedding_size, rng));
    in.width = static_cast<Eigen::Index>(meta.size()) * spec.embedding_size;
    return in;
}

Var logistic_noise_like(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix n(rows, cols);
    for (Eigen::Index i = 0; i < n.size(); ++i) {
        const double u = std::clamp(uniform01(rng), 1e-12, 1.0 - 1e-12);
        n.data()[i] = std::log(u) - std::log1p(-u);
    }
    return ad::constant(std::move(n));
}

struct OutputLayer {
    Variant variant = Variant::Plain;
    Metadata meta;
    std::vector<Dense> heads;
    Dense plain;
    double tau = 0.66;

    Var operator()(const Var& hidden, HeadMode mode, Rng& rng) const {
        if (variant == Variant::MultiVariable) return build_heads(hidden, meta, heads, tau, mode, rng);
        const Var logits = plain(hidden);
        if (mode != HeadMode::Sample) return ad::sigmoid(logits);
        // Binary-concrete draw on every non-numerical column.
        Matrix col_scale = Matrix::Ones(logits.rows(), logits.cols());
        Matrix noise_mask = Matrix::Zero(logits.rows(), logits.cols());
        std::size_t at = 0;
        for (const auto& v : meta) {
            if (v.kind != VariableKind::Numerical) {
                col_scale.middleCols(static_cast<Eigen::Index>(at), static_cast<Eigen::Index>(v.width)).setConstant(1.0 / tau);
                noise_mask.middleCols(static_cast<Eigen::Index>(at), static_cast<Eigen::Index>(v.width)).setOnes();
            }
            at += v.width;
        }
        const Var noise = ad::mul(logistic_noise_like(logits.rows(), logits.cols(), rng), ad::constant(noise_mask));
        return ad::sigmoid(ad::mul(ad::add(logits, noise), ad::constant(col_scale)));
    }
};

OutputLayer make_output(nn::ParamSet& params, const std::string& name, const ModelSpec& spec, const Metadata& meta,
                        Eigen::Index hidden, Rng& rng) {
    OutputLayer out;
    out.variant = spec.variant;
    out.meta = meta;
    out.tau = spec.tau;
    if (spec.variant == Variant::MultiVariable) {
        for (const auto& v : meta)
            out.heads.push_back(nn::make_dense(params, name + "." + v.name, hidden, static_cast<Eigen::Index>(v.width), rng));
    } else {
        out.plain = nn::make_dense(params, name, hidden, static_cast<Eigen::Index>(total_width(meta)), rng);
    }
    return out;
}

Eigen::Index last_width(const std::vector<int>& sizes, Eigen::Index fallback) {
    return sizes.empty() ? fallback : sizes.back();
}

nn::AdamConfig autoencoder_adam(const ModelSpec& s) { return nn::AdamConfig{s.training.autoencoder_lr, 0.9, 0.999, 1e-8}; }

nn::AdamConfig adversarial_adam(const ModelSpec& s) {
    return nn::AdamConfig{s.training.adversarial_lr, s.training.adversarial_beta1, 0.999, 1e-8};
}

Objective make_objective(std::string name, std::vector<Var> params, nn::AdamConfig adam,
                         std::function<Var(const Batch&, Rng&)> loss, int every = 1) {
    Objective o;
    o.name = std::move(name);
    o.state = nn::adam_init(params);
    o.params = std::move(params);
    o.adam = adam;
    o.loss = std::move(loss);
    o.every = every;
    return o;
}

std::vector<Var> concat_params(std::vector<Var> a, const std::vector<Var>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

Var ones_like_rows(Eigen::Index rows) { return ad::constant(Matrix::Ones(rows, 1)); }
Var zeros_like_rows(Eigen::Index rows) { return ad::constant(Matrix::Zero(rows, 1)); }

// ---------------------------------------------------------------------------

class VaeNet final : public Network {
public:
    VaeNet(ModelSpec spec, Metadata meta, std::uint64_t seed) : Network(std::move(spec), std::move(meta), seed) {
        const auto cw = static_cast<Eigen::Index>(condition_width());
        input_ = make_input(params, "encoder.embed", spec_, meta_, init_rng_);
        encoder_ = make_mlp(params, "encoder", input_.width + cw, spec_.hidden_sizes, Activation::Relu, init_rng_);
        const Eigen::Index h = last_width(spec_.hidden_sizes, input_.width + cw);
        mu_ = nn::make_dense(params, "encoder.mu", h, spec_.latent_size, init_rng_);
        log_var_ = nn::make_dense(params, "encoder.log_var", h, spec_.latent_size, init_rng_);
        const auto dec_sizes = reversed(spec_.hidden_sizes);
        decoder_ = make_mlp(params, "decoder", spec_.latent_size + cw, dec_sizes, Activation::Relu, init_rng_);
        output_ = make_output(params, "decoder.heads", spec_, meta_, last_width(dec_sizes, spec_.latent_size + cw), init_rng_);
    }

    std::vector<Phase> phases() override {
        Phase p;
        p.name = "vae";
        p.epochs = spec_.training.epochs;
        p.early_stopping = true;
        p.objectives.push_back(make_objective("vae", params.all(), autoencoder_adam(spec_),
                                              [this](const Batch& b, Rng& rng) { return loss(b, rng); }));
        return {std::move(p)};
    }

    Var loss(const Batch& b, Rng& rng) const {
        const Var x = ad::constant(b.x);
        const Var h = encoder_(with_condition(input_(x), b.cond));
        const Var mu = mu_(h);
        const Var log_var = log_var_(h);
        const Var eps = ad::constant(normal_matrix(mu.rows(), mu.cols(), rng));
        const Var z = ad::add(mu, ad::mul(ad::exp(ad::scale(log_var, 0.5)), eps));
        const Var out = output_(decoder_(with_condition(z, b.cond)), HeadMode::Reconstruct, rng);
        return ad::add(reconstruction_loss(out, x, meta_, simplex()), nn::kl_standard_normal(mu, log_var));
    }

    std::optional<double> validation_loss(const Batch& b) const override {
        ad::NoGradGuard guard;
        Rng unused(0);
        const Var x = ad::constant(b.x);
        const Var mu = mu_(encoder_(with_condition(input_(x), b.cond)));
        const Var out = output_(decoder_(with_condition(mu, b.cond)), HeadMode::Reconstruct, unused);
        return reconstruction_loss(out, x, meta_, simplex()).scalar();
    }

    Matrix sample(std::size_t n, Rng& rng, const Matrix& cond) const override {
        ad::NoGradGuard guard;
        const Var z = ad::constant(normal_matrix(static_cast<Eigen::Index>(n), spec_.latent_size, rng));
        return output_(decoder_(with_condition(z, cond)), HeadMode::Sample, rng).value();
    }

private:
    bool simplex() const { return spec_.variant == Variant::MultiVariable; }

    InputLayer input_;
    Mlp encoder_;
    Dense mu_, log_var_;
    Mlp decoder_;
    OutputLayer output_;
};

// ---------------------------------------------------------------------------
// gan: non-saturating discriminator; wgan: clamped critic; wgan_gp: penalised critic.

class GanFamilyNet final : public Network {
public:
    GanFamilyNet(ModelSpec spec, Metadata meta, std::uint64_t seed) : Network(std::move(spec), std::move(meta), seed) {
        const auto cw = static_cast<Eigen::Index>(condition_width());
        generator_ = make_mlp(params, "generator", spec_.latent_size + cw, spec_.hidden_sizes, Activation::Relu, init_rng_);
        output_ = make_output(params, "generator.heads", spec_, meta_,
                              last_width(spec_.hidden_sizes, spec_.latent_size + cw), init_rng_);
        input_ = make_input(params, "critic.embed", spec_, meta_, init_rng_);
        const auto disc_sizes = reversed(spec_.hidden_sizes);
        critic_ = make_mlp(params, "critic", input_.width + cw, disc_sizes, Activation::LeakyRelu, init_rng_);
        score_ = nn::make_dense(params, "critic.score", last_width(disc_sizes, input_.width + cw), 1, init_rng_);
    }

    std::vector<Phase> phases() override {
        const auto& t = spec_.training;
        const bool gan = spec_.architecture == Architecture::Gan;
        Phase p;
        p.name = "adversarial";
        p.epochs = t.epochs;
        auto critic_params = params.with_prefix("critic");
        auto critic = make_objective(gan ? "discriminator" : "critic", critic_params, adversarial_adam(spec_),
                                     [this](const Batch& b, Rng& rng) { return critic_loss(b, rng); });
        if (spec_.architecture == Architecture::Wgan) {
            critic.after_step = [this, critic_params]() mutable { nn::clamp_params(critic_params, spec_.training.clamp); };
        }
        p.objectives.push_back(std::move(critic));
        p.objectives.push_back(make_objective("generator", params.with_prefix("generator"), adversarial_adam(spec_),
                                              [this](const Batch& b, Rng& rng) { return generator_loss(b, rng); },
                                              gan ? 1 : t.critic_steps));
        return {std::move(p)};
    }

    Var fake(std::size_t n, Rng& rng, const Matrix& cond) const {
        const Var z = ad::constant(normal_matrix(static_cast<Eigen::Index>(n), spec_.latent_size, rng));
        return output_(generator_(with_condition(z, cond)), HeadMode::Relaxed, rng);
    }

    Var score(const Var& x, const Matrix& cond) const { return score_(critic_(with_condition(input_(x), cond))); }

    Var critic_loss(const Batch& b, Rng& rng) const {
        const auto n = static_cast<std::size_t>(b.x.rows());
        Var fake_rows;
        {
            ad::NoGradGuard guard;
            fake_rows = ad::constant(fake(n, rng, b.cond).value());
        }
        const Var real = ad::constant(b.x);
        const Var s_real = score(real, b.cond);
        const Var s_fake = score(fake_rows, b.cond);
        if (spec_.architecture == Architecture::Gan) {
            return ad::add(nn::binary_cross_entropy(ad::sigmoid(s_real), ones_like_rows(s_real.rows())),
                           nn::binary_cross_entropy(ad::sigmoid(s_fake), zeros_like_rows(s_fake.rows())));
        }
        Var l = ad::sub(ad::mean(s_fake), ad::mean(s_real));
        if (spec_.architecture == Architecture::WganGp) {
            const Matrix x_hat = nn::interpolate(b.x, fake_rows.value(), rng);
            const Matrix cond = b.cond;
            const Var gp = nn::gradient_penalty([this, cond](const Var& x) { return score(x, cond); }, x_hat);
            l = ad::add(l, ad::scale(gp, spec_.training.penalty_weight));
        }
        return l;
    }

    Var generator_loss(const Batch& b, Rng& rng) const {
        const Var s_fake = score(fake(static_cast<std::size_t>(b.x.rows()), rng, b.cond), b.cond);
        if (spec_.architecture == Architecture::Gan)
            return nn::binary_cross_entropy(ad::sigmoid(s_fake), ones_like_rows(s_fake.rows()));
        return ad::neg(ad::mean(s_fake));
    }

    Matrix sample(std::size_t n, Rng& rng, const Matrix& cond) const override {
        ad::NoGradGuard guard;
        return fake(n, rng, cond).value();
    }

    std::size_t discriminator_input_width() const override {
        return static_cast<std::size_t>(input_.width) + condition_width();
    }

private:
    Mlp generator_;
    OutputLayer output_;
    InputLayer input_;
    Mlp critic_;
    Dense score_;
};

// ---------------------------------------------------------------------------

class MedganNet final : public Network {
public:
    MedganNet(ModelSpec spec, Metadata meta, std::uint64_t seed) : Network(std::move(spec), std::move(meta), seed) {
        const auto cw = static_cast<Eigen::Index>(condition_width());
        const auto d = static_cast<Eigen::Index>(data_width());
        const Eigen::Index latent = spec_.latent_size;
        input_ = make_input(params, "autoencoder.embed", spec_, meta_, init_rng_);
        encoder_ = make_mlp(params, "autoencoder.encoder", input_.width, spec_.hidden_sizes, Activation::Relu, init_rng_);
        code_ = nn::make_dense(params, "autoencoder.code", last_width(spec_.hidden_sizes, input_.width), latent, init_rng_);
        const auto dec_sizes = reversed(spec_.hidden_sizes);
        decoder_ = make_mlp(params, "autoencoder.decoder", latent, dec_sizes, Activation::Relu, init_rng_);
        output_ = make_output(params, "autoencoder.heads", spec_, meta_, last_width(dec_sizes, latent), init_rng_);
        const std::size_t gen_layers = std::max<std::size_t>(1, spec_.hidden_sizes.size());
        for (std::size_t i = 0; i < gen_layers; ++i)
            generator_.push_back(nn::make_dense(params, "generator.hidden" + std::to_string(i), latent + cw, latent, init_rng_));
        disc_ = make_mlp(params, "discriminator", 2 * d + cw, dec_sizes, Activation::LeakyRelu, init_rng_);
        score_ = nn::make_dense(params, "discriminator.score", last_width(dec_sizes, 2 * d + cw), 1, init_rng_);
    }

    std::vector<Phase> phases() override {
        const auto& t = spec_.training;
        Phase pre;
        pre.name = "autoencoder";
        pre.epochs = t.pretrain_epochs;
        pre.early_stopping = true;
        pre.objectives.push_back(make_objective("autoencoder", params.with_prefix("autoencoder"), autoencoder_adam(spec_),
                                                [this](const Batch& b, Rng& rng) { return autoencoder_loss(b, rng); }));
        Phase adv;
        adv.name = "adversarial";
        adv.epochs = t.epochs;
        adv.objectives.push_back(make_objective("discriminator", params.with_prefix("discriminator"), adversarial_adam(spec_),
                                                [this](const Batch& b, Rng& rng) { return discriminator_loss(b, rng); }));
        auto gen_params = concat_params(params.with_prefix("generator"), params.with_prefix("autoencoder.decoder"));
        gen_params = concat_params(std::move(gen_params), params.with_prefix("autoencoder.heads"));
        adv.objectives.push_back(make_objective("generator", std::move(gen_params), adversarial_adam(spec_),
                                                [this](const Batch& b, Rng& rng) { return generator_loss(b, rng); }));
        return {std::move(pre), std::move(adv)};
    }

    Var encode(const Var& x) const { return ad::tanh(code_(encoder_(input_(x)))); }
    Var decode(const Var& code, HeadMode mode, Rng& rng) const { return output_(decoder_(code), mode, rng); }

    Var generate_codes(std::size_t n, Rng& rng, const Matrix& cond) const {
        Var h = ad::constant(normal_matrix(static_cast<Eigen::Index>(n), spec_.latent_size, rng));
        // Shortcut connections: each layer adds its input back.
        for (const auto& layer : generator_) h = ad::add(layer(with_condition(h, cond), Activation::Tanh), h);
        return h;
    }

    // Sample rows followed by the per-dimension batch mean (minibatch averaging).
    Var score(const Var& x, const Matrix& cond) const {
        const Var means = ad::broadcast_rows(ad::colmean(x), x.rows());
        const Var parts[] = {x, means};
        return score_(disc_(with_condition(ad::concat_cols(parts), cond)));
    }

    Var autoencoder_loss(const Batch& b, Rng& rng) const {
        const Var x = ad::constant(b.x);
        return reconstruction_loss(decode(encode(x), HeadMode::Reconstruct, rng), x, meta_, simplex());
    }

    Var discriminator_loss(const Batch& b, Rng& rng) const {
        Var fake;
        {
            ad::NoGradGuard guard;
            fake = ad::constant(
                decode(generate_codes(static_cast<std::size_t>(b.x.rows()), rng, b.cond), HeadMode::Relaxed, rng).value());
        }
        const Var s_real = score(ad::constant(b.x), b.cond);
        const Var s_fake = score(fake, b.cond);
        return ad::add(nn::binary_cross_entropy(ad::sigmoid(s_real), ones_like_rows(s_real.rows())),
                       nn::binary_cross_entropy(ad::sigmoid(s_fake), zeros_like_rows(s_fake.rows())));
    }

    Var generator_loss(const Batch& b, Rng& rng) const {
        const Var fake = decode(generate_codes(static_cast<std::size_t>(b.x.rows()), rng, b.cond), HeadMode::Relaxed, rng);
        const Var s_fake = score(fake, b.cond);
        return nn::binary_cross_entropy(ad::sigmoid(s_fake), ones_like_rows(s_fake.rows()));
    }

    std::optional<double> validation_loss(const Batch& b) const override {
        ad::NoGradGuard guard;
        Rng unused(0);
        return autoencoder_loss(b, unused).scalar();
    }

    Matrix sample(std::size_t n, Rng& rng, const Matrix& cond) const override {
        ad::NoGradGuard guard;
        return decode(generate_codes(n, rng, cond), HeadMode::Relaxed, rng).value();
    }

    std::size_t discriminator_input_width() const override { return 2 * data_width() + condition_width(); }

private:
    bool simplex() const { return spec_.variant == Variant::MultiVariable; }

    InputLayer input_;
    Mlp encoder_;
    Dense code_;
    Mlp decoder_;
    OutputLayer output_;
    std::vector<Dense> generator_;
    Mlp disc_;
    Dense score_;
};

// ---------------------------------------------------------------------------

class AraeNet final : public Network {
public:
    AraeNet(ModelSpec spec, Metadata meta, std::uint64_t seed) : Network(std::move(spec), std::move(meta), seed) {
        const auto cw = static_cast<Eigen::Index>(condition_width());
        const Eigen::Index latent = spec_.latent_size;
        input_ = make_input(params, "autoencoder.embed", spec_, meta_, init_rng_);
        encoder_ = make_mlp(params, "autoencoder.encoder", input_.width, spec_.hidden_sizes, Activation::Relu, init_rng_);
        code_ = nn::make_dense(params, "autoencoder.code", last_width(spec_.hidden_sizes, input_.width), latent, init_rng_);
        const auto dec_sizes = reversed(spec_.hidden_sizes);
        decoder_ = make_mlp(params, "autoencoder.decoder", latent, dec_sizes, Activation::Relu, init_rng_);
        output_ = make_output(params, "autoencoder.heads", spec_, meta_, last_width(dec_sizes, latent), init_rng_);
        generator_ = make_mlp(params, "generator", latent + cw, spec_.hidden_sizes, Activation::Relu, init_rng_);
        gen_code_ = nn::make_dense(params, "generator.code", last_width(spec_.hidden_sizes, latent + cw), latent, init_rng_);
        critic_ = make_mlp(params, "critic", latent + cw, dec_sizes, Activation::LeakyRelu, init_rng_);
        score_ = nn::make_dense(params, "critic.score", last_width(dec_sizes, latent + cw), 1, init_rng_);
    }

    std::vector<Phase> phases() override {
        const auto& t = spec_.training;
        Phase p;
        p.name = "arae";
        p.epochs = t.epochs;
        p.objectives.push_back(make_objective("autoencoder", params.with_prefix("autoencoder"), autoencoder_adam(spec_),
                                              [this](const Batch& b, Rng& rng) { return autoencoder_loss(b, rng); }));
        auto critic_params = params.with_prefix("critic");
        auto critic = make_objective("critic", critic_params, adversarial_adam(spec_),
                                     [this](const Batch& b, Rng& rng) { return critic_loss(b, rng); });
        critic.after_step = [this, critic_params]() mutable { nn::clamp_params(critic_params, spec_.training.clamp); };
        p.objectives.push_back(std::move(critic));
        p.objectives.push_back(make_objective("generator", params.with_prefix("generator"), adversarial_adam(spec_),
                                              [this](const Batch& b, Rng& rng) { return generator_loss(b, rng); },
                                              t.critic_steps));
        return {std::move(p)};
    }

    Var encode(const Var& x) const { return ad::tanh(code_(encoder_(input_(x)))); }

    Var generate_codes(std::size_t n, Rng& rng, const Matrix& cond) const {
        const Var z = ad::constant(normal_matrix(static_cast<Eigen::Index>(n), spec_.latent_size, rng));
        return ad::tanh(gen_code_(generator_(with_condition(z, cond))));
    }

    Var score(const Var& code, const Matrix& cond) const { return score_(critic_(with_condition(code, cond))); }

    Var autoencoder_loss(const Batch& b, Rng& rng) const {
        const Var x = ad::constant(b.x);
        return reconstruction_loss(output_(decoder_(encode(x)), HeadMode::Reconstruct, rng), x, meta_, simplex());
    }

    Var critic_loss(const Batch& b, Rng& rng) const {
        Var real_codes, fake_codes;
        {
            ad::NoGradGuard guard;
            real_codes = ad::constant(encode(ad::constant(b.x)).value());
            fake_codes = ad::constant(generate_codes(static_cast<std::size_t>(b.x.rows()), rng, b.cond).value());
        }
        return ad::sub(ad::mean(score(fake_codes, b.cond)), ad::mean(score(real_codes, b.cond)));
    }

    Var generator_loss(const Batch& b, Rng& rng) const {
        return ad::neg(ad::mean(score(generate_codes(static_cast<std::size_t>(b.x.rows()), rng, b.cond), b.cond)));
    }

    std::optional<double> validation_loss(const Batch& b) const override {
        ad::NoGradGuard guard;
        Rng unused(0);
        return autoencoder_loss(b, unused).scalar();
    }

    Matrix sample(std::size_t n, Rng& rng, const Matrix& cond) const override {
        ad::NoGradGuard guard;
        return output_(decoder_(generate_codes(n, rng, cond)), HeadMode::Relaxed, rng).value();
    }

private:
    bool simplex() const { return spec_.variant == Variant::MultiVariable; }

    InputLayer input_;
    Mlp encoder_;
    Dense code_;
    Mlp decoder_;
    OutputLayer output_;
    Mlp generator_;
    Dense gen_code_;
    Mlp critic_;
    Dense score_;
};

}  // namespace

Network::Network(ModelSpec spec, Metadata meta, std::uint64_t init_seed)
    : params(init_seed), spec_(std::move(spec)), meta_(std::move(meta)), init_rng_(init_seed) {}

std::unique_ptr<Network> build_network(const ModelSpec& spec, const Metadata& meta, std::uint64_t init_seed) {
    spec.validate();
    switch (spec.architecture) {
        case Architecture::Vae: return std::make_unique<VaeNet>(spec, meta, init_seed);
        case Architecture::Gan:
        case Architecture::Wgan:
        case Architecture::WganGp: return std::make_unique<GanFamilyNet>(spec, meta, init_seed);
        case Architecture::Medgan: return std::make_unique<MedganNet>(spec, meta, init_seed);
        case Architecture::Arae: return std::make_unique<AraeNet>(spec, meta, init_seed);
    }
    throw ConfigError("unknown architecture");
}

Matrix one_hot_condition(std::size_t n, int label) {
    if (label != 0 && label != 1) throw ConfigError("condition label must be 0 or 1");
    Matrix c = Matrix::Zero(static_cast<Eigen::Index>(n), 2);
    c.col(label).setOnes();
    return c;
}

namespace {

Batch gather(const TrainingView& view, std::span<const std::size_t> idx) {
    Batch b;
    b.x.resize(static_cast<Eigen::Index>(idx.size()), view.rows.cols());
    if (view.condition.size() > 0) b.cond.resize(static_cast<Eigen::Index>(idx.size()), view.condition.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        b.x.row(static_cast<Eigen::Index>(i)) = view.rows.row(static_cast<Eigen::Index>(idx[i]));
        if (b.cond.size() > 0) b.cond.row(static_cast<Eigen::Index>(i)) = view.condition.row(static_cast<Eigen::Index>(idx[i]));
    }
    return b;
}

}  // namespace

TrainingReport run_training(Network& net, const TrainingView& train_view, const TrainingView* validation_view,
                            Rng& rng, const StepObserver& observer) {
    const auto& cfg = net.spec().training;
    const std::size_t n = static_cast<std::size_t>(train_view.rows.rows());
    if (n == 0) throw InsufficientData("empty training set");
    if (static_cast<std::size_t>(train_view.rows.cols()) != net.data_width())
        throw ShapeError("training rows have width " + std::to_string(train_view.rows.cols()) + ", model expects " +
                         std::to_string(net.data_width()));
    const bool need_cond = net.spec().conditional;
    if (need_cond != (train_view.condition.size() > 0))
        throw StrategyMismatch(need_cond ? "conditional model needs a condition column" : "unexpected condition input");

    Batch validation;
    const bool has_validation = validation_view && validation_view->rows.rows() > 0;
    if (has_validation) {
        validation.x = validation_view->rows;
        validation.cond = validation_view->condition;
    }

    TrainingReport report;
    const auto batch = static_cast<std::size_t>(std::max(1, cfg.batch_size));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (auto& phase : net.phases()) {
        double best = std::numeric_limits<double>::infinity();
        int best_epoch = -1;
        std::vector<Matrix> best_params;
        long step = 0;
        for (int epoch = 0; epoch < phase.epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            std::vector<double> sums(phase.objectives.size(), 0.0);
            std::vector<int> counts(phase.objectives.size(), 0);
            for (std::size_t start = 0; start < n; start += batch) {
                const std::size_t stop = std::min(n, start + batch);
                // A trailing single row would make batch statistics degenerate.
                if (stop - start < 2 && n >= 2) continue;
                const Batch b = gather(train_view, std::span<const std::size_t>(order).subspan(start, stop - start));
                ++step;
                for (std::size_t k = 0; k < phase.objectives.size(); ++k) {
                    auto& obj = phase.objectives[k];
                    if (step % obj.every != 0) continue;
                    const Var l = obj.loss(b, rng);
                    const auto grads = ad::grad(l, obj.params);
                    try {
                        nn::adam_step(obj.params, grads, obj.state, obj.adam);
                    } catch (const NonFiniteGradient& e) {
                        throw NonFiniteGradient(phase.name + "/" + obj.name + " epoch " + std::to_string(epoch) +
                                                " step " + std::to_string(step) + ": " + e.what());
                    }
                    if (obj.after_step) obj.after_step();
                    sums[k] += l.scalar();
                    ++counts[k];
                    if (observer) observer(phase.name, obj.name, net);
                }
            }
            for (std::size_t k = 0; k < phase.objectives.size(); ++k)
                report.history[phase.name + "/" + phase.objectives[k].name].push_back(
                    counts[k] ? sums[k] / counts[k] : std::numeric_limits<double>::quiet_NaN());

            if (!has_validation) continue;
            const auto v = net.validation_loss(validation);
            if (!v) continue;
            report.history[phase.name + "/validation"].push_back(*v);
            if (!phase.early_stopping) continue;
            if (*v < best) {
                best = *v;
                best_epoch = epoch;
                best_params = net.params.snapshot();
            } else if (epoch - best_epoch >= cfg.patience) {
                break;
            }
        }
        if (!best_params.empty()) net.params.restore(best_params);
    }
    return report;
}

}  // namespace tabsynth::detail
