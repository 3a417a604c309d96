#include "tabsynth/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tabsynth/architectures.hpp"

namespace tabsynth {

using nlohmann::json;

namespace {

struct ArchName {
    Architecture arch;
    const char* id;    // config / JSON identifier
    const char* slug;  // table vocabulary
};

constexpr ArchName kArchNames[] = {
    {Architecture::Vae, "vae", "vae"},          {Architecture::Gan, "gan", "gan"},
    {Architecture::Wgan, "wgan", "wgan"},       {Architecture::WganGp, "wgan_gp", "wgan-gp"},
    {Architecture::Medgan, "medgan", "medgan"}, {Architecture::Arae, "arae", "arae"},
};

}  // namespace

const char* to_string(Architecture arch) {
    for (const auto& a : kArchNames)
        if (a.arch == arch) return a.id;
    return "?";
}

Architecture architecture_from_string(const std::string& text) {
    for (const auto& a : kArchNames)
        if (text == a.id || text == a.slug) return a.arch;
    throw ConfigError("unknown architecture '" + text + "'");
}

std::string model_name(Architecture arch, Variant variant) {
    for (const auto& a : kArchNames)
        if (a.arch == arch) return std::string(variant == Variant::MultiVariable ? "mv-" : "") + a.slug;
    return "?";
}

std::pair<Architecture, Variant> parse_model_name(const std::string& name) {
    const bool mv = name.rfind("mv-", 0) == 0;
    const Architecture arch = architecture_from_string(mv ? name.substr(3) : name);
    const bool mv_only = arch == Architecture::Wgan || arch == Architecture::WganGp;
    if (mv_only != mv && (mv_only || arch == Architecture::Gan)) throw ConfigError("unknown model: " + name);
    return {arch, mv ? Variant::MultiVariable : Variant::Plain};
}

bool is_model_name(const std::string& name) {
    try {
        parse_model_name(name);
        return true;
    } catch (const ConfigError&) {
        return false;
    }
}

void ModelSpec::validate() const {
    const bool adversarial_only_mv = architecture == Architecture::Wgan || architecture == Architecture::WganGp;
    if (adversarial_only_mv && variant == Variant::Plain)
        throw ConfigError(std::string(to_string(architecture)) + " exists only as a multi-variable model");
    if (architecture == Architecture::Gan && variant == Variant::MultiVariable)
        throw ConfigError("multi-variable gan is mv-wgan");
    if (conditional && label_as_variable) throw ConfigError("conditional and label-as-variable are mutually exclusive");
    for (int h : hidden_sizes)
        if (h <= 0) throw ConfigError("hidden sizes must be positive");
    if (latent_size <= 0 || embedding_size <= 0) throw ConfigError("latent and embedding sizes must be positive");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    const auto& t = training;
    if (t.epochs < 0 || t.pretrain_epochs < 0) throw ConfigError("epoch counts must be non-negative");
    if (t.batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (t.patience < 1) throw ConfigError("patience must be at least 1");
    if (t.critic_steps < 1) throw ConfigError("critic steps must be at least 1");
    if (!(t.autoencoder_lr > 0.0) || !(t.adversarial_lr > 0.0)) throw ConfigError("learning rates must be positive");
    if (!(t.clamp > 0.0)) throw ConfigError("clamp constant must be positive");
    if (t.penalty_weight < 0.0) throw ConfigError("penalty weight must be non-negative");
}

json ModelSpec::to_json() const {
    const auto& t = training;
    return {{"architecture", to_string(architecture)},
            {"variant", variant == Variant::MultiVariable ? "multi_variable" : "plain"},
            {"hidden_sizes", hidden_sizes},
            {"latent_size", latent_size},
            {"embedding_size", embedding_size},
            {"tau", tau},
            {"conditional", conditional},
            {"label_as_variable", label_as_variable},
            {"seed", seed},
            {"training",
             {{"epochs", t.epochs},
              {"pretrain_epochs", t.pretrain_epochs},
              {"batch_size", t.batch_size},
              {"patience", t.patience},
              {"autoencoder_lr", t.autoencoder_lr},
              {"adversarial_lr", t.adversarial_lr},
              {"adversarial_beta1", t.adversarial_beta1},
              {"critic_steps", t.critic_steps},
              {"clamp", t.clamp},
              {"penalty_weight", t.penalty_weight}}}};
}

ModelSpec ModelSpec::from_json(const json& j) {
    ModelSpec s;
    if (j.contains("model")) {
        std::tie(s.architecture, s.variant) = parse_model_name(j.at("model").get<std::string>());
    } else {
        s.architecture = architecture_from_string(j.value("architecture", std::string("vae")));
        const auto variant = j.value("variant", std::string("multi_variable"));
        if (variant == "plain") s.variant = Variant::Plain;
        else if (variant == "multi_variable") s.variant = Variant::MultiVariable;
        else throw ConfigError("unknown variant '" + variant + "'");
    }
    s.hidden_sizes = j.value("hidden_sizes", s.hidden_sizes);
    s.latent_size = j.value("latent_size", s.latent_size);
    s.embedding_size = j.value("embedding_size", s.embedding_size);
    s.tau = j.value("tau", s.tau);
    s.conditional = j.value("conditional", s.conditional);
    s.label_as_variable = j.value("label_as_variable", s.label_as_variable);
    s.seed = j.value("seed", s.seed);
    if (j.contains("training")) {
        const auto& tj = j.at("training");
        auto& t = s.training;
        t.epochs = tj.value("epochs", t.epochs);
        t.pretrain_epochs = tj.value("pretrain_epochs", t.pretrain_epochs);
        t.batch_size = tj.value("batch_size", t.batch_size);
        t.patience = tj.value("patience", t.patience);
        t.autoencoder_lr = tj.value("autoencoder_lr", t.autoencoder_lr);
        t.adversarial_lr = tj.value("adversarial_lr", t.adversarial_lr);
        t.adversarial_beta1 = tj.value("adversarial_beta1", t.adversarial_beta1);
        t.critic_steps = tj.value("critic_steps", t.critic_steps);
        t.clamp = tj.value("clamp", t.clamp);
        t.penalty_weight = tj.value("penalty_weight", t.penalty_weight);
    }
    s.validate();
    return s;
}

// ---------------------------------------------------------------------------

ad::Var reconstruction_loss(const ad::Var& output, const ad::Var& target, const Metadata& meta, bool simplex_heads) {
    const auto width = static_cast<Eigen::Index>(total_width(meta));
    if (output.cols() != width || target.cols() != width || output.rows() != target.rows())
        throw ShapeError("reconstruction_loss: output/target/metadata widths differ");
    ad::Var total = ad::scalar_constant(0.0);
    Eigen::Index at = 0;
    for (const auto& v : meta) {
        const auto w = static_cast<Eigen::Index>(v.width);
        const ad::Var out = ad::slice_cols(output, at, w);
        const ad::Var tgt = ad::slice_cols(target, at, w);
        ad::Var term;
        switch (v.kind) {
            case VariableKind::Categorical:
                term = simplex_heads ? nn::cross_entropy(out, tgt) : nn::binary_cross_entropy(out, tgt);
                break;
            case VariableKind::Binary: term = nn::binary_cross_entropy(out, tgt); break;
            case VariableKind::Numerical: term = nn::mean_squared_error(out, tgt); break;
        }
        total = ad::add(total, term);
        at += w;
    }
    return total;
}

ad::Var build_heads(const ad::Var& hidden, const Metadata& meta, std::span<const nn::Dense> heads, double tau,
                    HeadMode mode, Rng& rng) {
    if (heads.size() != meta.size()) throw ShapeError("build_heads: one head per variable required");
    if (!(tau > 0.0)) throw ConfigError("tau must be positive");
    std::vector<ad::Var> parts;
    parts.reserve(meta.size());
    for (std::size_t i = 0; i < meta.size(); ++i) {
        const auto& v = meta[i];
        if (heads[i].out() != static_cast<Eigen::Index>(v.width))
            throw ShapeError("build_heads: head for '" + v.name + "' has the wrong width");
        const ad::Var logits = heads[i](hidden);
        switch (v.kind) {
            case VariableKind::Categorical:
                parts.push_back(mode == HeadMode::Reconstruct ? ad::softmax_rows(logits)
                                                              : nn::gumbel_softmax(logits, tau, rng));
                break;
            case VariableKind::Binary:
                if (mode == HeadMode::Sample) {
                    // Binary-concrete relaxation: sigmoid((l + logistic noise) / tau).
                    Matrix noise(logits.rows(), logits.cols());
                    for (Eigen::Index k = 0; k < noise.size(); ++k) {
                        const double u = std::clamp(uniform01(rng), 1e-12, 1.0 - 1e-12);
                        noise.data()[k] = std::log(u) - std::log1p(-u);
                    }
                    parts.push_back(ad::sigmoid(ad::scale(ad::add(logits, ad::constant(std::move(noise))), 1.0 / tau)));
                } else {
                    parts.push_back(ad::sigmoid(logits));
                }
                break;
            case VariableKind::Numerical: parts.push_back(ad::sigmoid(logits)); break;
        }
    }
    return ad::concat_cols(parts);
}

ad::Var build_inputs(const ad::Var& rows, const Metadata& meta, std::span<const nn::Dense> embeddings) {
    if (embeddings.size() != meta.size()) throw ShapeError("build_inputs: one embedding per variable required");
    if (rows.cols() != static_cast<Eigen::Index>(total_width(meta)))
        throw ShapeError("build_inputs: row width " + std::to_string(rows.cols()) + " does not match metadata width " +
                         std::to_string(total_width(meta)));
    std::vector<ad::Var> parts;
    parts.reserve(meta.size());
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < meta.size(); ++i) {
        const auto w = static_cast<Eigen::Index>(meta[i].width);
        if (embeddings[i].in() != w) throw ShapeError("build_inputs: embedding for '" + meta[i].name + "' has the wrong width");
        parts.push_back(embeddings[i](ad::slice_cols(rows, at, w)));
        at += w;
    }
    return ad::concat_cols(parts);
}

// ---------------------------------------------------------------------------

std::uint64_t fingerprint_rows(const Matrix& rows) {
    std::uint64_t h = seed_mix(static_cast<std::uint64_t>(rows.rows()), static_cast<std::uint64_t>(rows.cols()));
    const auto* bytes = reinterpret_cast<const char*>(rows.data());
    return fnv1a(std::string_view(bytes, static_cast<std::size_t>(rows.size()) * sizeof(double)), h);
}

TrainedGenerator::TrainedGenerator(ModelSpec spec, Metadata meta, std::shared_ptr<detail::Network> network)
    : spec_(std::move(spec)), meta_(std::move(meta)), network_(std::move(network)) {}

const nn::ParamSet& TrainedGenerator::params() const { return network_->params; }

Matrix TrainedGenerator::generate(std::size_t n, Rng& rng, std::optional<int> condition) const {
    if (n == 0) throw ConfigError("generate: n must be at least 1");
    if (condition.has_value() != spec_.conditional)
        throw StrategyMismatch(spec_.conditional ? "conditional model needs a class to condition on"
                                                 : "unconditional model cannot take a condition");
    const Matrix cond = condition ? detail::one_hot_condition(n, *condition) : Matrix();
    return network_->sample(n, rng, cond);
}

namespace {

json history_to_json(const std::map<std::string, std::vector<double>>& history) {
    json out = json::object();
    for (const auto& [k, values] : history) {
        json arr = json::array();
        for (double v : values) arr.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        out[k] = std::move(arr);
    }
    return out;
}

std::map<std::string, std::vector<double>> history_from_json(const json& j) {
    std::map<std::string, std::vector<double>> out;
    for (const auto& [k, arr] : j.items()) {
        auto& values = out[k];
        for (const auto& v : arr) values.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
    }
    return out;
}

}  // namespace

json TrainedGenerator::to_json() const {
    return {{"format", "tabsynth.model"},
            {"version", 1},
            {"model", spec_.name()},
            {"spec", spec_.to_json()},
            {"meta", metadata_to_json(meta_)},
            {"fingerprint", fingerprint_},
            {"source_rows", source_rows_},
            {"history", history_to_json(history_)},
            {"params", network_->params.to_json()}};
}

TrainedGenerator TrainedGenerator::from_json(const json& j) {
    if (j.value("format", "") != "tabsynth.model" || j.value("version", 0) != 1)
        throw SchemaError("not a tabsynth model file");
    ModelSpec spec = ModelSpec::from_json(j.at("spec"));
    Metadata meta = metadata_from_json(j.at("meta"));
    const auto& params = j.at("params");
    std::shared_ptr<detail::Network> net = detail::build_network(spec, meta, params.at("seed").get<std::uint64_t>());
    net->params.load_json(params);
    TrainedGenerator g(std::move(spec), std::move(meta), std::move(net));
    g.fingerprint_ = j.value("fingerprint", std::uint64_t{0});
    g.source_rows_ = j.value("source_rows", std::vector<std::size_t>{});
    if (j.contains("history")) g.history_ = history_from_json(j.at("history"));
    return g;
}

void TrainedGenerator::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << to_json().dump() << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

TrainedGenerator TrainedGenerator::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    return from_json(j);
}

TrainedGenerator train(const ModelSpec& spec_in, const TrainingView& train_view, const TrainingView* validation_view,
                       std::uint64_t seed) {
    ModelSpec spec = spec_in;
    spec.seed = seed;
    spec.validate();
    if (train_view.rows.rows() == 0) throw InsufficientData("training set is empty");
    if (train_view.meta.empty()) throw ConfigError("training view carries no metadata");
    check_metadata(train_view.meta);
    if (static_cast<std::size_t>(train_view.rows.cols()) != total_width(train_view.meta))
        throw ShapeError("training rows do not match their metadata width");
    if (validation_view && validation_view->rows.rows() > 0 && validation_view->rows.cols() != train_view.rows.cols())
        throw ShapeError("validation rows do not match training width");

    std::shared_ptr<detail::Network> net = detail::build_network(spec, train_view.meta, seed_mix(seed, "init"));
    Rng rng(seed_mix(seed, "train"));
    auto report = detail::run_training(*net, train_view, validation_view, rng);
    if (!net->params.all_finite()) throw NonFiniteGradient("training produced non-finite parameters");

    TrainedGenerator g(spec, train_view.meta, std::move(net));
    g.history_ = std::move(report.history);
    g.fingerprint_ = fingerprint_rows(train_view.rows);
    g.source_rows_ = train_view.source_rows;
    return g;
}

}  // namespace tabsynth
