#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabsynth/ad.hpp"
#include "tabsynth/nn.hpp"
#include "tabsynth/tabular.hpp"

namespace tabsynth {

enum class Architecture { Vae, Gan, Wgan, WganGp, Medgan, Arae };
enum class Variant { Plain, MultiVariable };

const char* to_string(Architecture arch);
Architecture architecture_from_string(const std::string& text);

// Table vocabulary: "vae", "mv-vae", "gan", "mv-wgan", "mv-wgan-gp", ...
std::string model_name(Architecture arch, Variant variant);
std::pair<Architecture, Variant> parse_model_name(const std::string& name);
bool is_model_name(const std::string& name);

struct TrainingConfig {
    int epochs = 300;
    int pretrain_epochs = 100;  // medgan autoencoder phase
    int batch_size = 64;
    int patience = 30;          // early stopping on validation reconstruction
    double autoencoder_lr = 1e-3;
    double adversarial_lr = 2e-4;
    double adversarial_beta1 = 0.5;
    int critic_steps = 5;
    double clamp = 0.01;
    double penalty_weight = 10.0;
};

struct ModelSpec {
    Architecture architecture = Architecture::Vae;
    Variant variant = Variant::MultiVariable;
    std::vector<int> hidden_sizes{128, 128};
    int latent_size = 32;
    int embedding_size = 16;
    double tau = 0.66;
    bool conditional = false;
    bool label_as_variable = false;
    TrainingConfig training;
    std::uint64_t seed = 0;

    std::string name() const { return model_name(architecture, variant); }
    // Throws ConfigError on illegal combinations.
    void validate() const;
    nlohmann::json to_json() const;
    static ModelSpec from_json(const nlohmann::json& j);
};

// Rows a generator trains on. `condition` is the one-hot label (n x 2) for
// conditional models and empty otherwise. `meta` describes `rows`, including
// the appended label variable for label-as-variable training.
struct TrainingView {
    Matrix rows;
    Matrix condition;
    Metadata meta;
    std::vector<std::size_t> source_rows;
};

// Anything samplers can draw rows from.
class RowGenerator {
public:
    virtual ~RowGenerator() = default;
    // Raw (pre-discretisation) rows. `condition` is the class to condition on.
    virtual Matrix generate(std::size_t n, Rng& rng, std::optional<int> condition = std::nullopt) const = 0;
    virtual const Metadata& output_meta() const = 0;
    virtual bool conditional() const = 0;
    virtual bool label_as_variable() const = 0;
};

namespace detail {
class Network;
}

class TrainedGenerator : public RowGenerator {
public:
    TrainedGenerator(ModelSpec spec, Metadata meta, std::shared_ptr<detail::Network> network);

    Matrix generate(std::size_t n, Rng& rng, std::optional<int> condition = std::nullopt) const override;
    const Metadata& output_meta() const override { return meta_; }
    bool conditional() const override { return spec_.conditional; }
    bool label_as_variable() const override { return spec_.label_as_variable; }

    const ModelSpec& spec() const { return spec_; }
    const nn::ParamSet& params() const;
    const std::map<std::string, std::vector<double>>& history() const { return history_; }
    std::uint64_t fingerprint() const { return fingerprint_; }
    const std::vector<std::size_t>& source_rows() const { return source_rows_; }

    nlohmann::json to_json() const;
    static TrainedGenerator from_json(const nlohmann::json& j);
    void save(const std::filesystem::path& path) const;
    static TrainedGenerator load(const std::filesystem::path& path);

private:
    friend TrainedGenerator train(const ModelSpec&, const TrainingView&, const TrainingView*, std::uint64_t);

    ModelSpec spec_;
    Metadata meta_;
    std::shared_ptr<detail::Network> network_;
    std::map<std::string, std::vector<double>> history_;
    std::uint64_t fingerprint_ = 0;
    std::vector<std::size_t> source_rows_;
};

std::uint64_t fingerprint_rows(const Matrix& rows);

// Trains the architecture named by spec; deterministic in seed.
TrainedGenerator train(const ModelSpec& spec, const TrainingView& train_view,
                       const TrainingView* validation_view, std::uint64_t seed);

// Sum over variables of cross-entropy (categorical blocks), binary
// cross-entropy (binary) and squared error (numerical), averaged over rows.
// With simplex_heads=false (plain sigmoid outputs) categorical columns are
// scored column-wise with binary cross-entropy.
ad::Var reconstruction_loss(const ad::Var& output, const ad::Var& target, const Metadata& meta,
                            bool simplex_heads = true);

enum class HeadMode {
    Reconstruct,  // softmax / sigmoid: mean parameters
    Relaxed,      // Gumbel-softmax categoricals, sigmoid elsewhere
    Sample,       // Relaxed plus binary-concrete binaries: a draw from the output distribution
};

// Per-variable output heads over a shared hidden layer (multi-variable
// variant). `heads` holds one dense layer per variable in metadata order.
ad::Var build_heads(const ad::Var& hidden, const Metadata& meta, std::span<const nn::Dense> heads, double tau,
                    HeadMode mode, Rng& rng);

// Per-variable dense embeddings concatenated in metadata order.
ad::Var build_inputs(const ad::Var& rows, const Metadata& meta, std::span<const nn::Dense> embeddings);

}  // namespace tabsynth
