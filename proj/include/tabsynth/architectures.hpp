#pragma once

// Internal building blocks of the generative models. Exposed so tests can
// reach individual objectives (gradient checks, single-step descent).

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tabsynth/models.hpp"

namespace tabsynth::detail {

using ad::Var;

struct Batch {
    Matrix x;
    Matrix cond;  // empty for unconditional models
};

// One loss minimised over one parameter group. Runs on optimizer steps where
// step % every == 0 (steps count from 1), so every=critic_steps gives the
// generator one update per critic_steps critic updates.
struct Objective {
    std::string name;
    std::vector<Var> params;
    int every = 1;
    nn::AdamConfig adam;
    nn::AdamState state;
    std::function<Var(const Batch&, Rng&)> loss;
    std::function<void()> after_step;  // e.g. weight clamp
};

struct Phase {
    std::string name;
    std::vector<Objective> objectives;
    int epochs = 1;
    bool early_stopping = false;
};

class Network {
public:
    Network(ModelSpec spec, Metadata meta, std::uint64_t init_seed);
    virtual ~Network() = default;
    Network(const Network&) = delete;
    Network& operator=(const Network&) = delete;

    // Fresh objectives (and optimizer state) for every training phase.
    virtual std::vector<Phase> phases() = 0;
    // Raw rows; cond is n x 2 one-hot for conditional models, empty otherwise.
    virtual Matrix sample(std::size_t n, Rng& rng, const Matrix& cond) const = 0;
    // Reconstruction loss for autoencoder-bearing models.
    virtual std::optional<double> validation_loss(const Batch&) const { return std::nullopt; }
    // Width of the discriminator / critic input; 0 when there is none on data space.
    virtual std::size_t discriminator_input_width() const { return 0; }

    const ModelSpec& spec() const { return spec_; }
    const Metadata& meta() const { return meta_; }
    std::size_t data_width() const { return total_width(meta_); }
    std::size_t condition_width() const { return spec_.conditional ? 2 : 0; }

    nn::ParamSet params;

protected:
    ModelSpec spec_;
    Metadata meta_;
    Rng init_rng_;
};

std::unique_ptr<Network> build_network(const ModelSpec& spec, const Metadata& meta, std::uint64_t init_seed);

// Called after every optimizer step with the phase and objective names.
using StepObserver = std::function<void(const std::string& phase, const std::string& objective, const Network&)>;

struct TrainingReport {
    std::map<std::string, std::vector<double>> history;
};

TrainingReport run_training(Network& net, const TrainingView& train_view, const TrainingView* validation_view,
                            Rng& rng, const StepObserver& observer = {});

Matrix one_hot_condition(std::size_t n, int label);

}  // namespace tabsynth::detail
