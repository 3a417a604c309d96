#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tabsynth/ad.hpp"

namespace tabsynth::nn {

using ad::Var;

enum class Activation { Identity, Relu, LeakyRelu, Tanh, Sigmoid, Softmax };

Var activate(const Var& x, Activation act);

// Named, ordered trainable arrays. Shapes are fixed at registration.
class ParamSet {
public:
    explicit ParamSet(std::uint64_t seed = 0) : seed_(seed) {}

    Var add(const std::string& name, Matrix init);
    const Var& get(const std::string& name) const;
    bool contains(const std::string& name) const;

    std::vector<Var> all() const;
    std::vector<Var> with_prefix(const std::string& prefix) const;
    const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t scalar_count() const;
    bool all_finite() const;

    // Copies of every array, for snapshot/restore around early stopping.
    std::vector<Matrix> snapshot() const;
    void restore(const std::vector<Matrix>& values);

    // Versioned container: {"format","version","seed","arrays":[{"name","shape","data"}]}.
    nlohmann::json to_json() const;
    // Loads values into already-registered arrays; names and shapes must match.
    void load_json(const nlohmann::json& j);

private:
    std::uint64_t seed_;
    std::vector<std::pair<std::string, Var>> entries_;
};

// Uniform Glorot initialisation: U(-a, a) with a = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng);

Var dense(const Var& input, const Var& weights, const Var& bias, Activation act);

struct Dense {
    Var weight;
    Var bias;

    Var operator()(const Var& x, Activation act = Activation::Identity) const { return dense(x, weight, bias, act); }
    Eigen::Index in() const { return weight.rows(); }
    Eigen::Index out() const { return weight.cols(); }
};

Dense make_dense(ParamSet& params, const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng);

// g = -log(-log u), u ~ U(0,1).
Matrix sample_gumbel(Eigen::Index rows, Eigen::Index cols, Rng& rng);
// softmax((logits + noise) / tau) row-wise; noise is held constant.
Var gumbel_softmax(const Var& logits, double tau, const Matrix& noise);
Var gumbel_softmax(const Var& logits, double tau, Rng& rng);

// Probabilities entering a log loss are clamped to [kLogEpsilon, 1 - kLogEpsilon].
inline constexpr double kLogEpsilon = 1e-7;

enum class LossKind { CrossEntropy, BinaryCrossEntropy, MeanSquaredError, KlStandardNormal };

// All losses sum over columns and average over rows.
Var cross_entropy(const Var& probs, const Var& target);
Var binary_cross_entropy(const Var& probs, const Var& target);
Var mean_squared_error(const Var& prediction, const Var& target);
// KL(N(mu, exp(log_var)) || N(0, I)).
Var kl_standard_normal(const Var& mu, const Var& log_var);
// For KlStandardNormal, prediction is mu and target is log_var.
Var loss(LossKind kind, const Var& prediction, const Var& target);

// Mean over rows of (||d critic / d x_hat||_2 - 1)^2 with the norm stabilised as
// sqrt(sum g^2 + 1e-12). Differentiable with respect to the critic parameters.
Var gradient_penalty(const std::function<Var(const Var&)>& critic, const Matrix& x_hat);
// x_hat = e * real + (1 - e) * fake, e ~ U(0,1) per row.
Matrix interpolate(const Matrix& real, const Matrix& fake, Rng& rng);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<Matrix> m;
    std::vector<Matrix> v;
    long step = 0;
};

AdamState adam_init(std::span<const Var> params);
// Throws NonFiniteGradient before touching any parameter if a gradient entry is not finite.
void adam_step(std::span<Var> params, std::span<const Var> grads, AdamState& state, const AdamConfig& config);

void clamp_params(std::span<Var> params, double c);

}  // namespace tabsynth::nn
