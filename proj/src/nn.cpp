#include "tabsynth/nn.hpp"

#include <cmath>

namespace tabsynth::nn {

using nlohmann::json;

Var activate(const Var& x, Activation act) {
    switch (act) {
        case Activation::Identity: return x;
        case Activation::Relu: return ad::relu(x);
        case Activation::LeakyRelu: return ad::leaky_relu(x, 0.2);
        case Activation::Tanh: return ad::tanh(x);
        case Activation::Sigmoid: return ad::sigmoid(x);
        case Activation::Softmax: return ad::softmax_rows(x);
    }
    return x;
}

Var ParamSet::add(const std::string& name, Matrix init) {
    if (contains(name)) throw ConfigError("parameter '" + name + "' registered twice");
    Var v = ad::parameter(std::move(init));
    entries_.emplace_back(name, v);
    return v;
}

const Var& ParamSet::get(const std::string& name) const {
    for (const auto& [n, v] : entries_)
        if (n == name) return v;
    throw ConfigError("no parameter named '" + name + "'");
}

bool ParamSet::contains(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.first == name) return true;
    return false;
}

std::vector<Var> ParamSet::all() const {
    std::vector<Var> out;
    for (const auto& e : entries_) out.push_back(e.second);
    return out;
}

std::vector<Var> ParamSet::with_prefix(const std::string& prefix) const {
    std::vector<Var> out;
    for (const auto& [n, v] : entries_)
        if (n.rfind(prefix, 0) == 0) out.push_back(v);
    return out;
}

std::size_t ParamSet::scalar_count() const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += static_cast<std::size_t>(e.second.value().size());
    return n;
}

bool ParamSet::all_finite() const {
    for (const auto& e : entries_)
        if (!e.second.value().allFinite()) return false;
    return true;
}

std::vector<Matrix> ParamSet::snapshot() const {
    std::vector<Matrix> out;
    for (const auto& e : entries_) out.push_back(e.second.value());
    return out;
}

void ParamSet::restore(const std::vector<Matrix>& values) {
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i].second.mutable_value() = values.at(i);
}

json ParamSet::to_json() const {
    json arrays = json::array();
    for (const auto& [name, v] : entries_) {
        const Matrix& m = v.value();
        arrays.push_back({{"name", name},
                          {"shape", {m.rows(), m.cols()}},
                          {"data", std::vector<double>(m.data(), m.data() + m.size())}});
    }
    return {{"format", "tabsynth.params"}, {"version", 1}, {"seed", seed_}, {"arrays", arrays}};
}

void ParamSet::load_json(const json& j) {
    if (j.value("format", "") != "tabsynth.params" || j.value("version", 0) != 1)
        throw SchemaError("unsupported parameter container");
    const auto& arrays = j.at("arrays");
    if (arrays.size() != entries_.size())
        throw SchemaError("parameter container holds " + std::to_string(arrays.size()) + " arrays, expected " +
                          std::to_string(entries_.size()));
    for (std::size_t i = 0; i < arrays.size(); ++i) {
        const auto& a = arrays[i];
        auto& [name, v] = entries_[i];
        if (a.at("name").get<std::string>() != name) throw SchemaError("parameter name mismatch at '" + name + "'");
        const auto rows = a.at("shape")[0].get<Eigen::Index>();
        const auto cols = a.at("shape")[1].get<Eigen::Index>();
        if (rows != v.rows() || cols != v.cols()) throw SchemaError("shape mismatch for '" + name + "'");
        const auto data = a.at("data").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw SchemaError("data size mismatch for '" + name + "'");
        v.mutable_value() = Eigen::Map<const Matrix>(data.data(), rows, cols);
    }
}

Matrix glorot_uniform(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-a, a);
    Matrix w(fan_in, fan_out);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    return w;
}

Var dense(const Var& input, const Var& weights, const Var& bias, Activation act) {
    if (input.cols() != weights.rows())
        throw ShapeError("dense: input width " + std::to_string(input.cols()) + " but weights expect " +
                         std::to_string(weights.rows()));
    if (bias.rows() != 1 || bias.cols() != weights.cols()) throw ShapeError("dense: bias shape mismatch");
    return activate(ad::add_row(ad::matmul(input, weights), bias), act);
}

Dense make_dense(ParamSet& params, const std::string& name, Eigen::Index in, Eigen::Index out, Rng& rng) {
    Dense d;
    d.weight = params.add(name + ".weight", glorot_uniform(in, out, rng));
    d.bias = params.add(name + ".bias", Matrix::Zero(1, out));
    return d;
}

Matrix sample_gumbel(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix g(rows, cols);
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        double u = uniform01(rng);
        // uniform_real_distribution can return exactly 0.
        if (u <= 0.0) u = std::numeric_limits<double>::min();
        g.data()[i] = -std::log(-std::log(u));
    }
    return g;
}

Var gumbel_softmax(const Var& logits, double tau, const Matrix& noise) {
    if (!(tau > 0.0)) throw ConfigError("gumbel_softmax temperature must be positive");
    return ad::softmax_rows(ad::scale(ad::add(logits, ad::constant(noise)), 1.0 / tau));
}

Var gumbel_softmax(const Var& logits, double tau, Rng& rng) {
    return gumbel_softmax(logits, tau, sample_gumbel(logits.rows(), logits.cols(), rng));
}

namespace {

Var row_mean_of_sum(const Var& per_element) {
    return ad::scale(ad::sum(per_element), 1.0 / static_cast<double>(per_element.rows()));
}

void check_shapes(const Var& a, const Var& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError(std::string(what) + ": shape mismatch");
}

}  // namespace

Var cross_entropy(const Var& probs, const Var& target) {
    check_shapes(probs, target, "cross_entropy");
    const Var logp = ad::log(ad::clamp(probs, kLogEpsilon, 1.0 - kLogEpsilon));
    return ad::neg(row_mean_of_sum(ad::mul(target, logp)));
}

Var binary_cross_entropy(const Var& probs, const Var& target) {
    check_shapes(probs, target, "binary_cross_entropy");
    const Var p = ad::clamp(probs, kLogEpsilon, 1.0 - kLogEpsilon);
    const Var one_minus_t = ad::add_scalar(ad::neg(target), 1.0);
    const Var one_minus_p = ad::add_scalar(ad::neg(p), 1.0);
    const Var ll = ad::add(ad::mul(target, ad::log(p)), ad::mul(one_minus_t, ad::log(one_minus_p)));
    return ad::neg(row_mean_of_sum(ll));
}

Var mean_squared_error(const Var& prediction, const Var& target) {
    check_shapes(prediction, target, "mean_squared_error");
    return row_mean_of_sum(ad::square(ad::sub(prediction, target)));
}

Var kl_standard_normal(const Var& mu, const Var& log_var) {
    check_shapes(mu, log_var, "kl_standard_normal");
    // -0.5 * sum(1 + log_var - mu^2 - exp(log_var))
    const Var inner = ad::sub(ad::sub(ad::add_scalar(log_var, 1.0), ad::square(mu)), ad::exp(log_var));
    return ad::scale(row_mean_of_sum(inner), -0.5);
}

Var loss(LossKind kind, const Var& prediction, const Var& target) {
    switch (kind) {
        case LossKind::CrossEntropy: return cross_entropy(prediction, target);
        case LossKind::BinaryCrossEntropy: return binary_cross_entropy(prediction, target);
        case LossKind::MeanSquaredError: return mean_squared_error(prediction, target);
        case LossKind::KlStandardNormal: return kl_standard_normal(prediction, target);
    }
    throw ConfigError("unknown loss kind");
}

Var gradient_penalty(const std::function<Var(const Var&)>& critic, const Matrix& x_hat) {
    const Var x = ad::parameter(x_hat);
    const Var scores = critic(x);
    if (scores.cols() != 1 || scores.rows() != x.rows()) throw ShapeError("critic must output one score per row");
    const Var g = ad::grad(ad::sum(scores), std::span<const Var>(&x, 1), /*create_graph=*/true)[0];
    const Var norms = ad::sqrt(ad::add_scalar(ad::rowsum(ad::square(g)), 1e-12));
    return ad::mean(ad::square(ad::add_scalar(norms, -1.0)));
}

Matrix interpolate(const Matrix& real, const Matrix& fake, Rng& rng) {
    if (real.rows() != fake.rows() || real.cols() != fake.cols()) throw ShapeError("interpolate: shape mismatch");
    Matrix out(real.rows(), real.cols());
    for (Eigen::Index r = 0; r < real.rows(); ++r) {
        const double e = uniform01(rng);
        out.row(r) = e * real.row(r) + (1.0 - e) * fake.row(r);
    }
    return out;
}

AdamState adam_init(std::span<const Var> params) {
    AdamState s;
    for (const auto& p : params) {
        s.m.push_back(Matrix::Zero(p.rows(), p.cols()));
        s.v.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
    return s;
}

void adam_step(std::span<Var> params, std::span<const Var> grads, AdamState& state, const AdamConfig& config) {
    if (params.size() != grads.size() || state.m.size() != params.size())
        throw ShapeError("adam_step: parameter, gradient and state counts differ");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (grads[i].rows() != params[i].rows() || grads[i].cols() != params[i].cols())
            throw ShapeError("adam_step: gradient shape mismatch");
        if (!grads[i].value().allFinite())
            throw NonFiniteGradient("non-finite gradient in parameter array " + std::to_string(i));
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Matrix& g = grads[i].value();
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g.cwiseAbs2();
        auto m_hat = state.m[i].array() / bc1;
        auto v_hat = state.v[i].array() / bc2;
        params[i].mutable_value().array() -= config.lr * m_hat / (v_hat.sqrt() + config.epsilon);
    }
}

void clamp_params(std::span<Var> params, double c) {
    if (!(c > 0.0)) throw ConfigError("clamp constant must be positive");
    for (auto& p : params) p.mutable_value() = p.value().cwiseMax(-c).cwiseMin(c);
}

}  // namespace tabsynth::nn
