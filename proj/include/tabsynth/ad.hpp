#pragma once

// Reverse-mode differentiation over dense matrices.
//
// Every op records its parents and a backward rule written in terms of other
// ops, so a gradient computed with create_graph=true is itself a Var that can
// be differentiated again (needed by the critic gradient penalty).

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tabsynth/errors.hpp"
#include "tabsynth/rng.hpp"

namespace tabsynth::ad {

class Var;

struct Node {
    Matrix value;
    std::vector<Var> parents;
    // (output, upstream gradient) -> one gradient per parent; undefined Vars mean "no gradient".
    std::function<std::vector<Var>(const Var&, const Var&)> backward;
    bool requires_grad = false;
};

class Var {
public:
    Var() = default;
    explicit Var(Matrix value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Matrix& value() const { return node_->value; }
    // Only meaningful on leaves (optimizer updates, test perturbations).
    Matrix& mutable_value() { return node_->value; }
    Eigen::Index rows() const { return node_->value.rows(); }
    Eigen::Index cols() const { return node_->value.cols(); }
    double scalar() const;
    bool requires_grad() const { return node_ && node_->requires_grad; }
    Node* node() const { return node_.get(); }

    static Var from_node(std::shared_ptr<Node> node) {
        Var v;
        v.node_ = std::move(node);
        return v;
    }

private:
    std::shared_ptr<Node> node_;
};

inline Var constant(Matrix m) { return Var(std::move(m), false); }
inline Var parameter(Matrix m) { return Var(std::move(m), true); }
Var scalar_constant(double x);

// While alive, ops record no graph (values only). Thread-local.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

// Gradients of a 1x1 output with respect to each input. Inputs the output does
// not depend on receive zeros. With create_graph the results are differentiable.
std::vector<Var> grad(const Var& output, std::span<const Var> inputs, bool create_graph = false);

// Structural ops
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var pad_cols(const Var& a, Eigen::Index start, Eigen::Index total);
Var concat_cols(std::span<const Var> parts);
Var broadcast_rows(const Var& row, Eigen::Index rows);  // 1 x n -> rows x n
Var broadcast_cols(const Var& col, Eigen::Index cols);  // m x 1 -> m x cols
Var fill(const Var& scalar, Eigen::Index rows, Eigen::Index cols);

// Reductions
Var sum(const Var& a);
Var mean(const Var& a);
Var colsum(const Var& a);  // -> 1 x n
Var rowsum(const Var& a);  // -> m x 1
Var colmean(const Var& a);

// Elementwise arithmetic
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var add_row(const Var& a, const Var& row);  // bias broadcast over rows
Var reciprocal(const Var& a);
Var square(const Var& a);

// Elementwise nonlinearities
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var sqrt(const Var& a);
Var clamp(const Var& a, double lo, double hi);
Var softmax_rows(const Var& a);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }
inline Var operator-(const Var& a) { return neg(a); }

}  // namespace tabsynth::ad
