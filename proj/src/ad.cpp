#include "tabsynth/ad.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <unordered_map>

namespace tabsynth::ad {

namespace {

thread_local bool g_grad_enabled = true;

using Backward = std::function<std::vector<Var>(const Var&, const Var&)>;

Var make(Matrix value, std::vector<Var> parents, Backward backward) {
    bool needs = false;
    if (g_grad_enabled)
        for (const auto& p : parents) needs = needs || p.requires_grad();
    auto node = std::make_shared<Node>();
    node->value = std::move(value);
    if (needs) {
        node->requires_grad = true;
        node->parents = std::move(parents);
        node->backward = std::move(backward);
    }
    return Var::from_node(std::move(node));
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError(std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + " differ");
}

}  // namespace

Var::Var(Matrix value, bool requires_grad) : node_(std::make_shared<Node>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
}

double Var::scalar() const {
    if (rows() != 1 || cols() != 1) throw ShapeError("scalar() on a non-1x1 value");
    return node_->value(0, 0);
}

Var scalar_constant(double x) { return constant(Matrix::Constant(1, 1, x)); }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

std::vector<Var> grad(const Var& output, std::span<const Var> inputs, bool create_graph) {
    if (output.rows() != 1 || output.cols() != 1) throw ShapeError("grad() needs a 1x1 output");

    // Post-order DFS over nodes that require grad; reversed it is a topological order.
    std::vector<Node*> order;
    std::unordered_map<Node*, Var> owner;
    if (output.requires_grad()) {
        std::unordered_map<Node*, bool> visited;
        std::vector<std::pair<Node*, std::size_t>> stack{{output.node(), 0}};
        owner.emplace(output.node(), output);
        visited[output.node()] = true;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < node->parents.size()) {
                const Var& p = node->parents[next++];
                if (p.requires_grad() && !visited[p.node()]) {
                    visited[p.node()] = true;
                    owner.emplace(p.node(), p);
                    stack.emplace_back(p.node(), 0);
                }
            } else {
                order.push_back(node);
                stack.pop_back();
            }
        }
    }

    std::unordered_map<Node*, Var> grads;
    {
        std::optional<NoGradGuard> guard;
        if (!create_graph) guard.emplace();
        grads[output.node()] = constant(Matrix::Ones(1, 1));
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            Node* node = *it;
            if (!node->backward) continue;
            auto found = grads.find(node);
            if (found == grads.end()) continue;
            const Var upstream = found->second;
            auto parent_grads = node->backward(owner.at(node), upstream);
            for (std::size_t i = 0; i < node->parents.size(); ++i) {
                const Var& p = node->parents[i];
                if (!p.requires_grad() || i >= parent_grads.size() || !parent_grads[i].defined()) continue;
                auto& slot = grads[p.node()];
                slot = slot.defined() ? add(slot, parent_grads[i]) : parent_grads[i];
            }
        }
    }

    std::vector<Var> out;
    out.reserve(inputs.size());
    for (const auto& in : inputs) {
        auto found = grads.find(in.node());
        if (found != grads.end())
            out.push_back(found->second);
        else
            out.push_back(constant(Matrix::Zero(in.rows(), in.cols())));
    }
    return out;
}

Var matmul(const Var& a, const Var& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " times " +
                         std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    Matrix v = a.value() * b.value();
    return make(std::move(v), {a, b}, [](const Var& out, const Var& g) {
        const auto& p = out.node()->parents;
        return std::vector<Var>{matmul(g, transpose(p[1])), matmul(transpose(p[0]), g)};
    });
}

Var transpose(const Var& a) {
    Matrix v = a.value().transpose();
    return make(std::move(v), {a}, [](const Var&, const Var& g) { return std::vector<Var>{transpose(g)}; });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > a.cols()) throw ShapeError("slice_cols out of range");
    Matrix v = a.value().middleCols(start, count);
    const Eigen::Index total = a.cols();
    return make(std::move(v), {a}, [start, total](const Var&, const Var& g) {
        return std::vector<Var>{pad_cols(g, start, total)};
    });
}

Var pad_cols(const Var& a, Eigen::Index start, Eigen::Index total) {
    if (start < 0 || start + a.cols() > total) throw ShapeError("pad_cols out of range");
    Matrix v = Matrix::Zero(a.rows(), total);
    v.middleCols(start, a.cols()) = a.value();
    const Eigen::Index count = a.cols();
    return make(std::move(v), {a}, [start, count](const Var&, const Var& g) {
        return std::vector<Var>{slice_cols(g, start, count)};
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_cols of nothing");
    Eigen::Index total = 0;
    const Eigen::Index rows = parts[0].rows();
    std::vector<Eigen::Index> widths;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ");
        widths.push_back(p.cols());
        total += p.cols();
    }
    Matrix v(rows, total);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        v.middleCols(at, p.cols()) = p.value();
        at += p.cols();
    }
    return make(std::move(v), std::vector<Var>(parts.begin(), parts.end()), [widths](const Var&, const Var& g) {
        std::vector<Var> out;
        Eigen::Index start = 0;
        for (auto w : widths) {
            out.push_back(slice_cols(g, start, w));
            start += w;
        }
        return out;
    });
}

Var broadcast_rows(const Var& row, Eigen::Index rows) {
    if (row.rows() != 1) throw ShapeError("broadcast_rows needs a 1xn input");
    Matrix v = row.value().replicate(rows, 1);
    return make(std::move(v), {row}, [](const Var&, const Var& g) { return std::vector<Var>{colsum(g)}; });
}

Var broadcast_cols(const Var& col, Eigen::Index cols) {
    if (col.cols() != 1) throw ShapeError("broadcast_cols needs an mx1 input");
    Matrix v = col.value().replicate(1, cols);
    return make(std::move(v), {col}, [](const Var&, const Var& g) { return std::vector<Var>{rowsum(g)}; });
}

Var fill(const Var& s, Eigen::Index rows, Eigen::Index cols) {
    if (s.rows() != 1 || s.cols() != 1) throw ShapeError("fill needs a 1x1 input");
    Matrix v = Matrix::Constant(rows, cols, s.value()(0, 0));
    return make(std::move(v), {s}, [](const Var&, const Var& g) { return std::vector<Var>{sum(g)}; });
}

Var sum(const Var& a) {
    Matrix v = Matrix::Constant(1, 1, a.value().sum());
    const Eigen::Index r = a.rows(), c = a.cols();
    return make(std::move(v), {a}, [r, c](const Var&, const Var& g) { return std::vector<Var>{fill(g, r, c)}; });
}

Var mean(const Var& a) { return scale(sum(a), 1.0 / static_cast<double>(a.rows() * a.cols())); }

Var colsum(const Var& a) {
    Matrix v = a.value().colwise().sum();
    const Eigen::Index r = a.rows();
    return make(std::move(v), {a}, [r](const Var&, const Var& g) { return std::vector<Var>{broadcast_rows(g, r)}; });
}

Var rowsum(const Var& a) {
    Matrix v = a.value().rowwise().sum();
    const Eigen::Index c = a.cols();
    return make(std::move(v), {a}, [c](const Var&, const Var& g) { return std::vector<Var>{broadcast_cols(g, c)}; });
}

Var colmean(const Var& a) { return scale(colsum(a), 1.0 / static_cast<double>(a.rows())); }

Var add(const Var& a, const Var& b) {
    require_same_shape(a, b, "add");
    Matrix v = a.value() + b.value();
    return make(std::move(v), {a, b}, [](const Var&, const Var& g) { return std::vector<Var>{g, g}; });
}

Var sub(const Var& a, const Var& b) {
    require_same_shape(a, b, "sub");
    Matrix v = a.value() - b.value();
    return make(std::move(v), {a, b}, [](const Var&, const Var& g) { return std::vector<Var>{g, neg(g)}; });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape(a, b, "mul");
    Matrix v = a.value().cwiseProduct(b.value());
    return make(std::move(v), {a, b}, [](const Var& out, const Var& g) {
        const auto& p = out.node()->parents;
        return std::vector<Var>{mul(g, p[1]), mul(g, p[0])};
    });
}

Var neg(const Var& a) {
    Matrix v = -a.value();
    return make(std::move(v), {a}, [](const Var&, const Var& g) { return std::vector<Var>{neg(g)}; });
}

Var scale(const Var& a, double s) {
    Matrix v = a.value() * s;
    return make(std::move(v), {a}, [s](const Var&, const Var& g) { return std::vector<Var>{scale(g, s)}; });
}

Var add_scalar(const Var& a, double s) {
    Matrix v = a.value().array() + s;
    return make(std::move(v), {a}, [](const Var&, const Var& g) { return std::vector<Var>{g}; });
}

Var add_row(const Var& a, const Var& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) throw ShapeError("add_row: bias width mismatch");
    Matrix v = a.value().rowwise() + row.value().row(0);
    return make(std::move(v), {a, row}, [](const Var&, const Var& g) { return std::vector<Var>{g, colsum(g)}; });
}

Var reciprocal(const Var& a) {
    Matrix v = a.value().cwiseInverse();
    return make(std::move(v), {a}, [](const Var& out, const Var& g) {
        return std::vector<Var>{neg(mul(g, square(out)))};
    });
}

Var square(const Var& a) {
    Matrix v = a.value().cwiseAbs2();
    return make(std::move(v), {a}, [](const Var& out, const Var& g) {
        return std::vector<Var>{scale(mul(g, out.node()->parents[0]), 2.0)};
    });
}

namespace {

Var masked(const Var& g, Matrix mask) { return mul(g, constant(std::move(mask))); }

}  // namespace

Var relu(const Var& a) {
    Matrix v = a.value().cwiseMax(0.0);
    return make(std::move(v), {a}, [](const Var& out, const Var& g) {
        Matrix mask = (out.node()->parents[0].value().array() > 0.0).cast<double>();
        return std::vector<Var>{masked(g, std::move(mask))};
    });
}

Var leaky_relu(const Var& a, double slope) {
    Matrix v = a.value().unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
    return make(std::move(v), {a}, [slope](const Var& out, const Var& g) {
        Matrix mask = out.node()->parents[0].value().unaryExpr([slope](double x) { return x > 0.0 ? 1.0 : slope; });
        return std::vector<Var>{masked(g, std::move(mask))};
    });
}

Var tanh(const Var& a) {
    Matrix v = a.value().array().tanh();
    return make(std::move(v), {a}, [](const Var& out, const Var& g) {
        return std::vector<Var>{mul(g, add_scalar(neg(square(out)), 1.0))};
    });
}

Var sigmoid(const Var& a) {
    Matrix v = a.value().unaryExpr([](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
    });
    return make(std::move(v), {a}, [](const Var& out, const Var& g) {
        return std::vector<Var>{mul(g, mul(out, add_scalar(neg(out), 1.0)))};
    });
}

Var exp(const Var& a) {
    Matrix v = a.value().array().exp();
    return make(std::move(v), {a}, [](const Var& out, const Var& g) { return std::vector<Var>{mul(g, out)}; });
}

Var log(const Var& a) {
    Matrix v = a.value().array().log();
    return make(std::move(v), {a}, [](const Var& out, const Var& g) {
        return std::vector<Var>{mul(g, reciprocal(out.node()->parents[0]))};
    });
}

Var sqrt(const Var& a) {
    Matrix v = a.value().array().sqrt();
    return make(std::move(v), {a}, [](const Var& out, const Var& g) {
        return std::vector<Var>{scale(mul(g, reciprocal(out)), 0.5)};
    });
}

Var clamp(const Var& a, double lo, double hi) {
    Matrix v = a.value().cwiseMax(lo).cwiseMin(hi);
    return make(std::move(v), {a}, [lo, hi](const Var& out, const Var& g) {
        Matrix mask = out.node()->parents[0].value().unaryExpr([lo, hi](double x) { return (x >= lo && x <= hi) ? 1.0 : 0.0; });
        return std::vector<Var>{masked(g, std::move(mask))};
    });
}

Var softmax_rows(const Var& a) {
    Matrix v = a.value();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        const double m = v.row(r).maxCoeff();
        v.row(r) = (v.row(r).array() - m).exp();
        v.row(r) /= v.row(r).sum();
    }
    return make(std::move(v), {a}, [](const Var& out, const Var& g) {
        const Var dot = rowsum(mul(g, out));
        return std::vector<Var>{mul(out, sub(g, broadcast_cols(dot, out.cols())))};
    });
}

}  // namespace tabsynth::ad
