#include "tabsynth/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "tabsynth/errors.hpp"

namespace tabsynth::kernels {

namespace {

std::atomic<Exec> g_default{Exec::Parallel};

inline double sq_dist_row(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const double d = a(i, k) - b(j, k);
        s += d * d;
    }
    return s;
}

std::vector<std::size_t> nearest_of_row(const Matrix& d, Eigen::Index i, std::size_t k, bool exclude_self) {
    std::vector<std::size_t> idx;
    idx.reserve(static_cast<std::size_t>(d.cols()));
    for (Eigen::Index j = 0; j < d.cols(); ++j)
        if (!(exclude_self && j == i)) idx.push_back(static_cast<std::size_t>(j));
    const std::size_t take = std::min(k, idx.size());
    auto closer = [&](std::size_t x, std::size_t y) {
        const double dx = d(i, static_cast<Eigen::Index>(x)), dy = d(i, static_cast<Eigen::Index>(y));
        return dx < dy || (dx == dy && x < y);
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(), closer);
    idx.resize(take);
    return idx;
}

double tsne_row(const Matrix& p, const Matrix& y, double exaggeration, Eigen::Index i, double inv_z,
                Eigen::Ref<Eigen::RowVectorXd> grad_row) {
    double kl = 0.0;
    grad_row.setZero();
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
        if (j == i) continue;
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        const double num = 1.0 / (1.0 + dx * dx + dy * dy);
        const double q = std::max(num * inv_z, 1e-12);
        const double pij = p(i, j);
        const double coeff = 4.0 * (exaggeration * pij - q) * num;
        grad_row(0) += coeff * dx;
        grad_row(1) += coeff * dy;
        if (pij > 0.0) kl += pij * std::log(pij / q);
    }
    return kl;
}

double kernel_row_sum(const Matrix& y, Eigen::Index i) {
    double z = 0.0;
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
        if (j == i) continue;
        const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
        z += 1.0 / (1.0 + dx * dx + dy * dy);
    }
    return z;
}

void scan_feature(const Matrix& x, const std::vector<std::uint32_t>& order, int feature,
                  std::span<const int> node_of_row, std::span<const double> g, std::span<const double> h,
                  std::span<const NodeTotals> totals, double lambda, double min_child_weight,
                  std::vector<SplitCandidate>& best_per_node) {
    const std::size_t nodes = totals.size();
    std::vector<double> gl(nodes, 0.0), hl(nodes, 0.0), last(nodes, 0.0);
    std::vector<char> seen(nodes, 0);
    for (std::size_t n = 0; n < nodes; ++n) best_per_node[n] = SplitCandidate{};

    for (std::uint32_t row : order) {
        const int node = node_of_row[row];
        if (node < 0) continue;
        const auto n = static_cast<std::size_t>(node);
        const double value = x(row, feature);
        if (seen[n] && value > last[n]) {
            const double gr = totals[n].g - gl[n];
            const double hr = totals[n].h - hl[n];
            if (hl[n] >= min_child_weight && hr >= min_child_weight) {
                const double parent = totals[n].g * totals[n].g / (totals[n].h + lambda);
                const double gain = 0.5 * (gl[n] * gl[n] / (hl[n] + lambda) + gr * gr / (hr + lambda) - parent);
                if (gain > best_per_node[n].gain + 1e-12) {
                    double threshold = 0.5 * (last[n] + value);
                    // Adjacent doubles: the midpoint may round onto the lower value.
                    if (!(threshold > last[n])) threshold = value;
                    best_per_node[n] = SplitCandidate{gain, feature, threshold, gl[n], hl[n]};
                }
            }
        }
        seen[n] = 1;
        last[n] = value;
        gl[n] += g[row];
        hl[n] += h[row];
    }
}

}  // namespace

Exec default_exec() { return g_default.load(); }
void set_default_exec(Exec exec) { g_default.store(exec); }

Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b, Exec exec) {
    if (a.cols() != b.cols()) throw ShapeError("pairwise_sq_distances: widths differ");
    Matrix d(a.rows(), b.rows());
    const Eigen::Index n = a.rows();
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = sq_dist_row(a, i, b, j);
    } else {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = sq_dist_row(a, i, b, j);
    }
    return d;
}

std::vector<std::vector<std::size_t>> knn_from_distances(const Matrix& sq_dist, std::size_t k, bool exclude_self,
                                                         Exec exec) {
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(sq_dist.rows()));
    const Eigen::Index n = sq_dist.rows();
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = nearest_of_row(sq_dist, i, k, exclude_self);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = nearest_of_row(sq_dist, i, k, exclude_self);
    }
    return out;
}

std::vector<std::vector<std::size_t>> knn(const Matrix& query, const Matrix& reference, std::size_t k,
                                          bool exclude_self, Exec exec) {
    return knn_from_distances(pairwise_sq_distances(query, reference, exec), k, exclude_self, exec);
}

double tsne_gradient(const Matrix& p, const Matrix& y, double exaggeration, Matrix& grad, Exec exec) {
    if (y.cols() != 2 || p.rows() != y.rows() || p.cols() != y.rows()) throw ShapeError("tsne_gradient: shape mismatch");
    const Eigen::Index n = y.rows();
    grad.resize(n, 2);
    std::vector<double> z_rows(static_cast<std::size_t>(n)), kl_rows(static_cast<std::size_t>(n));

    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) z_rows[static_cast<std::size_t>(i)] = kernel_row_sum(y, i);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) z_rows[static_cast<std::size_t>(i)] = kernel_row_sum(y, i);
    }
    const double z = std::accumulate(z_rows.begin(), z_rows.end(), 0.0);
    const double inv_z = 1.0 / z;

    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) kl_rows[static_cast<std::size_t>(i)] = tsne_row(p, y, exaggeration, i, inv_z, grad.row(i));
    } else {
        for (Eigen::Index i = 0; i < n; ++i) kl_rows[static_cast<std::size_t>(i)] = tsne_row(p, y, exaggeration, i, inv_z, grad.row(i));
    }
    return std::accumulate(kl_rows.begin(), kl_rows.end(), 0.0);
}

std::vector<SplitCandidate> best_splits(const Matrix& x, const std::vector<std::vector<std::uint32_t>>& sorted_rows,
                                        std::span<const int> node_of_row, std::span<const double> g,
                                        std::span<const double> h, std::span<const NodeTotals> totals,
                                        double lambda, double min_child_weight, Exec exec) {
    const auto features = static_cast<int>(sorted_rows.size());
    const std::size_t nodes = totals.size();
    // per_feature[f][n]: best split of node n on feature f.
    std::vector<std::vector<SplitCandidate>> per_feature(sorted_rows.size(), std::vector<SplitCandidate>(nodes));
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int f = 0; f < features; ++f)
            scan_feature(x, sorted_rows[static_cast<std::size_t>(f)], f, node_of_row, g, h, totals, lambda,
                         min_child_weight, per_feature[static_cast<std::size_t>(f)]);
    } else {
        for (int f = 0; f < features; ++f)
            scan_feature(x, sorted_rows[static_cast<std::size_t>(f)], f, node_of_row, g, h, totals, lambda,
                         min_child_weight, per_feature[static_cast<std::size_t>(f)]);
    }
    std::vector<SplitCandidate> best(nodes);
    for (std::size_t f = 0; f < per_feature.size(); ++f)
        for (std::size_t n = 0; n < nodes; ++n)
            if (per_feature[f][n].valid() && per_feature[f][n].gain > best[n].gain + 1e-12) best[n] = per_feature[f][n];
    return best;
}

}  // namespace tabsynth::kernels
