#pragma once

// Data-parallel inner loops. Each kernel has a serial reference and an OpenMP
// version; both produce bit-identical results (reductions are finished in a
// fixed serial order), which tests/test_kernels.cpp checks.

#include <cstdint>
#include <span>
#include <vector>

#include "tabsynth/rng.hpp"

namespace tabsynth::kernels {

enum class Exec { Serial, Parallel };

Exec default_exec();
void set_default_exec(Exec exec);

// D(i, j) = ||a_i - b_j||^2.
Matrix pairwise_sq_distances(const Matrix& a, const Matrix& b, Exec exec = default_exec());

// For each query row, indices of the k nearest reference rows by distance,
// ties broken by lower index. exclude_self skips reference row i for query i.
std::vector<std::vector<std::size_t>> knn_from_distances(const Matrix& sq_dist, std::size_t k, bool exclude_self,
                                                         Exec exec = default_exec());
std::vector<std::vector<std::size_t>> knn(const Matrix& query, const Matrix& reference, std::size_t k,
                                          bool exclude_self, Exec exec = default_exec());

// Exact t-SNE gradient of KL(P || Q) for a 2-D embedding, with P scaled by
// `exaggeration`. Returns KL(P || Q) of the unexaggerated P.
double tsne_gradient(const Matrix& p, const Matrix& y, double exaggeration, Matrix& grad, Exec exec = default_exec());

struct NodeTotals {
    double g = 0.0;
    double h = 0.0;
};

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    double left_g = 0.0;
    double left_h = 0.0;

    bool valid() const { return feature >= 0; }
};

// Exact greedy split search for every open node of one tree level.
// sorted_rows[f] lists rows in ascending order of feature f; node_of_row maps
// rows to an open node index (or -1). A row goes left when x < threshold.
// Ties in gain keep the lowest feature, then the lowest threshold.
std::vector<SplitCandidate> best_splits(const Matrix& x, const std::vector<std::vector<std::uint32_t>>& sorted_rows,
                                        std::span<const int> node_of_row, std::span<const double> g,
                                        std::span<const double> h, std::span<const NodeTotals> totals,
                                        double lambda, double min_child_weight, Exec exec = default_exec());

}  // namespace tabsynth::kernels
