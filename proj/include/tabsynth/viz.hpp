#pragma once

// Two-dimensional diagnostics of real versus synthetic rows: PCA, exact
// t-SNE, and a self-organizing map with per-cell class counts.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "tabsynth/kernels.hpp"
#include "tabsynth/tabular.hpp"

namespace tabsynth::viz {

// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
// Values descend; vectors are the matching columns.
struct SymmetricEigen {
    std::vector<double> values;
    Matrix vectors;
};
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-14, int max_sweeps = 100);

// Projection of the mean-centred rows onto the top two principal axes. Each
// axis is signed so its largest-magnitude loading is positive.
struct Pca {
    Matrix coordinates;  // n x 2
    Matrix axes;         // d x 2
    std::array<double, 2> variances{};
};
Pca pca2(const Matrix& rows);

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 500;
    double exaggeration = 12.0;
    int exaggeration_iterations = 100;
    double learning_rate = 200.0;
    double momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch = 250;
    double perplexity_tolerance = 1e-3;
    std::uint64_t seed = 0;
};

// Row-conditional affinities p(j|i) with per-row precision found by bisection.
struct Affinities {
    Matrix conditional;                 // n x n, zero diagonal, rows sum to 1
    std::vector<double> beta;           // 1 / (2 sigma^2)
    std::vector<double> perplexity;     // achieved per row
};
Affinities conditional_affinities(const Matrix& rows, double perplexity, double tolerance = 1e-3);
// Perplexity 2^H of one affinity row (H in bits).
double row_perplexity(const Matrix& conditional, Eigen::Index row);

struct Tsne {
    Matrix embedding;  // n x 2
    std::vector<double> kl_trace;  // KL(P || Q) before the first step and after each step
    std::vector<double> perplexity;
};
Tsne tsne2(const Matrix& rows, const TsneConfig& config = {}, kernels::Exec exec = kernels::default_exec());

enum class Tag { Negative = 0, Positive = 1, Synthetic = 2 };
const char* to_string(Tag tag);

struct SomConfig {
    std::size_t grid_rows = 10;
    std::size_t grid_cols = 10;
    int epochs = 50;
    double radius_start = 5.0;
    double radius_end = 0.5;
    double learning_rate_start = 0.5;
    double learning_rate_end = 0.01;
    std::uint64_t seed = 0;
};

struct SomGrid {
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;
    Matrix weights;  // one unit per row, row-major over the grid
    std::vector<std::array<std::size_t, 3>> counts;  // per unit, indexed by Tag
    std::vector<double> quantization_error;          // mean BMU distance after each epoch

    std::size_t units() const { return grid_rows * grid_cols; }
};

SomGrid som_fit(const Matrix& rows, const SomConfig& config = {});
// Best-matching unit of each row, ties to the lowest unit.
std::vector<std::size_t> som_assign(const SomGrid& som, const Matrix& rows);
// Replaces counts with the per-unit tally of tagged rows.
void som_count(SomGrid& som, const Matrix& rows, const std::vector<Tag>& tags);

struct TaggedRows {
    Matrix rows;
    std::vector<Tag> tags;
};

// n_real uniformly drawn dataset rows (tagged by class) followed by n_synth
// rows from `synthesize` tagged synthetic.
using SyntheticSource = std::function<Matrix(std::size_t n, Rng& rng)>;
TaggedRows diagnostic_sample(const Dataset& data, const SyntheticSource& synthesize, std::size_t n_real = 200,
                             std::size_t n_synth = 200, std::uint64_t seed = 0);

}  // namespace tabsynth::viz
