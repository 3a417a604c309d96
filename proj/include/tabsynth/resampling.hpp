#pragma once

// Random under/oversampling and SMOTE-family oversamplers. Class 1 is the
// minority throughout; nearest neighbours are exact (brute force) with ties
// broken by row index.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tabsynth/tabular.hpp"

namespace tabsynth::resample {

enum class Method { RandomOver, Smote, SmoteNc, BorderlineSmote, Adasyn, KmeansSmote };

// CLI identifiers ("random_over", "smote", ...) and report names ("SMOTE", ...).
const char* to_string(Method method);
const char* report_name(Method method);
Method method_from_string(const std::string& text);
bool is_method_name(const std::string& text);
std::vector<Method> all_methods();

struct Params {
    std::size_t k = 5;             // smote, smote_nc, adasyn, and within-cluster smote
    std::size_t m = 10;            // borderline danger neighbourhood
    std::size_t clusters = 8;      // kmeans_smote
    double cluster_threshold = 0.5;  // minimum minority fraction of an eligible cluster
    double sparsity_exponent = 2.0;
    int kmeans_iterations = 100;
    // Forces every interpolation factor (tests only).
    std::optional<double> fixed_lambda;
};

// floor(x + 0.5), robust to representation error just below the half.
std::size_t round_half_up(double x);

// Majority rows kept at the given usr: round(minority / usr).
std::size_t undersample_target(std::size_t minority, double usr);
// max(0, round(osr * majority) - minority).
std::size_t required_synthetic(std::size_t majority, std::size_t minority, double osr);

// Keeps every minority row and round(minority / usr) majority rows chosen
// uniformly without replacement; row order is preserved.
Dataset random_undersample(const Dataset& data, double usr, Rng& rng);

Matrix random_oversample(const Matrix& minority, std::size_t n, Rng& rng);
Matrix smote(const Matrix& minority, std::size_t n, std::size_t k, Rng& rng,
             std::optional<double> fixed_lambda = std::nullopt);
Matrix borderline_smote(const Matrix& minority, const Matrix& majority, std::size_t n, const Params& params, Rng& rng);
Matrix adasyn(const Matrix& minority, const Matrix& majority, std::size_t n, const Params& params, Rng& rng);
Matrix kmeans_smote(const Matrix& minority, const Matrix& majority, std::size_t n, const Params& params, Rng& rng);
Matrix smote_nc(const Matrix& minority, std::size_t n, const Metadata& meta, const Params& params, Rng& rng);

// Integer quotas proportional to weights summing to n (largest remainder,
// ties to the lower index).
std::vector<std::size_t> largest_remainder(const std::vector<double>& weights, std::size_t n);

// Minority rows whose m-neighbourhood over all rows holds between m/2 and m-1 majority rows.
std::vector<std::size_t> danger_rows(const Matrix& minority, const Matrix& majority, std::size_t m);

struct Kmeans {
    Matrix centers;
    std::vector<std::size_t> assignment;
};
// k-means++ seeding followed by Lloyd iterations.
Kmeans kmeans(const Matrix& rows, std::size_t k, int iterations, Rng& rng);

struct Oversampled {
    Matrix rows;
    bool fell_back = false;  // the method had no generation region and plain SMOTE was used
    std::string warning;
};

// Dispatches to a method. EmptyGenerationRegion falls back to SMOTE.
Oversampled oversample(Method method, const Dataset& data, std::size_t n, const Params& params, Rng& rng);

// Undersample to usr, then append synthetic minority rows produced by
// `synthesize(undersampled, n, rng)` to reach osr.
using Synthesizer = std::function<Matrix(const Dataset& undersampled, std::size_t n, Rng& rng)>;
Dataset resample(const Dataset& train, double usr, double osr, const Synthesizer& synthesize, Rng& under_rng,
                 Rng& over_rng);

}  // namespace tabsynth::resample
