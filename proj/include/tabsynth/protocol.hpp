#pragma once

// Experiment engine: baseline, undersampling sweep, and oversampling sweeps
// for classic and generative methods over stratified folds.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabsynth/classifier.hpp"
#include "tabsynth/models.hpp"
#include "tabsynth/resampling.hpp"
#include "tabsynth/samplers.hpp"
#include "tabsynth/tabular.hpp"

namespace tabsynth::protocol {

inline constexpr const char* kBaseline = "baseline";
inline constexpr const char* kUndersample = "random_under";

enum class Status { Ok, Timeout };

struct ExperimentRecord {
    std::string dataset;
    std::string method;    // baseline, random_under, a classic oversampler, or a model name
    std::string sampling;  // strategy for generative methods, empty otherwise
    double usr = 0.0;
    double osr = 0.0;
    std::size_t fold = 0;
    double train_f1 = 0.0;  // NaN on timeout
    double test_f1 = 0.0;   // NaN on timeout
    double wall_time_ms = 0.0;
    Status status = Status::Ok;
};

// Canonical order: baseline, undersampling, then methods by name; then
// sampling, usr, osr, fold.
bool canonical_less(const ExperimentRecord& a, const ExperimentRecord& b);

struct GridConfig {
    std::vector<std::string> methods;  // classic identifiers and/or model names
    std::vector<SamplingKind> sampling{SamplingKind::Minority};
    std::vector<double> usr_grid;  // empty: default for the dataset's IR
    std::vector<double> osr_grid;  // empty: same as the usr grid
    std::size_t folds = 10;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;
    std::size_t draw_limit = 10000;
    int jobs = 1;
    bool record_timing = false;
    // Frozen classifier; when absent it is chosen by grid search over classifier_grid.
    std::optional<gbt::BoostConfig> classifier;
    std::vector<gbt::BoostConfig> classifier_grid = gbt::default_grid();
    ModelSpec model;  // template for generative methods (architecture/variant/flags set per method)
    resample::Params resampling;

    nlohmann::json to_json() const;
    static GridConfig from_json(const nlohmann::json& j);
};

// Step 0.1 from ceil(IR, 0.1) to 1.0, or {2, 4, ..., 64} x IR when IR < 0.01.
std::vector<double> default_ratio_grid(double ir);

// Throws RatioError naming the offending value.
void validate_grids(const std::vector<double>& usr_grid, const std::vector<double>& osr_grid, double ir);

// Seed of the undersampling step of one (fold, usr); shared by every cell with that usr.
std::uint64_t undersample_seed(std::uint64_t master, const std::string& dataset, std::size_t fold, double usr);
// Seed of one generator: (master, dataset, method, strategy, fold).
std::uint64_t generator_seed(std::uint64_t master, const std::string& dataset, const std::string& method,
                             const std::string& sampling, std::size_t fold);

struct FoldData {
    std::size_t fold = 0;
    double dataset_ir = 0.0;  // ratios at or below it mean "leave the fold as is"
    Dataset train;
    Dataset test;
    std::vector<std::size_t> fit_rows;         // training part minus validation, dataset indices
    std::vector<std::size_t> validation_rows;  // dataset indices
    std::vector<std::size_t> test_rows;        // dataset indices
};

FoldData fold_data(const Dataset& data, const FoldSplit& folds, std::size_t fold);

// Ratio actually applied to a fold: a grid value at the dataset IR keeps the
// fold as is, anything else is raised to at least the fold's own IR.
double effective_usr(double usr, double dataset_ir, double fold_ir);
double effective_osr(double osr, double usr, double effective_usr);

// Fit on train, score f1 on train and test.
ExperimentRecord evaluate(const Dataset& train, const Dataset& test, const gbt::BoostConfig& classifier);

std::vector<ExperimentRecord> run_baseline(const Dataset& data, const FoldSplit& folds,
                                           const gbt::BoostConfig& classifier);

std::vector<ExperimentRecord> run_undersampling_sweep(const Dataset& data, const FoldSplit& folds,
                                                      const std::vector<double>& usr_grid,
                                                      const gbt::BoostConfig& classifier, std::uint64_t seed);

// Produces `n` synthetic minority rows for an undersampled training part.
// May throw DrawLimitExceeded, which the cell turns into a timeout record.
using CellSynthesizer = std::function<Matrix(const Dataset& undersampled, std::size_t n, Rng& rng)>;

ExperimentRecord run_oversampling_cell(const FoldData& fold, double usr, double osr, const std::string& method,
                                       const std::string& sampling, const CellSynthesizer& synthesize,
                                       const gbt::BoostConfig& classifier, std::uint64_t seed);

struct GridRun {
    std::string dataset;
    double ir = 0.0;
    gbt::BoostConfig classifier;
    std::optional<gbt::GridSearchResult> classifier_search;
    std::vector<double> usr_grid;
    std::vector<double> osr_grid;
    std::vector<ExperimentRecord> records;  // canonical order
    std::vector<std::string> warnings;      // sorted
    // Generator training rows per (method/sampling/fold), for leakage audits.
    std::vector<std::pair<std::string, std::vector<std::size_t>>> generator_rows;
};

using Logger = std::function<void(const std::string&)>;

GridRun run_grid(const Dataset& data, const GridConfig& config, const Logger& log = {});

struct CellSummary {
    std::string method;
    std::string sampling;
    double usr = 0.0;
    double osr = 0.0;
    std::size_t folds = 0;
    std::size_t timeouts = 0;
    double train_mean = 0.0, train_sd = 0.0;
    double test_mean = 0.0, test_sd = 0.0;
};

// Per (method, sampling, usr, osr): mean and sample standard deviation over
// the folds that completed.
std::vector<CellSummary> summarize_cells(const std::vector<ExperimentRecord>& records);

struct SummaryRow {
    std::string method;
    std::string sampling;
    bool timeout = false;  // every cell timed out
    CellSummary best;
};

// Per (method, sampling) the cell with the highest mean test f1 among cells
// without timeouts; ties go to the smallest (usr, osr).
std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records);

double sample_sd(const std::vector<double>& values);

// Report label of a method ("Only classifier", "SMOTE", "MV-WGAN-GP", ...).
std::string display_name(const std::string& method);

void write_results_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path,
                       bool record_timing);
std::vector<ExperimentRecord> read_results_csv(const std::filesystem::path& path);
// Markdown table: Model | Sampling | USR | OSR | Train f1 | Test f1.
std::string summary_markdown(const std::vector<SummaryRow>& rows, const std::string& dataset, double ir);
void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path);

}  // namespace tabsynth::protocol
