#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "tabsynth/models.hpp"
#include "tabsynth/tabular.hpp"

namespace tabsynth {

enum class SamplingKind { Minority, Conditional, Rejection };

const char* to_string(SamplingKind kind);
SamplingKind sampling_from_string(const std::string& text);

struct SamplingStrategy {
    SamplingKind kind = SamplingKind::Minority;
    // Rejection only: total individual rows that may be generated, and rows per generator call.
    std::size_t draw_limit = 10000;
    std::size_t batch_size = 256;
};

// Rows a generator for `kind` trains on, drawn from `indices` of data.
// minority: positive rows, no label. conditional: all rows, label as one-hot
// condition. rejection: all rows with the label appended as a last binary variable.
TrainingView training_view(const Dataset& data, SamplingKind kind, std::span<const std::size_t> indices);
TrainingView training_view(const Dataset& data, SamplingKind kind);

// Adjusts a spec's conditioning flags to what `kind` requires.
ModelSpec spec_for(ModelSpec spec, SamplingKind kind);

// Throws StrategyMismatch when the generator was not trained for `kind`.
void check_compatible(const RowGenerator& generator, SamplingKind kind);

// All draws return discretized rows without the label column.
Matrix draw_minority(const RowGenerator& generator, std::size_t n, Rng& rng);
Matrix draw_conditional(const RowGenerator& generator, std::size_t n, int label, Rng& rng);

struct RejectionResult {
    Matrix rows;
    std::size_t draws = 0;    // individual generated rows
    std::size_t batches = 0;  // generator calls
};

// Generates batches, keeps rows whose discretized label equals `label`, until
// n rows are kept. Throws DrawLimitExceeded once draw_limit rows were drawn
// without reaching n.
RejectionResult draw_rejection(const RowGenerator& generator, std::size_t n, int label, const SamplingStrategy& strategy,
                               Rng& rng);

// n rows of class `label` using the strategy (minority requires label 1).
Matrix draw(const RowGenerator& generator, const SamplingStrategy& strategy, std::size_t n, int label, Rng& rng);

}  // namespace tabsynth
