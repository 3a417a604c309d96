#include "tabsynth/samplers.hpp"

#include <numeric>
#include <vector>

namespace tabsynth {

const char* to_string(SamplingKind kind) {
    switch (kind) {
        case SamplingKind::Minority: return "minority";
        case SamplingKind::Conditional: return "conditional";
        case SamplingKind::Rejection: return "rejection";
    }
    return "?";
}

SamplingKind sampling_from_string(const std::string& text) {
    if (text == "minority") return SamplingKind::Minority;
    if (text == "conditional") return SamplingKind::Conditional;
    if (text == "rejection") return SamplingKind::Rejection;
    throw ConfigError("unknown sampling strategy '" + text + "'");
}

TrainingView training_view(const Dataset& data, SamplingKind kind, std::span<const std::size_t> indices) {
    std::vector<std::size_t> keep;
    for (std::size_t i : indices) {
        if (i >= data.rows()) throw ShapeError("training_view: row index out of range");
        if (kind != SamplingKind::Minority || data.labels[i] == 1) keep.push_back(i);
    }
    TrainingView view;
    view.source_rows = keep;
    view.meta = data.meta;
    const auto n = static_cast<Eigen::Index>(keep.size());
    const auto w = static_cast<Eigen::Index>(data.width());
    const bool with_label = kind == SamplingKind::Rejection;
    view.rows.resize(n, w + (with_label ? 1 : 0));
    if (kind == SamplingKind::Conditional) view.condition = Matrix::Zero(n, 2);
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::size_t src = keep[static_cast<std::size_t>(r)];
        view.rows.row(r).head(w) = data.features.row(static_cast<Eigen::Index>(src));
        const int label = data.labels[src];
        if (with_label) view.rows(r, w) = label;
        if (kind == SamplingKind::Conditional) view.condition(r, label) = 1.0;
    }
    if (with_label) view.meta.push_back(VariableMeta::binary(data.label_column, {"0", "1"}));
    return view;
}

TrainingView training_view(const Dataset& data, SamplingKind kind) {
    std::vector<std::size_t> all(data.rows());
    std::iota(all.begin(), all.end(), 0);
    return training_view(data, kind, all);
}

ModelSpec spec_for(ModelSpec spec, SamplingKind kind) {
    spec.conditional = kind == SamplingKind::Conditional;
    spec.label_as_variable = kind == SamplingKind::Rejection;
    return spec;
}

void check_compatible(const RowGenerator& generator, SamplingKind kind) {
    const bool ok = (kind == SamplingKind::Minority && !generator.conditional() && !generator.label_as_variable()) ||
                    (kind == SamplingKind::Conditional && generator.conditional()) ||
                    (kind == SamplingKind::Rejection && generator.label_as_variable());
    if (!ok) {
        const char* trained = generator.conditional()         ? "conditional"
                              : generator.label_as_variable() ? "rejection"
                                                              : "minority";
        throw StrategyMismatch(std::string("model was trained for ") + trained + " sampling, not " + to_string(kind));
    }
}

Matrix draw_minority(const RowGenerator& generator, std::size_t n, Rng& rng) {
    check_compatible(generator, SamplingKind::Minority);
    const auto w = static_cast<Eigen::Index>(total_width(generator.output_meta()));
    if (n == 0) return Matrix(0, w);
    return discretize(generator.generate(n, rng), generator.output_meta());
}

Matrix draw_conditional(const RowGenerator& generator, std::size_t n, int label, Rng& rng) {
    check_compatible(generator, SamplingKind::Conditional);
    if (label != 0 && label != 1) throw ConfigError("class must be 0 or 1");
    const auto w = static_cast<Eigen::Index>(total_width(generator.output_meta()));
    if (n == 0) return Matrix(0, w);
    return discretize(generator.generate(n, rng, label), generator.output_meta());
}

RejectionResult draw_rejection(const RowGenerator& generator, std::size_t n, int label, const SamplingStrategy& strategy,
                               Rng& rng) {
    check_compatible(generator, SamplingKind::Rejection);
    if (label != 0 && label != 1) throw ConfigError("class must be 0 or 1");
    if (strategy.draw_limit < 1 || strategy.batch_size < 1) throw ConfigError("draw limit and batch size must be positive");
    const Metadata& meta = generator.output_meta();
    const auto full = static_cast<Eigen::Index>(total_width(meta));
    const Eigen::Index w = full - 1;

    RejectionResult result;
    result.rows.resize(static_cast<Eigen::Index>(n), w);
    std::size_t kept = 0;
    while (kept < n) {
        if (result.draws >= strategy.draw_limit) throw DrawLimitExceeded(kept, result.draws);
        const std::size_t batch = std::min(strategy.batch_size, strategy.draw_limit - result.draws);
        const Matrix rows = discretize(generator.generate(batch, rng), meta);
        result.draws += batch;
        ++result.batches;
        for (Eigen::Index r = 0; r < rows.rows() && kept < n; ++r) {
            if (static_cast<int>(rows(r, w)) != label) continue;
            result.rows.row(static_cast<Eigen::Index>(kept++)) = rows.row(r).head(w);
        }
    }
    return result;
}

Matrix draw(const RowGenerator& generator, const SamplingStrategy& strategy, std::size_t n, int label, Rng& rng) {
    switch (strategy.kind) {
        case SamplingKind::Minority:
            if (label != 1) throw StrategyMismatch("minority sampling only yields the positive class");
            return draw_minority(generator, n, rng);
        case SamplingKind::Conditional: return draw_conditional(generator, n, label, rng);
        case SamplingKind::Rejection:
            if (n == 0) {
                check_compatible(generator, SamplingKind::Rejection);
                return Matrix(0, static_cast<Eigen::Index>(total_width(generator.output_meta())) - 1);
            }
            return draw_rejection(generator, n, label, strategy, rng).rows;
    }
    throw ConfigError("unknown sampling strategy");
}

}  // namespace tabsynth
