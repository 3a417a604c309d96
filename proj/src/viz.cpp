#include "tabsynth/viz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tabsynth::viz {

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance, int max_sweeps) {
    if (symmetric.rows() != symmetric.cols()) throw ShapeError("jacobi_eigen: matrix is not square");
    const Eigen::Index n = symmetric.rows();
    Matrix a = symmetric;
    Matrix v = Matrix::Identity(n, n);
    const double scale = std::max(a.norm(), std::numeric_limits<double>::min());
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= tolerance * scale) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) <= std::numeric_limits<double>::min()) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return a(x, x) > a(y, y); });
    SymmetricEigen out;
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values.push_back(a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]));
        out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

Pca pca2(const Matrix& rows) {
    if (rows.rows() < 3) throw DegenerateData("pca2 needs at least 3 rows");
    if (rows.cols() < 1) throw DegenerateData("pca2 needs at least one column");
    const RowVector mean = rows.colwise().mean();
    const Matrix centred = rows.rowwise() - mean;
    const Matrix cov = centred.transpose() * centred / static_cast<double>(rows.rows() - 1);
    const auto eig = jacobi_eigen(cov);
    if (!(eig.values[0] > 1e-12 * std::max(1.0, cov.trace()))) throw DegenerateData("pca2: data has rank 0");

    Pca out;
    out.axes = Matrix::Zero(rows.cols(), 2);
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(2, rows.cols()); ++k) {
        Eigen::VectorXd axis = eig.vectors.col(k);
        Eigen::Index at = 0;
        axis.cwiseAbs().maxCoeff(&at);
        if (axis(at) < 0) axis = -axis;
        out.axes.col(k) = axis;
        out.variances[static_cast<std::size_t>(k)] = std::max(0.0, eig.values[static_cast<std::size_t>(k)]);
    }
    out.coordinates = centred * out.axes;
    return out;
}

// ---------------------------------------------------------------------------

double row_perplexity(const Matrix& conditional, Eigen::Index row) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < conditional.cols(); ++j) {
        const double p = conditional(row, j);
        if (p > 0.0) h -= p * std::log2(p);
    }
    return std::exp2(h);
}

namespace {

// p(j|i) for one precision; returns the entropy in nats.
double fill_row(const Matrix& d, Eigen::Index i, double beta, Matrix& p) {
    double min_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < d.cols(); ++j)
        if (j != i) min_d = std::min(min_d, d(i, j));
    double sum = 0.0, weighted = 0.0;
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
        if (j == i) {
            p(i, j) = 0.0;
            continue;
        }
        const double shifted = d(i, j) - min_d;
        p(i, j) = std::exp(-beta * shifted);
        sum += p(i, j);
        weighted += shifted * p(i, j);
    }
    p.row(i) /= sum;
    return std::log(sum) + beta * weighted / sum;
}

}  // namespace

Affinities conditional_affinities(const Matrix& rows, double perplexity, double tolerance) {
    const Eigen::Index n = rows.rows();
    if (n < 2) throw DegenerateData("t-SNE needs at least 2 rows");
    if (!(perplexity > 1.0) || perplexity >= static_cast<double>(n - 1))
        throw ConfigError("perplexity must lie in (1, n-1)");
    const Matrix d = kernels::pairwise_sq_distances(rows, rows);
    Affinities out;
    out.conditional = Matrix::Zero(n, n);
    out.beta.assign(static_cast<std::size_t>(n), 1.0);
    out.perplexity.assign(static_cast<std::size_t>(n), 0.0);
    const double target = std::log(perplexity);
    for (Eigen::Index i = 0; i < n; ++i) {
        double lo = 0.0, hi = std::numeric_limits<double>::infinity(), beta = 1.0;
        double h = fill_row(d, i, beta, out.conditional);
        for (int it = 0; it < 200; ++it) {
            if (std::abs(std::exp(h) - perplexity) < tolerance) break;
            if (h > target) {  // too flat: sharpen
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
            h = fill_row(d, i, beta, out.conditional);
        }
        out.beta[static_cast<std::size_t>(i)] = beta;
        out.perplexity[static_cast<std::size_t>(i)] = row_perplexity(out.conditional, i);
    }
    return out;
}

Tsne tsne2(const Matrix& rows, const TsneConfig& config, kernels::Exec exec) {
    const Eigen::Index n = rows.rows();
    if (n > 2000) throw ConfigError("exact t-SNE is limited to 2000 rows");
    if (config.perplexity * 3.0 >= static_cast<double>(n))
        throw ConfigError("perplexity must be below a third of the row count");
    const Affinities aff = conditional_affinities(rows, config.perplexity, config.perplexity_tolerance);
    Matrix p = (aff.conditional + aff.conditional.transpose()) / (2.0 * static_cast<double>(n));
    p = p.cwiseMax(1e-12);
    p.diagonal().setZero();

    Rng rng(seed_mix(config.seed, "tsne"));
    Tsne out;
    out.perplexity = aff.perplexity;
    out.embedding = normal_matrix(n, 2, rng) * 1e-2;
    Matrix update = Matrix::Zero(n, 2), gains = Matrix::Ones(n, 2), grad;
    out.kl_trace.push_back(kernels::tsne_gradient(p, out.embedding, 1.0, grad, exec));
    for (int it = 0; it < config.iterations; ++it) {
        const double exaggeration = it < config.exaggeration_iterations ? config.exaggeration : 1.0;
        const double momentum = it < config.momentum_switch ? config.momentum : config.final_momentum;
        kernels::tsne_gradient(p, out.embedding, exaggeration, grad, exec);
        for (Eigen::Index k = 0; k < gains.size(); ++k) {
            double& g = gains.data()[k];
            g = (grad.data()[k] > 0) != (update.data()[k] > 0) ? g + 0.2 : g * 0.8;
            g = std::max(g, 0.01);
        }
        update = momentum * update - config.learning_rate * gains.cwiseProduct(grad);
        out.embedding += update;
        out.embedding.rowwise() -= out.embedding.colwise().mean();
        Matrix unused;
        out.kl_trace.push_back(kernels::tsne_gradient(p, out.embedding, 1.0, unused, exec));
    }
    return out;
}

// ---------------------------------------------------------------------------

const char* to_string(Tag tag) {
    switch (tag) {
        case Tag::Negative: return "negative";
        case Tag::Positive: return "positive";
        case Tag::Synthetic: return "synthetic";
    }
    return "?";
}

namespace {

std::size_t bmu(const Matrix& weights, const Matrix& rows, Eigen::Index r, double* distance = nullptr) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index u = 0; u < weights.rows(); ++u) {
        const double d = (weights.row(u) - rows.row(r)).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(u);
        }
    }
    if (distance) *distance = std::sqrt(best_d);
    return best;
}

}  // namespace

SomGrid som_fit(const Matrix& rows, const SomConfig& config) {
    if (rows.rows() == 0) throw InsufficientData("som_fit needs at least one row");
    if (config.grid_rows == 0 || config.grid_cols == 0 || config.epochs < 1) throw ConfigError("invalid SOM configuration");
    SomGrid som;
    som.grid_rows = config.grid_rows;
    som.grid_cols = config.grid_cols;
    const auto units = static_cast<Eigen::Index>(som.units());
    Rng rng(seed_mix(config.seed, "som"));
    const auto n = static_cast<std::size_t>(rows.rows());
    som.weights.resize(units, rows.cols());
    for (Eigen::Index u = 0; u < units; ++u) som.weights.row(u) = rows.row(static_cast<Eigen::Index>(uniform_index(rng, n)));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const double total = static_cast<double>(config.epochs) * static_cast<double>(n);
    double step = 0.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t r : order) {
            const double frac = step++ / total;
            const double radius = config.radius_start * std::pow(config.radius_end / config.radius_start, frac);
            const double lr = config.learning_rate_start * std::pow(config.learning_rate_end / config.learning_rate_start, frac);
            const auto row = static_cast<Eigen::Index>(r);
            const std::size_t b = bmu(som.weights, rows, row);
            const double br = static_cast<double>(b / som.grid_cols), bc = static_cast<double>(b % som.grid_cols);
            for (Eigen::Index u = 0; u < units; ++u) {
                const double ur = static_cast<double>(static_cast<std::size_t>(u) / som.grid_cols);
                const double uc = static_cast<double>(static_cast<std::size_t>(u) % som.grid_cols);
                const double g2 = (ur - br) * (ur - br) + (uc - bc) * (uc - bc);
                const double h = std::exp(-g2 / (2.0 * radius * radius));
                som.weights.row(u) += lr * h * (rows.row(row) - som.weights.row(u));
            }
        }
        double qe = 0.0;
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
            double d = 0.0;
            bmu(som.weights, rows, r, &d);
            qe += d;
        }
        som.quantization_error.push_back(qe / static_cast<double>(n));
    }
    som.counts.assign(som.units(), {0, 0, 0});
    return som;
}

std::vector<std::size_t> som_assign(const SomGrid& som, const Matrix& rows) {
    if (rows.cols() != som.weights.cols()) throw ShapeError("som_assign: width mismatch");
    std::vector<std::size_t> out(static_cast<std::size_t>(rows.rows()));
    for (Eigen::Index r = 0; r < rows.rows(); ++r) out[static_cast<std::size_t>(r)] = bmu(som.weights, rows, r);
    return out;
}

void som_count(SomGrid& som, const Matrix& rows, const std::vector<Tag>& tags) {
    if (tags.size() != static_cast<std::size_t>(rows.rows())) throw ShapeError("som_count: one tag per row required");
    som.counts.assign(som.units(), {0, 0, 0});
    const auto assigned = som_assign(som, rows);
    for (std::size_t i = 0; i < assigned.size(); ++i) ++som.counts[assigned[i]][static_cast<std::size_t>(tags[i])];
}

TaggedRows diagnostic_sample(const Dataset& data, const SyntheticSource& synthesize, std::size_t n_real,
                             std::size_t n_synth, std::uint64_t seed) {
    Rng rng(seed_mix(seed, "diagnostic"));
    std::vector<std::size_t> idx(data.rows());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(n_real, idx.size()));
    std::sort(idx.begin(), idx.end());

    TaggedRows out;
    Matrix synthetic = n_synth > 0 ? synthesize(n_synth, rng) : Matrix(0, data.features.cols());
    if (synthetic.cols() != data.features.cols() || static_cast<std::size_t>(synthetic.rows()) != n_synth)
        throw ShapeError("diagnostic_sample: synthetic rows do not match the dataset");
    out.rows.resize(static_cast<Eigen::Index>(idx.size() + n_synth), data.features.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.rows.row(static_cast<Eigen::Index>(i)) = data.features.row(static_cast<Eigen::Index>(idx[i]));
        out.tags.push_back(data.labels[idx[i]] == 1 ? Tag::Positive : Tag::Negative);
    }
    if (n_synth > 0) out.rows.bottomRows(static_cast<Eigen::Index>(n_synth)) = synthetic;
    out.tags.insert(out.tags.end(), n_synth, Tag::Synthetic);
    return out;
}

}  // namespace tabsynth::viz
