#include "tabsynth/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tabsynth/kernels.hpp"

namespace tabsynth::resample {

namespace {

struct MethodName {
    Method method;
    const char* id;
    const char* report;
};

constexpr MethodName kMethods[] = {
    {Method::RandomOver, "random_over", "RandomOverSampler"},
    {Method::Smote, "smote", "SMOTE"},
    {Method::SmoteNc, "smote_nc", "SMOTENC"},
    {Method::BorderlineSmote, "borderline_smote", "BorderlineSMOTE"},
    {Method::Adasyn, "adasyn", "ADASYN"},
    {Method::KmeansSmote, "kmeans_smote", "KMeansSMOTE"},
};

Matrix rows_with_label(const Dataset& data, int label) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.rows(); ++i)
        if (data.labels[i] == label) idx.push_back(i);
    Matrix out(static_cast<Eigen::Index>(idx.size()), data.features.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = data.features.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

Matrix stack(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() + b.rows(), a.cols());
    out.topRows(a.rows()) = a;
    out.bottomRows(b.rows()) = b;
    return out;
}

double lambda_draw(Rng& rng, const std::optional<double>& fixed) { return fixed ? *fixed : uniform01(rng); }

// x + lambda (neighbour - x)
void interpolate_into(Matrix& out, Eigen::Index row, const Matrix& src, std::size_t x, std::size_t nn, double lambda) {
    const auto xi = static_cast<Eigen::Index>(x), ni = static_cast<Eigen::Index>(nn);
    out.row(row) = src.row(xi) + lambda * (src.row(ni) - src.row(xi));
}

void require_minority(const Matrix& minority, std::size_t k, const char* method) {
    if (k < 1) throw ConfigError(std::string(method) + ": k must be at least 1");
    if (static_cast<std::size_t>(minority.rows()) <= k)
        throw InsufficientClassRows(std::string(method) + " needs more than " + std::to_string(k) + " minority rows, got " +
                                    std::to_string(minority.rows()));
}

}  // namespace

const char* to_string(Method method) {
    for (const auto& m : kMethods)
        if (m.method == method) return m.id;
    return "?";
}

const char* report_name(Method method) {
    for (const auto& m : kMethods)
        if (m.method == method) return m.report;
    return "?";
}

Method method_from_string(const std::string& text) {
    for (const auto& m : kMethods)
        if (text == m.id) return m.method;
    throw ConfigError("unknown resampling method '" + text + "'");
}

bool is_method_name(const std::string& text) {
    return std::any_of(std::begin(kMethods), std::end(kMethods), [&](const MethodName& m) { return text == m.id; });
}

std::vector<Method> all_methods() {
    std::vector<Method> out;
    for (const auto& m : kMethods) out.push_back(m.method);
    return out;
}

std::size_t round_half_up(double x) {
    if (!(x > 0.0)) return 0;
    return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

std::size_t undersample_target(std::size_t minority, double usr) {
    if (!(usr > 0.0)) throw RatioError("usr must be positive");
    return round_half_up(static_cast<double>(minority) / usr);
}

std::size_t required_synthetic(std::size_t majority, std::size_t minority, double osr) {
    const std::size_t target = round_half_up(osr * static_cast<double>(majority));
    return target > minority ? target - minority : 0;
}

Dataset random_undersample(const Dataset& data, double usr, Rng& rng) {
    const std::size_t minority = data.count(1), majority = data.count(0);
    if (minority == 0 || majority == 0) throw DegenerateLabels("undersampling needs both classes");
    const double ir = static_cast<double>(minority) / static_cast<double>(majority);
    if (usr < ir - 1e-12) throw RatioError("usr " + std::to_string(usr) + " is below the imbalance ratio " + std::to_string(ir));
    if (usr > 1.0 + 1e-12) throw RatioError("usr " + std::to_string(usr) + " exceeds 1");
    const std::size_t target = std::min(undersample_target(minority, usr), majority);
    if (target == majority) return data;

    std::vector<std::size_t> majority_rows;
    for (std::size_t i = 0; i < data.rows(); ++i)
        if (data.labels[i] == 0) majority_rows.push_back(i);
    std::shuffle(majority_rows.begin(), majority_rows.end(), rng);
    std::vector<char> keep(data.rows(), 0);
    for (std::size_t i = 0; i < target; ++i) keep[majority_rows[i]] = 1;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < data.rows(); ++i)
        if (data.labels[i] == 1 || keep[i]) idx.push_back(i);
    return data.subset(idx);
}

Matrix random_oversample(const Matrix& minority, std::size_t n, Rng& rng) {
    Matrix out(static_cast<Eigen::Index>(n), minority.cols());
    if (n == 0) return out;
    if (minority.rows() == 0) throw InsufficientClassRows("random_over: no minority rows");
    for (std::size_t i = 0; i < n; ++i)
        out.row(static_cast<Eigen::Index>(i)) = minority.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(minority.rows()))));
    return out;
}

Matrix smote(const Matrix& minority, std::size_t n, std::size_t k, Rng& rng, std::optional<double> fixed_lambda) {
    Matrix out(static_cast<Eigen::Index>(n), minority.cols());
    if (n == 0) return out;
    require_minority(minority, k, "smote");
    const auto nn = kernels::knn(minority, minority, k, true);
    const auto rows = static_cast<std::size_t>(minority.rows());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t x = uniform_index(rng, rows);
        const std::size_t neighbour = nn[x][uniform_index(rng, nn[x].size())];
        interpolate_into(out, static_cast<Eigen::Index>(i), minority, x, neighbour, lambda_draw(rng, fixed_lambda));
    }
    return out;
}

std::vector<std::size_t> largest_remainder(const std::vector<double>& weights, std::size_t n) {
    std::vector<std::size_t> quota(weights.size(), 0);
    if (weights.empty() || n == 0) return quota;
    double total = 0.0;
    for (double w : weights) total += std::max(0.0, w);
    std::vector<double> share(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        share[i] = total > 0.0 ? std::max(0.0, weights[i]) / total * static_cast<double>(n)
                               : static_cast<double>(n) / static_cast<double>(weights.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < share.size(); ++i) {
        quota[i] = static_cast<std::size_t>(std::floor(share[i]));
        assigned += quota[i];
    }
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return share[a] - std::floor(share[a]) > share[b] - std::floor(share[b]);
    });
    for (std::size_t i = 0; assigned < n; i = (i + 1) % order.size(), ++assigned) ++quota[order[i]];
    return quota;
}

std::vector<std::size_t> danger_rows(const Matrix& minority, const Matrix& majority, std::size_t m) {
    const Matrix all = stack(minority, majority);
    const std::size_t neighbours = std::min<std::size_t>(m, static_cast<std::size_t>(all.rows()) - 1);
    const auto nn = kernels::knn(minority, all, neighbours, true);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < nn.size(); ++i) {
        std::size_t maj = 0;
        for (std::size_t j : nn[i]) maj += j >= static_cast<std::size_t>(minority.rows());
        if (2 * maj >= neighbours && maj < neighbours) out.push_back(i);
    }
    return out;
}

Matrix borderline_smote(const Matrix& minority, const Matrix& majority, std::size_t n, const Params& params, Rng& rng) {
    Matrix out(static_cast<Eigen::Index>(n), minority.cols());
    if (n == 0) return out;
    require_minority(minority, params.k, "borderline_smote");
    const auto danger = danger_rows(minority, majority, params.m);
    if (danger.empty()) throw EmptyGenerationRegion("borderline_smote: no minority row is in danger");
    const auto nn = kernels::knn(minority, minority, params.k, true);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t x = danger[uniform_index(rng, danger.size())];
        const std::size_t neighbour = nn[x][uniform_index(rng, nn[x].size())];
        interpolate_into(out, static_cast<Eigen::Index>(i), minority, x, neighbour, lambda_draw(rng, params.fixed_lambda));
    }
    return out;
}

Matrix adasyn(const Matrix& minority, const Matrix& majority, std::size_t n, const Params& params, Rng& rng) {
    Matrix out(static_cast<Eigen::Index>(n), minority.cols());
    if (n == 0) return out;
    require_minority(minority, params.k, "adasyn");
    const Matrix all = stack(minority, majority);
    const auto around = kernels::knn(minority, all, params.k, true);
    std::vector<double> ratio(around.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < around.size(); ++i) {
        std::size_t maj = 0;
        for (std::size_t j : around[i]) maj += j >= static_cast<std::size_t>(minority.rows());
        ratio[i] = static_cast<double>(maj) / static_cast<double>(around[i].size());
        total += ratio[i];
    }
    if (total <= 0.0) throw EmptyGenerationRegion("adasyn: no minority row has majority neighbours");
    const auto quota = largest_remainder(ratio, n);
    const auto nn = kernels::knn(minority, minority, params.k, true);
    Eigen::Index at = 0;
    for (std::size_t x = 0; x < quota.size(); ++x)
        for (std::size_t q = 0; q < quota[x]; ++q) {
            const std::size_t neighbour = nn[x][uniform_index(rng, nn[x].size())];
            interpolate_into(out, at++, minority, x, neighbour, lambda_draw(rng, params.fixed_lambda));
        }
    return out;
}

Kmeans kmeans(const Matrix& rows, std::size_t k, int iterations, Rng& rng) {
    const auto n = static_cast<std::size_t>(rows.rows());
    if (n == 0 || k == 0) throw ConfigError("kmeans needs rows and at least one cluster");
    k = std::min(k, n);
    Kmeans km;
    km.centers.resize(static_cast<Eigen::Index>(k), rows.cols());
    km.centers.row(0) = rows.row(static_cast<Eigen::Index>(uniform_index(rng, n)));
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < k; ++c) {
        const Matrix d = kernels::pairwise_sq_distances(rows, km.centers.middleRows(static_cast<Eigen::Index>(c - 1), 1));
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            best[i] = std::min(best[i], d(static_cast<Eigen::Index>(i), 0));
            total += best[i];
        }
        std::size_t pick = uniform_index(rng, n);
        if (total > 0.0) {
            double target = uniform01(rng) * total;
            for (std::size_t i = 0; i < n; ++i) {
                target -= best[i];
                if (target < 0.0 || i + 1 == n) {
                    pick = i;
                    break;
                }
            }
        }
        km.centers.row(static_cast<Eigen::Index>(c)) = rows.row(static_cast<Eigen::Index>(pick));
    }
    km.assignment.assign(n, 0);
    for (int it = 0; it < std::max(1, iterations); ++it) {
        const auto nearest = kernels::knn(rows, km.centers, 1, false);
        bool changed = it == 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (km.assignment[i] != nearest[i][0]) changed = true;
            km.assignment[i] = nearest[i][0];
        }
        if (!changed) break;
        Matrix sums = Matrix::Zero(km.centers.rows(), km.centers.cols());
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            sums.row(static_cast<Eigen::Index>(km.assignment[i])) += rows.row(static_cast<Eigen::Index>(i));
            ++counts[km.assignment[i]];
        }
        for (std::size_t c = 0; c < k; ++c)
            if (counts[c] > 0) km.centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
    }
    return km;
}

Matrix kmeans_smote(const Matrix& minority, const Matrix& majority, std::size_t n, const Params& params, Rng& rng) {
    Matrix out(static_cast<Eigen::Index>(n), minority.cols());
    if (n == 0) return out;
    const Matrix all = stack(minority, majority);
    const Kmeans km = kmeans(all, params.clusters, params.kmeans_iterations, rng);
    const auto n_min = static_cast<std::size_t>(minority.rows());

    std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(km.centers.rows()));
    std::vector<std::size_t> sizes(members.size(), 0);
    for (std::size_t i = 0; i < km.assignment.size(); ++i) {
        ++sizes[km.assignment[i]];
        if (i < n_min) members[km.assignment[i]].push_back(i);
    }
    std::vector<std::size_t> eligible;
    std::vector<double> sparsity;
    for (std::size_t c = 0; c < members.size(); ++c) {
        const std::size_t mc = members[c].size();
        if (mc < 2 || static_cast<double>(mc) / static_cast<double>(sizes[c]) <= params.cluster_threshold) continue;
        double dist = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < mc; ++a)
            for (std::size_t b = a + 1; b < mc; ++b, ++pairs)
                dist += (minority.row(static_cast<Eigen::Index>(members[c][a])) - minority.row(static_cast<Eigen::Index>(members[c][b]))).norm();
        const double mean_dist = std::max(dist / static_cast<double>(pairs), 1e-12);
        // density = count / mean_dist^exponent; weight by its inverse.
        sparsity.push_back(std::pow(mean_dist, params.sparsity_exponent) / static_cast<double>(mc));
        eligible.push_back(c);
    }
    if (eligible.empty()) throw EmptyGenerationRegion("kmeans_smote: no cluster is dominated by the minority class");
    const auto quota = largest_remainder(sparsity, n);
    Eigen::Index at = 0;
    for (std::size_t e = 0; e < eligible.size(); ++e) {
        if (quota[e] == 0) continue;
        const auto& rows_idx = members[eligible[e]];
        Matrix cluster(static_cast<Eigen::Index>(rows_idx.size()), minority.cols());
        for (std::size_t i = 0; i < rows_idx.size(); ++i) cluster.row(static_cast<Eigen::Index>(i)) = minority.row(static_cast<Eigen::Index>(rows_idx[i]));
        const std::size_t k = std::min(params.k, rows_idx.size() - 1);
        out.middleRows(at, static_cast<Eigen::Index>(quota[e])) = smote(cluster, quota[e], k, rng, params.fixed_lambda);
        at += static_cast<Eigen::Index>(quota[e]);
    }
    return out;
}

Matrix smote_nc(const Matrix& minority, std::size_t n, const Metadata& meta, const Params& params, Rng& rng) {
    if (static_cast<std::size_t>(minority.cols()) != total_width(meta)) throw ShapeError("smote_nc: metadata width mismatch");
    Matrix out(static_cast<Eigen::Index>(n), minority.cols());
    if (n == 0) return out;
    require_minority(minority, params.k, "smote_nc");
    const auto offsets = variable_offsets(meta);

    std::vector<double> stds;
    for (std::size_t v = 0; v < meta.size(); ++v) {
        if (meta[v].kind != VariableKind::Numerical) continue;
        const auto col = minority.col(static_cast<Eigen::Index>(offsets[v]));
        const double mean = col.mean();
        stds.push_back(std::sqrt((col.array() - mean).square().mean()));
    }
    double median = 1.0;
    if (!stds.empty()) {
        std::sort(stds.begin(), stds.end());
        const std::size_t h = stds.size() / 2;
        median = stds.size() % 2 ? stds[h] : 0.5 * (stds[h - 1] + stds[h]);
    }
    // A categorical mismatch then adds median^2 to the squared distance.
    Matrix scaled = minority;
    for (std::size_t v = 0; v < meta.size(); ++v) {
        const auto at = static_cast<Eigen::Index>(offsets[v]), w = static_cast<Eigen::Index>(meta[v].width);
        if (meta[v].kind == VariableKind::Categorical) scaled.middleCols(at, w) *= median / std::sqrt(2.0);
        else if (meta[v].kind == VariableKind::Binary) scaled.middleCols(at, w) *= median;
    }
    const auto nn = kernels::knn(scaled, scaled, params.k, true);
    const auto rows = static_cast<std::size_t>(minority.rows());
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const std::size_t x = uniform_index(rng, rows);
        const std::size_t neighbour = nn[x][uniform_index(rng, nn[x].size())];
        const double lambda = lambda_draw(rng, params.fixed_lambda);
        for (std::size_t v = 0; v < meta.size(); ++v) {
            const auto at = static_cast<Eigen::Index>(offsets[v]), w = static_cast<Eigen::Index>(meta[v].width);
            if (meta[v].kind == VariableKind::Numerical) {
                const double a = minority(static_cast<Eigen::Index>(x), at), b = minority(static_cast<Eigen::Index>(neighbour), at);
                out(r, at) = a + lambda * (b - a);
                continue;
            }
            // Mode over the neighbourhood of x; ties to the lowest category.
            const std::size_t choices = meta[v].kind == VariableKind::Categorical ? meta[v].width : 2;
            std::vector<std::size_t> votes(choices, 0);
            for (std::size_t j : nn[x]) {
                const auto row = minority.row(static_cast<Eigen::Index>(j)).segment(at, w);
                if (meta[v].kind == VariableKind::Categorical) {
                    Eigen::Index best = 0;
                    row.maxCoeff(&best);
                    ++votes[static_cast<std::size_t>(best)];
                } else {
                    ++votes[row(0) >= 0.5 ? 1 : 0];
                }
            }
            const auto mode = static_cast<Eigen::Index>(std::max_element(votes.begin(), votes.end()) - votes.begin());
            if (meta[v].kind == VariableKind::Categorical) {
                out.row(r).segment(at, w).setZero();
                out(r, at + mode) = 1.0;
            } else {
                out(r, at) = static_cast<double>(mode);
            }
        }
    }
    return out;
}

Oversampled oversample(Method method, const Dataset& data, std::size_t n, const Params& params, Rng& rng) {
    const Matrix minority = rows_with_label(data, 1);
    Oversampled result;
    if (n == 0) {
        result.rows = Matrix(0, data.features.cols());
        return result;
    }
    try {
        switch (method) {
            case Method::RandomOver: result.rows = random_oversample(minority, n, rng); break;
            case Method::Smote: result.rows = smote(minority, n, params.k, rng, params.fixed_lambda); break;
            case Method::SmoteNc: result.rows = smote_nc(minority, n, data.meta, params, rng); break;
            case Method::BorderlineSmote: result.rows = borderline_smote(minority, rows_with_label(data, 0), n, params, rng); break;
            case Method::Adasyn: result.rows = adasyn(minority, rows_with_label(data, 0), n, params, rng); break;
            case Method::KmeansSmote: result.rows = kmeans_smote(minority, rows_with_label(data, 0), n, params, rng); break;
        }
    } catch (const EmptyGenerationRegion& e) {
        result.fell_back = true;
        result.warning = std::string(e.what()) + "; falling back to smote";
        result.rows = smote(minority, n, params.k, rng, params.fixed_lambda);
    }
    return result;
}

Dataset resample(const Dataset& train, double usr, double osr, const Synthesizer& synthesize, Rng& under_rng,
                 Rng& over_rng) {
    if (osr < usr - 1e-12) throw RatioError("osr " + std::to_string(osr) + " is below usr " + std::to_string(usr));
    if (osr > 1.0 + 1e-12) throw RatioError("osr " + std::to_string(osr) + " exceeds 1");
    Dataset out = random_undersample(train, usr, under_rng);
    const std::size_t n = required_synthetic(out.count(0), out.count(1), osr);
    if (n == 0) return out;
    const Matrix rows = synthesize(out, n, over_rng);
    if (static_cast<std::size_t>(rows.rows()) != n || rows.cols() != out.features.cols())
        throw ShapeError("synthesizer returned " + std::to_string(rows.rows()) + "x" + std::to_string(rows.cols()) +
                         ", expected " + std::to_string(n) + "x" + std::to_string(out.features.cols()));
    out.append(rows, 1);
    return out;
}

}  // namespace tabsynth::resample
