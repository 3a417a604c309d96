#include "support.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

namespace tabsynth::testing {

Dataset mixed_dataset(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Dataset data;
    data.name = "mixed";
    data.meta = {VariableMeta::categorical("colour", {"red", "green", "blue"}), VariableMeta::binary("flag"),
                 VariableMeta::numerical("low"), VariableMeta::numerical("high")};
    data.features = Matrix::Zero(static_cast<Eigen::Index>(n), 6);
    data.labels.assign(n, 1);
    const MixedTargets t;
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        data.features(r, static_cast<Eigen::Index>(uniform_index(rng, 3))) = 1.0;
        data.features(r, 3) = uniform01(rng) < t.binary_rate ? 1.0 : 0.0;
        data.features(r, 4) = t.numerical_means[0] - 0.2 + 0.4 * uniform01(rng);
        data.features(r, 5) = t.numerical_means[1] - 0.2 + 0.4 * uniform01(rng);
    }
    return data;
}

MixedTargets mixed_marginals(const Matrix& rows) {
    MixedTargets m;
    const double n = static_cast<double>(rows.rows());
    for (int c = 0; c < 3; ++c) m.categories[static_cast<std::size_t>(c)] = rows.col(c).sum() / n;
    m.binary_rate = rows.col(3).sum() / n;
    m.numerical_means = {rows.col(4).sum() / n, rows.col(5).sum() / n};
    return m;
}

Dataset overlapping_clusters(std::size_t n, double minority_fraction, std::uint64_t seed, double separation) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n_pos = static_cast<std::size_t>(std::lround(minority_fraction * static_cast<double>(n)));
    Dataset data;
    data.name = "overlap";
    data.meta = {VariableMeta::numerical("x1"), VariableMeta::numerical("x2"), VariableMeta::numerical("x3"),
                 VariableMeta::numerical("x4"), VariableMeta::binary("flag"),
                 VariableMeta::categorical("group", {"a", "b", "c"})};
    const Eigen::Index width = 8;
    Matrix raw(static_cast<Eigen::Index>(n), width);
    raw.setZero();
    data.labels.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const bool pos = i < n_pos;
        data.labels[i] = pos ? 1 : 0;
        const double shift = pos ? separation : 0.0;
        raw(r, 0) = normal(rng) + shift;
        raw(r, 1) = normal(rng) + shift;
        raw(r, 2) = normal(rng);
        raw(r, 3) = normal(rng);
        raw(r, 4) = uniform01(rng) < (pos ? 0.6 : 0.4) ? 1.0 : 0.0;
        const double u = uniform01(rng);
        const int g = pos ? (u < 0.5 ? 0 : u < 0.8 ? 1 : 2) : (u < 0.3 ? 0 : u < 0.65 ? 1 : 2);
        raw(r, 5 + g) = 1.0;
    }
    // Min-max scale the numericals as preprocessing would.
    for (Eigen::Index c = 0; c < 4; ++c) {
        const double lo = raw.col(c).minCoeff(), hi = raw.col(c).maxCoeff();
        raw.col(c) = (raw.col(c).array() - lo) / (hi - lo);
    }
    // Interleave classes deterministically so positives are not a prefix.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    data.features.resize(static_cast<Eigen::Index>(n), width);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        data.features.row(static_cast<Eigen::Index>(i)) = raw.row(static_cast<Eigen::Index>(order[i]));
        labels[i] = data.labels[order[i]];
    }
    data.labels = labels;
    return data;
}

Dataset small_mixed(std::size_t n, double positive_fraction, std::uint64_t seed) {
    Rng rng(seed);
    Dataset data;
    data.name = "small";
    data.meta = {VariableMeta::categorical("c", {"a", "b", "c"}), VariableMeta::binary("b"), VariableMeta::numerical("x"),
                 VariableMeta::numerical("y")};
    data.features = Matrix::Zero(static_cast<Eigen::Index>(n), 6);
    data.labels.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const bool pos = uniform01(rng) < positive_fraction || i == 0 || i == 1;
        data.labels[i] = pos ? 1 : 0;
        data.features(r, static_cast<Eigen::Index>(uniform_index(rng, 3))) = 1.0;
        data.features(r, 3) = uniform01(rng) < (pos ? 0.7 : 0.3) ? 1.0 : 0.0;
        data.features(r, 4) = std::clamp((pos ? 0.65 : 0.4) + 0.15 * (uniform01(rng) - 0.5) * 2.0, 0.0, 1.0);
        data.features(r, 5) = uniform01(rng);
    }
    return data;
}

double gradient_rel_error(const std::function<ad::Var()>& loss, std::vector<ad::Var> params, double eps) {
    const ad::Var out = loss();
    const auto grads = ad::grad(out, params);
    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& value = params[p].mutable_value();
        Matrix numeric(value.rows(), value.cols());
        for (Eigen::Index i = 0; i < value.size(); ++i) {
            const double keep = value.data()[i];
            value.data()[i] = keep + eps;
            const double up = loss().scalar();
            value.data()[i] = keep - eps;
            const double down = loss().scalar();
            value.data()[i] = keep;
            numeric.data()[i] = (up - down) / (2.0 * eps);
        }
        const Matrix& analytic = grads[p].value();
        // The floor lets gradients that vanish identically compare by absolute error.
        const double denom = std::max(analytic.norm() + numeric.norm(), 1e-4);
        worst = std::max(worst, (analytic - numeric).norm() / denom);
    }
    return worst;
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("tabsynth-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string xml_error(const std::string& text) {
    std::istringstream in(text);
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_xml(in, tree);
    } catch (const boost::property_tree::xml_parser_error& e) {
        return e.what();
    }
    return {};
}

}  // namespace tabsynth::testing
