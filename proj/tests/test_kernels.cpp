#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <numeric>

#include "tabsynth/kernels.hpp"

using namespace tabsynth;
using kernels::Exec;

namespace {

bool same_bits(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("pairwise distances: serial and parallel agree bit for bit") {
    Rng rng(1);
    const Matrix a = normal_matrix(97, 7, rng), b = normal_matrix(61, 7, rng);
    const Matrix s = kernels::pairwise_sq_distances(a, b, Exec::Serial);
    const Matrix p = kernels::pairwise_sq_distances(a, b, Exec::Parallel);
    CHECK(same_bits(s, p));
    CHECK(s(3, 5) == doctest::Approx((a.row(3) - b.row(5)).squaredNorm()));
}

TEST_CASE("knn: ties go to the lower index and self is excluded") {
    const Matrix pts{{0.0}, {1.0}, {-1.0}, {2.0}};
    const auto nn = kernels::knn(pts, pts, 2, true, Exec::Serial);
    CHECK(nn[0] == std::vector<std::size_t>{1, 2});
    CHECK(nn[3] == std::vector<std::size_t>{1, 0});
    Rng rng(2);
    const Matrix q = normal_matrix(80, 4, rng);
    CHECK(kernels::knn(q, q, 5, true, Exec::Serial) == kernels::knn(q, q, 5, true, Exec::Parallel));
}

TEST_CASE("t-SNE gradient: serial and parallel agree bit for bit") {
    Rng rng(3);
    const Eigen::Index n = 60;
    Matrix p = uniform_matrix(n, n, rng);
    p = (p + p.transpose()).eval();
    p.diagonal().setZero();
    p /= p.sum();
    const Matrix y = normal_matrix(n, 2, rng);
    Matrix gs, gp;
    const double ks = kernels::tsne_gradient(p, y, 4.0, gs, Exec::Serial);
    const double kp = kernels::tsne_gradient(p, y, 4.0, gp, Exec::Parallel);
    CHECK(ks == kp);
    CHECK(same_bits(gs, gp));

    // Finite-difference check of the unexaggerated gradient.
    Matrix g;
    kernels::tsne_gradient(p, y, 1.0, g, Exec::Serial);
    Matrix scratch;
    Matrix y2 = y;
    const double eps = 1e-6;
    y2(7, 1) += eps;
    const double up = kernels::tsne_gradient(p, y2, 1.0, scratch, Exec::Serial);
    y2(7, 1) -= 2 * eps;
    const double down = kernels::tsne_gradient(p, y2, 1.0, scratch, Exec::Serial);
    CHECK(g(7, 1) == doctest::Approx((up - down) / (2 * eps)).epsilon(1e-5));
}

TEST_CASE("best splits: serial and parallel agree") {
    Rng rng(4);
    const Eigen::Index n = 300;
    const Matrix x = uniform_matrix(n, 6, rng);
    std::vector<std::vector<std::uint32_t>> sorted(6);
    for (Eigen::Index f = 0; f < 6; ++f) {
        sorted[static_cast<std::size_t>(f)].resize(static_cast<std::size_t>(n));
        std::iota(sorted[static_cast<std::size_t>(f)].begin(), sorted[static_cast<std::size_t>(f)].end(), 0u);
        std::stable_sort(sorted[static_cast<std::size_t>(f)].begin(), sorted[static_cast<std::size_t>(f)].end(),
                         [&](auto a, auto b) { return x(a, f) < x(b, f); });
    }
    std::vector<int> node(static_cast<std::size_t>(n));
    std::vector<double> g(static_cast<std::size_t>(n)), h(static_cast<std::size_t>(n), 0.25);
    std::vector<kernels::NodeTotals> totals(2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto u = static_cast<std::size_t>(i);
        node[u] = x(i, 0) < 0.5 ? 0 : 1;
        g[u] = x(i, 3) > 0.6 ? -0.5 : 0.5;
        totals[static_cast<std::size_t>(node[u])].g += g[u];
        totals[static_cast<std::size_t>(node[u])].h += h[u];
    }
    const auto s = kernels::best_splits(x, sorted, node, g, h, totals, 1.0, 1.0, Exec::Serial);
    const auto p = kernels::best_splits(x, sorted, node, g, h, totals, 1.0, 1.0, Exec::Parallel);
    REQUIRE(s.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(s[k].feature == p[k].feature);
        CHECK(s[k].threshold == p[k].threshold);
        CHECK(s[k].gain == p[k].gain);
        // The signal lives in feature 3 around 0.6.
        CHECK(s[k].feature == 3);
        CHECK(s[k].threshold == doctest::Approx(0.6).epsilon(0.05));
    }
}

TEST_CASE("default execution mode is switchable") {
    const Exec before = kernels::default_exec();
    kernels::set_default_exec(Exec::Serial);
    CHECK(kernels::default_exec() == Exec::Serial);
    kernels::set_default_exec(before);
}

}  // TEST_SUITE
