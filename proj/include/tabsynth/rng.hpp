#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace tabsynth {

using Rng = std::mt19937_64;

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Order-sensitive seed derivation: seed_mix(seed_mix(a, b), c) != seed_mix(seed_mix(a, c), b).
inline std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t value) {
    return splitmix64(seed ^ splitmix64(value + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t seed_mix(std::uint64_t seed, std::string_view text) {
    return seed_mix(seed, fnv1a(text));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

inline Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

inline Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

}  // namespace tabsynth
