#pragma once

// Fixtures and oracles shared by the unit tests and the acceptance runner.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tabsynth/ad.hpp"
#include "tabsynth/models.hpp"
#include "tabsynth/tabular.hpp"

namespace tabsynth::testing {

// Recovery fixture: a uniform 3-way categorical, a binary with rate 0.7 and two
// numericals uniform on [m - 0.2, m + 0.2] for m = 0.3 and 0.7. Every row is positive.
struct MixedTargets {
    std::array<double, 3> categories{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    double binary_rate = 0.7;
    std::array<double, 2> numerical_means{0.3, 0.7};
};
Dataset mixed_dataset(std::size_t n, std::uint64_t seed);

// Per-variable marginals of discretized rows laid out like mixed_dataset.
MixedTargets mixed_marginals(const Matrix& rows);

// Two overlapping Gaussian classes in 2 informative dimensions (class means
// `separation` apart per dimension) plus noise dimensions, a binary and a
// categorical weakly tied to the label.
Dataset overlapping_clusters(std::size_t n, double minority_fraction, std::uint64_t seed, double separation = 1.6);

// Small labelled mixed dataset for quick unit tests.
Dataset small_mixed(std::size_t n, double positive_fraction, std::uint64_t seed);

// Largest norm-wise relative error ||analytic - numeric|| / (||analytic|| + ||numeric||)
// over the parameter arrays (denominator floored at 1e-4), using central
// differences of step eps. `loss` must rebuild its graph from the current
// parameter values on every call.
double gradient_rel_error(const std::function<ad::Var()>& loss, std::vector<ad::Var> params, double eps = 1e-5);

// Fresh empty directory under the system temp directory.
std::filesystem::path scratch_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

// Parses text as XML; returns an empty string on success or the parser message.
std::string xml_error(const std::string& text);

}  // namespace tabsynth::testing
