#pragma once

// SVG 1.1 figures and file emission. Output bytes depend only on the inputs.

#include <filesystem>
#include <string>
#include <vector>

#include "tabsynth/protocol.hpp"
#include "tabsynth/viz.hpp"

namespace tabsynth::svg {

// Mean test f1 over a USR x OSR grid; cells with osr < usr are masked out.
struct Heatmap {
    std::string title;
    std::vector<double> usr;
    std::vector<double> osr;
    std::vector<std::vector<double>> values;  // [usr][osr], NaN where no value exists
    double vmin = 0.0;
    double vmax = 1.0;

    bool masked(std::size_t i, std::size_t j) const { return osr[j] < usr[i] - 1e-12; }
};

// Cells of one (method, sampling), values taken verbatim from the cell summaries.
Heatmap heatmap_for(const std::vector<protocol::CellSummary>& cells, const std::string& method,
                    const std::string& sampling, const std::string& title);

std::string heatmap(const Heatmap& map);
// Points coloured by tag.
std::string scatter(const Matrix& coordinates, const std::vector<viz::Tag>& tags, const std::string& title);
// One pie glyph per SOM unit showing its negative / positive / synthetic shares.
std::string som_pies(const viz::SomGrid& som, const std::string& title);

std::string escape(const std::string& text);
// "<dataset>_<method>_<sampling>_<kind>.svg" with unsafe characters replaced.
std::string figure_name(const std::string& dataset, const std::string& method, const std::string& sampling,
                        const std::string& kind);

// Writes text to path; IoError names the path on failure.
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace tabsynth::svg
