#include "tabsynth/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace tabsynth::svg {

namespace {

struct Rgb {
    double r, g, b;
};

// Sampled viridis anchors; linear interpolation in between.
constexpr std::array<Rgb, 6> kScale{{{68, 1, 84}, {65, 68, 135}, {42, 120, 142}, {34, 168, 132}, {122, 209, 81}, {253, 231, 37}}};

std::string colour(double t) {
    t = std::clamp(t, 0.0, 1.0) * static_cast<double>(kScale.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), kScale.size() - 2);
    const double f = t - static_cast<double>(i);
    const Rgb& a = kScale[i];
    const Rgb& b = kScale[i + 1];
    auto mix = [&](double x, double y) { return static_cast<int>(std::lround(x + f * (y - x))); };
    return fmt::format("#{:02x}{:02x}{:02x}", mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b));
}

constexpr std::array<const char*, 3> kTagColour{"#4c72b0", "#dd8452", "#55a868"};

std::string header(double width, double height, const std::string& title) {
    return fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
        "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\" font-size=\"11\">\n"
        "<title>{2}</title>\n"
        "<rect x=\"0\" y=\"0\" width=\"{0:.0f}\" height=\"{1:.0f}\" fill=\"#ffffff\"/>\n"
        "<text x=\"{3:.1f}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{2}</text>\n",
        width, height, escape(title), width / 2.0);
}

std::string ratio_label(double x) { return fmt::format("{:.3g}", x); }

std::string legend(double x, double y) {
    std::string out;
    for (std::size_t t = 0; t < 3; ++t) {
        out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", x,
                           y + 16.0 * static_cast<double>(t), kTagColour[t]);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", x + 14.0, y + 9.0 + 16.0 * static_cast<double>(t),
                           viz::to_string(static_cast<viz::Tag>(t)));
    }
    return out;
}

}  // namespace

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string figure_name(const std::string& dataset, const std::string& method, const std::string& sampling,
                        const std::string& kind) {
    std::string name = dataset + "_" + method + "_" + (sampling.empty() ? "none" : sampling) + "_" + kind;
    for (char& c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '-';
    return name + ".svg";
}

Heatmap heatmap_for(const std::vector<protocol::CellSummary>& cells, const std::string& method,
                    const std::string& sampling, const std::string& title) {
    std::set<double> usr, osr;
    for (const auto& c : cells)
        if (c.method == method && c.sampling == sampling) {
            usr.insert(c.usr);
            osr.insert(c.osr);
        }
    Heatmap map;
    map.title = title;
    map.usr.assign(usr.begin(), usr.end());
    map.osr.assign(osr.begin(), osr.end());
    map.values.assign(map.usr.size(), std::vector<double>(map.osr.size(), std::numeric_limits<double>::quiet_NaN()));
    for (const auto& c : cells) {
        if (c.method != method || c.sampling != sampling) continue;
        const auto i = static_cast<std::size_t>(std::lower_bound(map.usr.begin(), map.usr.end(), c.usr) - map.usr.begin());
        const auto j = static_cast<std::size_t>(std::lower_bound(map.osr.begin(), map.osr.end(), c.osr) - map.osr.begin());
        map.values[i][j] = c.test_mean;
    }
    return map;
}

std::string heatmap(const Heatmap& map) {
    const double cell = 44.0, left = 70.0, top = 40.0;
    const double width = left + cell * static_cast<double>(map.osr.size()) + 90.0;
    const double height = top + cell * static_cast<double>(map.usr.size()) + 50.0;
    std::string out = header(width, height, map.title);
    const double span = map.vmax > map.vmin ? map.vmax - map.vmin : 1.0;
    for (std::size_t i = 0; i < map.usr.size(); ++i) {
        const double y = top + cell * static_cast<double>(i);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", left - 6.0, y + cell / 2 + 4,
                           ratio_label(map.usr[i]));
        for (std::size_t j = 0; j < map.osr.size(); ++j) {
            if (map.masked(i, j)) continue;
            const double x = left + cell * static_cast<double>(j);
            const double v = map.values[i][j];
            if (std::isnan(v)) {
                out += fmt::format("<rect class=\"missing\" x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" "
                                   "fill=\"#dddddd\" stroke=\"#ffffff\"/>\n",
                                   x, y, cell, cell);
                continue;
            }
            out += fmt::format("<rect class=\"cell\" x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\" "
                               "stroke=\"#ffffff\" data-usr=\"{}\" data-osr=\"{}\" data-value=\"{:.6f}\"/>\n",
                               x, y, cell, cell, colour((v - map.vmin) / span), ratio_label(map.usr[i]),
                               ratio_label(map.osr[j]), v);
            const bool dark = (v - map.vmin) / span < 0.6;
            out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-size=\"9\" fill=\"{}\">{:.3f}</text>\n",
                               x + cell / 2, y + cell / 2 + 3, dark ? "#ffffff" : "#000000", v);
        }
    }
    for (std::size_t j = 0; j < map.osr.size(); ++j)
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                           left + cell * (static_cast<double>(j) + 0.5), top + cell * static_cast<double>(map.usr.size()) + 16,
                           ratio_label(map.osr[j]));
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">OSR</text>\n",
                       left + cell * static_cast<double>(map.osr.size()) / 2, height - 10);
    out += fmt::format("<text x=\"14\" y=\"{:.1f}\" transform=\"rotate(-90 14 {:.1f})\" text-anchor=\"middle\">USR</text>\n",
                       top + cell * static_cast<double>(map.usr.size()) / 2, top + cell * static_cast<double>(map.usr.size()) / 2);
    // Colour bar.
    const double bar_x = width - 70.0, bar_h = std::max(60.0, cell * static_cast<double>(map.usr.size()));
    for (int k = 0; k < 20; ++k) {
        const double t = 1.0 - (k + 0.5) / 20.0;
        out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"14\" height=\"{:.2f}\" fill=\"{}\"/>\n", bar_x,
                           top + bar_h * k / 20.0, bar_h / 20.0 + 0.2, colour(t));
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{:.2f}</text>\n", bar_x + 18, top + 8, map.vmax);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{:.2f}</text>\n", bar_x + 18, top + bar_h, map.vmin);
    out += "</svg>\n";
    return out;
}

std::string scatter(const Matrix& coordinates, const std::vector<viz::Tag>& tags, const std::string& title) {
    if (coordinates.cols() != 2 || static_cast<std::size_t>(coordinates.rows()) != tags.size())
        throw ShapeError("scatter: expected n x 2 coordinates and n tags");
    const double size = 420.0, margin = 30.0, top = 30.0;
    std::string out = header(size + 110.0, size + top + margin, title);
    double lo_x = 0, hi_x = 1, lo_y = 0, hi_y = 1;
    if (coordinates.rows() > 0) {
        lo_x = coordinates.col(0).minCoeff(), hi_x = coordinates.col(0).maxCoeff();
        lo_y = coordinates.col(1).minCoeff(), hi_y = coordinates.col(1).maxCoeff();
    }
    const double sx = hi_x > lo_x ? (size - 2 * margin) / (hi_x - lo_x) : 1.0;
    const double sy = hi_y > lo_y ? (size - 2 * margin) / (hi_y - lo_y) : 1.0;
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"#999999\"/>\n",
                       margin / 2, top, size - margin, size - margin);
    // Synthetic points first so real ones stay visible.
    for (int pass : {2, 0, 1})
        for (Eigen::Index i = 0; i < coordinates.rows(); ++i) {
            const int tag = static_cast<int>(tags[static_cast<std::size_t>(i)]);
            if (tag != pass) continue;
            const double x = margin + (coordinates(i, 0) - lo_x) * sx;
            const double y = top + (size - 2 * margin) - (coordinates(i, 1) - lo_y) * sy + margin / 2;
            out += fmt::format("<circle class=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.75\"/>\n",
                               viz::to_string(tags[static_cast<std::size_t>(i)]), x, y, kTagColour[static_cast<std::size_t>(tag)]);
        }
    out += legend(size + 4.0, top + 10.0);
    out += "</svg>\n";
    return out;
}

std::string som_pies(const viz::SomGrid& som, const std::string& title) {
    const double cell = 40.0, left = 20.0, top = 34.0, radius = 17.0;
    const double width = left + cell * static_cast<double>(som.grid_cols) + 110.0;
    const double height = top + cell * static_cast<double>(som.grid_rows) + 20.0;
    std::string out = header(width, height, title);
    for (std::size_t u = 0; u < som.units(); ++u) {
        const std::size_t r = u / som.grid_cols, c = u % som.grid_cols;
        const double cx = left + cell * (static_cast<double>(c) + 0.5), cy = top + cell * (static_cast<double>(r) + 0.5);
        const auto& counts = som.counts.at(u);
        const std::size_t total = counts[0] + counts[1] + counts[2];
        out += fmt::format("<g class=\"pie\" data-unit=\"{}\" data-total=\"{}\">\n", u, total);
        out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.1f}\" fill=\"#f4f4f4\" stroke=\"#cccccc\"/>\n", cx, cy,
                           radius);
        double start = 0.0;
        for (std::size_t t = 0; t < 3 && total > 0; ++t) {
            if (counts[t] == 0) continue;
            const double angle = 360.0 * static_cast<double>(counts[t]) / static_cast<double>(total);
            const char* tag = viz::to_string(static_cast<viz::Tag>(t));
            if (counts[t] == total) {
                out += fmt::format("<circle class=\"wedge {}\" data-angle=\"{:.6f}\" data-count=\"{}\" cx=\"{:.2f}\" "
                                   "cy=\"{:.2f}\" r=\"{:.1f}\" fill=\"{}\"/>\n",
                                   tag, angle, counts[t], cx, cy, radius, kTagColour[t]);
            } else {
                const double a0 = (start - 90.0) * std::numbers::pi / 180.0;
                const double a1 = (start + angle - 90.0) * std::numbers::pi / 180.0;
                out += fmt::format("<path class=\"wedge {}\" data-angle=\"{:.6f}\" data-count=\"{}\" "
                                   "d=\"M {:.2f} {:.2f} L {:.2f} {:.2f} A {:.1f} {:.1f} 0 {} 1 {:.2f} {:.2f} Z\" fill=\"{}\"/>\n",
                                   tag, angle, counts[t], cx, cy, cx + radius * std::cos(a0), cy + radius * std::sin(a0),
                                   radius, radius, angle > 180.0 ? 1 : 0, cx + radius * std::cos(a1),
                                   cy + radius * std::sin(a1), kTagColour[t]);
            }
            start += angle;
        }
        out += "</g>\n";
    }
    out += legend(width - 100.0, top + 10.0);
    out += "</svg>\n";
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace tabsynth::svg
