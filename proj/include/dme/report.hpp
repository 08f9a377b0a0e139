#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "archive.hpp"
#include "format.hpp"
#include "stats.hpp"

namespace dme {

struct HeatmapOptions {
    std::size_t raster = 240;  // assignment-grid resolution per axis
    std::size_t scale = 2;     // SVG pixels per grid cell
    std::string title;
    // Stored fitness is maximization-oriented; setting this labels the
    // legend with the negated values so minimized objectives read
    // naturally. Colors are unaffected (bright = better either way).
    bool negate_fitness_labels = false;
};

namespace detail {

inline std::array<int, 3> viridis(double t) {
    static constexpr std::array<std::array<double, 3>, 5> anchors = {{
        {68.0, 1.0, 84.0},
        {59.0, 82.0, 139.0},
        {33.0, 145.0, 140.0},
        {94.0, 201.0, 98.0},
        {253.0, 231.0, 37.0},
    }};
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * static_cast<double>(anchors.size() - 1);
    const auto lo = std::min<std::size_t>(anchors.size() - 2, static_cast<std::size_t>(pos));
    const double frac = pos - static_cast<double>(lo);
    std::array<int, 3> rgb{};
    for (std::size_t c = 0; c < 3; ++c)
        rgb[c] = static_cast<int>(anchors[lo][c] + frac * (anchors[lo + 1][c] - anchors[lo][c]) + 0.5);
    return rgb;
}

inline std::string hex_color(const std::array<int, 3>& rgb) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
    return buf;
}

inline std::string fmt_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline void xml_escape_into(std::string& out, const std::string& text) {
    for (const char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += ch;
        }
    }
}

}  // namespace detail

// Renders a 2-D archive as a rasterized Voronoi assignment grid: every
// grid cell is colored by the fitness of the elite owning its CVT cell,
// empty cells in sentinel gray, with a color-scale legend. Rows merge
// equal-colored runs into single rects to keep the SVG small.
inline void emit_heatmap(const EliteArchive& archive, std::ostream& out,
                         const HeatmapOptions& options = {}) {
    const CentroidIndex& index = archive.centroid_index();
    if (index.dimension() != 2)
        throw std::invalid_argument("emit_heatmap: behavior dimension must be 2");
    const std::size_t raster = std::max<std::size_t>(8, options.raster);
    const std::size_t scale = std::max<std::size_t>(1, options.scale);
    const std::size_t plot = raster * scale;

    const std::string sentinel = "#d4d4d4";
    double fit_lo = 0.0, fit_hi = 0.0;
    bool any = false;
    for (const std::uint32_t cell : archive.filled_cells()) {
        const double f = archive.fitness(cell);
        if (!any) {
            fit_lo = fit_hi = f;
            any = true;
        } else {
            fit_lo = std::min(fit_lo, f);
            fit_hi = std::max(fit_hi, f);
        }
    }

    // Per-CVT-cell fill color, computed once.
    std::vector<std::string> cell_color(index.k(), sentinel);
    for (const std::uint32_t cell : archive.filled_cells()) {
        const double f = archive.fitness(cell);
        const double t = fit_hi > fit_lo ? (f - fit_lo) / (fit_hi - fit_lo) : 1.0;
        cell_color[cell] = detail::hex_color(detail::viridis(t));
    }

    const std::size_t margin_top = options.title.empty() ? 12 : 34;
    const std::size_t legend_w = 86;
    const std::size_t width = plot + legend_w + 24;
    const std::size_t height = plot + margin_top + 12;

    std::string svg;
    svg.reserve(1 << 20);
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + ' ' + std::to_string(height) + "\">\n";
    svg += "<rect width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(height) +
           "\" fill=\"#ffffff\"/>\n";
    if (!options.title.empty()) {
        svg += "<text x=\"12\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\">";
        detail::xml_escape_into(svg, options.title);
        svg += "</text>\n";
    }

    // Raster rows, top row = highest second behavior coordinate.
    svg += "<g shape-rendering=\"crispEdges\">\n";
    BehaviorPoint b(2);
    std::vector<std::size_t> row_cells(raster);
    for (std::size_t py = 0; py < raster; ++py) {
        b[1] = 1.0 - (static_cast<double>(py) + 0.5) / static_cast<double>(raster);
        for (std::size_t px = 0; px < raster; ++px) {
            b[0] = (static_cast<double>(px) + 0.5) / static_cast<double>(raster);
            row_cells[px] = index.nearest(b);
        }
        std::size_t start = 0;
        while (start < raster) {
            std::size_t end = start + 1;
            const std::string& color = cell_color[row_cells[start]];
            while (end < raster && cell_color[row_cells[end]] == color) ++end;
            svg += "<rect x=\"" + std::to_string(12 + start * scale) + "\" y=\"" +
                   std::to_string(margin_top + py * scale) + "\" width=\"" +
                   std::to_string((end - start) * scale) + "\" height=\"" +
                   std::to_string(scale) + "\" fill=\"" + color + "\"/>\n";
            start = end;
        }
    }
    svg += "</g>\n";

    // Legend: gradient bar, best on top.
    const std::size_t bar_x = 12 + plot + 18;
    const std::size_t bar_w = 16;
    const std::size_t bar_h = plot;
    const std::size_t steps = 32;
    svg += "<g shape-rendering=\"crispEdges\">\n";
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = 1.0 - (static_cast<double>(s) + 0.5) / static_cast<double>(steps);
        const std::size_t y0 = margin_top + s * bar_h / steps;
        const std::size_t y1 = margin_top + (s + 1) * bar_h / steps;
        svg += "<rect x=\"" + std::to_string(bar_x) + "\" y=\"" + std::to_string(y0) +
               "\" width=\"" + std::to_string(bar_w) + "\" height=\"" + std::to_string(y1 - y0) +
               "\" fill=\"" + detail::hex_color(detail::viridis(t)) + "\"/>\n";
    }
    svg += "</g>\n";
    const double label_hi = options.negate_fitness_labels ? -fit_hi : fit_hi;
    const double label_lo = options.negate_fitness_labels ? -fit_lo : fit_lo;
    const std::string top_label = any ? detail::fmt_label(label_hi) : std::string("empty");
    const std::string bottom_label = any ? detail::fmt_label(label_lo) : std::string("empty");
    svg += "<text x=\"" + std::to_string(bar_x + bar_w + 6) + "\" y=\"" +
           std::to_string(margin_top + 10) + "\" font-family=\"sans-serif\" font-size=\"11\">";
    detail::xml_escape_into(svg, top_label);
    svg += "</text>\n<text x=\"" + std::to_string(bar_x + bar_w + 6) + "\" y=\"" +
           std::to_string(margin_top + bar_h) + "\" font-family=\"sans-serif\" font-size=\"11\">";
    detail::xml_escape_into(svg, bottom_label);
    svg += "</text>\n</svg>\n";
    out << svg;
}

inline void emit_heatmap(const EliteArchive& archive, const std::string& path,
                         const HeatmapOptions& options = {}) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_heatmap: cannot open " + path);
    emit_heatmap(archive, out, options);
    if (!out) throw std::runtime_error("emit_heatmap: write failed for " + path);
}

// Convergence CSV: one row per snapshot, per-algorithm FEV median and
// quartiles plus median coverage, 17-digit round-trip formatting.
inline void emit_convergence_csv(
    const std::vector<std::pair<std::string, RunSetSummary>>& summaries, std::ostream& out) {
    if (summaries.empty())
        throw std::invalid_argument("emit_convergence_csv: no summaries");
    const auto& schedule = summaries.front().second.convergence;
    for (const auto& [name, summary] : summaries) {
        if (summary.convergence.size() != schedule.size())
            throw std::invalid_argument("emit_convergence_csv: snapshot schedules differ");
        for (std::size_t i = 0; i < schedule.size(); ++i)
            if (summary.convergence[i].evaluations != schedule[i].evaluations)
                throw std::invalid_argument("emit_convergence_csv: snapshot schedules differ");
    }

    out << "evaluations";
    for (const auto& [name, summary] : summaries)
        out << ',' << name << "_fev_median," << name << "_fev_q25," << name << "_fev_q75,"
            << name << "_coverage_median";
    out << '\n';
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        out << schedule[i].evaluations;
        for (const auto& [name, summary] : summaries) {
            const SnapshotSummary& snap = summary.convergence[i];
            out << ',' << fmt17(snap.fev_median) << ',' << fmt17(snap.fev_q25) << ','
                << fmt17(snap.fev_q75) << ',' << fmt17(snap.coverage_median);
        }
        out << '\n';
    }
}

inline void emit_convergence_csv(
    const std::vector<std::pair<std::string, RunSetSummary>>& summaries,
    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_convergence_csv: cannot open " + path);
    emit_convergence_csv(summaries, out);
    if (!out) throw std::runtime_error("emit_convergence_csv: write failed for " + path);
}

}  // namespace dme
