#ifndef HDBO_SVG_PLOT_HPP
#define HDBO_SVG_PLOT_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hdbo/stats.hpp"

namespace hdbo {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// Empty selects the next palette colour.
    std::string color;
    bool markers = false;  // circles instead of a polyline
    bool dashed = false;
    /// Optional shaded band drawn behind the series.
    std::vector<double> band_lower;
    std::vector<double> band_upper;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    int width = 720;
    int height = 480;
    std::vector<PlotSeries> series;
};

/// Standalone SVG document for the plot.
std::string render_svg(const PlotSpec& spec);

/// Mean f_min against evaluation count, one curve per summary, with a
/// legend keyed by summary label. Uses a log y axis when every value is
/// positive and the range spans more than two decades.
void emit_convergence_plot(std::span<const RunSummary> summaries, const std::filesystem::path& path,
                           const std::string& title = "Convergence");

}  // namespace hdbo

#endif  // HDBO_SVG_PLOT_HPP
