#include "hdbo/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "hdbo/error.hpp"
#include "hdbo/trace_io.hpp"

namespace hdbo {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    if (v != 0.0 && (std::abs(v) >= 1e5 || std::abs(v) < 1e-3)) {
        std::snprintf(buf, sizeof(buf), "%.1e", v);
    } else {
        std::snprintf(buf, sizeof(buf), "%g", v);
    }
    return buf;
}

std::vector<double> nice_ticks(double lo, double hi) {
    const double span = hi - lo;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (span / step <= 7.0) break;
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
        ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    }
    return ticks;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
            const double w = std::max(1.0, std::abs(hi)) * 0.05;
            lo -= w;
            hi += w;
        }
    }
};

}  // namespace

std::string render_svg(const PlotSpec& spec) {
    const double left = 80.0;
    const double right = 170.0;
    const double top = 40.0;
    const double bottom = 60.0;
    const double pw = spec.width - left - right;
    const double ph = spec.height - top - bottom;

    auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };
    Range xr;
    Range yr;
    for (const auto& s : spec.series) {
        for (double v : s.x) xr.add(v);
        for (double v : s.y) {
            if (!spec.log_y || v > 0.0) yr.add(ty(v));
        }
        for (double v : s.band_lower) {
            if (!spec.log_y || v > 0.0) yr.add(ty(v));
        }
        for (double v : s.band_upper) {
            if (!spec.log_y || v > 0.0) yr.add(ty(v));
        }
    }
    xr.pad();
    yr.pad();
    auto px = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double v) { return top + ph - (ty(v) - yr.lo) / (yr.hi - yr.lo) * ph; };
    auto py_raw = [&](double t) { return top + ph - (t - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::string o;
    o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" viewBox=\"0 0 " + std::to_string(spec.width) + " " +
         std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty()) {
        o += "<text x=\"" + num(left + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
             escape(spec.title) + "</text>\n";
    }
    o += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

    o += "<g class=\"x-ticks\">\n";
    for (double t : nice_ticks(xr.lo, xr.hi)) {
        const double x = px(t);
        o += "<line x1=\"" + num(x) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(x) + "\" y2=\"" + num(top + ph + 5) +
             "\" stroke=\"black\"/><text x=\"" + num(x) + "\" y=\"" + num(top + ph + 18) +
             "\" text-anchor=\"middle\">" + tick_label(t) + "</text>\n";
    }
    o += "</g>\n<g class=\"y-ticks\">\n";
    std::vector<double> yt;
    if (spec.log_y) {
        for (double e = std::ceil(yr.lo); e <= yr.hi + 1e-9; e += 1.0) yt.push_back(e);
        if (yt.size() < 2) yt = nice_ticks(yr.lo, yr.hi);
    } else {
        yt = nice_ticks(yr.lo, yr.hi);
    }
    for (double t : yt) {
        const double y = py_raw(t);
        const std::string label = spec.log_y ? tick_label(std::pow(10.0, t)) : tick_label(t);
        o += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left) + "\" y2=\"" + num(y) +
             "\" stroke=\"black\"/><text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" +
             label + "</text>\n";
    }
    o += "</g>\n";
    o += "<text class=\"x-label\" x=\"" + num(left + pw / 2) + "\" y=\"" + num(spec.height - 15.0) +
         "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
    o += "<text class=\"y-label\" transform=\"translate(18," + num(top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(spec.y_label) + "</text>\n";

    std::size_t palette = 0;
    std::size_t legend_row = 0;
    for (const auto& s : spec.series) {
        const std::string color = s.color.empty() ? kPalette[palette++ % std::size(kPalette)] : s.color;
        if (!s.band_lower.empty() && s.band_lower.size() == s.x.size() && s.band_upper.size() == s.x.size()) {
            std::string pts;
            for (std::size_t i = 0; i < s.x.size(); ++i) pts += num(px(s.x[i])) + "," + num(py(s.band_upper[i])) + " ";
            for (std::size_t i = s.x.size(); i-- > 0;) pts += num(px(s.x[i])) + "," + num(py(s.band_lower[i])) + " ";
            o += "<polygon class=\"band\" points=\"" + pts + "\" fill=\"" + color + "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
        }
        if (s.markers) {
            o += "<g class=\"series\" data-label=\"" + escape(s.label) + "\">\n";
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (spec.log_y && s.y[i] <= 0.0) continue;
                o += "<circle cx=\"" + num(px(s.x[i])) + "\" cy=\"" + num(py(s.y[i])) + "\" r=\"4\" fill=\"white\" stroke=\"" +
                     color + "\" stroke-width=\"1.5\"/>\n";
            }
            o += "</g>\n";
        } else {
            std::string pts;
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (spec.log_y && s.y[i] <= 0.0) continue;
                pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
            }
            o += "<polyline class=\"series\" data-label=\"" + escape(s.label) + "\" points=\"" + pts +
                 "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.8\"" +
                 (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
        }
        if (!s.label.empty()) {
            const double ly = top + 12.0 + 20.0 * static_cast<double>(legend_row++);
            const double lx = left + pw + 12.0;
            o += "<g class=\"legend-entry\"><line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 24) +
                 "\" y2=\"" + num(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"" +
                 (s.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/><text x=\"" + num(lx + 30) + "\" y=\"" +
                 num(ly + 4) + "\">" + escape(s.label) + "</text></g>\n";
        }
    }
    o += "</svg>\n";
    return o;
}

void emit_convergence_plot(std::span<const RunSummary> summaries, const std::filesystem::path& path,
                           const std::string& title) {
    if (summaries.empty()) throw ContractError("emit_convergence_plot needs at least one summary");
    PlotSpec spec;
    spec.title = title;
    spec.x_label = "Number of function evaluations";
    spec.y_label = "Mean best objective value";
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : summaries) {
        if (s.mean_curve.empty()) throw ContractError("summary '" + s.label + "' has an empty convergence curve");
        PlotSeries series;
        series.label = s.label;
        for (std::size_t k = 0; k < s.mean_curve.size(); ++k) {
            series.x.push_back(static_cast<double>(k + 1));
            series.y.push_back(s.mean_curve[k]);
            lo = std::min(lo, s.mean_curve[k]);
            hi = std::max(hi, s.mean_curve[k]);
        }
        spec.series.push_back(std::move(series));
    }
    spec.log_y = lo > 0.0 && hi / lo > 100.0;
    write_file_atomic(path, render_svg(spec));
}

}  // namespace hdbo
