#include "hdbo/demo.hpp"

#include <algorithm>
#include <cmath>

#include "hdbo/acquisition.hpp"
#include "hdbo/doe.hpp"
#include "hdbo/error.hpp"
#include "hdbo/gp.hpp"
#include "hdbo/objectives.hpp"
#include "hdbo/svg_plot.hpp"
#include "hdbo/trace_io.hpp"

namespace hdbo {

DemoResult run_demo(std::size_t n_samples, std::uint64_t seed, std::size_t grid_points) {
    if (n_samples < 2) throw ConfigError("demo needs at least two samples");
    if (grid_points < 2) throw ConfigError("demo needs at least two grid points");
    const SearchBox box = default_box(ObjectiveKind::Fig1Demo, 1);
    Rng rng(RngState{seed, 0});
    const Eigen::MatrixXd X = lhs_sample(n_samples, box, rng);

    DemoResult out;
    std::vector<std::size_t> order(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return X(static_cast<Eigen::Index>(a), 0) < X(static_cast<Eigen::Index>(b), 0);
    });
    Eigen::MatrixXd Xs(static_cast<Eigen::Index>(n_samples), 1);
    Eigen::VectorXd y(static_cast<Eigen::Index>(n_samples));
    for (std::size_t k = 0; k < n_samples; ++k) {
        const double x = X(static_cast<Eigen::Index>(order[k]), 0);
        Xs(static_cast<Eigen::Index>(k), 0) = x;
        y[static_cast<Eigen::Index>(k)] = functions::fig1_demo(x);
        out.sample_x.push_back(x);
        out.sample_y.push_back(y[static_cast<Eigen::Index>(k)]);
    }
    const Archive archive(Xs, y);
    const GpModel model = GpModel::fit(archive, box);
    out.length_scale = model.length_scale();
    out.mu_hat = model.mu_hat();
    out.sigma2_hat = model.sigma2_hat();
    out.f_min = archive.f_min();

    for (std::size_t i = 0; i < grid_points; ++i) {
        out.grid.push_back(box.lower()[0] + (box.upper()[0] - box.lower()[0]) * static_cast<double>(i) /
                                                static_cast<double>(grid_points - 1));
    }
    out.grid.insert(out.grid.end(), out.sample_x.begin(), out.sample_x.end());
    std::sort(out.grid.begin(), out.grid.end());
    out.grid.erase(std::unique(out.grid.begin(), out.grid.end()), out.grid.end());

    Eigen::VectorXd q(1);
    for (double x : out.grid) {
        q[0] = x;
        const Prediction p = model.predict(q);
        out.truth.push_back(functions::fig1_demo(x));
        out.mean.push_back(p.mean);
        out.sd.push_back(std::sqrt(p.variance));
        out.ei.push_back(expected_improvement(p.mean, std::sqrt(p.variance), out.f_min));
    }
    for (double x : out.sample_x) {
        q[0] = x;
        const Prediction p = model.predict(q);
        out.mean_at_samples.push_back(p.mean);
        out.variance_at_samples.push_back(p.variance);
        out.ei_at_samples.push_back(expected_improvement(p.mean, std::sqrt(p.variance), out.f_min));
    }
    return out;
}

namespace {

PlotSeries series(std::string label, std::vector<double> x, std::vector<double> y, std::string color) {
    PlotSeries s;
    s.label = std::move(label);
    s.x = std::move(x);
    s.y = std::move(y);
    s.color = std::move(color);
    return s;
}

}  // namespace

std::vector<std::filesystem::path> write_demo(const DemoResult& demo, const std::filesystem::path& dir) {
    PlotSpec gp;
    gp.title = "GP fit of f(x) = cos(x) + sin(2x) + 0.5x";
    gp.x_label = "x";
    gp.y_label = "f(x)";
    PlotSeries truth = series("true function", demo.grid, demo.truth, "#000000");
    PlotSeries mean = series("GP mean", demo.grid, demo.mean, "#a0522d");
    mean.dashed = true;
    for (std::size_t i = 0; i < demo.grid.size(); ++i) {
        mean.band_lower.push_back(demo.mean[i] - 2.0 * demo.sd[i]);
        mean.band_upper.push_back(demo.mean[i] + 2.0 * demo.sd[i]);
    }
    PlotSeries samples = series("samples", demo.sample_x, demo.sample_y, "#1f77b4");
    samples.markers = true;
    gp.series = {truth, mean, samples};

    PlotSpec ei;
    ei.title = "Expected improvement";
    ei.x_label = "x";
    ei.y_label = "EI(x)";
    PlotSeries curve = series("EI", demo.grid, demo.ei, "#d62728");
    PlotSeries at_samples = series("samples", demo.sample_x, demo.ei_at_samples, "#1f77b4");
    at_samples.markers = true;
    ei.series = {curve, at_samples};

    const auto gp_path = dir / "demo_gp.svg";
    const auto ei_path = dir / "demo_ei.svg";
    write_file_atomic(gp_path, render_svg(gp));
    write_file_atomic(ei_path, render_svg(ei));

    std::string csv = "x,truth,mean,sd,ei\n";
    for (std::size_t i = 0; i < demo.grid.size(); ++i) {
        csv += format_double(demo.grid[i]) + "," + format_double(demo.truth[i]) + "," + format_double(demo.mean[i]) +
               "," + format_double(demo.sd[i]) + "," + format_double(demo.ei[i]) + "\n";
    }
    write_file_atomic(dir / "demo_curves.csv", csv);
    return {gp_path, ei_path};
}

}  // namespace hdbo
