#ifndef HDBO_DEMO_HPP
#define HDBO_DEMO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace hdbo {

/// One-dimensional GP and EI curves for f(x) = cos x + sin 2x + 0.5 x on
/// [-5, 5].
struct DemoResult {
    std::vector<double> sample_x;
    std::vector<double> sample_y;
    /// Evaluation grid (includes every sample location).
    std::vector<double> grid;
    std::vector<double> truth;
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<double> ei;
    /// Model outputs at the sample locations.
    std::vector<double> mean_at_samples;
    std::vector<double> variance_at_samples;
    std::vector<double> ei_at_samples;
    double length_scale = 0.0;
    double mu_hat = 0.0;
    double sigma2_hat = 0.0;
    double f_min = 0.0;
};

DemoResult run_demo(std::size_t n_samples = 6, std::uint64_t seed = 7, std::size_t grid_points = 801);

/// Writes demo_gp.svg, demo_ei.svg and demo_curves.csv into `dir`.
/// Returns the paths of the two plots.
std::vector<std::filesystem::path> write_demo(const DemoResult& demo, const std::filesystem::path& dir);

}  // namespace hdbo

#endif  // HDBO_DEMO_HPP
