#ifndef HDBO_VALIDATION_HPP
#define HDBO_VALIDATION_HPP

#include <cstddef>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hdbo/doe.hpp"
#include "hdbo/rng.hpp"

/// Reference computations that share no code path with the library
/// implementations they check: explicit matrix inverses instead of Cholesky
/// solves, Monte-Carlo sampling instead of closed forms, full enumeration
/// instead of dynamic programming.
namespace hdbo::oracle {

/// Ordinary kriging evaluated with an explicit inverse of R + jitter I.
/// Inputs are already in unit-cube coordinates.
class NaiveKriging {
public:
    NaiveKriging(const Eigen::MatrixXd& scaled_inputs, const Eigen::VectorXd& f, double length_scale, double jitter);

    [[nodiscard]] double mu_hat() const { return mu_; }
    [[nodiscard]] double sigma2_hat() const { return sigma2_; }
    /// Profile likelihood n ln(sigma2 + 1e-300) + ln det(R + jitter I) via LU.
    [[nodiscard]] double nll() const { return nll_; }
    /// (mean, variance) at a unit-cube point, variance clamped at 0.
    [[nodiscard]] std::pair<double, double> predict(const Eigen::VectorXd& u) const;

private:
    Eigen::MatrixXd U_;
    Eigen::VectorXd f_;
    double l_;
    Eigen::MatrixXd Rinv_;
    double mu_ = 0.0;
    double sigma2_ = 0.0;
    double nll_ = 0.0;
};

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean of max(f_min - Y, 0), Y ~ N(mean, sd^2).
MonteCarloEstimate mc_expected_improvement(double mean, double sd, double f_min, std::size_t samples, Rng& rng);

/// Two-sided signed-rank p value by listing all 2^n sign patterns of the
/// nonzero differences (n <= 20).
double brute_force_wilcoxon_p(std::span<const double> a, std::span<const double> b);

/// Minimum of f on an evenly spaced grid of `points` values over [lo, hi].
std::pair<double, double> grid_minimum(const std::function<double(double)>& f, double lo, double hi, std::size_t points);

/// True when each column of X holds exactly one value per stratum of the box.
bool lhs_stratified(const Eigen::MatrixXd& X, const SearchBox& box);

}  // namespace hdbo::oracle

namespace hdbo {

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Oracle-equivalence battery used by `hdbo validate`. `thorough` runs the
/// full sample counts (slower).
std::vector<ValidationCheck> run_validation_battery(bool thorough = false);

}  // namespace hdbo

#endif  // HDBO_VALIDATION_HPP
