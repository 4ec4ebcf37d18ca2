#ifndef HDBO_OPTIMIZERS_HPP
#define HDBO_OPTIMIZERS_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hdbo/doe.hpp"
#include "hdbo/ga.hpp"
#include "hdbo/gp.hpp"
#include "hdbo/rng.hpp"

namespace hdbo {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::AdaDropout;
    std::size_t n_init = 200;
    std::size_t n_max = 1000;
    SearchBox box = SearchBox::cube(1, 0.0, 1.0);
    /// Starting subspace size for AdaDropout; D when unset.
    std::optional<std::size_t> d_init;
    /// Subspace size of the Dropout baseline.
    std::size_t dropout_d = 5;
    LengthScaleBounds length_scale_bounds;
    /// Candidates closer than this (unit-cube distance) to an archive row are
    /// replaced by a uniform random point.
    double duplicate_tolerance = 1e-8;
    /// Replaces the per-algorithm GA budget when set.
    std::optional<GaBudget> ga_budget_override;

    void validate() const;
};

/// One row per objective evaluation. Initial-design rows carry d = 0 and an
/// empty selection; f_next is the value evaluated at that row.
struct TraceRecord {
    std::size_t n_evals = 0;
    double f_min = 0.0;
    std::size_t d = 0;
    SubspaceSelection selected;
    double f_next = 0.0;
    double elapsed_ms = 0.0;
    bool design = false;
    Eigen::VectorXd incumbent;
};

struct RunTrace {
    Algorithm algorithm = Algorithm::AdaDropout;
    RngState seed;
    std::size_t n_init = 0;
    std::vector<TraceRecord> records;
    Eigen::VectorXd best_x;
    double f_min = 0.0;
    /// Set when the run aborted; records hold everything evaluated so far.
    std::optional<std::string> error;

    [[nodiscard]] bool ok() const { return !error.has_value(); }
    /// Records after the initial design.
    [[nodiscard]] std::vector<TraceRecord> iterations() const;
};

/// Lowest y in the archive, ties to the lowest row index.
std::pair<Eigen::VectorXd, double> update_incumbent(const Archive& archive);

/// d - 1 when f_next > f_min and d > 1, else d.
std::size_t update_dimension(std::size_t d, double f_next, double f_min);

/// Initial Latin hypercube design for a run. Depends only on (box, n_init,
/// seed), so every algorithm started from the same seed shares it.
Eigen::MatrixXd initial_design(const OptimizerConfig& config, const RngState& seed);

RunTrace run_standard_bo(const ObjectiveFn& objective, OptimizerConfig config, const RngState& seed);
RunTrace run_adadropout(const ObjectiveFn& objective, OptimizerConfig config, const RngState& seed);
RunTrace run_dropout_baseline(const ObjectiveFn& objective, OptimizerConfig config, const RngState& seed);
RunTrace run_coordinate_line_bo(const ObjectiveFn& objective, OptimizerConfig config, const RngState& seed);

/// Dispatches on config.algorithm.
RunTrace run_optimizer(const ObjectiveFn& objective, const OptimizerConfig& config, const RngState& seed);

}  // namespace hdbo

#endif  // HDBO_OPTIMIZERS_HPP
