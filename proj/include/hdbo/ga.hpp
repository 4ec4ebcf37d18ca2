#ifndef HDBO_GA_HPP
#define HDBO_GA_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hdbo/doe.hpp"
#include "hdbo/rng.hpp"

namespace hdbo {

enum class Algorithm { StandardBo, AdaDropout, CoordinateLine, Dropout };

std::string to_string(Algorithm a);
/// Accepts "standard-bo", "adadropout", "coordinate-line", "dropout".
Algorithm parse_algorithm(std::string_view name);

struct GaBudget {
    std::size_t population = 200;
    std::size_t generations = 100;

    friend bool operator==(const GaBudget&, const GaBudget&) = default;
};

/// Inner-optimizer budget per outer algorithm and active subspace size d:
/// standard BO (200, 100); CoordinateLineBO (10, 20); AdaDropout and
/// Dropout pop = max(10, 4d), generations = round(200 d / pop), at least 1.
GaBudget ga_budget(Algorithm algorithm, std::size_t d);

struct GaConfig {
    GaBudget budget;
    double crossover_probability = 0.9;
    double crossover_eta = 15.0;
    /// Per-variable mutation probability; a negative value means 1/d.
    double mutation_probability = -1.0;
    double mutation_eta = 20.0;
    std::size_t tournament_size = 2;
    std::size_t elitism = 1;

    void validate() const;
};

/// Maps a block of individuals (one per row) to their fitness values.
using BatchFitness = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;
using PointFitness = std::function<double(const Eigen::VectorXd&)>;

struct GaResult {
    Eigen::VectorXd best_point;
    double best_value = 0.0;
    std::size_t evaluations = 0;
    /// Best fitness after the initial population and after each generation.
    std::vector<double> best_history;
};

/// Real-coded GA (tournament selection, simulated binary crossover,
/// polynomial mutation, elitism) maximizing `fitness` over `box`. Rows of
/// `seeds` are injected into the initial population. Non-finite fitness
/// values count as -infinity.
GaResult maximize_batch(const BatchFitness& fitness, const SearchBox& box, const GaConfig& config, Rng& rng,
                        const std::vector<Eigen::VectorXd>& seeds = {});

GaResult maximize(const PointFitness& fitness, const SearchBox& box, const GaConfig& config, Rng& rng,
                  const std::vector<Eigen::VectorXd>& seeds = {});

}  // namespace hdbo

#endif  // HDBO_GA_HPP
