#ifndef HDBO_EXPERIMENT_HPP
#define HDBO_EXPERIMENT_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hdbo/ga.hpp"
#include "hdbo/gp.hpp"
#include "hdbo/objectives.hpp"
#include "hdbo/stats.hpp"

namespace hdbo {

/// How a benchmark problem is described in an experiment config.
struct ObjectiveDecl {
    std::string kind = "sphere";
    std::string name;  // derived from kind and dimension when empty
    std::optional<std::size_t> dim;
    /// "none", "random", or explicit via shift_vector.
    std::string shift = "none";
    std::vector<double> shift_vector;
    bool rotate = false;
    std::vector<double> lower;  // one value (cube) or D values; empty = default box
    std::vector<double> upper;
    std::string command;
    std::int64_t timeout_ms = 10000;
};

struct ExperimentConfig {
    std::vector<ObjectiveDecl> objectives;
    std::vector<Algorithm> algorithms{Algorithm::StandardBo, Algorithm::AdaDropout};
    std::size_t dim = 100;
    std::size_t n_init = 200;
    std::size_t n_max = 1000;
    std::size_t runs = 30;
    std::uint64_t seed = 0;
    std::filesystem::path output_dir = "results";
    /// 0 selects the number of hardware threads.
    std::size_t workers = 0;
    double alpha = 0.05;
    Algorithm reference = Algorithm::AdaDropout;
    std::size_t dropout_d = 5;
    std::optional<std::size_t> d_init;
    LengthScaleBounds length_scale_bounds;
    double duplicate_tolerance = 1e-8;
    bool plot = true;

    void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// An objective with its transforms drawn and its name fixed.
struct ResolvedObjective {
    std::string name;
    ObjectiveSpec spec;
};

/// Deterministic in (config.seed, objective position).
std::vector<ResolvedObjective> resolve_objectives(const ExperimentConfig& config);

/// Seed of run `run_index`; shared by every algorithm and objective so the
/// initial designs coincide.
RngState run_seed(std::uint64_t master_seed, std::size_t run_index);

struct ObjectiveReport {
    std::string name;
    std::string reference;
    double alpha = 0.05;
    std::vector<RunSummary> summaries;
    /// Reference algorithm against each other algorithm, keyed by label.
    std::map<std::string, ComparisonVerdict> comparisons;
};

struct ExperimentResult {
    std::vector<ObjectiveReport> reports;
    std::size_t failed_runs = 0;
    std::filesystem::path manifest;
};

/// Runs every (objective, algorithm, run) job, writing
///   <out>/<objective>/<algorithm>/run_<k>.csv
///   <out>/<objective>/summary.json
///   <out>/<objective>/convergence.svg   (when config.plot)
///   <out>/manifest.json
/// A failed run is recorded in the manifest; the others still complete.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Rebuilds the per-objective reports from the traces listed in a results
/// directory's manifest.
std::vector<ObjectiveReport> compare_results(const std::filesystem::path& results_dir);

/// Per-objective summary document (written as summary.json).
nlohmann::json summary_json(const ObjectiveReport& report);

/// Text table of means with +/≈/- marks against the reference, one row per
/// objective and a final "+/≈/-" count row.
std::string verdict_table(const std::vector<ObjectiveReport>& reports);

}  // namespace hdbo

#endif  // HDBO_EXPERIMENT_HPP
