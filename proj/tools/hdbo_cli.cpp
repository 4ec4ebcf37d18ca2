#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hdbo/demo.hpp"
#include "hdbo/error.hpp"
#include "hdbo/experiment.hpp"
#include "hdbo/trace_io.hpp"
#include "hdbo/validation.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRunFailure = 2;

struct RunFlags {
    std::string config;
    std::optional<std::size_t> dim, n_init, n_max, runs, workers, dropout_d, d_init;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir, reference;
    std::optional<double> alpha;
    std::optional<bool> plot;
};

int cmd_run(const RunFlags& f) {
    hdbo::ExperimentConfig config = hdbo::load_experiment_config(f.config);
    if (f.dim) config.dim = *f.dim;
    if (f.n_init) config.n_init = *f.n_init;
    if (f.n_max) config.n_max = *f.n_max;
    if (f.runs) config.runs = *f.runs;
    if (f.workers) config.workers = *f.workers;
    if (f.dropout_d) config.dropout_d = *f.dropout_d;
    if (f.d_init) config.d_init = *f.d_init;
    if (f.seed) config.seed = *f.seed;
    if (f.output_dir) config.output_dir = *f.output_dir;
    if (f.reference) config.reference = hdbo::parse_algorithm(*f.reference);
    if (f.alpha) config.alpha = *f.alpha;
    if (f.plot) config.plot = *f.plot;

    const hdbo::ExperimentResult result = hdbo::run_experiment(config, &std::cerr);
    std::cout << hdbo::verdict_table(result.reports);
    std::cout << "manifest: " << result.manifest.string() << "\n";
    if (result.failed_runs > 0) {
        std::cerr << result.failed_runs << " run(s) failed; see the manifest for details\n";
        return kExitRunFailure;
    }
    return 0;
}

int cmd_demo(const std::string& out_dir, std::size_t samples, std::uint64_t seed) {
    const hdbo::DemoResult demo = hdbo::run_demo(samples, seed);
    for (const auto& p : hdbo::write_demo(demo, out_dir)) std::cout << p.string() << "\n";
    std::cout << "length scale " << hdbo::format_double(demo.length_scale) << ", mu_hat "
              << hdbo::format_double(demo.mu_hat) << ", sigma2_hat " << hdbo::format_double(demo.sigma2_hat) << "\n";
    return 0;
}

int cmd_compare(const std::string& dir, bool write) {
    const auto reports = hdbo::compare_results(dir);
    if (write) {
        for (const auto& r : reports) {
            hdbo::write_file_atomic(std::filesystem::path(dir) / r.name / "summary.json", hdbo::summary_json(r).dump(2) + "\n");
        }
    }
    std::cout << hdbo::verdict_table(reports);
    return 0;
}

int cmd_validate(bool thorough) {
    bool all = true;
    for (const auto& c : hdbo::run_validation_battery(thorough)) {
        std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name;
        if (!c.detail.empty()) std::cout << "  [" << c.detail << "]";
        std::cout << "\n";
        all = all && c.passed;
    }
    return all ? 0 : kExitRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-dimensional Bayesian optimization benchmark harness"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "Execute an experiment from a JSON config file");
    run->add_option("config", rf.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--dim", rf.dim);
    run->add_option("--n_init", rf.n_init);
    run->add_option("--n_max", rf.n_max);
    run->add_option("--runs", rf.runs);
    run->add_option("--seed", rf.seed);
    run->add_option("--output_dir", rf.output_dir);
    run->add_option("--workers", rf.workers);
    run->add_option("--alpha", rf.alpha);
    run->add_option("--reference", rf.reference);
    run->add_option("--dropout_d", rf.dropout_d);
    run->add_option("--d_init", rf.d_init);
    run->add_option("--plot", rf.plot);

    std::string demo_dir = ".";
    std::size_t demo_samples = 6;
    std::uint64_t demo_seed = 7;
    auto* demo = app.add_subcommand("demo", "Plot the 1-D GP fit and EI curve for cos(x) + sin(2x) + 0.5x");
    demo->add_option("--output_dir", demo_dir);
    demo->add_option("--samples", demo_samples)->check(CLI::Range(2, 1000));
    demo->add_option("--seed", demo_seed);

    std::string compare_dir;
    bool compare_write = false;
    auto* compare = app.add_subcommand("compare", "Recompute statistics from the traces in a results directory");
    compare->add_option("results_dir", compare_dir)->required()->check(CLI::ExistingDirectory);
    compare->add_flag("--write", compare_write, "Rewrite each summary.json");

    bool thorough = false;
    auto* validate = app.add_subcommand("validate", "Run the oracle-equivalence battery");
    validate->add_flag("--thorough", thorough, "Use full sample counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run) return cmd_run(rf);
        if (*demo) return cmd_demo(demo_dir, demo_samples, demo_seed);
        if (*compare) return cmd_compare(compare_dir, compare_write);
        if (*validate) return cmd_validate(thorough);
    } catch (const hdbo::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRunFailure;
    }
    return kExitUsage;
}
