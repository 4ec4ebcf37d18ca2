#include "hdbo/optimizers.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>

#include "hdbo/acquisition.hpp"
#include "hdbo/error.hpp"

namespace hdbo {

namespace {

constexpr std::uint64_t kDesignStream = 1;
constexpr std::uint64_t kSearchStream = 2;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

bool near_archive(const Archive& archive, const SearchBox& box, const Eigen::VectorXd& x, double tol) {
    const Eigen::VectorXd u = box.to_unit(x);
    const Eigen::VectorXd inv_width = box.width().cwiseInverse();
    for (Eigen::Index i = 0; i < archive.X().rows(); ++i) {
        const Eigen::VectorXd ui = (archive.X().row(i).transpose() - box.lower()).cwiseProduct(inv_width);
        if ((ui - u).norm() <= tol) return true;
    }
    return false;
}

/// Chooses the coordinates for each iteration and reacts to its outcome.
class SubspacePolicy {
public:
    SubspacePolicy(const OptimizerConfig& config, std::size_t D) : alg_(config.algorithm), D_(D) {
        switch (alg_) {
            case Algorithm::StandardBo: d_ = D; break;
            case Algorithm::AdaDropout: d_ = config.d_init.value_or(D); break;
            case Algorithm::Dropout: d_ = config.dropout_d; break;
            case Algorithm::CoordinateLine: d_ = 1; break;
        }
    }

    [[nodiscard]] std::size_t d() const { return d_; }

    SubspaceSelection next(Rng& rng) {
        switch (alg_) {
            case Algorithm::StandardBo: {
                SubspaceSelection all(D_);
                std::iota(all.begin(), all.end(), std::size_t{0});
                return all;
            }
            case Algorithm::AdaDropout:
            case Algorithm::Dropout: return select_subspace(d_, D_, rng);
            case Algorithm::CoordinateLine: {
                if (cursor_ == permutation_.size()) {
                    permutation_ = select_subspace(D_, D_, rng);
                    cursor_ = 0;
                }
                return {permutation_[cursor_++]};
            }
        }
        throw ConfigError("unknown algorithm");
    }

    void observe(double f_next, double f_min_before) {
        if (alg_ == Algorithm::AdaDropout) d_ = update_dimension(d_, f_next, f_min_before);
    }

private:
    Algorithm alg_;
    std::size_t D_;
    std::size_t d_ = 1;
    SubspaceSelection permutation_;
    std::size_t cursor_ = 0;
};

double checked_eval(const ObjectiveFn& objective, const Eigen::VectorXd& x) {
    const double v = objective(x);
    if (!std::isfinite(v)) throw EvaluationError("objective returned a non-finite value");
    return v;
}

RunTrace run_loop(const ObjectiveFn& objective, const OptimizerConfig& config, const RngState& seed) {
    config.validate();
    const SearchBox& box = config.box;
    const std::size_t D = box.dim();

    RunTrace trace;
    trace.algorithm = config.algorithm;
    trace.seed = seed;
    trace.n_init = config.n_init;

    const Eigen::MatrixXd design = initial_design(config, seed);
    Eigen::VectorXd y(design.rows());
    std::optional<Archive> archive;
    try {
        double running = 0.0;
        for (Eigen::Index i = 0; i < design.rows(); ++i) {
            const auto t0 = Clock::now();
            y[i] = checked_eval(objective, design.row(i).transpose());
            Eigen::Index best = 0;
            running = y.head(i + 1).minCoeff(&best);
            TraceRecord rec;
            rec.n_evals = static_cast<std::size_t>(i + 1);
            rec.f_min = running;
            rec.f_next = y[i];
            rec.elapsed_ms = ms_since(t0);
            rec.design = true;
            rec.incumbent = design.row(best).transpose();
            trace.records.push_back(std::move(rec));
        }
        archive.emplace(design, y);
    } catch (const std::exception& e) {
        trace.error = e.what();
        if (!trace.records.empty()) {
            trace.best_x = trace.records.back().incumbent;
            trace.f_min = trace.records.back().f_min;
        }
        return trace;
    }

    Rng rng(seed.derive(kSearchStream));
    SubspacePolicy policy(config, D);
    try {
        while (archive->size() < config.n_max) {
            const auto t0 = Clock::now();
            const std::size_t d = policy.d();
            SubspaceSelection selection = policy.next(rng);
            const GpModel model = GpModel::fit(*archive, box, config.length_scale_bounds);
            const Eigen::VectorXd incumbent = archive->incumbent();
            const double f_min = archive->f_min();
            const AcquisitionContext ctx(model, f_min, incumbent, selection);

            GaConfig ga;
            ga.budget = config.ga_budget_override.value_or(ga_budget(config.algorithm, selection.size()));
            Eigen::VectorXd anchor(static_cast<Eigen::Index>(selection.size()));
            for (std::size_t k = 0; k < selection.size(); ++k) {
                anchor[static_cast<Eigen::Index>(k)] = incumbent[static_cast<Eigen::Index>(selection[k])];
            }
            const GaResult best = maximize_batch([&ctx](const Eigen::MatrixXd& v) { return ctx.essi_batch(v); },
                                                 ctx.subspace_box(), ga, rng, {anchor});

            Eigen::VectorXd x_next = box.clamp(compose_point(incumbent, selection, best.best_point));
            if (near_archive(*archive, box, x_next, config.duplicate_tolerance)) x_next = uniform_point(box, rng);

            const double f_next = checked_eval(objective, x_next);
            archive->append(x_next, f_next);
            policy.observe(f_next, f_min);

            TraceRecord rec;
            rec.n_evals = archive->size();
            rec.f_min = archive->f_min();
            rec.d = d;
            rec.selected = std::move(selection);
            rec.f_next = f_next;
            rec.elapsed_ms = ms_since(t0);
            rec.incumbent = archive->incumbent();
            trace.records.push_back(std::move(rec));
        }
    } catch (const std::exception& e) {
        trace.error = e.what();
    }
    trace.best_x = archive->incumbent();
    trace.f_min = archive->f_min();
    return trace;
}

}  // namespace

void OptimizerConfig::validate() const {
    const std::size_t D = box.dim();
    if (n_init < 1) throw ConfigError("n_init must be at least 1");
    if (n_init > n_max) throw ConfigError("n_init must not exceed n_max");
    if (n_init < 2 && n_max > n_init) throw ConfigError("n_init must be at least 2 to fit a surrogate");
    if (d_init && (*d_init < 1 || *d_init > D)) throw ConfigError("d_init must lie in [1, D]");
    if (algorithm == Algorithm::Dropout && (dropout_d < 1 || dropout_d > D)) {
        throw ConfigError("dropout subspace size must lie in [1, D]");
    }
    if (!(duplicate_tolerance >= 0.0)) throw ConfigError("duplicate tolerance must be nonnegative");
    if (ga_budget_override) {
        GaConfig probe;
        probe.budget = *ga_budget_override;
        probe.validate();
    }
}

std::vector<TraceRecord> RunTrace::iterations() const {
    std::vector<TraceRecord> out;
    for (const auto& r : records) {
        if (!r.design) out.push_back(r);
    }
    return out;
}

std::pair<Eigen::VectorXd, double> update_incumbent(const Archive& archive) {
    Eigen::Index best = 0;
    const Eigen::VectorXd& y = archive.y();
    for (Eigen::Index i = 1; i < y.size(); ++i) {
        if (y[i] < y[best]) best = i;
    }
    return {archive.X().row(best).transpose(), y[best]};
}

std::size_t update_dimension(std::size_t d, double f_next, double f_min) {
    if (d < 1) throw ConfigError("update_dimension requires d >= 1");
    return (f_next > f_min && d > 1) ? d - 1 : d;
}

Eigen::MatrixXd initial_design(const OptimizerConfig& config, const RngState& seed) {
    Rng rng(seed.derive(kDesignStream));
    return lhs_sample(config.n_init, config.box, rng);
}

RunTrace run_standard_bo(const ObjectiveFn& objective, OptimizerConfig config, const RngState& seed) {
    config.algorithm = Algorithm::StandardBo;
    return run_loop(objective, config, seed);
}

RunTrace run_adadropout(const ObjectiveFn& objective, OptimizerConfig config, const RngState& seed) {
    config.algorithm = Algorithm::AdaDropout;
    return run_loop(objective, config, seed);
}

RunTrace run_dropout_baseline(const ObjectiveFn& objective, OptimizerConfig config, const RngState& seed) {
    config.algorithm = Algorithm::Dropout;
    return run_loop(objective, config, seed);
}

RunTrace run_coordinate_line_bo(const ObjectiveFn& objective, OptimizerConfig config, const RngState& seed) {
    config.algorithm = Algorithm::CoordinateLine;
    return run_loop(objective, config, seed);
}

RunTrace run_optimizer(const ObjectiveFn& objective, const OptimizerConfig& config, const RngState& seed) {
    return run_loop(objective, config, seed);
}

}  // namespace hdbo
