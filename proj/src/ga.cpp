#include "hdbo/ga.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hdbo/error.hpp"

namespace hdbo {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::StandardBo: return "standard-bo";
        case Algorithm::AdaDropout: return "adadropout";
        case Algorithm::CoordinateLine: return "coordinate-line";
        case Algorithm::Dropout: return "dropout";
    }
    return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
    if (name == "standard-bo") return Algorithm::StandardBo;
    if (name == "adadropout") return Algorithm::AdaDropout;
    if (name == "coordinate-line") return Algorithm::CoordinateLine;
    if (name == "dropout") return Algorithm::Dropout;
    throw ConfigError("unknown algorithm '" + std::string(name) +
                      "' (expected standard-bo, adadropout, coordinate-line or dropout)");
}

GaBudget ga_budget(Algorithm algorithm, std::size_t d) {
    if (d < 1) throw ConfigError("ga_budget requires d >= 1");
    switch (algorithm) {
        case Algorithm::StandardBo: return {200, 100};
        case Algorithm::CoordinateLine: return {10, 20};
        case Algorithm::AdaDropout:
        case Algorithm::Dropout: {
            const std::size_t pop = std::max<std::size_t>(10, 4 * d);
            const auto gens = static_cast<std::size_t>(
                std::llround(200.0 * static_cast<double>(d) / static_cast<double>(pop)));
            return {pop, std::max<std::size_t>(1, gens)};
        }
    }
    throw ConfigError("unknown algorithm");
}

void GaConfig::validate() const {
    if (budget.population < 2) throw ConfigError("GA population must be at least 2");
    if (budget.generations < 1) throw ConfigError("GA needs at least one generation");
    if (crossover_probability < 0.0 || crossover_probability > 1.0) throw ConfigError("crossover probability outside [0, 1]");
    if (mutation_probability > 1.0) throw ConfigError("mutation probability above 1");
    if (tournament_size < 1) throw ConfigError("tournament size must be positive");
    if (elitism >= budget.population) throw ConfigError("elitism count must be below the population size");
}

namespace {

double sanitize(double v) {
    return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}

// Bounded SBX on one variable pair.
void sbx_pair(double& a, double& b, double lo, double hi, double eta, Rng& rng) {
    if (std::abs(a - b) <= 1e-14) return;
    const double y1 = std::min(a, b);
    const double y2 = std::max(a, b);
    const double u = rng.uniform();
    const double expo = 1.0 / (eta + 1.0);
    auto spread = [&](double beta) {
        const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
        return u <= 1.0 / alpha ? std::pow(u * alpha, expo) : std::pow(1.0 / (2.0 - u * alpha), expo);
    };
    const double bq1 = spread(1.0 + 2.0 * (y1 - lo) / (y2 - y1));
    const double bq2 = spread(1.0 + 2.0 * (hi - y2) / (y2 - y1));
    double c1 = std::clamp(0.5 * ((y1 + y2) - bq1 * (y2 - y1)), lo, hi);
    double c2 = std::clamp(0.5 * ((y1 + y2) + bq2 * (y2 - y1)), lo, hi);
    if (rng.uniform() < 0.5) std::swap(c1, c2);
    a = c1;
    b = c2;
}

// Bounded polynomial mutation of one variable.
double poly_mutate(double y, double lo, double hi, double eta, Rng& rng) {
    const double width = hi - lo;
    const double d1 = (y - lo) / width;
    const double d2 = (hi - y) / width;
    const double u = rng.uniform();
    const double expo = 1.0 / (eta + 1.0);
    double dq = 0.0;
    if (u < 0.5) {
        const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - d1, eta + 1.0);
        dq = std::pow(val, expo) - 1.0;
    } else {
        const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - d2, eta + 1.0);
        dq = 1.0 - std::pow(val, expo);
    }
    return std::clamp(y + dq * width, lo, hi);
}

std::size_t tournament(const Eigen::VectorXd& fit, std::size_t k, Rng& rng) {
    const auto n = static_cast<std::uint64_t>(fit.size());
    auto best = static_cast<Eigen::Index>(rng.below(n));
    for (std::size_t t = 1; t < k; ++t) {
        const auto c = static_cast<Eigen::Index>(rng.below(n));
        if (fit[c] > fit[best] || (fit[c] == fit[best] && c < best)) best = c;
    }
    return static_cast<std::size_t>(best);
}

Eigen::VectorXd evaluate(const BatchFitness& fitness, const Eigen::MatrixXd& block) {
    Eigen::VectorXd v = fitness(block);
    if (v.size() != block.rows()) throw ContractError("fitness returned the wrong number of values");
    return v.unaryExpr(&sanitize);
}

}  // namespace

GaResult maximize_batch(const BatchFitness& fitness, const SearchBox& box, const GaConfig& config, Rng& rng,
                        const std::vector<Eigen::VectorXd>& seeds) {
    config.validate();
    const auto P = static_cast<Eigen::Index>(config.budget.population);
    const auto d = static_cast<Eigen::Index>(box.dim());
    const auto elites = static_cast<Eigen::Index>(config.elitism);
    const double pm = config.mutation_probability < 0.0 ? 1.0 / static_cast<double>(d) : config.mutation_probability;

    Eigen::MatrixXd pop(P, d);
    Eigen::Index filled = 0;
    for (const auto& s : seeds) {
        if (filled == P) break;
        if (s.size() != d) throw ContractError("GA seed has the wrong dimension");
        pop.row(filled++) = box.clamp(s).transpose();
    }
    for (; filled < P; ++filled) pop.row(filled) = uniform_point(box, rng).transpose();

    GaResult result;
    Eigen::VectorXd fit = evaluate(fitness, pop);
    result.evaluations = static_cast<std::size_t>(P);

    Eigen::Index arg = 0;
    result.best_value = fit.maxCoeff(&arg);
    result.best_point = pop.row(arg).transpose();
    result.best_history.push_back(result.best_value);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(P));
    const Eigen::Index n_children = P - elites;
    Eigen::MatrixXd children(n_children, d);

    const Eigen::VectorXd& lo = box.lower();
    const Eigen::VectorXd& hi = box.upper();
    Eigen::VectorXd a(d);
    Eigen::VectorXd b(d);
    for (std::size_t gen = 0; gen < config.budget.generations; ++gen) {
        for (Eigen::Index c = 0; c < n_children; c += 2) {
            a = pop.row(static_cast<Eigen::Index>(tournament(fit, config.tournament_size, rng))).transpose();
            b = pop.row(static_cast<Eigen::Index>(tournament(fit, config.tournament_size, rng))).transpose();
            if (rng.uniform() < config.crossover_probability) {
                for (Eigen::Index j = 0; j < d; ++j) {
                    if (rng.uniform() < 0.5) sbx_pair(a[j], b[j], lo[j], hi[j], config.crossover_eta, rng);
                }
            }
            for (Eigen::Index j = 0; j < d; ++j) {
                if (rng.uniform() < pm) a[j] = poly_mutate(a[j], lo[j], hi[j], config.mutation_eta, rng);
                if (rng.uniform() < pm) b[j] = poly_mutate(b[j], lo[j], hi[j], config.mutation_eta, rng);
            }
            children.row(c) = a.cwiseMax(lo).cwiseMin(hi).transpose();
            if (c + 1 < n_children) children.row(c + 1) = b.cwiseMax(lo).cwiseMin(hi).transpose();
        }
        const Eigen::VectorXd child_fit = evaluate(fitness, children);
        result.evaluations += static_cast<std::size_t>(n_children);

        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) { return fit[i] > fit[j]; });
        Eigen::MatrixXd next(P, d);
        Eigen::VectorXd next_fit(P);
        for (Eigen::Index e = 0; e < elites; ++e) {
            next.row(e) = pop.row(order[static_cast<std::size_t>(e)]);
            next_fit[e] = fit[order[static_cast<std::size_t>(e)]];
        }
        next.bottomRows(n_children) = children;
        next_fit.tail(n_children) = child_fit;
        pop.swap(next);
        fit.swap(next_fit);

        const double gen_best = child_fit.maxCoeff(&arg);
        if (gen_best > result.best_value) {
            result.best_value = gen_best;
            result.best_point = children.row(arg).transpose();
        }
        result.best_history.push_back(fit.maxCoeff());
    }
    return result;
}

GaResult maximize(const PointFitness& fitness, const SearchBox& box, const GaConfig& config, Rng& rng,
                  const std::vector<Eigen::VectorXd>& seeds) {
    const BatchFitness batch = [&fitness](const Eigen::MatrixXd& block) {
        Eigen::VectorXd out(block.rows());
        for (Eigen::Index i = 0; i < block.rows(); ++i) out[i] = fitness(block.row(i).transpose());
        return out;
    };
    return maximize_batch(batch, box, config, rng, seeds);
}

}  // namespace hdbo
