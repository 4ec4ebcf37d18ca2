#ifndef HDBO_STATS_HPP
#define HDBO_STATS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hdbo/optimizers.hpp"

namespace hdbo {

/// Outcome of comparing sample a against sample b (minimization):
/// Plus means a is significantly better, Minus significantly worse.
enum class Verdict { Plus, Minus, Approx };

std::string to_string(Verdict v);
/// "+", "≈" or "-".
std::string verdict_symbol(Verdict v);

struct ComparisonVerdict {
    double p_value = 1.0;
    Verdict verdict = Verdict::Approx;
    double median_a = 0.0;
    double median_b = 0.0;
    /// Nonzero differences left after discarding ties at zero.
    std::size_t n_effective = 0;
    /// Sum of ranks of the positive differences a - b.
    double w_plus = 0.0;
    bool exact = false;
    /// Fewer than five nonzero differences; no test was performed.
    bool degenerate = false;
};

/// Largest effective sample size handled by exact enumeration.
inline constexpr std::size_t kExactWilcoxonMax = 12;

/// Paired two-sided Wilcoxon signed-rank test. Zero differences are
/// discarded, tied magnitudes get averaged ranks. n <= 12 uses the exact
/// null distribution; larger n the normal approximation with continuity
/// and tie corrections.
ComparisonVerdict wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

/// Averaged (mid) ranks, 1-based, of the values.
std::vector<double> average_ranks(std::span<const double> values);

double median(std::vector<double> values);

struct RunSummary {
    std::string label;
    std::size_t runs = 0;
    double mean = 0.0;
    double median = 0.0;
    /// Sample standard deviation (n - 1); 0 for a single run.
    double stddev = 0.0;
    std::vector<double> finals;
    /// Mean f_min after 1, 2, ..., N evaluations.
    std::vector<double> mean_curve;
};

/// Statistics of final f_min plus the mean convergence curve. All traces
/// must cover the same number of evaluations.
RunSummary summarize(std::span<const RunTrace> traces, std::string label = {});

}  // namespace hdbo

#endif  // HDBO_STATS_HPP
