#include "hdbo/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "hdbo/error.hpp"

namespace hdbo {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Plus: return "plus";
        case Verdict::Minus: return "minus";
        case Verdict::Approx: return "approx";
    }
    return "approx";
}

std::string verdict_symbol(Verdict v) {
    switch (v) {
        case Verdict::Plus: return "+";
        case Verdict::Minus: return "-";
        case Verdict::Approx: return "≈";
    }
    return "≈";
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1 .. j
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
        i = j;
    }
    return ranks;
}

double median(std::vector<double> values) {
    if (values.empty()) throw ContractError("median of an empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

// Two-sided exact p value. Ranks are multiples of 1/2, so doubled ranks are
// integers and the null distribution of 2W+ is a subset-sum count.
double exact_p(const std::vector<double>& ranks, double w_plus) {
    std::vector<std::size_t> doubled;
    std::size_t total = 0;
    for (double r : ranks) {
        doubled.push_back(static_cast<std::size_t>(std::llround(2.0 * r)));
        total += doubled.back();
    }
    std::vector<double> count(total + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t r : doubled) {
        for (std::size_t s = total; s >= r; --s) {
            count[s] += count[s - r];
            if (s == r) break;
        }
    }
    const auto w = static_cast<std::size_t>(std::llround(2.0 * w_plus));
    double lower = 0.0;
    double upper = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
        if (s <= w) lower += count[s];
        if (s >= w) upper += count[s];
    }
    const double patterns = std::ldexp(1.0, static_cast<int>(ranks.size()));
    return std::min(1.0, 2.0 * std::min(lower, upper) / patterns);
}

double normal_p(const std::vector<double>& ranks, const std::vector<double>& magnitudes, double w_plus) {
    const auto n = static_cast<double>(ranks.size());
    const double mean = n * (n + 1.0) / 4.0;
    double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    std::vector<double> sorted = magnitudes;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const auto t = static_cast<double>(j - i);
        var -= (t * t * t - t) / 48.0;
        i = j;
    }
    if (var <= 0.0) return 1.0;
    const double z = std::max(0.0, std::abs(w_plus - mean) - 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

}  // namespace

ComparisonVerdict wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, double alpha) {
    if (a.size() != b.size()) throw ContractError("wilcoxon_signed_rank needs paired samples of equal size");
    if (a.empty()) throw ContractError("wilcoxon_signed_rank needs non-empty samples");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");

    ComparisonVerdict out;
    out.median_a = median({a.begin(), a.end()});
    out.median_b = median({b.begin(), b.end()});

    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (!std::isfinite(d)) throw NumericError("wilcoxon_signed_rank received a non-finite value");
        if (d != 0.0) diffs.push_back(d);
    }
    out.n_effective = diffs.size();
    if (diffs.size() < 5) {
        out.degenerate = true;
        return out;
    }

    std::vector<double> magnitudes(diffs.size());
    std::transform(diffs.begin(), diffs.end(), magnitudes.begin(), [](double d) { return std::abs(d); });
    const std::vector<double> ranks = average_ranks(magnitudes);
    double w_plus = 0.0;
    double w_minus = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i) (diffs[i] > 0.0 ? w_plus : w_minus) += ranks[i];
    out.w_plus = w_plus;
    out.exact = diffs.size() <= kExactWilcoxonMax;
    out.p_value = out.exact ? exact_p(ranks, w_plus) : normal_p(ranks, magnitudes, w_plus);

    if (out.p_value < alpha) {
        bool a_better = false;
        if (out.median_a != out.median_b) {
            a_better = out.median_a < out.median_b;
        } else {
            a_better = w_plus < w_minus;
        }
        out.verdict = a_better ? Verdict::Plus : Verdict::Minus;
    }
    return out;
}

RunSummary summarize(std::span<const RunTrace> traces, std::string label) {
    if (traces.empty()) throw ContractError("summarize needs at least one trace");
    const std::size_t len = traces.front().records.size();
    RunSummary s;
    s.label = std::move(label);
    s.runs = traces.size();
    s.mean_curve.assign(len, 0.0);
    for (const auto& t : traces) {
        if (t.records.size() != len || len == 0) throw ContractError("summarize: traces cover different evaluation budgets");
        for (std::size_t k = 0; k < len; ++k) {
            if (t.records[k].n_evals != k + 1) throw ContractError("summarize: trace rows are not one per evaluation");
            s.mean_curve[k] += t.records[k].f_min;
        }
        s.finals.push_back(t.records.back().f_min);
    }
    const auto n = static_cast<double>(traces.size());
    for (double& v : s.mean_curve) v /= n;
    s.mean = std::accumulate(s.finals.begin(), s.finals.end(), 0.0) / n;
    s.median = median(s.finals);
    if (traces.size() > 1) {
        double ss = 0.0;
        for (double v : s.finals) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (n - 1.0));
    }
    return s;
}

}  // namespace hdbo
