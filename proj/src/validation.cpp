#include "hdbo/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include <Eigen/LU>

#include "hdbo/acquisition.hpp"
#include "hdbo/ga.hpp"
#include "hdbo/gp.hpp"
#include "hdbo/optimizers.hpp"
#include "hdbo/stats.hpp"

namespace hdbo::oracle {

NaiveKriging::NaiveKriging(const Eigen::MatrixXd& scaled_inputs, const Eigen::VectorXd& f, double length_scale,
                           double jitter)
    : U_(scaled_inputs), f_(f), l_(length_scale) {
    const Eigen::Index n = U_.rows();
    Eigen::MatrixXd R(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < U_.cols(); ++k) s += (U_(i, k) - U_(j, k)) * (U_(i, k) - U_(j, k));
            R(i, j) = std::exp(-s / (2.0 * l_ * l_));
        }
        R(i, i) += jitter;
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
    Rinv_ = lu.inverse();
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    mu_ = one.dot(Rinv_ * f_) / one.dot(Rinv_ * one);
    const Eigen::VectorXd r = f_ - one * mu_;
    sigma2_ = r.dot(Rinv_ * r) / static_cast<double>(n);
    nll_ = static_cast<double>(n) * std::log(sigma2_ + 1e-300) + std::log(lu.determinant());
}

std::pair<double, double> NaiveKriging::predict(const Eigen::VectorXd& u) const {
    const Eigen::Index n = U_.rows();
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < U_.cols(); ++k) s += (U_(i, k) - u[k]) * (U_(i, k) - u[k]);
        r[i] = std::exp(-s / (2.0 * l_ * l_));
    }
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    const double mean = mu_ + r.dot(Rinv_ * (f_ - one * mu_));
    const double a = 1.0 - one.dot(Rinv_ * r);
    const double var = sigma2_ * (1.0 - r.dot(Rinv_ * r) + a * a / one.dot(Rinv_ * one));
    return {mean, std::max(0.0, var)};
}

MonteCarloEstimate mc_expected_improvement(double mean, double sd, double f_min, std::size_t samples, Rng& rng) {
    // Welford accumulation of max(f_min - Y, 0).
    double m = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double y = mean + sd * rng.normal();
        const double imp = std::max(f_min - y, 0.0);
        const double delta = imp - m;
        m += delta / static_cast<double>(i + 1);
        m2 += delta * (imp - m);
    }
    const double var = samples > 1 ? m2 / static_cast<double>(samples - 1) : 0.0;
    return {m, std::sqrt(var / static_cast<double>(samples))};
}

double brute_force_wilcoxon_p(std::span<const double> a, std::span<const double> b) {
    std::vector<double> mags;
    std::vector<bool> positive;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (d == 0.0) continue;
        mags.push_back(std::abs(d));
        positive.push_back(d > 0.0);
    }
    const std::size_t n = mags.size();
    // Mid-ranks by counting: rank = #smaller + (#equal + 1) / 2.
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n; ++i) {
        double smaller = 0.0;
        double equal = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (mags[j] < mags[i]) smaller += 1.0;
            if (mags[j] == mags[i]) equal += 1.0;
        }
        ranks[i] = smaller + (equal + 1.0) / 2.0;
    }
    double observed = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (positive[i]) observed += ranks[i];
    }
    const std::uint64_t patterns = std::uint64_t{1} << n;
    std::uint64_t at_most = 0;
    std::uint64_t at_least = 0;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if ((mask >> i) & 1U) w += ranks[i];
        }
        if (w <= observed) ++at_most;
        if (w >= observed) ++at_least;
    }
    return std::min(1.0, 2.0 * static_cast<double>(std::min(at_most, at_least)) / static_cast<double>(patterns));
}

std::pair<double, double> grid_minimum(const std::function<double(double)>& f, double lo, double hi, std::size_t points) {
    double best_x = lo;
    double best_f = f(lo);
    for (std::size_t i = 1; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        const double v = f(x);
        if (v < best_f) {
            best_f = v;
            best_x = x;
        }
    }
    return {best_x, best_f};
}

bool lhs_stratified(const Eigen::MatrixXd& X, const SearchBox& box) {
    const auto n = static_cast<std::size_t>(X.rows());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        std::vector<int> hits(n, 0);
        const double lo = box.lower()[j];
        const double w = box.upper()[j] - lo;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double u = (X(i, j) - lo) / w;
            if (!(u >= 0.0 && u < 1.0)) return false;
            auto k = static_cast<std::size_t>(std::floor(u * static_cast<double>(n)));
            // Rescaling can land a value that sits just below a stratum edge
            // onto the edge; compare against the exact stratum bounds.
            if (k < n && u < static_cast<double>(k) / static_cast<double>(n)) --k;
            if (k >= n) return false;
            ++hits[k];
        }
        if (std::any_of(hits.begin(), hits.end(), [](int h) { return h != 1; })) return false;
    }
    return true;
}

}  // namespace hdbo::oracle

namespace hdbo {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), pattern, a, b);
    return buf;
}

ValidationCheck gp_oracle_check(std::size_t instances) {
    Rng rng(RngState{20240601, 1});
    double worst = 0.0;
    for (std::size_t t = 0; t < instances; ++t) {
        const std::size_t D = 1 + rng.below(10);
        const std::size_t n = 5 + rng.below(36);
        const SearchBox box = SearchBox::cube(D, -2.0, 3.0);
        const Eigen::MatrixXd X = lhs_sample(n, box, rng);
        Eigen::VectorXd y(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = X.row(i).array().sin().sum() + 0.1 * X.row(i).squaredNorm();
        // Length scale tied to the typical point spacing keeps R well enough
        // conditioned for a dense inverse to resolve 1e-8.
        const double spacing = std::pow(static_cast<double>(n), -1.0 / static_cast<double>(D));
        const double l = rng.uniform(0.3, 1.0) * spacing * std::sqrt(static_cast<double>(D));
        const GpModel model = GpModel::fit_fixed(Archive(X, y), box, l);
        const oracle::NaiveKriging ref(model.scaled_inputs(), y, l, model.jitter());
        worst = std::max(worst, std::abs(model.mu_hat() - ref.mu_hat()) / (1.0 + std::abs(ref.mu_hat())));
        worst = std::max(worst, std::abs(model.sigma2_hat() - ref.sigma2_hat()) / (1.0 + ref.sigma2_hat()));
        for (int q = 0; q < 10; ++q) {
            const Eigen::VectorXd x = uniform_point(box, rng);
            const Prediction p = model.predict_formula(x);
            const auto [m, v] = ref.predict(box.to_unit(x));
            worst = std::max(worst, std::abs(p.mean - m) / (1.0 + std::abs(m)));
            worst = std::max(worst, std::abs(p.variance - v) / (1.0 + v));
        }
    }
    return {"GP matches explicit-inverse kriging (rel <= 1e-8)", worst <= 1e-8, fmt("worst relative deviation %.3g", worst)};
}

ValidationCheck gp_interpolation_check() {
    const SearchBox box = SearchBox::cube(5, -100.0, 100.0);
    Rng rng(RngState{5, 5});
    const Eigen::MatrixXd X = lhs_sample(20, box, rng);
    const Eigen::VectorXd y = X.rowwise().squaredNorm();
    const GpModel model = GpModel::fit(Archive(X, y), box);
    double worst_mean = 0.0;
    double worst_var = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Prediction p = model.predict_formula(X.row(i).transpose());
        worst_mean = std::max(worst_mean, std::abs(p.mean - y[i]) / (1.0 + std::abs(y[i])));
        worst_var = std::max(worst_var, p.variance / model.sigma2_hat());
    }
    return {"GP interpolates training points (5-D sphere, 20 LHS points)", worst_mean <= 1e-6 && worst_var <= 1e-6,
            fmt("max |dy|/(1+|y|) = %.3g, max s2/sigma2 = %.3g", worst_mean, worst_var)};
}

ValidationCheck ei_check(std::size_t triples, std::size_t samples) {
    Rng rng(RngState{77, 3});
    std::size_t failures = 0;
    double worst = 0.0;
    for (std::size_t t = 0; t < triples; ++t) {
        const double mean = rng.uniform(-3.0, 3.0);
        const double sd = rng.uniform(0.05, 3.0);
        const double f_min = mean + sd * rng.uniform(-3.0, 3.0);
        const double closed = expected_improvement(mean, sd, f_min);
        const auto mc = oracle::mc_expected_improvement(mean, sd, f_min, samples, rng);
        const double z = std::abs(closed - mc.mean) / std::max(mc.std_error, 1e-300);
        worst = std::max(worst, z);
        if (z > 3.0) ++failures;
    }
    const double at_zero = expected_improvement(1.0, 1.0, 1.0);
    const bool ok_zero = std::abs(at_zero - 0.3989423) <= 1e-6 && expected_improvement(0.3, 0.0, 5.0) == 0.0;
    // Roughly 0.27% of honest comparisons exceed 3 standard errors.
    const bool ok = ok_zero && failures <= std::max<std::size_t>(1, triples / 100);
    return {"EI closed form vs Monte Carlo; EI(z=0)=phi(0); EI(sd=0)=0", ok,
            fmt("max deviation %.2f standard errors, EI(mean=f_min, sd=1) = %.9f", worst, at_zero)};
}

ValidationCheck essi_check() {
    const SearchBox box = SearchBox::cube(4, 0.0, 1.0);
    Rng rng(RngState{9, 9});
    const Eigen::MatrixXd X = lhs_sample(12, box, rng);
    Eigen::VectorXd y(12);
    for (Eigen::Index i = 0; i < 12; ++i) y[i] = std::cos(3.0 * X(i, 0)) + X(i, 1) * X(i, 2) - X(i, 3);
    const Archive archive(X, y);
    const GpModel model = GpModel::fit(archive, box);
    const SubspaceSelection sel{2, 0};
    const AcquisitionContext ctx(model, archive.f_min(), archive.incumbent(), sel);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd v(2);
        v << rng.uniform(), rng.uniform();
        Eigen::VectorXd x = archive.incumbent();
        x[2] = v[0];
        x[0] = v[1];
        const Prediction p = model.predict(x);
        const double direct = expected_improvement(p.mean, std::sqrt(p.variance), archive.f_min());
        worst = std::max(worst, std::abs(ctx.essi(v) - direct));
    }
    return {"ESSI equals EI of the composed point", worst <= 1e-12, fmt("max |difference| %.3g", worst)};
}

ValidationCheck dimension_rule_check() {
    const bool ok = update_dimension(5, 90.3, 63.9) == 4 && update_dimension(4, 49.8, 63.9) == 4 &&
                    update_dimension(1, 10.0, 5.0) == 1 && update_dimension(3, 2.0, 2.0) == 3;
    return {"Adaptive drop rule (90.3 vs 63.9 drops, 49.8 keeps, floor at 1)", ok, ""};
}

ValidationCheck budget_check() {
    const bool ok = ga_budget(Algorithm::StandardBo, 37) == GaBudget{200, 100} &&
                    ga_budget(Algorithm::AdaDropout, 1) == GaBudget{10, 20} &&
                    ga_budget(Algorithm::AdaDropout, 100) == GaBudget{400, 50} &&
                    ga_budget(Algorithm::CoordinateLine, 1) == GaBudget{10, 20};
    return {"GA budget table", ok, ""};
}

ValidationCheck wilcoxon_check() {
    Rng rng(RngState{12, 12});
    std::size_t mismatches = 0;
    for (std::size_t n = 5; n <= kExactWilcoxonMax; ++n) {
        for (int rep = 0; rep < 25; ++rep) {
            std::vector<double> a(n);
            std::vector<double> b(n);
            for (std::size_t i = 0; i < n; ++i) {
                // Coarse values so ties and zero differences occur.
                a[i] = std::round(rng.uniform(0.0, 6.0));
                b[i] = std::round(rng.uniform(0.0, 6.0)) + (rep % 3 == 0 ? 0.0 : 0.5 * rng.uniform());
            }
            const auto v = wilcoxon_signed_rank(a, b);
            if (v.degenerate) continue;
            if (v.p_value != oracle::brute_force_wilcoxon_p(a, b)) ++mismatches;
        }
    }
    std::vector<double> hi{7, 8, 9, 10, 11, 12};
    std::vector<double> lo{1, 2, 3, 4, 5, 6};
    const double p6 = wilcoxon_signed_rank(hi, lo).p_value;
    return {"Wilcoxon exact branch equals brute-force enumeration; n=6 dominated p=0.03125",
            mismatches == 0 && p6 == 0.03125, fmt("mismatches %.0f, n=6 p = %.6g", static_cast<double>(mismatches), p6)};
}

ValidationCheck doe_check() {
    Rng rng(RngState{3, 4});
    bool ok = true;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 1 + rng.below(60);
        const std::size_t D = 1 + rng.below(8);
        const SearchBox box = SearchBox::cube(D, -rng.uniform(0.1, 50.0), rng.uniform(0.1, 50.0));
        ok = ok && oracle::lhs_stratified(lhs_sample(n, box, rng), box);
    }
    double worst = 0.0;
    for (std::size_t D : {1, 2, 5, 10, 40}) {
        const Eigen::MatrixXd Q = random_rotation(D, rng);
        const auto n = static_cast<Eigen::Index>(D);
        worst = std::max(worst, (Q.transpose() * Q - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff());
    }
    return {"LHS stratification and rotation orthogonality", ok && worst <= 1e-12, fmt("max |Q^T Q - I| = %.3g", worst)};
}

}  // namespace

std::vector<ValidationCheck> run_validation_battery(bool thorough) {
    std::vector<ValidationCheck> checks;
    checks.push_back(gp_oracle_check(thorough ? 50 : 20));
    checks.push_back(gp_interpolation_check());
    checks.push_back(ei_check(thorough ? 100 : 20, thorough ? 10'000'000 : 200'000));
    checks.push_back(essi_check());
    checks.push_back(dimension_rule_check());
    checks.push_back(budget_check());
    checks.push_back(wilcoxon_check());
    checks.push_back(doe_check());
    return checks;
}

}  // namespace hdbo
