#include "hdbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hdbo/error.hpp"

namespace hdbo {

Archive::Archive(Eigen::MatrixXd X, Eigen::VectorXd y) : X_(std::move(X)), y_(std::move(y)) {
    if (y_.size() < 1) throw ContractError("archive must hold at least one point");
    if (X_.rows() != y_.size()) throw ContractError("archive X and y differ in length");
    for (Eigen::Index i = 1; i < y_.size(); ++i) {
        if (y_[i] < y_[static_cast<Eigen::Index>(incumbent_)]) incumbent_ = static_cast<std::size_t>(i);
    }
}

void Archive::append(const Eigen::VectorXd& x, double value) {
    if (x.size() != X_.cols()) throw ContractError("appended point has the wrong dimension");
    const Eigen::Index n = X_.rows();
    X_.conservativeResize(n + 1, Eigen::NoChange);
    X_.row(n) = x.transpose();
    y_.conservativeResize(n + 1);
    y_[n] = value;
    if (value < f_min()) incumbent_ = static_cast<std::size_t>(n);
}

double rbf_corr(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj, double length_scale) {
    if (!(length_scale > 0.0)) throw ConfigError("length scale must be positive");
    if (xi.size() != xj.size()) throw ContractError("rbf_corr vectors differ in length");
    return std::exp(-(xi - xj).squaredNorm() / (2.0 * length_scale * length_scale));
}

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-2;
constexpr int kGridSize = 64;
constexpr double kRefineRelTol = 1e-3;

struct Profile {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    Eigen::VectorXd rinv_one;
    double one_rinv_one = 0.0;
    double mu = 0.0;
    Eigen::VectorXd alpha;
    double sigma2 = 0.0;
    double nll = 0.0;
};

Eigen::MatrixXd scale_inputs(const Eigen::MatrixXd& X, const SearchBox& box) {
    if (static_cast<std::size_t>(X.cols()) != box.dim()) throw ContractError("archive and box dimensions differ");
    const Eigen::RowVectorXd lo = box.lower().transpose();
    const Eigen::RowVectorXd inv_width = box.width().cwiseInverse().transpose();
    return ((X.rowwise() - lo).array().rowwise() * inv_width.array()).matrix();
}

Eigen::MatrixXd pairwise_sqdist(const Eigen::MatrixXd& U) {
    const Eigen::Index n = U.rows();
    const Eigen::MatrixXd Ut = U.transpose();  // points as contiguous columns
    Eigen::MatrixXd d2(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        d2(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = (Ut.col(i) - Ut.col(j)).squaredNorm();
            d2(i, j) = v;
            d2(j, i) = v;
        }
    }
    return d2;
}

bool factor_ok(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    if (llt.info() != Eigen::Success) return false;
    const auto diag = llt.matrixLLT().diagonal();
    return diag.allFinite() && (diag.array() > 0.0).all();
}

/// Factorizes R(l) + jitter I with jitter escalation into `p`; false on
/// failure. `R` is scratch space. Both are reused across calls so the grid
/// search does not allocate (fresh n x n buffers cost more than the
/// factorization through page faults).
bool profile_at(const Eigen::MatrixXd& sqdist, const Eigen::VectorXd& f, double l, Profile& p, Eigen::MatrixXd& R) {
    const Eigen::Index n = f.size();
    // Correlations below e^-700 are stored as exact zeros; letting exp
    // underflow into subnormals makes the factorization far slower.
    const double scale = -1.0 / (2.0 * l * l);
    R.resize(n, n);
    R.array() = (sqdist.array() * scale < -700.0).select(0.0, (sqdist.array() * scale).exp());
    // diag(R) is all ones, so the scale factor max(1, mean diag) is 1.
    for (double jitter = kJitterStart; jitter <= kJitterMax; jitter *= 10.0) {
        R.diagonal().setConstant(1.0 + jitter);
        p.llt.compute(R);
        if (!factor_ok(p.llt)) continue;
        p.jitter = jitter;
        p.rinv_one = p.llt.solve(Eigen::VectorXd::Ones(n));
        p.one_rinv_one = p.rinv_one.sum();
        if (!std::isfinite(p.one_rinv_one) || p.one_rinv_one <= 0.0) continue;

        const bool constant = (f.array() == f[0]).all();
        if (constant) {
            p.mu = f[0];
            p.alpha = Eigen::VectorXd::Zero(n);
            p.sigma2 = 0.0;
        } else {
            p.mu = p.rinv_one.dot(f) / p.one_rinv_one;
            p.alpha = p.llt.solve((f.array() - p.mu).matrix());
            p.sigma2 = std::max(0.0, (f.array() - p.mu).matrix().dot(p.alpha) / static_cast<double>(n));
        }
        const double logdet = 2.0 * p.llt.matrixLLT().diagonal().array().log().sum();
        p.nll = static_cast<double>(n) * std::log(p.sigma2 + kLogFloor) + logdet;
        if (!std::isfinite(p.nll) || !p.alpha.allFinite()) continue;
        return true;
    }
    return false;
}

Profile require_profile(const Eigen::MatrixXd& sqdist, const Eigen::VectorXd& f, double l) {
    Profile p;
    Eigen::MatrixXd R;
    if (!profile_at(sqdist, f, l, p, R)) {
        throw ModelError("Cholesky factorization failed at length scale " + std::to_string(l) +
                         " even with jitter " + std::to_string(kJitterMax));
    }
    return p;
}

class NllEvaluator {
public:
    NllEvaluator(const Eigen::MatrixXd& sqdist, const Eigen::VectorXd& f) : sqdist_(sqdist), f_(f) {}
    double operator()(double l) {
        return profile_at(sqdist_, f_, l, p_, R_) ? p_.nll : std::numeric_limits<double>::infinity();
    }

private:
    const Eigen::MatrixXd& sqdist_;
    const Eigen::VectorXd& f_;
    Profile p_;
    Eigen::MatrixXd R_;
};

/// Grid search in log l, then golden-section refinement between the grid
/// neighbours of the minimum.
double search_length_scale(const Eigen::MatrixXd& sqdist, const Eigen::VectorXd& f, LengthScaleBounds bounds) {
    const double log_lo = std::log(bounds.lower);
    const double log_hi = std::log(bounds.upper);
    std::vector<double> grid(kGridSize);
    std::vector<double> value(kGridSize);
    std::size_t best = 0;
    NllEvaluator nll_or_inf(sqdist, f);
    for (int k = 0; k < kGridSize; ++k) {
        const auto i = static_cast<std::size_t>(k);
        grid[i] = log_lo + (log_hi - log_lo) * static_cast<double>(k) / (kGridSize - 1);
        value[i] = nll_or_inf(std::exp(grid[i]));
        if (value[i] < value[best]) best = i;
    }
    if (!std::isfinite(value[best])) {
        throw ModelError("correlation matrix is not factorizable for any length scale in the bounds");
    }

    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[std::min<std::size_t>(best + 1, kGridSize - 1)];
    double best_t = grid[best];
    double best_v = value[best];
    const double tol = std::log1p(kRefineRelTol);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = nll_or_inf(std::exp(c));
    double fd = nll_or_inf(std::exp(d));
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = nll_or_inf(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = nll_or_inf(std::exp(d));
        }
    }
    if (fc < best_v) {
        best_v = fc;
        best_t = c;
    }
    if (fd < best_v) {
        best_t = d;
    }
    return std::clamp(std::exp(best_t), bounds.lower, bounds.upper);
}

}  // namespace

GpModel::GpModel(const Archive& archive, const SearchBox& box)
    : box_(box), U_(scale_inputs(archive.X(), box)), f_(archive.y()) {
    if (archive.size() < 2) throw ContractError("GP fit needs at least two points");
    if (!f_.allFinite()) throw NumericError("GP targets must be finite");
    u_sqnorm_ = U_.rowwise().squaredNorm();
}

GpModel GpModel::fit(const Archive& archive, const SearchBox& box, LengthScaleBounds bounds) {
    if (!(bounds.lower > 0.0) || !(bounds.lower <= bounds.upper) || !std::isfinite(bounds.upper)) {
        throw ConfigError("length-scale bounds must satisfy 0 < lower <= upper < inf");
    }
    GpModel model(archive, box);
    const Eigen::MatrixXd sqdist = pairwise_sqdist(model.U_);
    const double l = bounds.lower == bounds.upper ? bounds.lower : search_length_scale(sqdist, model.f_, bounds);
    Profile p = require_profile(sqdist, model.f_, l);
    model.length_scale_ = l;
    model.jitter_ = p.jitter;
    model.mu_hat_ = p.mu;
    model.sigma2_hat_ = p.sigma2;
    model.nll_ = p.nll;
    model.llt_ = std::move(p.llt);
    model.alpha_ = std::move(p.alpha);
    model.rinv_one_ = std::move(p.rinv_one);
    model.one_rinv_one_ = p.one_rinv_one;
    return model;
}

GpModel GpModel::fit_fixed(const Archive& archive, const SearchBox& box, double length_scale) {
    if (!(length_scale > 0.0)) throw ConfigError("length scale must be positive");
    return fit(archive, box, LengthScaleBounds{length_scale, length_scale});
}

void GpModel::predict_block(const Eigen::MatrixXd& scaled, Eigen::VectorXd& mean, Eigen::VectorXd& variance,
                            bool snap) const {
    const Eigen::Index m = scaled.rows();
    mean.resize(m);
    variance.resize(m);
    // Row chunks keep every temporary below glibc's mmap threshold; fresh
    // mmap'd buffers page-fault on each call and dominate the cost.
    const Eigen::Index n = U_.rows();
    const Eigen::Index chunk = std::max<Eigen::Index>(1, 12000 / std::max<Eigen::Index>(n, 1));
    for (Eigen::Index start = 0; start < m; start += chunk) {
        const Eigen::Index rows = std::min(chunk, m - start);
        const auto block = scaled.middleRows(start, rows);
        Eigen::MatrixXd sq = -2.0 * block * U_.transpose();
        sq.colwise() += block.rowwise().squaredNorm();
        sq.rowwise() += u_sqnorm_.transpose();
        sq = sq.cwiseMax(0.0);
        const double scale = -1.0 / (2.0 * length_scale_ * length_scale_);
        const Eigen::MatrixXd C = (sq.array() * scale < -700.0).select(0.0, (sq.array() * scale).exp()).matrix();

        mean.segment(start, rows) = (C * alpha_).array() + mu_hat_;
        Eigen::MatrixXd V = C.transpose();
        llt_.matrixL().solveInPlace(V);
        const Eigen::VectorXd quad = V.colwise().squaredNorm().transpose();
        const Eigen::VectorXd cross = C * rinv_one_;
        variance.segment(start, rows) =
            (sigma2_hat_ * (1.0 - quad.array() + (1.0 - cross.array()).square() / one_rinv_one_)).cwiseMax(0.0);

        if (!snap) continue;
        for (Eigen::Index i = 0; i < rows; ++i) {
            Eigen::Index j = 0;
            if (sq.row(i).minCoeff(&j) > 1e-12) continue;
            for (Eigen::Index k = 0; k < n; ++k) {
                if (sq(i, k) <= 1e-12 && (block.row(i) - U_.row(k)).squaredNorm() <= 1e-24) {
                    mean[start + i] = f_[k];
                    variance[start + i] = 0.0;
                    break;
                }
            }
        }
    }
}

Prediction GpModel::predict(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != box_.dim()) throw ContractError("query has the wrong dimension");
    Eigen::VectorXd mean;
    Eigen::VectorXd var;
    predict_block(box_.to_unit(x).transpose(), mean, var, true);
    return {mean[0], var[0]};
}

Prediction GpModel::predict_formula(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != box_.dim()) throw ContractError("query has the wrong dimension");
    Eigen::VectorXd mean;
    Eigen::VectorXd var;
    predict_block(box_.to_unit(x).transpose(), mean, var, false);
    return {mean[0], var[0]};
}

void GpModel::predict_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const {
    if (static_cast<std::size_t>(points.cols()) != box_.dim()) throw ContractError("query block has the wrong dimension");
    predict_block(scale_inputs(points, box_), mean, variance, true);
}

double concentrated_nll(double length_scale, const Archive& archive, const SearchBox& box) {
    if (!(length_scale > 0.0)) throw ConfigError("length scale must be positive");
    if (archive.size() < 2) throw ContractError("concentrated_nll needs at least two points");
    const Eigen::MatrixXd sqdist = pairwise_sqdist(scale_inputs(archive.X(), box));
    return require_profile(sqdist, archive.y(), length_scale).nll;
}

}  // namespace hdbo
