#ifndef HDBO_GP_HPP
#define HDBO_GP_HPP

#include <cstddef>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "hdbo/doe.hpp"

namespace hdbo {

/// Evaluated dataset. Rows of X are design points in original units; the
/// incumbent is the lowest y, ties going to the lowest row index.
class Archive {
public:
    Archive(Eigen::MatrixXd X, Eigen::VectorXd y);

    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(y_.size()); }
    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(X_.cols()); }
    [[nodiscard]] const Eigen::MatrixXd& X() const { return X_; }
    [[nodiscard]] const Eigen::VectorXd& y() const { return y_; }

    [[nodiscard]] std::size_t incumbent_index() const { return incumbent_; }
    [[nodiscard]] Eigen::VectorXd incumbent() const { return X_.row(static_cast<Eigen::Index>(incumbent_)).transpose(); }
    [[nodiscard]] double f_min() const { return y_[static_cast<Eigen::Index>(incumbent_)]; }

    void append(const Eigen::VectorXd& x, double value);

private:
    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
    std::size_t incumbent_ = 0;
};

struct LengthScaleBounds {
    double lower = 0.01;
    double upper = 100.0;
};

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

/// exp(-|xi - xj|^2 / (2 l^2)).
double rbf_corr(const Eigen::VectorXd& xi, const Eigen::VectorXd& xj, double length_scale);

/// Floor inside ln(sigma2 + eps) so constant-y archives stay finite.
inline constexpr double kLogFloor = 1e-300;

/// Ordinary kriging with an isotropic RBF correlation on inputs scaled to the
/// unit cube. Immutable once fitted; safe to query from several threads.
class GpModel {
public:
    /// Profile-likelihood fit of the length scale over `bounds`: 64 log-spaced
    /// grid values, then golden-section refinement around the grid minimum.
    static GpModel fit(const Archive& archive, const SearchBox& box, LengthScaleBounds bounds = {});
    /// Fit with the length scale held fixed (unit-cube units).
    static GpModel fit_fixed(const Archive& archive, const SearchBox& box, double length_scale);

    /// Kriging mean and variance. A query that coincides with a training
    /// point (scaled distance <= 1e-12) returns that point's (y, 0).
    [[nodiscard]] Prediction predict(const Eigen::VectorXd& x) const;
    /// Kriging mean and variance without the coincidence shortcut.
    [[nodiscard]] Prediction predict_formula(const Eigen::VectorXd& x) const;
    /// Row-wise predict() for a block of query points (original units).
    void predict_batch(const Eigen::MatrixXd& points, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const;

    [[nodiscard]] double length_scale() const { return length_scale_; }
    [[nodiscard]] double mu_hat() const { return mu_hat_; }
    [[nodiscard]] double sigma2_hat() const { return sigma2_hat_; }
    [[nodiscard]] double jitter() const { return jitter_; }
    [[nodiscard]] double nll() const { return nll_; }
    /// Lower Cholesky factor of R + jitter*I.
    [[nodiscard]] Eigen::MatrixXd chol() const { return llt_.matrixL(); }
    /// Training inputs mapped to the unit cube.
    [[nodiscard]] const Eigen::MatrixXd& scaled_inputs() const { return U_; }
    [[nodiscard]] const Eigen::VectorXd& targets() const { return f_; }
    [[nodiscard]] const SearchBox& box() const { return box_; }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(f_.size()); }

private:
    GpModel(const Archive& archive, const SearchBox& box);
    void predict_block(const Eigen::MatrixXd& scaled, Eigen::VectorXd& mean, Eigen::VectorXd& variance,
                       bool snap) const;

    SearchBox box_;
    Eigen::MatrixXd U_;
    Eigen::VectorXd f_;
    Eigen::VectorXd u_sqnorm_;
    double length_scale_ = 1.0;
    double jitter_ = 0.0;
    double mu_hat_ = 0.0;
    double sigma2_hat_ = 0.0;
    double nll_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;     // R^-1 (f - 1 mu)
    Eigen::VectorXd rinv_one_;  // R^-1 1
    double one_rinv_one_ = 1.0;
};

/// n ln(sigma2(l) + eps) + ln det(R(l) + jitter I), inputs scaled by `box`.
double concentrated_nll(double length_scale, const Archive& archive, const SearchBox& box);

}  // namespace hdbo

#endif  // HDBO_GP_HPP
