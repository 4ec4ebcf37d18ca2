#include "hdbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hdbo/error.hpp"

namespace hdbo {

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double expected_improvement(double mean, double sd, double f_min) {
    if (!std::isfinite(mean) || !std::isfinite(sd) || !std::isfinite(f_min)) {
        throw NumericError("expected_improvement received a non-finite input");
    }
    if (sd < 0.0) throw NumericError("expected_improvement requires sd >= 0");
    if (sd <= kEiMinSd) return 0.0;
    const double gap = f_min - mean;
    const double z = gap / sd;
    return std::max(0.0, gap * normal_cdf(z) + sd * normal_pdf(z));
}

Eigen::VectorXd compose_point(const Eigen::VectorXd& incumbent, const SubspaceSelection& selection,
                              const Eigen::VectorXd& values) {
    if (static_cast<std::size_t>(values.size()) != selection.size()) {
        throw ContractError("compose_point: " + std::to_string(values.size()) + " values for " +
                            std::to_string(selection.size()) + " selected coordinates");
    }
    Eigen::VectorXd x = incumbent;
    for (std::size_t k = 0; k < selection.size(); ++k) {
        if (selection[k] >= static_cast<std::size_t>(x.size())) throw ContractError("selection index out of range");
        x[static_cast<Eigen::Index>(selection[k])] = values[static_cast<Eigen::Index>(k)];
    }
    return x;
}

AcquisitionContext::AcquisitionContext(const GpModel& model, double f_min, Eigen::VectorXd incumbent,
                                       SubspaceSelection selection)
    : model_(&model), f_min_(f_min), incumbent_(std::move(incumbent)), selection_(std::move(selection)) {
    const std::size_t D = model.box().dim();
    if (static_cast<std::size_t>(incumbent_.size()) != D) throw ContractError("incumbent has the wrong dimension");
    if (selection_.empty()) throw ContractError("selection must not be empty");
    std::vector<bool> seen(D, false);
    for (std::size_t idx : selection_) {
        if (idx >= D || seen[idx]) throw ContractError("selection indices must be distinct and in [0, D)");
        seen[idx] = true;
    }
}

double AcquisitionContext::essi(const Eigen::VectorXd& values) const {
    const Prediction p = model_->predict(compose_point(incumbent_, selection_, values));
    return expected_improvement(p.mean, std::sqrt(p.variance), f_min_);
}

Eigen::VectorXd AcquisitionContext::essi_batch(const Eigen::MatrixXd& values) const {
    if (static_cast<std::size_t>(values.cols()) != selection_.size()) {
        throw ContractError("essi_batch: column count differs from the selection size");
    }
    Eigen::MatrixXd points = incumbent_.transpose().replicate(values.rows(), 1);
    for (std::size_t k = 0; k < selection_.size(); ++k) {
        points.col(static_cast<Eigen::Index>(selection_[k])) = values.col(static_cast<Eigen::Index>(k));
    }
    Eigen::VectorXd mean;
    Eigen::VectorXd var;
    model_->predict_batch(points, mean, var);
    Eigen::VectorXd out(values.rows());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out[i] = expected_improvement(mean[i], std::sqrt(var[i]), f_min_);
    }
    return out;
}

double essi(const AcquisitionContext& ctx, const Eigen::VectorXd& values) {
    return ctx.essi(values);
}

}  // namespace hdbo
