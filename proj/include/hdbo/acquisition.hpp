#ifndef HDBO_ACQUISITION_HPP
#define HDBO_ACQUISITION_HPP

#include <Eigen/Dense>

#include "hdbo/doe.hpp"
#include "hdbo/gp.hpp"

namespace hdbo {

/// Standard-deviation threshold below which EI is defined as exactly zero.
inline constexpr double kEiMinSd = 1e-12;

double normal_pdf(double z);
double normal_cdf(double z);

/// Closed-form expected improvement for minimization, E[max(f_min - Y, 0)]
/// with Y ~ N(mean, sd^2). Returns 0 when sd <= 1e-12.
double expected_improvement(double mean, double sd, double f_min);

/// Copy of `incumbent` with coordinates `selection[k]` set to `values[k]`.
Eigen::VectorXd compose_point(const Eigen::VectorXd& incumbent, const SubspaceSelection& selection,
                              const Eigen::VectorXd& values);

/// State for expected subspace improvement: EI of the GP restricted to the
/// axis-aligned slice through the incumbent spanned by `selection`.
class AcquisitionContext {
public:
    AcquisitionContext(const GpModel& model, double f_min, Eigen::VectorXd incumbent, SubspaceSelection selection);

    [[nodiscard]] const GpModel& model() const { return *model_; }
    [[nodiscard]] double f_min() const { return f_min_; }
    [[nodiscard]] const Eigen::VectorXd& incumbent() const { return incumbent_; }
    [[nodiscard]] const SubspaceSelection& selection() const { return selection_; }

    /// ESSI at one subspace point.
    [[nodiscard]] double essi(const Eigen::VectorXd& values) const;
    /// ESSI for each row of `values` (rows are d-dimensional subspace points).
    [[nodiscard]] Eigen::VectorXd essi_batch(const Eigen::MatrixXd& values) const;
    /// Box of the selected coordinates.
    [[nodiscard]] SearchBox subspace_box() const { return model_->box().project(selection_); }

private:
    const GpModel* model_;
    double f_min_;
    Eigen::VectorXd incumbent_;
    SubspaceSelection selection_;
};

double essi(const AcquisitionContext& ctx, const Eigen::VectorXd& values);

}  // namespace hdbo

#endif  // HDBO_ACQUISITION_HPP
