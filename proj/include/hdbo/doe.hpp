#ifndef HDBO_DOE_HPP
#define HDBO_DOE_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "hdbo/rng.hpp"

namespace hdbo {

/// Axis-aligned search box. Construction validates lower[i] < upper[i].
class SearchBox {
public:
    SearchBox(Eigen::VectorXd lower, Eigen::VectorXd upper);
    /// The cube [lo, hi]^dim.
    static SearchBox cube(std::size_t dim, double lo, double hi);

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(lower_.size()); }
    [[nodiscard]] const Eigen::VectorXd& lower() const { return lower_; }
    [[nodiscard]] const Eigen::VectorXd& upper() const { return upper_; }
    [[nodiscard]] Eigen::VectorXd width() const { return upper_ - lower_; }

    [[nodiscard]] bool contains(const Eigen::VectorXd& x) const;
    [[nodiscard]] Eigen::VectorXd clamp(const Eigen::VectorXd& x) const;
    /// The box restricted to the given coordinates, in the given order.
    [[nodiscard]] SearchBox project(const std::vector<std::size_t>& indices) const;

    /// Affine maps between the box and the unit cube.
    [[nodiscard]] Eigen::VectorXd to_unit(const Eigen::VectorXd& x) const;
    [[nodiscard]] Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const;

private:
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
};

/// Ordered set of distinct coordinate indices optimized in one iteration.
using SubspaceSelection = std::vector<std::size_t>;

/// Latin hypercube design: n rows, one jittered sample per stratum in every
/// dimension, strata independently permuted per dimension.
Eigen::MatrixXd lhs_sample(std::size_t n, const SearchBox& box, Rng& rng);

/// Uniform draw of d distinct indices from [0, D), without replacement.
SubspaceSelection select_subspace(std::size_t d, std::size_t D, Rng& rng);

/// Haar-style random orthogonal matrix (QR of a standard normal matrix with
/// the sign of R's diagonal folded into Q).
Eigen::MatrixXd random_rotation(std::size_t D, Rng& rng);

/// Uniform point in the box.
Eigen::VectorXd uniform_point(const SearchBox& box, Rng& rng);

}  // namespace hdbo

#endif  // HDBO_DOE_HPP
