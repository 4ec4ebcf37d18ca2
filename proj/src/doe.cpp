#include "hdbo/doe.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "hdbo/error.hpp"

namespace hdbo {

SearchBox::SearchBox(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() < 1) throw ConfigError("search box must have at least one dimension");
    if (lower_.size() != upper_.size()) throw ConfigError("search box bounds differ in length");
    for (Eigen::Index i = 0; i < lower_.size(); ++i) {
        if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
            throw ConfigError("search box requires finite lower < upper in dimension " + std::to_string(i));
        }
    }
}

SearchBox SearchBox::cube(std::size_t dim, double lo, double hi) {
    const auto n = static_cast<Eigen::Index>(dim);
    return SearchBox(Eigen::VectorXd::Constant(n, lo), Eigen::VectorXd::Constant(n, hi));
}

bool SearchBox::contains(const Eigen::VectorXd& x) const {
    if (x.size() != lower_.size()) return false;
    return (x.array() >= lower_.array()).all() && (x.array() <= upper_.array()).all();
}

Eigen::VectorXd SearchBox::clamp(const Eigen::VectorXd& x) const {
    return x.cwiseMax(lower_).cwiseMin(upper_);
}

SearchBox SearchBox::project(const std::vector<std::size_t>& indices) const {
    Eigen::VectorXd lo(static_cast<Eigen::Index>(indices.size()));
    Eigen::VectorXd hi(lo.size());
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= dim()) throw ConfigError("projection index out of range");
        lo[static_cast<Eigen::Index>(k)] = lower_[static_cast<Eigen::Index>(indices[k])];
        hi[static_cast<Eigen::Index>(k)] = upper_[static_cast<Eigen::Index>(indices[k])];
    }
    return SearchBox(std::move(lo), std::move(hi));
}

Eigen::VectorXd SearchBox::to_unit(const Eigen::VectorXd& x) const {
    return ((x - lower_).array() / (upper_ - lower_).array()).matrix();
}

Eigen::VectorXd SearchBox::from_unit(const Eigen::VectorXd& u) const {
    return lower_ + (u.array() * (upper_ - lower_).array()).matrix();
}

Eigen::MatrixXd lhs_sample(std::size_t n, const SearchBox& box, Rng& rng) {
    if (n == 0) throw ConfigError("lhs_sample needs at least one point");
    const auto rows = static_cast<Eigen::Index>(n);
    const auto cols = static_cast<Eigen::Index>(box.dim());
    Eigen::MatrixXd out(rows, cols);
    std::vector<std::size_t> strata(n);
    for (Eigen::Index j = 0; j < cols; ++j) {
        std::iota(strata.begin(), strata.end(), std::size_t{0});
        // Fisher-Yates
        for (std::size_t i = n; i > 1; --i) {
            std::swap(strata[i - 1], strata[rng.below(i)]);
        }
        const double lo = box.lower()[j];
        const double width = box.upper()[j] - lo;
        for (Eigen::Index i = 0; i < rows; ++i) {
            double u = (static_cast<double>(strata[static_cast<std::size_t>(i)]) + rng.uniform()) /
                       static_cast<double>(n);
            // (k + u) / n can round up to the next stratum edge for large n.
            const double edge = static_cast<double>(strata[static_cast<std::size_t>(i)] + 1) / static_cast<double>(n);
            if (u >= edge) u = std::nextafter(edge, 0.0);
            out(i, j) = lo + width * u;
        }
    }
    return out;
}

SubspaceSelection select_subspace(std::size_t d, std::size_t D, Rng& rng) {
    if (d < 1 || d > D) {
        throw ConfigError("select_subspace requires 1 <= d <= D (d=" + std::to_string(d) +
                          ", D=" + std::to_string(D) + ")");
    }
    // Partial Fisher-Yates: the first d slots are a uniform d-subset in
    // uniform order.
    std::vector<std::size_t> pool(D);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t k = 0; k < d; ++k) {
        if (D - k == 1) break;  // last slot is forced; no draw
        const std::size_t pick = k + rng.below(D - k);
        std::swap(pool[k], pool[pick]);
    }
    pool.resize(d);
    return pool;
}

Eigen::MatrixXd random_rotation(std::size_t D, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(D);
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

Eigen::VectorXd uniform_point(const SearchBox& box, Rng& rng) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(box.dim()));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(box.lower()[i], box.upper()[i]);
    return box.clamp(x);
}

}  // namespace hdbo
