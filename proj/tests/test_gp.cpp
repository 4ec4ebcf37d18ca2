#include <gtest/gtest.h>

#include <cmath>

#include "hdbo/doe.hpp"
#include "hdbo/error.hpp"
#include "hdbo/gp.hpp"
#include "hdbo/validation.hpp"

using namespace hdbo;

namespace {

Eigen::VectorXd smooth_targets(const Eigen::MatrixXd& X) {
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) y[i] = X.row(i).array().sin().sum() + 0.1 * X.row(i).squaredNorm();
    return y;
}

double rel(double a, double b) { return std::abs(a - b) / (1.0 + std::abs(b)); }

}  // namespace

TEST(Archive, IncumbentTiesGoToLowestIndex) {
    Eigen::MatrixXd X(4, 1);
    X << 0.0, 1.0, 2.0, 3.0;
    Archive a(X, Eigen::Vector4d(3.0, 1.0, 1.0, 2.0));
    EXPECT_EQ(a.incumbent_index(), 1u);
    EXPECT_EQ(a.f_min(), 1.0);
    a.append(Eigen::VectorXd::Constant(1, 4.0), 1.0);
    EXPECT_EQ(a.incumbent_index(), 1u);
    a.append(Eigen::VectorXd::Constant(1, 5.0), 0.5);
    EXPECT_EQ(a.incumbent_index(), 5u);
    EXPECT_EQ(a.incumbent()[0], 5.0);
}

TEST(Archive, ShapeMismatchIsAContractError) {
    EXPECT_THROW(Archive(Eigen::MatrixXd(3, 2), Eigen::VectorXd(2)), ContractError);
}

TEST(RbfCorr, Examples) {
    const Eigen::Vector2d a(0.0, 0.0);
    EXPECT_EQ(rbf_corr(a, a, 0.7), 1.0);
    const double l = 0.3;
    const Eigen::Vector2d b(l * std::sqrt(2.0), 0.0);
    EXPECT_NEAR(rbf_corr(a, b, l), 0.3678794, 1e-7);
    EXPECT_NEAR(rbf_corr(a, Eigen::Vector2d(3.0, 4.0), 5.0), 0.6065307, 1e-7);
    EXPECT_THROW(rbf_corr(a, b, 0.0), ConfigError);
    EXPECT_THROW(rbf_corr(a, b, -1.0), ConfigError);
}

TEST(GpFit, IdentityCorrelationGivesSampleMoments) {
    const SearchBox box = SearchBox::cube(1, 0.0, 1.0);
    Eigen::MatrixXd X(2, 1);
    X << 0.0, 1.0;
    const GpModel m = GpModel::fit_fixed(Archive(X, Eigen::Vector2d(1.0, 3.0)), box, 0.01);
    EXPECT_NEAR(m.mu_hat(), 2.0, 1e-9);
    EXPECT_NEAR(m.sigma2_hat(), 1.0, 1e-9);
}

TEST(GpFit, ConstantTargets) {
    const SearchBox box = SearchBox::cube(3, -1.0, 1.0);
    Rng rng(RngState{1, 0});
    const Eigen::MatrixXd X = lhs_sample(10, box, rng);
    const GpModel m = GpModel::fit(Archive(X, Eigen::VectorXd::Constant(10, 4.5)), box);
    EXPECT_EQ(m.mu_hat(), 4.5);
    EXPECT_EQ(m.sigma2_hat(), 0.0);
    for (int i = 0; i < 20; ++i) {
        const Prediction p = m.predict(uniform_point(box, rng));
        EXPECT_EQ(p.mean, 4.5);
        EXPECT_EQ(p.variance, 0.0);
    }
}

TEST(GpFit, MatchesDenseInverseOracle) {
    const SearchBox box = SearchBox::cube(3, -5.0, 5.0);
    Rng rng(RngState{30, 3});
    const Eigen::MatrixXd X = lhs_sample(30, box, rng);
    const Eigen::VectorXd y = smooth_targets(X);
    for (double l : {0.1, 0.25, 0.4}) {
        const GpModel m = GpModel::fit_fixed(Archive(X, y), box, l);
        const oracle::NaiveKriging ref(m.scaled_inputs(), y, l, m.jitter());
        EXPECT_LE(rel(m.mu_hat(), ref.mu_hat()), 1e-8) << "l=" << l;
        EXPECT_LE(rel(m.sigma2_hat(), ref.sigma2_hat()), 1e-8) << "l=" << l;
        EXPECT_LE(rel(m.nll(), ref.nll()), 1e-8) << "l=" << l;
    }
}

TEST(GpFit, CholeskyReproducesCorrelationMatrix) {
    const SearchBox box = SearchBox::cube(4, 0.0, 1.0);
    Rng rng(RngState{31, 0});
    const Eigen::MatrixXd X = lhs_sample(25, box, rng);
    const GpModel m = GpModel::fit(Archive(X, smooth_targets(X)), box);
    const Eigen::MatrixXd L = m.chol();
    const Eigen::MatrixXd& U = m.scaled_inputs();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < U.rows(); ++i) {
        for (Eigen::Index j = 0; j < U.rows(); ++j) {
            const double r = rbf_corr(U.row(i).transpose(), U.row(j).transpose(), m.length_scale()) + (i == j ? m.jitter() : 0.0);
            worst = std::max(worst, std::abs((L.row(i) * L.row(j).transpose())(0, 0) - r));
        }
    }
    EXPECT_LE(worst, 1e-8);
    EXPECT_GE(m.length_scale(), 0.01);
    EXPECT_LE(m.length_scale(), 100.0);
    EXPECT_GE(m.sigma2_hat(), 0.0);
}

TEST(GpFit, LengthScaleMinimizesProfileLikelihood) {
    const SearchBox box = SearchBox::cube(2, -3.0, 3.0);
    Rng rng(RngState{32, 0});
    const Eigen::MatrixXd X = lhs_sample(20, box, rng);
    const Archive archive(X, smooth_targets(X));
    const GpModel m = GpModel::fit(archive, box);
    const double best = concentrated_nll(m.length_scale(), archive, box);
    EXPECT_NEAR(best, m.nll(), 1e-9 * (1.0 + std::abs(best)));
    // No point of a finer grid than the search's own beats it by more than
    // the refinement tolerance allows.
    for (int k = 0; k <= 400; ++k) {
        const double l = std::exp(std::log(0.01) + (std::log(100.0) - std::log(0.01)) * k / 400.0);
        if (std::abs(std::log(l / m.length_scale())) < 0.05) {
            EXPECT_GE(concentrated_nll(l, archive, box), best - 1e-3 * (1.0 + std::abs(best)));
        }
    }
}

TEST(GpFit, Deterministic) {
    const SearchBox box = SearchBox::cube(5, -1.0, 1.0);
    Rng rng(RngState{33, 0});
    const Eigen::MatrixXd X = lhs_sample(30, box, rng);
    const Archive archive(X, smooth_targets(X));
    const GpModel a = GpModel::fit(archive, box);
    const GpModel b = GpModel::fit(archive, box);
    EXPECT_EQ(a.length_scale(), b.length_scale());
    EXPECT_EQ(a.mu_hat(), b.mu_hat());
}

TEST(GpFit, DuplicateRowsAreAbsorbed) {
    const SearchBox box = SearchBox::cube(2, 0.0, 1.0);
    Eigen::MatrixXd X(4, 2);
    X << 0.1, 0.2, 0.1, 0.2, 0.8, 0.9, 0.5, 0.5;
    const GpModel m = GpModel::fit(Archive(X, Eigen::Vector4d(1.0, 1.0, 2.0, 0.5)), box);
    EXPECT_TRUE(std::isfinite(m.nll()));
    EXPECT_GE(m.jitter(), 1e-10);
}

TEST(GpFit, RejectsBadInput) {
    const SearchBox box = SearchBox::cube(1, 0.0, 1.0);
    EXPECT_THROW(GpModel::fit(Archive(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)), box), ContractError);
    Eigen::MatrixXd X(2, 1);
    X << 0.2, 0.7;
    EXPECT_THROW(GpModel::fit(Archive(X, Eigen::Vector2d(1.0, 2.0)), box, {1.0, 0.5}), ConfigError);
    EXPECT_THROW(GpModel::fit_fixed(Archive(X, Eigen::Vector2d(1.0, 2.0)), box, 0.0), ConfigError);
}

TEST(GpPredict, InterpolatesTrainingPoints) {
    const SearchBox box = SearchBox::cube(5, -100.0, 100.0);
    Rng rng(RngState{5, 5});
    const Eigen::MatrixXd X = lhs_sample(20, box, rng);
    const Eigen::VectorXd y = X.rowwise().squaredNorm();
    const GpModel m = GpModel::fit(Archive(X, y), box);
    ASSERT_LE(m.jitter(), 1e-10);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Prediction p = m.predict_formula(X.row(i).transpose());
        EXPECT_LE(std::abs(p.mean - y[i]), 1e-6 * (1.0 + std::abs(y[i])));
        EXPECT_LE(p.variance, 1e-6 * m.sigma2_hat());
        const Prediction snapped = m.predict(X.row(i).transpose());
        EXPECT_EQ(snapped.mean, y[i]);
        EXPECT_EQ(snapped.variance, 0.0);
    }
}

TEST(GpPredict, InterpolationProperty) {
    Rng gen(RngState{34, 0});
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t D = 1 + gen.below(6);
        const std::size_t n = 3 + gen.below(25);
        const SearchBox box = SearchBox::cube(D, -10.0, 10.0);
        const Eigen::MatrixXd X = lhs_sample(n, box, gen);
        const Eigen::VectorXd y = smooth_targets(X);
        const GpModel m = GpModel::fit(Archive(X, y), box);
        if (m.jitter() > 1e-10) continue;
        ++checked;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const Prediction p = m.predict(X.row(i).transpose());
            ASSERT_LE(std::abs(p.mean - y[i]), 1e-6 * (1.0 + std::abs(y[i]))) << "trial " << trial;
            ASSERT_LE(p.variance, 1e-6 * m.sigma2_hat()) << "trial " << trial;
            // The unsnapped formula carries the Cholesky round-off of a near-singular R.
            const Prediction raw = m.predict_formula(X.row(i).transpose());
            ASSERT_LE(std::abs(raw.mean - y[i]), 1e-4 * (1.0 + std::abs(y[i]))) << "trial " << trial;
        }
    }
    EXPECT_GT(checked, 30);
}

TEST(GpPredict, FarFieldLimit) {
    const SearchBox box = SearchBox::cube(2, 0.0, 1.0);
    Eigen::MatrixXd X(3, 2);
    X << 0.0, 0.0, 0.05, 0.0, 0.0, 0.05;
    const GpModel m = GpModel::fit_fixed(Archive(X, Eigen::Vector3d(1.0, 2.0, 4.0)), box, 0.02);
    const oracle::NaiveKriging ref(m.scaled_inputs(), m.targets(), 0.02, m.jitter());
    const Prediction p = m.predict(Eigen::Vector2d(1.0, 1.0));
    // 1' R^-1 1 from the oracle's own inverse.
    const auto [mean, var] = ref.predict(Eigen::Vector2d(1.0, 1.0));
    EXPECT_NEAR(p.mean, m.mu_hat(), 1e-12);
    EXPECT_NEAR(p.variance, var, 1e-12 * (1.0 + var));
    EXPECT_GT(p.variance, m.sigma2_hat());
    EXPECT_NEAR(mean, m.mu_hat(), 1e-12);
}

TEST(GpPredict, MatchesDenseInverseOracle) {
    const SearchBox box = SearchBox::cube(4, -2.0, 3.0);
    Rng rng(RngState{25, 0});
    const Eigen::MatrixXd X = lhs_sample(25, box, rng);
    const Eigen::VectorXd y = smooth_targets(X);
    const GpModel m = GpModel::fit_fixed(Archive(X, y), box, 0.3);
    const oracle::NaiveKriging ref(m.scaled_inputs(), y, 0.3, m.jitter());
    for (int q = 0; q < 200; ++q) {
        const Eigen::VectorXd x = uniform_point(box, rng);
        const Prediction p = m.predict(x);
        const auto [mean, var] = ref.predict(box.to_unit(x));
        ASSERT_LE(std::abs(p.mean - mean), 1e-8 * (1.0 + std::abs(mean)));
        ASSERT_LE(std::abs(p.variance - var), 1e-8 * (1.0 + var));
    }
}

TEST(GpPredict, BatchAgreesWithSingleQueries) {
    const SearchBox box = SearchBox::cube(6, -1.0, 1.0);
    Rng rng(RngState{36, 0});
    const Eigen::MatrixXd X = lhs_sample(40, box, rng);
    const GpModel m = GpModel::fit(Archive(X, smooth_targets(X)), box);
    Eigen::MatrixXd Q(500, 6);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) Q.row(i) = uniform_point(box, rng).transpose();
    Q.row(7) = X.row(3);
    Eigen::VectorXd mean;
    Eigen::VectorXd var;
    m.predict_batch(Q, mean, var);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
        const Prediction p = m.predict(Q.row(i).transpose());
        ASSERT_NEAR(mean[i], p.mean, 1e-12 * (1.0 + std::abs(p.mean)));
        ASSERT_NEAR(var[i], p.variance, 1e-12 * (1.0 + p.variance));
    }
    EXPECT_EQ(var[7], 0.0);
}

TEST(GpPredict, VarianceNeverNegative) {
    Rng gen(RngState{37, 0});
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t D = 1 + gen.below(4);
        const SearchBox box = SearchBox::cube(D, 0.0, 1.0);
        Eigen::MatrixXd X = lhs_sample(15, box, gen);
        X.row(3) = X.row(4);  // near-singular R
        const GpModel m = GpModel::fit(Archive(X, smooth_targets(X)), box);
        for (int q = 0; q < 200; ++q) {
            ASSERT_GE(m.predict(uniform_point(box, gen)).variance, 0.0);
            ASSERT_GE(m.predict_formula(X.row(q % 15).transpose()).variance, 0.0);
        }
    }
}

TEST(ConcentratedNll, IdentityCorrelation) {
    const SearchBox box = SearchBox::cube(1, 0.0, 1.0);
    Eigen::MatrixXd X(3, 1);
    X << 0.0, 0.5, 1.0;
    const Archive a(X, Eigen::Vector3d(1.0, 2.0, 6.0));
    // mean 3, squared deviations 4 + 1 + 9 over 3.
    EXPECT_NEAR(concentrated_nll(0.01, a, box), 3.0 * std::log(14.0 / 3.0), 1e-8);
}

TEST(ConcentratedNll, TwoPointHandComputation) {
    const SearchBox box = SearchBox::cube(1, 0.0, 1.0);
    Eigen::MatrixXd X(2, 1);
    X << 0.2, 0.5;
    const double y1 = 1.5;
    const double y2 = -0.5;
    const Archive a(X, Eigen::Vector2d(y1, y2));
    for (double l : {0.1, 0.3, 1.0}) {
        const double rho = std::exp(-0.09 / (2.0 * l * l));
        const double lambda = 1e-10;
        const double delta = (y1 - y2) / 2.0;
        const double sigma2 = delta * delta / (1.0 + lambda - rho);
        const double expected = 2.0 * std::log(sigma2) + std::log((1.0 + lambda) * (1.0 + lambda) - rho * rho);
        EXPECT_NEAR(concentrated_nll(l, a, box), expected, 1e-9 * (1.0 + std::abs(expected))) << "l=" << l;
    }
}

TEST(ConcentratedNll, PermutationInvariant) {
    const SearchBox box = SearchBox::cube(3, -1.0, 1.0);
    Rng rng(RngState{38, 0});
    const Eigen::MatrixXd X = lhs_sample(12, box, rng);
    const Eigen::VectorXd y = smooth_targets(X);
    Eigen::MatrixXd Xp = X.colwise().reverse();
    Eigen::VectorXd yp = y.reverse();
    for (double l : {0.05, 0.3, 2.0}) {
        const double a = concentrated_nll(l, Archive(X, y), box);
        const double b = concentrated_nll(l, Archive(Xp, yp), box);
        EXPECT_NEAR(a, b, 1e-9 * (1.0 + std::abs(a)));
    }
    EXPECT_THROW(concentrated_nll(-1.0, Archive(X, y), box), ConfigError);
}
