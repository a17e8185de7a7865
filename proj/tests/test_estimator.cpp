#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "firlab/errors.hpp"
#include "firlab/estimator.hpp"
#include "firlab/linalg.hpp"

using namespace firlab;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd A(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) A(i, j) = g(rng);
    return A;
}

DesignMatrix gaussian_design(int T, int N, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::vector<double> in(static_cast<std::size_t>(N + T - 1));
    for (double& x : in) x = g(rng);
    return build_design(in, T, N);
}

}  // namespace

TEST(LeastSquares, HandNormalEquations) {
    Eigen::MatrixXd M(3, 2);
    M << 1, 0, 0, 1, 1, 1;
    const Eigen::Vector3d y(1, 2, 3);
    // X'X = [[2,1],[1,2]], X'y = [4,5]; Cramer's rule
    const double det = 2.0 * 2.0 - 1.0 * 1.0;
    const Eigen::Vector2d hand((4.0 * 2.0 - 1.0 * 5.0) / det, (2.0 * 5.0 - 1.0 * 4.0) / det);
    const Eigen::VectorXd a = least_squares(DesignMatrix(M), y);
    EXPECT_NEAR(a(0), hand(0), 1e-14);
    EXPECT_NEAR(a(1), hand(1), 1e-14);
    EXPECT_NEAR(a(0), 1.0, 1e-14);
    EXPECT_NEAR(a(1), 2.0, 1e-14);
}

TEST(LeastSquares, RankDeficientIsMinimumNorm) {
    const DesignMatrix Z(Eigen::MatrixXd::Zero(5, 3));
    EXPECT_EQ(least_squares(Z, Eigen::VectorXd::Ones(5)), Eigen::VectorXd::Zero(3));

    Eigen::MatrixXd M(4, 2);
    M << 1, 1, 2, 2, 3, 3, 4, 4;
    const Eigen::VectorXd y = Eigen::Vector4d(2, 4, 6, 8);
    const Eigen::VectorXd a = least_squares(DesignMatrix(M), y);
    EXPECT_NEAR(a(0), 1.0, 1e-12);
    EXPECT_NEAR(a(1), 1.0, 1e-12);
    EXPECT_THROW(least_squares(Z, Eigen::VectorXd::Ones(4)), DimensionError);
}

TEST(LeastSquares, Orthogonality) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const DesignMatrix X = gaussian_design(6, 80, seed);
        const Eigen::VectorXd y = random_matrix(80, 1, seed + 1000);
        EXPECT_LE(residual_orthogonality(X, y, least_squares(X, y)), 1e-8);
    }
}

TEST(PredictionLoss, Cases) {
    const DesignMatrix X(random_matrix(30, 4, 1));
    const Eigen::VectorXd a = random_matrix(4, 1, 2);
    EXPECT_EQ(prediction_loss(X, X.matrix() * a, a), 0.0);

    const Eigen::VectorXd y = random_matrix(30, 1, 3);
    EXPECT_NEAR(prediction_loss(DesignMatrix(Eigen::MatrixXd::Zero(30, 4)), y, a),
                y.squaredNorm() / 30.0, 1e-15);

    double naive = 0.0;
    for (int t = 0; t < 30; ++t) {
        double fit = 0.0;
        for (int k = 0; k < 4; ++k) fit += X(t, k) * a(k);
        naive += (y(t) - fit) * (y(t) - fit);
    }
    EXPECT_NEAR(prediction_loss(X, y, a), naive / 30.0, 1e-12);
}

TEST(PredictionRisk, ZeroVariance) {
    const DesignMatrix X(random_matrix(20, 3, 4));
    const Eigen::VectorXd f = random_matrix(20, 1, 5);
    const Eigen::VectorXd a = random_matrix(3, 1, 6);
    EXPECT_NEAR(prediction_risk(X, f, Eigen::VectorXd::Zero(20), a),
                (f - X.matrix() * a).squaredNorm() / 20.0, 1e-15);
}

TEST(PredictionRisk, MatchesMonteCarlo) {
    const int N = 25, T = 3;
    const DesignMatrix X = gaussian_design(T, N, 7);
    const Regressor quad{RegressorKind::LinearQuadratic, Eigen::Vector3d(1.0, -0.5, 0.25), 0.4};
    const Eigen::VectorXd f = regressor_values(quad, X);
    const Eigen::VectorXd vars = Eigen::VectorXd::Constant(N, 0.7);
    const Eigen::VectorXd a = Eigen::Vector3d(0.8, -0.3, 0.1);

    std::mt19937_64 rng(99);
    std::normal_distribution<double> g(0.0, std::sqrt(0.7));
    const int draws = 100'000;
    double sum = 0.0, sum2 = 0.0;
    Eigen::VectorXd y(N);
    for (int m = 0; m < draws; ++m) {
        for (int t = 0; t < N; ++t) y(t) = f(t) + g(rng);
        const double l = prediction_loss(X, y, a);
        sum += l;
        sum2 += l * l;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
    EXPECT_NEAR(prediction_risk(X, f, vars, a), mean, 3.0 * se);
}

TEST(OracleMinimizer, OrthogonalResponse) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(4, 2);
    M(0, 0) = 1;
    M(1, 1) = 1;
    const Eigen::VectorXd f = Eigen::Vector4d(0, 0, 3, -2);
    EXPECT_LE(oracle_minimizer(DesignMatrix(M), f).norm(), 1e-15);
}

TEST(OracleMinimizer, GridSearch) {
    const int N = 8, T = 2;
    const DesignMatrix X = gaussian_design(T, N, 21);
    const Regressor quad{RegressorKind::LinearQuadratic, Eigen::Vector2d(0.9, -0.6), 0.5};
    const Eigen::VectorXd f = regressor_values(quad, X);
    const Eigen::VectorXd a_min = oracle_minimizer(X, f);

    double best = INFINITY;
    double b0 = 0.0, b1 = 0.0;
    for (int i = -3000; i <= 3000; ++i) {
        const double a0 = i * 1e-3;
        for (int j = -3000; j <= 3000; ++j) {
            const double a1 = j * 1e-3;
            double s = 0.0;
            for (int t = 0; t < N; ++t) {
                const double r = f(t) - X(t, 0) * a0 - X(t, 1) * a1;
                s += r * r;
            }
            if (s < best) {
                best = s;
                b0 = a0;
                b1 = a1;
            }
        }
    }
    ASSERT_LT(std::abs(a_min(0)), 3.0);
    ASSERT_LT(std::abs(a_min(1)), 3.0);
    EXPECT_NEAR(a_min(0), b0, 2e-3);
    EXPECT_NEAR(a_min(1), b1, 2e-3);
}

TEST(ExcessRisk, Cases) {
    const int N = 40, T = 4;
    const DesignMatrix X = gaussian_design(T, N, 31);
    const Regressor quad{RegressorKind::LinearQuadratic, Eigen::Vector4d(1, 0.5, 0.25, 0.125), 0.3};
    const Eigen::VectorXd f = regressor_values(quad, X);
    const Eigen::VectorXd vars = Eigen::VectorXd::Constant(N, 0.5);
    const Eigen::VectorXd a_min = oracle_minimizer(X, f);
    EXPECT_NEAR(excess_risk(X, f, vars, a_min), 0.0, 1e-15);

    const Eigen::VectorXd a_lin = Eigen::Vector4d(1, 0.5, 0.25, 0.125);
    const Eigen::VectorXd f_lin = X.matrix() * a_lin;
    EXPECT_NEAR(excess_risk(X, f_lin, vars, least_squares(X, f_lin)), 0.0, 1e-20);

    const Eigen::VectorXd a_hat = a_min + Eigen::Vector4d(0.1, -0.2, 0.05, 0.3);
    const double diff = prediction_risk(X, f, vars, a_hat) - prediction_risk(X, f, vars, a_min);
    EXPECT_NEAR(excess_risk(X, f, vars, a_hat), diff, 1e-10);
}

TEST(ExcessRisk, ExpectedOverNoise) {
    const int N = 30, T = 3;
    const DesignMatrix X = gaussian_design(T, N, 41);
    // homoscedastic: trace of the hat matrix is T
    EXPECT_NEAR(expected_excess_risk(X, Eigen::VectorXd::Constant(N, 2.0)), T * 2.0 / N, 1e-13);

    Eigen::VectorXd vars(N);
    for (int t = 0; t < N; ++t) vars(t) = t % 3 == 0 ? 1.5 : 0.25;
    const double expected = expected_excess_risk(X, vars);
    EXPECT_LE(expected, T * 1.5 / N);

    const Regressor quad{RegressorKind::LinearQuadratic, Eigen::Vector3d(1, -1, 0.5), 0.2};
    const Eigen::VectorXd f = regressor_values(quad, X);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    const int draws = 50'000;
    double sum = 0.0, sum2 = 0.0;
    Eigen::VectorXd y(N);
    for (int m = 0; m < draws; ++m) {
        for (int t = 0; t < N; ++t) y(t) = f(t) + std::sqrt(vars(t)) * g(rng);
        const double e = excess_risk(X, f, vars, least_squares(X, y));
        sum += e;
        sum2 += e * e;
    }
    const double mean = sum / draws;
    const double se = std::sqrt((sum2 / draws - mean * mean) / draws);
    EXPECT_NEAR(expected, mean, 3.0 * se);
}

TEST(Estimate, Report) {
    const int N = 200, T = 5;
    const FirSystem sys = FirSystem::linear(Eigen::VectorXd::LinSpaced(T, 1.0, 0.2),
                                            DistributionSpec::gaussian(), DistributionSpec::gaussian());
    const Trajectory tr = simulate(sys, N, SeedSpec{8, 0});
    const DesignMatrix X = build_design(tr.inputs, T, N);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(tr.outputs.data(), N);
    const Eigen::VectorXd eps = Eigen::Map<const Eigen::VectorXd>(tr.noise.data(), N);
    const EstimateReport r = estimate(X, y, sys.regressor().a, eps);
    ASSERT_TRUE(r.sq_error && r.multiplier_norm);
    EXPECT_NEAR(*r.sq_error, (r.a_hat - sys.regressor().a).squaredNorm(), 1e-15);
    EXPECT_NEAR(*r.multiplier_norm, (X.matrix().transpose() * eps / N).norm(), 1e-14);
    EXPECT_NEAR(r.loss_value, prediction_loss(X, y, r.a_hat), 1e-15);
    EXPECT_LE(r.residual_orthogonality, 1e-8);
    EXPECT_FALSE(r.singular);
    EXPECT_LE(r.s_min, r.s_max);

    const EstimateReport bare = estimate(X, y);
    EXPECT_FALSE(bare.sq_error);
    EXPECT_FALSE(bare.multiplier_norm);

    const EstimateReport zero = estimate(DesignMatrix(Eigen::MatrixXd::Zero(10, 2)), Eigen::VectorXd::Ones(10));
    EXPECT_TRUE(zero.singular);
    EXPECT_EQ(zero.a_hat, Eigen::VectorXd::Zero(2));
}

TEST(Estimate, ExactRecoveryWithoutNoise) {
    const int N = 200, T = 10;
    const FirSystem sys = FirSystem::linear(Eigen::VectorXd::LinSpaced(T, -1.0, 1.0),
                                            DistributionSpec::gaussian(), std::nullopt);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const Trajectory tr = simulate(sys, N, SeedSpec{s, 0});
        const DesignMatrix X = build_design(tr.inputs, T, N);
        const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(tr.outputs.data(), N);
        EXPECT_LE((least_squares(X, y) - sys.regressor().a).norm(), 1e-8);
    }
}
