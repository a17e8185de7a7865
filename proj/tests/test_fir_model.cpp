#include <gtest/gtest.h>

#include <cmath>

#include "firlab/errors.hpp"
#include "firlab/fir_model.hpp"
#include "firlab/linalg.hpp"

using namespace firlab;

TEST(BuildDesign, HandExample) {
    const std::vector<double> in{1, 2, 3, 4};
    const DesignMatrix X = build_design(in, 2, 3);
    Eigen::MatrixXd expected(3, 2);
    expected << 2, 1, 3, 2, 4, 3;
    EXPECT_EQ(X.matrix(), expected);
}

TEST(BuildDesign, LagOneIsColumn) {
    const std::vector<double> in{5, -1, 7, 2};
    const DesignMatrix X = build_design(in, 1, 4);
    ASSERT_EQ(X.cols(), 1);
    for (int r = 0; r < 4; ++r) EXPECT_EQ(X(r, 0), in[r]);
}

TEST(BuildDesign, ZerosAndShiftInvariant) {
    const std::vector<double> zeros(7, 0.0);
    EXPECT_EQ(build_design(zeros, 3, 5).matrix(), Eigen::MatrixXd::Zero(5, 3));

    std::vector<double> in(30);
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = std::sin(1.0 + static_cast<double>(i));
    const DesignMatrix X = build_design(in, 6, 25);
    for (int r = 1; r < 25; ++r) {
        for (int c = 1; c < 6; ++c) EXPECT_EQ(X(r, c), X(r - 1, c - 1));
    }
    EXPECT_EQ(X(0, 0), in[5]);
    EXPECT_EQ(X(0, 5), in[0]);
}

TEST(BuildDesign, Errors) {
    const std::vector<double> in{1, 2, 3};
    EXPECT_THROW(build_design(in, 2, 3), DimensionError);
    EXPECT_THROW(build_design(in, 0, 1), DimensionError);
    EXPECT_NO_THROW(build_design(in, 2, 1));
}

TEST(Simulate, IdentityFilter) {
    const FirSystem sys = FirSystem::linear(Eigen::VectorXd::Ones(1), DistributionSpec::gaussian(),
                                            std::nullopt);
    const Trajectory tr = simulate(sys, 50, SeedSpec{1, 0});
    ASSERT_EQ(tr.inputs.size(), 50u);
    EXPECT_EQ(tr.outputs, tr.inputs);
    for (double e : tr.noise) EXPECT_EQ(e, 0.0);
}

TEST(Simulate, HandDifference) {
    Eigen::VectorXd a(2);
    a << 1, -1;
    const FirSystem sys = FirSystem::linear(a, DistributionSpec::gaussian(), std::nullopt);
    const Trajectory tr = simulate_from(sys, {1, 2, 3, 4}, {0, 0, 0});
    EXPECT_EQ(tr.outputs, (std::vector<double>{1, 1, 1}));
}

TEST(Simulate, ZeroFilterGivesNoise) {
    const FirSystem sys = FirSystem::linear(Eigen::VectorXd::Zero(4), DistributionSpec::uniform(),
                                            DistributionSpec::gaussian(2.0));
    const Trajectory tr = simulate(sys, 100, SeedSpec{2, 3});
    EXPECT_EQ(tr.outputs, tr.noise);
}

TEST(Simulate, NoiseRoundTrip) {
    Regressor f{RegressorKind::LinearQuadratic, Eigen::VectorXd::LinSpaced(4, 1.0, 0.25), 0.3};
    const FirSystem sys(f, DistributionSpec::gaussian(), DistributionSpec::gaussian(0.5));
    const SeedSpec seed{11, 4};
    const Trajectory tr = simulate(sys, 200, seed);
    // the stored noise is the drawn sequence
    EXPECT_EQ(tr.noise, draw_sequence(DistributionSpec::gaussian(0.5), {11, 9}, 200));
    const Eigen::VectorXd fx = regressor_values(sys, build_design(tr.inputs, 4, 200));
    for (int t = 0; t < 200; ++t) {
        const double y = tr.outputs[static_cast<std::size_t>(t)];
        EXPECT_LE(std::abs((y - fx(t)) - tr.noise[static_cast<std::size_t>(t)]),
                  std::nextafter(std::abs(y), INFINITY) - std::abs(y));
    }
    // same seed, same trajectory
    const Trajectory again = simulate(sys, 200, seed);
    EXPECT_EQ(again.outputs, tr.outputs);
    EXPECT_EQ(again.inputs, tr.inputs);
}

TEST(Regressor, Catalogue) {
    Eigen::VectorXd a(3);
    a << 0.5, -1.0, 2.0;
    Eigen::MatrixXd M(2, 3);
    M << 1, 2, 3, -1, 0, 0.5;
    const DesignMatrix X(M);
    const FirSystem lin = FirSystem::linear(a, DistributionSpec::gaussian(), std::nullopt);
    EXPECT_TRUE(regressor_values(lin, X).isApprox(M * a, 1e-15));

    const Regressor quad{RegressorKind::LinearQuadratic, a, 0.1};
    const Eigen::VectorXd q0 = regressor_values(quad, DesignMatrix(Eigen::MatrixXd::Zero(4, 3)));
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(q0(i), -0.1);
    EXPECT_DOUBLE_EQ(regressor_values(quad, X)(0), 0.5 - 2.0 + 6.0 + 0.1 * (1.0 - 1.0));
    EXPECT_DOUBLE_EQ(regressor_values(quad, X)(1), -0.5 + 1.0 + 0.1 * (1.0 - 1.0));

    const Regressor sat{RegressorKind::SaturatedLinear, a, 0.0};
    Eigen::MatrixXd Z(1, 3);
    Z << 2, 1, 0;  // a'v = 0
    EXPECT_EQ(regressor_values(sat, DesignMatrix(Z))(0), 0.0);
    EXPECT_DOUBLE_EQ(regressor_values(sat, X)(0), std::tanh(4.5));

    EXPECT_THROW(regressor_values(quad, DesignMatrix(Eigen::MatrixXd::Zero(2, 2))), DimensionError);
    EXPECT_EQ(regressor_kind_from_string("quadratic"), RegressorKind::LinearQuadratic);
    EXPECT_THROW(regressor_kind_from_string("cubic"), ConfigError);
}

TEST(SampleCovariance, UnbiasedForIdentity) {
    const int M = 10'000, N = 40, T = 4;
    const FirSystem sys = FirSystem::linear(Eigen::VectorXd::Ones(T), DistributionSpec::rademacher(),
                                            std::nullopt);
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(T, T);
    for (int m = 0; m < M; ++m) {
        const Trajectory tr = simulate(sys, N, SeedSpec{77, static_cast<std::uint64_t>(m)});
        avg += sample_covariance(build_design(tr.inputs, T, N));
    }
    avg /= M;
    const double tol = 5.0 / std::sqrt(static_cast<double>(M) * N);
    EXPECT_LE((avg - Eigen::MatrixXd::Identity(T, T)).cwiseAbs().maxCoeff(), tol);
}
