#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>

#include "firlab/errors.hpp"
#include "firlab/montecarlo.hpp"

using namespace firlab;

namespace {

ExperimentConfig gaussian_config(int T, std::vector<int> N_grid, int trials, std::uint64_t seed,
                                 std::vector<Quantity> qs) {
    const FirSystem sys = FirSystem::linear(Eigen::VectorXd::LinSpaced(T, 1.0, 0.1),
                                            DistributionSpec::gaussian(), DistributionSpec::gaussian());
    ExperimentConfig cfg{sys, std::move(N_grid), trials, seed, default_bound_config(sys), std::move(qs)};
    return cfg;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool identical(const TrialRecord& a, const TrialRecord& b) {
    bool chains = a.chain.has_value() == b.chain.has_value();
    if (chains && a.chain) {
        chains = a.chain->passed() == b.chain->passed() &&
                 same_bits(a.chain->corner_margin, b.chain->corner_margin) &&
                 same_bits(a.chain->poly_margin, b.chain->poly_margin) &&
                 same_bits(a.chain->composite_margin, b.chain->composite_margin);
    }
    return chains && a.grid_index == b.grid_index && a.trial_id == b.trial_id && a.N == b.N &&
           a.T == b.T && a.singular == b.singular && a.error == b.error &&
           same_bits(a.sq_error, b.sq_error) && same_bits(a.spectrum_dev, b.spectrum_dev) &&
           same_bits(a.s_min, b.s_min) && same_bits(a.s_max, b.s_max) &&
           same_bits(a.realized_delta, b.realized_delta) &&
           same_bits(a.multiplier_norm, b.multiplier_norm) &&
           same_bits(a.multiplier_sq, b.multiplier_sq) && same_bits(a.excess_risk, b.excess_risk) &&
           same_bits(a.loss_gap, b.loss_gap) && same_bits(a.crlb_trace, b.crlb_trace) &&
           same_bits(a.residual_orthogonality, b.residual_orthogonality);
}

const std::vector<Quantity> kAll{Quantity::SqError,   Quantity::SpectrumDev, Quantity::MultiplierNorm,
                                 Quantity::ExcessRisk, Quantity::LossGap,    Quantity::MseVsCrlb,
                                 Quantity::ToeplitzChain};

}  // namespace

TEST(RunTrials, SingleNoiselessTrial) {
    const FirSystem sys = FirSystem::linear(Eigen::VectorXd::Ones(3), DistributionSpec::gaussian(),
                                            std::nullopt);
    ExperimentConfig cfg{sys, {50}, 1, 4, default_bound_config(sys), {Quantity::SqError}};
    const TrialBatch b = run_trials(cfg, 1);
    ASSERT_EQ(b.records().size(), 1u);
    EXPECT_LE(b.records()[0].sq_error, 1e-16);
    EXPECT_TRUE(b.records()[0].usable());
}

TEST(RunTrials, WorkerCountDoesNotChangeRecords) {
    const ExperimentConfig cfg = gaussian_config(4, {10, 30}, 60, 2024, kAll);
    const TrialBatch one = run_trials(cfg, 1);
    const TrialBatch eight = run_trials(cfg, 8);
    ASSERT_EQ(one.records().size(), 120u);
    ASSERT_EQ(eight.records().size(), 120u);
    for (std::size_t i = 0; i < one.records().size(); ++i) {
        EXPECT_TRUE(identical(one.records()[i], eight.records()[i])) << "record " << i;
    }
    const TrialBatch other = run_trials(gaussian_config(4, {10, 30}, 60, 2025, kAll), 3);
    EXPECT_FALSE(identical(one.records()[0], other.records()[0]));
}

TEST(RunTrials, RecordsAreIndependentOfGridMembership) {
    // trial i at grid index g depends only on (seed, g, i)
    const TrialBatch a = run_trials(gaussian_config(3, {20}, 5, 1, {Quantity::SqError}), 2);
    const TrialBatch b = run_trials(gaussian_config(3, {20, 40}, 10, 1, {Quantity::SqError}), 2);
    for (int i = 0; i < 5; ++i) {
        EXPECT_TRUE(same_bits(a.records()[i].sq_error, b.records()[i].sq_error));
    }
}

TEST(RunTrials, DefaultWorkersFromEnvironment) {
    ::setenv("FIRLAB_WORKERS", "3", 1);
    EXPECT_EQ(default_workers(), 3);
    ::setenv("FIRLAB_WORKERS", "0", 1);
    EXPECT_GE(default_workers(), 1);
    ::unsetenv("FIRLAB_WORKERS");
    EXPECT_GE(default_workers(), 1);
}

TEST(TrialBatch, QueriesAndSummary) {
    const TrialBatch b = run_trials(gaussian_config(3, {40, 80}, 50, 9, {Quantity::SqError}), 2);
    EXPECT_EQ(b.values(Quantity::SqError, 40).size(), 50u);
    EXPECT_THROW(b.values(Quantity::SpectrumDev, 40), QueryError);
    const auto s = b.summary(Quantity::SqError);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].N, 40);
    EXPECT_EQ(s[1].count, 50);
    EXPECT_GT(s[0].mean, s[1].mean);
    EXPECT_LE(s[0].median, s[0].q95);
    EXPECT_EQ(b.singular_count(40), 0);
    EXPECT_EQ(b.error_count(80), 0);
}

TEST(Statistics, TailProbability) {
    const std::vector<double> v{1, 2, 3, 4};
    EXPECT_EQ(tail_probability(v, 2.5), 0.5);
    EXPECT_EQ(tail_probability(v, 0.0), 1.0);
    EXPECT_EQ(tail_probability(v, 4.0), 0.0);
    EXPECT_DOUBLE_EQ(empirical_quantile({4, 1, 3, 2}, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(empirical_quantile({4, 1, 3, 2}, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(empirical_quantile({4, 1, 3, 2}, 0.0), 1.0);
}

TEST(Statistics, RateFitSynthetic) {
    std::vector<double> N{100, 200, 400, 800, 1600}, inv, inv_sqrt;
    for (double n : N) {
        inv.push_back(3.0 / n);
        inv_sqrt.push_back(2.0 / std::sqrt(n));
    }
    const RateFit a = fit_rate(N, inv);
    EXPECT_NEAR(a.slope, -1.0, 1e-12);
    EXPECT_NEAR(a.intercept, std::log(3.0), 1e-12);
    EXPECT_NEAR(a.r_squared, 1.0, 1e-12);
    EXPECT_NEAR(fit_rate(N, inv_sqrt).slope, -0.5, 1e-12);
}

TEST(CheckTheorem, NoiselessEstimationNeverViolates) {
    const FirSystem sys = FirSystem::linear(Eigen::VectorXd::Ones(4), DistributionSpec::gaussian(),
                                            std::nullopt);
    ExperimentConfig cfg{sys, {50, 100}, 40, 3, default_bound_config(sys), {Quantity::SqError}};
    for (const PointCheck& pc : check_theorem(run_trials(cfg, 2), TheoremId::EstimationError)) {
        EXPECT_EQ(pc.violation_freq, 0.0);
        EXPECT_EQ(pc.trials, 40);
        EXPECT_GE(pc.violation_freq, 0.0);
    }
    EXPECT_THROW(check_theorem(run_trials(cfg, 1), TheoremId::Spectrum), QueryError);
}

TEST(CheckTheorem, RiskCountsSpectrumFailures) {
    Regressor quad{RegressorKind::LinearQuadratic, Eigen::Vector4d(1, 0.5, 0.25, 0.125), 0.2};
    const FirSystem sys(quad, DistributionSpec::gaussian(), DistributionSpec::gaussian());
    ExperimentConfig cfg{sys, {40}, 200, 12, default_bound_config(sys), {Quantity::ExcessRisk}};
    const TrialBatch b = run_trials(cfg, 2);
    // at N=40 the spectrum event at delta=0.1 essentially never holds
    EXPECT_GT(check_theorem(b, TheoremId::RiskBound)[0].violation_freq, 0.9);
    const ConditionalRiskCheck c = check_risk_at_realized_delta(b);
    EXPECT_EQ(c.exceptions, 0);
    EXPECT_LE(c.max_ratio, 1.0);
}

TEST(ToeplitzChain, GaussianTrialsPass) {
    const TrialBatch b = run_trials(gaussian_config(6, {60}, 30, 17, {Quantity::ToeplitzChain}), 2);
    for (bool ok : toeplitz_chain_check(b)) EXPECT_TRUE(ok);
    for (const auto& r : b.records()) {
        ASSERT_TRUE(r.chain);
        EXPECT_TRUE(r.chain->split_exact);
        EXPECT_GE(r.chain->corner_margin, 0.0);
    }
}

TEST(ToeplitzChain, Degenerate) {
    const std::vector<double> zeros(20, 0.0);
    const ChainCheck z = check_toeplitz_chain(build_design(zeros, 4, 17));
    EXPECT_TRUE(z.passed());
    // |0 - N I| = N against (T-1) + (N+1-T): equality
    EXPECT_EQ(z.composite_margin, 0.0);
    EXPECT_EQ(z.corner_margin, 0.0);

    const std::vector<double> in{0.3, -1.2, 2.0, 0.7, -0.1};
    EXPECT_TRUE(check_toeplitz_chain(build_design(in, 1, 5)).passed());

    const TrialBatch small = run_trials(gaussian_config(6, {8}, 3, 1, {Quantity::ToeplitzChain}), 1);
    for (bool ok : toeplitz_chain_check(small)) EXPECT_FALSE(ok);
}

TEST(Calibration, ZeroWhenNeverViolated) {
    const FirSystem sys = FirSystem::linear(Eigen::VectorXd::Ones(3), DistributionSpec::gaussian(),
                                            std::nullopt);
    std::vector<ExperimentConfig> sweep{
        ExperimentConfig{sys, {50, 100, 200}, 1000, 5, default_bound_config(sys), {}}};
    const CalibrationOptions opt;
    const CalibrationResult r = calibrate_constant(std::span<const ExperimentConfig>(sweep),
                                                   TheoremId::EstimationError, 0.1, opt, 2);
    EXPECT_TRUE(r.feasible);
    EXPECT_EQ(r.C, 0.0);
}

TEST(Calibration, CalibratedMultiplierHoldsOnFreshSeeds) {
    std::vector<ExperimentConfig> sweep{
        gaussian_config(3, {100, 200, 400}, 400, 100, {Quantity::MultiplierNorm})};
    CalibrationOptions opt;
    opt.min_trials = 400;
    const CalibrationResult r = calibrate_constant(std::span<const ExperimentConfig>(sweep),
                                                   TheoremId::Multiplier, 0.1, opt, 2);
    ASSERT_TRUE(r.feasible);
    EXPECT_GT(r.C, 0.0);
    EXPECT_LT(r.C, 10.0);
    for (const PointCheck& pc : r.points) EXPECT_LE(pc.violation_freq, 0.1);

    ExperimentConfig fresh = sweep[0];
    fresh.master_seed = 999;
    for (const PointCheck& pc : check_theorem(run_trials(fresh, 2), TheoremId::Multiplier, r.C)) {
        EXPECT_LE(pc.violation_freq, 0.1);
    }
}

TEST(Calibration, Preconditions) {
    std::vector<ExperimentConfig> sweep{gaussian_config(3, {100, 200}, 50, 1, {Quantity::SqError})};
    const auto span = std::span<const ExperimentConfig>(sweep);
    EXPECT_THROW(calibrate_constant(span, TheoremId::EstimationError, 0.1, {}, 1), ConfigError);
    CalibrationOptions opt;
    opt.min_trials = 10;
    EXPECT_THROW(calibrate_constant(span, TheoremId::EstimationError, 0.1, opt, 1), ConfigError);
}

TEST(ExperimentConfig, Validation) {
    ExperimentConfig cfg = gaussian_config(3, {100, 50}, 10, 1, {});
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.N_grid = {50, 100};
    EXPECT_NO_THROW(cfg.validate());
    cfg.trials = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.trials = 1;
    cfg.grid_points = 5;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_EQ(quantity_from_string("loss_gap"), Quantity::LossGap);
    EXPECT_THROW(quantity_from_string("bogus"), ConfigError);
    EXPECT_EQ(quantity_for(TheoremId::Spectrum), Quantity::SpectrumDev);
}
