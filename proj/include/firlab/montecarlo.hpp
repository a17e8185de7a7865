#pragma once

// Parallel, schedule-independent Monte Carlo trials.
//
// Trial i at grid point g draws its input and noise from the streams
// 2*((g << 32) | i) and 2*((g << 32) | i) + 1 of the master seed, writes into
// its own preallocated slot, and aggregation walks the slots in (g, i)
// order. The worker count therefore never changes a single bit of output.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "firlab/bounds.hpp"
#include "firlab/fir_model.hpp"

namespace firlab {

enum class Quantity {
    SqError,
    SpectrumDev,
    MultiplierNorm,
    ExcessRisk,
    LossGap,
    MseVsCrlb,
    ToeplitzChain,
};

std::string_view to_string(Quantity q);
Quantity quantity_from_string(std::string_view name);

/// Quantity compared against each theorem's bound.
Quantity quantity_for(TheoremId theorem);

struct ExperimentConfig {
    FirSystem system;
    std::vector<int> N_grid;
    int trials = 1;
    std::uint64_t master_seed = 0;
    /// delta, eta, C, L_x, L_eps, sigma_eps, sigma_x; T and N are filled per point.
    BoundConfig bound;
    std::vector<Quantity> quantities;
    /// Grid for the certified multiplication-polynomial sup; 0 selects max(4T, 1024).
    int grid_points = 0;

    int lag() const { return system.lag(); }
    bool wants(Quantity q) const;
    BoundConfig bound_at(int N) const;
    void validate() const;
};

/// Default BoundConfig whose L_x, L_eps, sigma_x, sigma_eps come from the system's specs.
BoundConfig default_bound_config(const FirSystem& system);

struct ChainCheck {
    bool split_exact = false;    // X == L + S entrywise
    bool corner_ok = false;      // |S| <= corner_norm_bound
    bool poly_ok = false;        // |L'L - (N+1-T)I| <= certified sup |p|
    bool composite_ok = false;   // |X'X - N I| <= (T-1) + |L'L-..| + |S'S| + 2|S'L|
    bool corner_vector_ok = false;  // |S| <= sum of corner l2 norms (informational)
    double corner_margin = 0.0;     // bound - lhs, for each check
    double poly_margin = 0.0;
    double composite_margin = 0.0;

    bool passed() const { return split_exact && corner_ok && poly_ok && composite_ok; }
};

/// Runs the three numerical checks on one design. Throws UnsupportedShapeError if N < 2T-2.
ChainCheck check_toeplitz_chain(const DesignMatrix& X, int grid_points = 0);

struct TrialRecord {
    int grid_index = 0;
    int trial_id = 0;
    int N = 0;
    int T = 0;
    double sq_error = 0.0;
    double spectrum_dev = 0.0;
    double s_min = 0.0;
    double s_max = 0.0;
    double realized_delta = 0.0;  // max(|s_min - 1|, |s_max - 1|)
    double multiplier_norm = 0.0;
    double multiplier_sq = 0.0;
    double excess_risk = 0.0;     // conditional expectation over the noise
    double loss_gap = 0.0;        // L(a_min) - L(a_hat), realized
    double crlb_trace = 0.0;
    double residual_orthogonality = 0.0;
    bool singular = false;
    std::optional<ChainCheck> chain;
    std::string error;

    bool usable() const { return error.empty() && !singular; }
    /// The measured value of q (NaN when q was not requested or is undefined).
    double value(Quantity q) const;
};

struct QuantitySummary {
    int T = 0;
    int N = 0;
    int count = 0;
    double mean = 0.0;
    double median = 0.0;
    double q95 = 0.0;
    double std_error = 0.0;
};

class TrialBatch {
public:
    TrialBatch(ExperimentConfig config, std::vector<TrialRecord> records);

    const ExperimentConfig& config() const { return config_; }
    const std::vector<TrialRecord>& records() const { return records_; }
    bool has(Quantity q) const { return config_.wants(q); }

    /// Finite values of q over usable trials at grid point N, in trial order.
    std::vector<double> values(Quantity q, int N) const;
    std::vector<QuantitySummary> summary(Quantity q) const;
    int singular_count(int N) const;
    int error_count(int N) const;

private:
    ExperimentConfig config_;
    std::vector<TrialRecord> records_;
};

/// Worker count from FIRLAB_WORKERS, else hardware concurrency (at least 1).
int default_workers();

TrialBatch run_trials(const ExperimentConfig& config, int workers = 0);

/// Linear-interpolation empirical quantile (p in [0,1]) of unsorted data.
double empirical_quantile(std::vector<double> data, double p);

/// Fraction of usable trials with q > threshold (optionally at one N).
double tail_probability(const TrialBatch& batch, Quantity q, double threshold,
                        std::optional<int> N = {});
double tail_probability(std::span<const double> samples, double threshold);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// OLS on (ln N, ln value). Non-positive values are dropped; needs >= 3 points.
RateFit fit_rate(std::span<const double> N, std::span<const double> values);
RateFit fit_rate(const TrialBatch& batch, Quantity q);

struct PointCheck {
    int T = 0;
    int N = 0;
    int trials = 0;     // usable trials
    int excluded = 0;   // singular or failed
    double quantity_mean = 0.0;
    double quantity_q95 = 0.0;
    double bound_value = 0.0;
    double violation_freq = 0.0;
    long long min_N = 0;
    bool condition_met = false;
    BoundConfig cfg;
};

/// Per grid point: fraction of usable trials breaking the theorem at constant C.
/// Theorem 3 counts a violation when the spectrum event at cfg.delta fails or
/// the excess risk exceeds the bound.
std::vector<PointCheck> check_theorem(const TrialBatch& batch, TheoremId theorem,
                                      std::optional<double> C = {},
                                      std::optional<double> eta = {});

struct ConditionalRiskCheck {
    int eligible = 0;    // usable trials with realized delta < 1
    int exceptions = 0;  // excess_risk > bound at realized delta
    double max_ratio = 0.0;
};

/// Deterministic theorem-3 check at each trial's realized spectrum.
ConditionalRiskCheck check_risk_at_realized_delta(const TrialBatch& batch);

/// Per-trial pass flags for the Toeplitz chain (false when shape is unsupported).
std::vector<bool> toeplitz_chain_check(const TrialBatch& batch);

struct CalibrationOptions {
    /// One-sided Hoeffding confidence for the violation frequency; 0 compares
    /// the raw empirical frequency with eta.
    double confidence = 0.95;
    double max_C = 1e6;
    double rel_precision = 0.01;
    int min_points = 3;
    int min_trials = 1000;
};

struct CalibrationResult {
    TheoremId theorem = TheoremId::EstimationError;
    double eta = 0.0;
    double C = 0.0;
    bool feasible = false;
    std::vector<PointCheck> points;  // evaluated at C
};

/// Smallest C with (violation frequency + margin) <= eta at every sweep point.
CalibrationResult calibrate_constant(std::span<const TrialBatch> sweep, TheoremId theorem,
                                     double eta, const CalibrationOptions& options = {});
CalibrationResult calibrate_constant(std::span<const ExperimentConfig> sweep, TheoremId theorem,
                                     double eta, const CalibrationOptions& options = {},
                                     int workers = 0);

}  // namespace firlab
