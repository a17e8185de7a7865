#pragma once

// FIR systems, trajectories and the time-shifted design matrix.
//
// Index convention. The model runs over t in [2-T, N] for inputs and
// t in [1, N] for outputs. Arrays here are 0-based:
//
//   inputs[i]  <->  x_{i + 2 - T},   i = 0 .. N+T-2
//   outputs[r] <->  y_{r + 1},       r = 0 .. N-1
//   noise[r]   <->  eps_{r + 1}
//
// so x_1 lives at inputs[T-1] and row r of the design is
//   [inputs[r+T-1], inputs[r+T-2], ..., inputs[r]].

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "firlab/sampler.hpp"

namespace firlab {

/// Fixed catalogue of regressors f: R^T -> R.
enum class RegressorKind {
    Linear,           // a'v
    LinearQuadratic,  // a'v + beta (v_1^2 - 1)
    SaturatedLinear,  // tanh(a'v)
};

std::string_view to_string(RegressorKind kind);
RegressorKind regressor_kind_from_string(std::string_view name);

struct Regressor {
    RegressorKind kind = RegressorKind::Linear;
    Eigen::VectorXd a;
    double beta = 0.0;

    double operator()(const Eigen::Ref<const Eigen::RowVectorXd>& v) const;

    /// True parameter vector when the linear class contains f.
    bool is_linear() const { return kind == RegressorKind::Linear; }
};

class FirSystem {
public:
    /// noise == nullopt means a noiseless system.
    FirSystem(Regressor regressor, DistributionSpec input,
              std::optional<DistributionSpec> noise);

    static FirSystem linear(Eigen::VectorXd a, DistributionSpec input,
                            std::optional<DistributionSpec> noise) {
        return {Regressor{RegressorKind::Linear, std::move(a), 0.0}, std::move(input),
                std::move(noise)};
    }

    int lag() const { return static_cast<int>(regressor_.a.size()); }
    const Regressor& regressor() const { return regressor_; }
    const DistributionSpec& input_spec() const { return input_; }
    const std::optional<DistributionSpec>& noise_spec() const { return noise_; }

    /// Per-index noise variances for t = 1..N (zeros when noiseless).
    Eigen::VectorXd noise_variances(int N) const;

    /// Common upper bound on the noise variance (0 when noiseless).
    double noise_variance_bound() const { return noise_ ? noise_->variance() : 0.0; }

private:
    Regressor regressor_;
    DistributionSpec input_;
    std::optional<DistributionSpec> noise_;
};

struct Trajectory {
    std::vector<double> inputs;   // length N+T-1
    std::vector<double> outputs;  // length N
    std::vector<double> noise;    // length N

    int N() const { return static_cast<int>(outputs.size()); }
};

/// N x T matrix whose row r is [x_{r+1}, x_r, ..., x_{r+2-T}].
class DesignMatrix {
public:
    DesignMatrix() = default;
    explicit DesignMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {}

    int rows() const { return static_cast<int>(entries_.rows()); }
    int cols() const { return static_cast<int>(entries_.cols()); }
    const Eigen::MatrixXd& matrix() const { return entries_; }
    double operator()(int r, int c) const { return entries_(r, c); }

private:
    Eigen::MatrixXd entries_;
};

DesignMatrix build_design(std::span<const double> inputs, int T, int N);

/// Deterministic simulation from given inputs and noise (both already drawn).
Trajectory simulate_from(const FirSystem& system, std::vector<double> inputs,
                         std::vector<double> noise);

/// Draws inputs from `input_seed` and noise from `noise_seed`.
Trajectory simulate(const FirSystem& system, int N, const SeedSpec& input_seed,
                    const SeedSpec& noise_seed);

/// Single-seed form: inputs on stream 2*stream_id, noise on 2*stream_id + 1.
Trajectory simulate(const FirSystem& system, int N, const SeedSpec& seed);

/// (f(X_1), ..., f(X_N)).
Eigen::VectorXd regressor_values(const FirSystem& system, const DesignMatrix& X);
Eigen::VectorXd regressor_values(const Regressor& f, const DesignMatrix& X);

}  // namespace firlab
