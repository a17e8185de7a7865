#include "firlab/fir_model.hpp"

#include <cmath>
#include <string>

#include "firlab/errors.hpp"

namespace firlab {

std::string_view to_string(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::Linear: return "linear";
        case RegressorKind::LinearQuadratic: return "quadratic";
        case RegressorKind::SaturatedLinear: return "tanh";
    }
    return "unknown";
}

RegressorKind regressor_kind_from_string(std::string_view name) {
    if (name == "linear") return RegressorKind::Linear;
    if (name == "quadratic") return RegressorKind::LinearQuadratic;
    if (name == "tanh") return RegressorKind::SaturatedLinear;
    throw ConfigError("unknown regressor kind '" + std::string(name) + "'");
}

double Regressor::operator()(const Eigen::Ref<const Eigen::RowVectorXd>& v) const {
    const double lin = v.dot(a.transpose());
    switch (kind) {
        case RegressorKind::Linear: return lin;
        case RegressorKind::LinearQuadratic: return lin + beta * (v(0) * v(0) - 1.0);
        case RegressorKind::SaturatedLinear: return std::tanh(lin);
    }
    return lin;
}

FirSystem::FirSystem(Regressor regressor, DistributionSpec input,
                     std::optional<DistributionSpec> noise)
    : regressor_(std::move(regressor)), input_(std::move(input)), noise_(std::move(noise)) {
    if (regressor_.a.size() < 1) throw ConfigError("FIR lag T must be at least 1");
    if (!regressor_.a.allFinite() || !std::isfinite(regressor_.beta)) {
        throw ConfigError("regressor parameters must be finite");
    }
}

Eigen::VectorXd FirSystem::noise_variances(int N) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(N);
    if (noise_) {
        for (int t = 0; t < N; ++t) v(t) = noise_->variance_at(static_cast<std::size_t>(t));
    }
    return v;
}

DesignMatrix build_design(std::span<const double> inputs, int T, int N) {
    if (T < 1 || N < 1) throw DimensionError("build_design: T and N must be positive");
    const auto needed = static_cast<std::size_t>(N) + static_cast<std::size_t>(T) - 1;
    if (inputs.size() < needed) {
        throw DimensionError("build_design: need " + std::to_string(needed) +
                             " inputs, got " + std::to_string(inputs.size()));
    }
    Eigen::MatrixXd X(N, T);
    for (int r = 0; r < N; ++r) {
        for (int j = 0; j < T; ++j) X(r, j) = inputs[static_cast<std::size_t>(r + T - 1 - j)];
    }
    return DesignMatrix(std::move(X));
}

Trajectory simulate_from(const FirSystem& system, std::vector<double> inputs,
                         std::vector<double> noise) {
    const int T = system.lag();
    const int N = static_cast<int>(noise.size());
    const DesignMatrix X = build_design(inputs, T, N);
    const Eigen::VectorXd f = regressor_values(system, X);
    Trajectory traj;
    traj.outputs.resize(noise.size());
    for (int r = 0; r < N; ++r) traj.outputs[r] = f(r) + noise[r];
    traj.inputs = std::move(inputs);
    traj.noise = std::move(noise);
    return traj;
}

Trajectory simulate(const FirSystem& system, int N, const SeedSpec& input_seed,
                    const SeedSpec& noise_seed) {
    if (N < 1) throw DimensionError("simulate: N must be positive");
    const auto n_inputs = static_cast<std::size_t>(N + system.lag() - 1);
    auto inputs = draw_sequence(system.input_spec(), input_seed, n_inputs);
    std::vector<double> noise(static_cast<std::size_t>(N), 0.0);
    if (system.noise_spec()) {
        noise = draw_sequence(*system.noise_spec(), noise_seed, noise.size());
    }
    return simulate_from(system, std::move(inputs), std::move(noise));
}

Trajectory simulate(const FirSystem& system, int N, const SeedSpec& seed) {
    return simulate(system, N, SeedSpec{seed.master_seed, 2 * seed.stream_id},
                    SeedSpec{seed.master_seed, 2 * seed.stream_id + 1});
}

Eigen::VectorXd regressor_values(const Regressor& f, const DesignMatrix& X) {
    if (X.cols() != f.a.size()) {
        throw DimensionError("regressor_values: design has wrong number of columns");
    }
    if (f.kind == RegressorKind::Linear) return X.matrix() * f.a;
    Eigen::VectorXd out(X.rows());
    for (int r = 0; r < X.rows(); ++r) out(r) = f(X.matrix().row(r));
    return out;
}

Eigen::VectorXd regressor_values(const FirSystem& system, const DesignMatrix& X) {
    return regressor_values(system.regressor(), X);
}

}  // namespace firlab
