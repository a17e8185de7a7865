#include "firlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "firlab/errors.hpp"
#include "firlab/linalg.hpp"

namespace firlab {

namespace {

constexpr long long kUnreachable = std::numeric_limits<long long>::max();

long long ceil_to_count(double value) {
    if (!std::isfinite(value) || value >= 9.0e18) return kUnreachable;
    return static_cast<long long>(std::ceil(value));
}

double eta_upper(TheoremId theorem) {
    switch (theorem) {
        case TheoremId::EstimationError:
        case TheoremId::OracleInequality: return 2.0 / std::numbers::e;
        case TheoremId::RiskBound:
        case TheoremId::Spectrum: return 1.0 / std::numbers::e;
        case TheoremId::Multiplier: return 1.0;
    }
    return 1.0;
}

// T ln(T)/N with the convention 0 at T = 1
double tlogt_over_n(int T, int N) {
    return static_cast<double>(T) * std::log(static_cast<double>(T)) / N;
}

}  // namespace

TheoremId theorem_from_int(int id) {
    if (id < 1 || id > 5) throw ConfigError("theorem id must be in 1..5, got " + std::to_string(id));
    return static_cast<TheoremId>(id);
}

std::string_view to_string(TheoremId id) {
    switch (id) {
        case TheoremId::EstimationError: return "estimation_error";
        case TheoremId::OracleInequality: return "oracle_inequality";
        case TheoremId::RiskBound: return "risk_bound";
        case TheoremId::Spectrum: return "spectrum";
        case TheoremId::Multiplier: return "multiplier";
    }
    return "unknown";
}

void validate(const BoundConfig& cfg, TheoremId theorem) {
    if (!(cfg.delta >= 0.0 && cfg.delta < 1.0)) throw ConfigError("delta must lie in [0,1)");
    if (!(cfg.C >= 0.0) || !std::isfinite(cfg.C)) throw ConfigError("C must be nonnegative");
    if (!(cfg.L_x > 0.0) || !(cfg.L_eps > 0.0)) throw ConfigError("L_x and L_eps must be positive");
    if (!(cfg.sigma_eps >= 0.0) || !(cfg.sigma_x >= 0.0)) {
        throw ConfigError("sigma_eps and sigma_x must be nonnegative");
    }
    if (cfg.T < 1 || cfg.N < 1) throw ConfigError("T and N must be positive");
    const double hi = eta_upper(theorem);
    const bool closed = theorem != TheoremId::Multiplier;
    if (!(cfg.eta > 0.0) || (closed ? cfg.eta > hi * (1.0 + 1e-15) : cfg.eta >= hi)) {
        throw ConfigError("eta = " + std::to_string(cfg.eta) + " is outside the range of theorem " +
                          std::to_string(static_cast<int>(theorem)));
    }
}

long long spectrum_min_N(const BoundConfig& cfg) {
    if (cfg.delta == 0.0) return kUnreachable;
    const double L2 = cfg.L_x * cfg.L_x;
    const double log_term = std::log(std::max(static_cast<double>(cfg.T), 1.0 / cfg.eta));
    return ceil_to_count(cfg.C * std::max(L2, L2 * L2) * cfg.T * log_term / (cfg.delta * cfg.delta));
}

namespace {

BoundReport with_condition(TheoremId id, double value, long long min_N, int N) {
    return BoundReport{id, value, min_N, static_cast<long long>(N) >= min_N};
}

double noise_factor(const BoundConfig& cfg) {
    const double l = std::log(2.0 / cfg.eta);
    return 1.0 + cfg.C * cfg.L_x * cfg.L_x * cfg.L_eps * cfg.L_eps * l * l;
}

}  // namespace

BoundReport thm1_estimation_bound(const BoundConfig& cfg) {
    validate(cfg, TheoremId::EstimationError);
    const double ratio = static_cast<double>(cfg.T) / cfg.N;
    const double one_minus = 1.0 - cfg.delta;
    const double value = 2.0 / (one_minus * one_minus) * ratio * noise_factor(cfg);
    return with_condition(TheoremId::EstimationError, value, spectrum_min_N(cfg), cfg.N);
}

BoundReport thm2_oracle_bound(const BoundConfig& cfg) {
    validate(cfg, TheoremId::OracleInequality);
    const double ratio = static_cast<double>(cfg.T) / cfg.N;
    const double value = 2.0 / (1.0 - cfg.delta) * ratio * cfg.sigma_eps * noise_factor(cfg);
    return with_condition(TheoremId::OracleInequality, value, spectrum_min_N(cfg), cfg.N);
}

double risk_bound_value(double delta, int T, int N, double sigma_eps) {
    if (!(delta >= 0.0 && delta < 1.0)) throw ConfigError("delta must lie in [0,1)");
    return (1.0 + delta) / (1.0 - delta) * static_cast<double>(T) / N * sigma_eps * sigma_eps;
}

BoundReport thm3_risk_bound(const BoundConfig& cfg) {
    validate(cfg, TheoremId::RiskBound);
    return with_condition(TheoremId::RiskBound,
                          risk_bound_value(cfg.delta, cfg.T, cfg.N, cfg.sigma_eps),
                          spectrum_min_N(cfg), cfg.N);
}

double thm4_spectrum_bound(const BoundConfig& cfg, double u) {
    validate(cfg, TheoremId::Spectrum);
    if (!(u >= 1.0)) throw ConfigError("theorem 4 requires u >= 1");
    const double a = tlogt_over_n(cfg.T, cfg.N);
    const double b = static_cast<double>(cfg.T) / cfg.N;
    return cfg.C * cfg.L_x * cfg.L_x * (a + std::sqrt(a) + b * u + std::sqrt(b) * std::sqrt(u));
}

double thm5_multiplier_bound(const BoundConfig& cfg) {
    validate(cfg, TheoremId::Multiplier);
    const double l = std::log(1.0 / cfg.eta);
    const double tail = std::max(l, std::pow(l, 0.75));
    return std::sqrt(static_cast<double>(cfg.T) / cfg.N) * cfg.sigma_x * cfg.sigma_eps *
           (1.0 + cfg.C * cfg.L_eps * cfg.L_x * tail);
}

BoundReport evaluate_bound(TheoremId theorem, const BoundConfig& cfg) {
    switch (theorem) {
        case TheoremId::EstimationError: return thm1_estimation_bound(cfg);
        case TheoremId::OracleInequality: return thm2_oracle_bound(cfg);
        case TheoremId::RiskBound: return thm3_risk_bound(cfg);
        case TheoremId::Spectrum: {
            const double u = std::log(1.0 / cfg.eta);
            return with_condition(theorem, thm4_spectrum_bound(cfg, u), spectrum_min_N(cfg), cfg.N);
        }
        case TheoremId::Multiplier:
            return with_condition(theorem, thm5_multiplier_bound(cfg), 0, cfg.N);
    }
    throw ConfigError("unknown theorem");
}

long long sample_complexity(double epsilon, double eta, double delta, int T, double C_rate,
                            double C_cond) {
    if (!(epsilon > 0.0)) throw ConfigError("sample_complexity: epsilon must be positive");
    if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("sample_complexity: eta must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("sample_complexity: delta must lie in (0,1)");
    if (T < 1) throw ConfigError("sample_complexity: T must be positive");
    const double inv_eta_log = std::log(1.0 / eta);
    const double rate = C_rate * T * inv_eta_log * inv_eta_log / ((1.0 - delta) * (1.0 - delta));
    const double cond =
        C_cond * T * std::log(std::max(static_cast<double>(T), 1.0 / eta)) / (delta * delta);
    return ceil_to_count(std::max(rate, cond) / epsilon);
}

Eigen::MatrixXd fisher_information(const DesignMatrix& X, double sigma_eps) {
    if (!(sigma_eps > 0.0)) throw ConfigError("fisher_information: sigma_eps must be positive");
    const Eigen::MatrixXd& M = X.matrix();
    return M.transpose() * M / (sigma_eps * sigma_eps);
}

CrlbReport crlb(const DesignMatrix& X, double sigma_eps) {
    if (!(sigma_eps > 0.0)) throw ConfigError("crlb: sigma_eps must be positive");
    const Eigen::VectorXd s = svd(sample_covariance(X)).singular_values;
    const double cutoff = default_rel_tol(X.rows(), X.cols()) * (s.size() ? s(0) : 0.0);
    CrlbReport r;
    double trace_pinv = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s(i) > cutoff && s(i) > 0.0) {
            trace_pinv += 1.0 / s(i);
        } else {
            r.singular = true;
        }
    }
    r.trace = sigma_eps * sigma_eps / X.rows() * trace_pinv;
    return r;
}

double crlb_trace(const DesignMatrix& X, double sigma_eps) { return crlb(X, sigma_eps).trace; }

std::pair<double, double> covariance_expectation_bounds(const BoundConfig& cfg) {
    if (cfg.T < 1 || cfg.N < 1) throw ConfigError("T and N must be positive");
    const double a = tlogt_over_n(cfg.T, cfg.N);
    const double correction = cfg.C * cfg.L_x * cfg.L_x * (a + std::sqrt(a));
    return {1.0 + correction, cfg.T * (1.0 - correction)};
}

}  // namespace firlab
