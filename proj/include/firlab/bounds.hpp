#pragma once

// Closed-form bound calculators for least squares on FIR designs.
//
// Every high-probability statement carries an unspecified absolute constant
// C; it is an explicit input here (default 1) and is calibrated empirically
// by montecarlo::calibrate_constant.

#include <Eigen/Dense>
#include <string_view>
#include <utility>

#include "firlab/fir_model.hpp"

namespace firlab {

enum class TheoremId {
    EstimationError = 1,   // |a_hat - a|^2
    OracleInequality = 2,  // prediction loss, misspecified
    RiskBound = 3,         // excess risk, finite-variance noise
    Spectrum = 4,          // |Sigma_hat - I|
    Multiplier = 5,        // |X'eps / N|
};

TheoremId theorem_from_int(int id);
std::string_view to_string(TheoremId id);

struct BoundConfig {
    double delta = 0.1;
    double eta = 0.1;
    double C = 1.0;
    double L_x = 1.0;
    double L_eps = 1.0;
    double sigma_eps = 1.0;
    double sigma_x = 1.0;
    int T = 1;
    int N = 1;
};

struct BoundReport {
    TheoremId theorem = TheoremId::EstimationError;
    double bound_value = 0.0;
    long long min_N = 0;
    bool condition_met = true;
};

/// Throws ConfigError unless cfg is valid and eta lies in the theorem's range:
/// (0, 2/e] for 1-2, (0, 1/e] for 3-4, (0, 1) for 5.
void validate(const BoundConfig& cfg, TheoremId theorem);

/// ceil(C (L_x^2 v L_x^4) T ln(T v 1/eta) / delta^2); shared by theorems 1-4.
long long spectrum_min_N(const BoundConfig& cfg);

BoundReport thm1_estimation_bound(const BoundConfig& cfg);
BoundReport thm2_oracle_bound(const BoundConfig& cfg);
BoundReport thm3_risk_bound(const BoundConfig& cfg);

/// C L_x^2 (T lnT/N + sqrt(T lnT/N) + (T/N) u + sqrt(T/N) sqrt(u)), u >= 1.
double thm4_spectrum_bound(const BoundConfig& cfg, double u);

/// sqrt(T/N) sigma_x sigma_eps (1 + C L_eps L_x (ln(1/eta) v ln^{3/4}(1/eta))).
double thm5_multiplier_bound(const BoundConfig& cfg);

/// Uniform entry point: theorem 4 is evaluated at u = ln(1/eta), theorem 5
/// carries no sample-size condition.
BoundReport evaluate_bound(TheoremId theorem, const BoundConfig& cfg);

/// ((1+delta)/(1-delta)) (T/N) sigma_eps^2 for an arbitrary delta in [0,1).
double risk_bound_value(double delta, int T, int N, double sigma_eps);

/// ceil((1/eps) max(C_rate T ln^2(1/eta)/(1-delta)^2, C_cond T ln(T v 1/eta)/delta^2)).
long long sample_complexity(double epsilon, double eta, double delta, int T,
                            double C_rate = 1.0, double C_cond = 1.0);

/// X'X / sigma_eps^2.
Eigen::MatrixXd fisher_information(const DesignMatrix& X, double sigma_eps);

struct CrlbReport {
    double trace = 0.0;     // (sigma^2/N) tr(Sigma_hat^+)
    bool singular = false;  // pseudo-inverse convention was applied
};

CrlbReport crlb(const DesignMatrix& X, double sigma_eps);
double crlb_trace(const DesignMatrix& X, double sigma_eps);

/// {upper bound on E s_i(Sigma_hat), lower bound on E tr(Sigma_hat^+)}.
std::pair<double, double> covariance_expectation_bounds(const BoundConfig& cfg);

}  // namespace firlab
