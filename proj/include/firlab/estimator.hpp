#pragma once

#include <Eigen/Dense>
#include <optional>

#include "firlab/fir_model.hpp"

namespace firlab {

/// a_hat = (X'X)^+ X'y; the minimum-norm solution when X is rank deficient.
Eigen::VectorXd least_squares(const DesignMatrix& X, const Eigen::VectorXd& y);

/// (1/N) |y - Xa|^2
double prediction_loss(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& a);

/// E(loss(a) | X) for centered independent noise with the given variances:
/// (1/N)|f - Xa|^2 + (1/N) sum_t var_t.
double prediction_risk(const DesignMatrix& X, const Eigen::VectorXd& f_values,
                       const Eigen::VectorXd& noise_variances, const Eigen::VectorXd& a);

/// a_min = (X'X)^+ X'f, the minimizer of the conditional risk.
Eigen::VectorXd oracle_minimizer(const DesignMatrix& X, const Eigen::VectorXd& f_values);

/// R(a_hat) - R(a_min) = (1/N)|X(a_hat - a_min)|^2. The noise variances
/// cancel; they are accepted (and validated) to keep the risk signature.
double excess_risk(const DesignMatrix& X, const Eigen::VectorXd& f_values,
                   const Eigen::VectorXd& noise_variances, const Eigen::VectorXd& a_hat);

/// E(R(a_hat) - R(a_min) | X) over the noise: (1/N) sum_t H_tt var_t with
/// H = X (X'X)^+ X' the hat matrix. Bounded by T max_t var_t / N.
double expected_excess_risk(const DesignMatrix& X, const Eigen::VectorXd& noise_variances);

/// |X'(y - X a)| / (|X| |y| + tiny)
double residual_orthogonality(const DesignMatrix& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& a);

struct EstimateReport {
    Eigen::VectorXd a_hat;
    std::optional<double> sq_error;         // needs the true a
    double loss_value = 0.0;
    double s_min = 0.0;                     // singular values of the sample covariance
    double s_max = 0.0;
    std::optional<double> multiplier_norm;  // |X'eps / N|, needs the noise
    double residual_orthogonality = 0.0;
    bool singular = false;                  // s_min below the pseudo-inverse cutoff
};

EstimateReport estimate(const DesignMatrix& X, const Eigen::VectorXd& y,
                        const std::optional<Eigen::VectorXd>& a_true = {},
                        const std::optional<Eigen::VectorXd>& noise = {});

}  // namespace firlab
