#include "firlab/estimator.hpp"

#include <cmath>
#include <limits>

#include "firlab/errors.hpp"
#include "firlab/linalg.hpp"

namespace firlab {

namespace {

void require_rows(const DesignMatrix& X, const Eigen::VectorXd& v, const char* what) {
    if (v.size() != X.rows()) {
        throw DimensionError(std::string(what) + ": length must equal the number of rows of X");
    }
}

void require_cols(const DesignMatrix& X, const Eigen::VectorXd& a, const char* what) {
    if (a.size() != X.cols()) {
        throw DimensionError(std::string(what) + ": parameter length must equal T");
    }
}

void require_variances(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v(i) >= 0.0)) throw ConfigError("noise variances must be nonnegative");
    }
}

Eigen::VectorXd normal_solve(const DesignMatrix& X, const Eigen::VectorXd& rhs) {
    const Eigen::MatrixXd& M = X.matrix();
    Eigen::MatrixXd gram = M.transpose() * M;
    gram = 0.5 * (gram + gram.transpose());
    return pseudo_inverse(gram, default_rel_tol(X.rows(), X.cols())) * (M.transpose() * rhs);
}

}  // namespace

Eigen::VectorXd least_squares(const DesignMatrix& X, const Eigen::VectorXd& y) {
    require_rows(X, y, "least_squares");
    return normal_solve(X, y);
}

double prediction_loss(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& a) {
    require_rows(X, y, "prediction_loss");
    require_cols(X, a, "prediction_loss");
    return (y - X.matrix() * a).squaredNorm() / X.rows();
}

double prediction_risk(const DesignMatrix& X, const Eigen::VectorXd& f_values,
                       const Eigen::VectorXd& noise_variances, const Eigen::VectorXd& a) {
    require_rows(X, f_values, "prediction_risk");
    require_rows(X, noise_variances, "prediction_risk");
    require_cols(X, a, "prediction_risk");
    require_variances(noise_variances);
    const double N = X.rows();
    return (f_values - X.matrix() * a).squaredNorm() / N + noise_variances.sum() / N;
}

Eigen::VectorXd oracle_minimizer(const DesignMatrix& X, const Eigen::VectorXd& f_values) {
    require_rows(X, f_values, "oracle_minimizer");
    return normal_solve(X, f_values);
}

double excess_risk(const DesignMatrix& X, const Eigen::VectorXd& f_values,
                   const Eigen::VectorXd& noise_variances, const Eigen::VectorXd& a_hat) {
    require_rows(X, noise_variances, "excess_risk");
    require_cols(X, a_hat, "excess_risk");
    require_variances(noise_variances);
    const Eigen::VectorXd a_min = oracle_minimizer(X, f_values);
    return (X.matrix() * (a_hat - a_min)).squaredNorm() / X.rows();
}

double expected_excess_risk(const DesignMatrix& X, const Eigen::VectorXd& noise_variances) {
    require_rows(X, noise_variances, "expected_excess_risk");
    require_variances(noise_variances);
    const Eigen::MatrixXd& M = X.matrix();
    Eigen::MatrixXd gram = M.transpose() * M;
    gram = 0.5 * (gram + gram.transpose());
    const Eigen::MatrixXd gram_pinv = pseudo_inverse(gram, default_rel_tol(X.rows(), X.cols()));
    // tr(H D) = tr(G^+ X' D X)
    const Eigen::MatrixXd weighted = M.transpose() * noise_variances.asDiagonal() * M;
    return (gram_pinv.cwiseProduct(weighted.transpose())).sum() / X.rows();
}

double residual_orthogonality(const DesignMatrix& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& a) {
    require_rows(X, y, "residual_orthogonality");
    require_cols(X, a, "residual_orthogonality");
    const Eigen::MatrixXd& M = X.matrix();
    const double scale = operator_norm(M) * y.norm() + std::numeric_limits<double>::min();
    return (M.transpose() * (y - M * a)).norm() / scale;
}

EstimateReport estimate(const DesignMatrix& X, const Eigen::VectorXd& y,
                        const std::optional<Eigen::VectorXd>& a_true,
                        const std::optional<Eigen::VectorXd>& noise) {
    EstimateReport r;
    r.a_hat = least_squares(X, y);
    if (a_true) {
        require_cols(X, *a_true, "estimate");
        r.sq_error = (r.a_hat - *a_true).squaredNorm();
    }
    r.loss_value = prediction_loss(X, y, r.a_hat);

    const Eigen::VectorXd s = svd(sample_covariance(X)).singular_values;
    r.s_max = s.size() ? s(0) : 0.0;
    r.s_min = s.size() ? s(s.size() - 1) : 0.0;
    if (r.s_max == 0.0 || r.s_min <= default_rel_tol(X.rows(), X.cols()) * r.s_max) {
        r.singular = true;
        r.s_min = 0.0;
    }

    if (noise) {
        require_rows(X, *noise, "estimate");
        r.multiplier_norm = (X.matrix().transpose() * *noise).norm() / X.rows();
    }
    r.residual_orthogonality = residual_orthogonality(X, y, r.a_hat);
    return r;
}

}  // namespace firlab
