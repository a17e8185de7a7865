#pragma once

// Dense SVD / pseudo-inverse plumbing and the X = L + S Toeplitz machinery.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "firlab/fir_model.hpp"

namespace firlab {

struct SvdResult {
    Eigen::VectorXd singular_values;  // descending, nonnegative
    Eigen::MatrixXd U;                // thin left singular vectors
    Eigen::MatrixXd V;                // thin right singular vectors
};

/// Thin SVD. Throws NumericError on non-finite input.
SvdResult svd(const Eigen::MatrixXd& A);

/// max(rows, cols) * machine epsilon.
double default_rel_tol(Eigen::Index rows, Eigen::Index cols);

/// Moore-Penrose pseudo-inverse; singular values <= rel_tol * s_max are dropped.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& A, std::optional<double> rel_tol = {});

/// Largest singular value (0 for empty matrices).
double operator_norm(const Eigen::MatrixXd& A);

/// X'X / N.
Eigen::MatrixXd sample_covariance(const DesignMatrix& X);

/// X = L + S, where L holds the common sequence x_1..x_{N+1-T} shifted down
/// one row per column and S lives on the two triangular corners.
struct ToeplitzSplit {
    int N = 0;
    int T = 0;
    Eigen::MatrixXd L;
    Eigen::MatrixXd S;
    /// Bottom-left (T-1)x(T-1) lower triangular block of S (rows N-T+1.., cols 0..T-2).
    Eigen::MatrixXd S_lower;
    /// Top-right (T-1)x(T-1) upper triangular block of S (rows 0..T-2, cols 1..T-1).
    Eigen::MatrixXd S_upper;
    /// x_{N+2-T} .. x_N
    std::vector<double> lower_corner;
    /// x_{2-T} .. x_0
    std::vector<double> upper_corner;
};

/// Requires N >= 2T-2; throws UnsupportedShapeError otherwise.
ToeplitzSplit toeplitz_split(const DesignMatrix& X);

/// Sum over the two corners of the Euclidean norms of their input vectors.
/// This is NOT an upper bound on |S| in general once T >= 3 (a triangular
/// Toeplitz block can exceed the l2 norm of its coefficients); kept for reporting.
double corner_vector_norms(const ToeplitzSplit& split);

/// Certified upper bound on |S|: each corner block contributes
/// min(l1 norm of its coefficients, its Frobenius norm), and |S| is at most
/// the sum of the two block norms.
double corner_norm_bound(const ToeplitzSplit& split);

/// p(x) = c_0 + 2 sum_{l>=1} c_l cos(2 pi l x).
struct MultiplicationPolynomial {
    std::vector<double> coefficients;  // c_0 .. c_{T-1}

    double operator()(double x) const;
    int degree() const { return static_cast<int>(coefficients.size()) - 1; }
};

/// Coefficients c_l = <L_1, L_{1+l}> - (N+1-T) 1{l=0}.
MultiplicationPolynomial mult_poly(const ToeplitzSplit& split);

/// max(4T, 1024).
int default_grid_points(int T);

/// max |p| over the uniform periodic grid {i / grid_points}.
double mult_poly_grid_max(const MultiplicationPolynomial& p, int grid_points);

/// Slack 2 pi T^2 max_{l>=1} |c_l| / grid_points added to the grid maximum.
double mult_poly_slack(const MultiplicationPolynomial& p, int grid_points);

/// Certified upper bound on sup_{x in [0,1]} |p(x)|: grid maximum plus slack.
/// Throws ConfigError if grid_points < 4T.
double sup_mult_poly(const MultiplicationPolynomial& p, int grid_points);

}  // namespace firlab
