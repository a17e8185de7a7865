#include "firlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "firlab/errors.hpp"

namespace firlab {

SvdResult svd(const Eigen::MatrixXd& A) {
    if (!A.allFinite()) throw NumericError("svd: matrix has non-finite entries");
    SvdResult out;
    if (A.size() == 0) {
        out.singular_values.resize(0);
        out.U.resize(A.rows(), 0);
        out.V.resize(A.cols(), 0);
        return out;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> solver(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.singular_values = solver.singularValues();
    out.U = solver.matrixU();
    out.V = solver.matrixV();
    return out;
}

double default_rel_tol(Eigen::Index rows, Eigen::Index cols) {
    return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& A, std::optional<double> rel_tol) {
    const double tol = rel_tol.value_or(default_rel_tol(A.rows(), A.cols()));
    if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("pseudo_inverse: rel_tol must lie in (0,1)");

    const SvdResult d = svd(A);
    Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(A.cols(), A.rows());
    if (d.singular_values.size() == 0) return pinv;
    const double cutoff = tol * d.singular_values(0);
    for (Eigen::Index i = 0; i < d.singular_values.size(); ++i) {
        const double s = d.singular_values(i);
        if (s > cutoff && s > 0.0) {
            pinv.noalias() += (d.V.col(i) / s) * d.U.col(i).transpose();
        }
    }
    return pinv;
}

double operator_norm(const Eigen::MatrixXd& A) {
    if (A.size() == 0) return 0.0;
    const SvdResult d = svd(A);
    return d.singular_values(0);
}

Eigen::MatrixXd sample_covariance(const DesignMatrix& X) {
    const Eigen::MatrixXd& M = X.matrix();
    Eigen::MatrixXd cov = M.transpose() * M / static_cast<double>(X.rows());
    // exact symmetry for downstream eigen/SVD routines
    return 0.5 * (cov + cov.transpose());
}

ToeplitzSplit toeplitz_split(const DesignMatrix& X) {
    const int N = X.rows();
    const int T = X.cols();
    if (N < 2 * T - 2) {
        throw UnsupportedShapeError("toeplitz_split: requires N >= 2T-2");
    }
    const Eigen::MatrixXd& M = X.matrix();

    ToeplitzSplit split;
    split.N = N;
    split.T = T;
    const int common = N + 1 - T;  // length of x_1 .. x_{N+1-T}
    split.L = Eigen::MatrixXd::Zero(N, T);
    for (int k = 0; k < T; ++k) {
        split.L.col(k).segment(k, common) = M.col(0).head(common);
    }
    split.S = M - split.L;

    const int c = T - 1;
    split.S_upper = split.S.block(0, 1, c, c);
    split.S_lower = split.S.block(N - c, 0, c, c);

    // row 0 of X is [x_1, x_0, ..., x_{2-T}]; row N-1 is [x_N, ..., x_{N+1-T}]
    split.upper_corner.resize(static_cast<std::size_t>(c));
    split.lower_corner.resize(static_cast<std::size_t>(c));
    for (int j = 0; j < c; ++j) {
        split.upper_corner[static_cast<std::size_t>(j)] = M(0, T - 1 - j);
        split.lower_corner[static_cast<std::size_t>(j)] = M(N - 1, c - 1 - j);
    }
    return split;
}

namespace {

double l2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double l1(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

}  // namespace

double corner_vector_norms(const ToeplitzSplit& split) {
    return l2(split.lower_corner) + l2(split.upper_corner);
}

double corner_norm_bound(const ToeplitzSplit& split) {
    // Young: |Toeplitz(c)| <= |c|_1; and |B| <= |B|_F.
    const double lower = std::min(l1(split.lower_corner), split.S_lower.norm());
    const double upper = std::min(l1(split.upper_corner), split.S_upper.norm());
    return lower + upper;
}

double MultiplicationPolynomial::operator()(double x) const {
    if (coefficients.empty()) return 0.0;
    double value = coefficients[0];
    for (std::size_t l = 1; l < coefficients.size(); ++l) {
        value += 2.0 * coefficients[l] *
                 std::cos(2.0 * std::numbers::pi * static_cast<double>(l) * x);
    }
    return value;
}

MultiplicationPolynomial mult_poly(const ToeplitzSplit& split) {
    MultiplicationPolynomial p;
    p.coefficients.resize(static_cast<std::size_t>(split.T));
    for (int l = 0; l < split.T; ++l) {
        p.coefficients[static_cast<std::size_t>(l)] = split.L.col(0).dot(split.L.col(l));
    }
    p.coefficients[0] -= static_cast<double>(split.N + 1 - split.T);
    return p;
}

int default_grid_points(int T) { return std::max(4 * T, 1024); }

double mult_poly_grid_max(const MultiplicationPolynomial& p, int grid_points) {
    if (grid_points < 1) throw ConfigError("grid_points must be positive");
    double best = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        best = std::max(best, std::abs(p(static_cast<double>(i) / grid_points)));
    }
    return best;
}

double mult_poly_slack(const MultiplicationPolynomial& p, int grid_points) {
    const double T = static_cast<double>(p.coefficients.size());
    // c_0 does not enter p'
    double max_coef = 0.0;
    for (std::size_t l = 1; l < p.coefficients.size(); ++l) {
        max_coef = std::max(max_coef, std::abs(p.coefficients[l]));
    }
    return 2.0 * std::numbers::pi * T * T * max_coef / grid_points;
}

double sup_mult_poly(const MultiplicationPolynomial& p, int grid_points) {
    const int T = static_cast<int>(p.coefficients.size());
    if (grid_points < 4 * T) {
        throw ConfigError("sup_mult_poly: grid_points must be at least 4T");
    }
    return mult_poly_grid_max(p, grid_points) + mult_poly_slack(p, grid_points);
}

}  // namespace firlab
