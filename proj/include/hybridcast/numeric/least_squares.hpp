#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "hybridcast/error.hpp"

namespace hybridcast::linalg {

struct OlsResult {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    double rss = 0.0;
    std::size_t dof = 0;
};

/// Ordinary least squares via column-pivoted QR. Throws a numerical error
/// when the design matrix is rank deficient.
[[nodiscard]] inline OlsResult ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const auto n = X.rows(), k = X.cols();
    if (n <= k) throw Error(ErrorCode::numerical, "regression has no residual degrees of freedom");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k) throw Error(ErrorCode::numerical, "singular regression matrix");

    OlsResult out;
    out.coefficients = qr.solve(y);
    const Eigen::VectorXd resid = y - X * out.coefficients;
    out.rss = resid.squaredNorm();
    out.dof = static_cast<std::size_t>(n - k);
    const double sigma2 = out.rss / static_cast<double>(out.dof);
    const Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
    out.standard_errors = (sigma2 * xtx_inv.diagonal().array()).sqrt();
    return out;
}

}  // namespace hybridcast::linalg
