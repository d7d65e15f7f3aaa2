#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

namespace hybridcast::poly {

/// Lag polynomial c0 + c1 B + c2 B^2 + ..., stored lowest power first.
using Poly = std::vector<double>;

[[nodiscard]] inline Poly multiply(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

/// Places `coeffs` at multiples of `stride` after a leading 1, with the given sign:
/// 1 + sign * (c1 B^s + c2 B^2s + ...).
[[nodiscard]] inline Poly lag_polynomial(const std::vector<double>& coeffs, std::size_t stride, double sign) {
    Poly out(coeffs.size() * stride + 1, 0.0);
    out[0] = 1.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) out[(k + 1) * stride] = sign * coeffs[k];
    return out;
}

/// (1 - B^lag)^power
[[nodiscard]] inline Poly difference_operator(std::size_t lag, std::size_t power) {
    Poly out{1.0};
    for (std::size_t k = 0; k < power; ++k) out = multiply(out, lag_polynomial({1.0}, lag, -1.0));
    return out;
}

/// Smallest modulus among the roots of c0 + c1 z + ... (infinity when constant).
[[nodiscard]] inline double min_root_modulus(Poly c) {
    while (!c.empty() && c.back() == 0.0) c.pop_back();
    const std::size_t degree = c.size() <= 1 ? 0 : c.size() - 1;
    if (degree == 0) return std::numeric_limits<double>::infinity();
    if (!std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); })) return 0.0;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree), static_cast<Eigen::Index>(degree));
    for (std::size_t i = 0; i < degree; ++i) {
        companion(0, static_cast<Eigen::Index>(i)) = -c[degree - 1 - i] / c[degree];
    }
    for (std::size_t i = 1; i < degree; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    if (solver.info() != Eigen::Success) return 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) best = std::min(best, std::abs(solver.eigenvalues()[i]));
    return best;
}

/// First `count` coefficients of ma / ar, i.e. the MA(infinity) weights psi_j.
[[nodiscard]] inline std::vector<double> psi_weights(const Poly& ar, const Poly& ma, std::size_t count) {
    std::vector<double> psi(count, 0.0);
    for (std::size_t j = 0; j < count; ++j) {
        double v = j < ma.size() ? ma[j] : 0.0;
        for (std::size_t k = 1; k <= j && k < ar.size(); ++k) v -= ar[k] * psi[j - k];
        psi[j] = v / ar[0];
    }
    return psi;
}

}  // namespace hybridcast::poly
