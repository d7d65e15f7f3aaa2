#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "hybridcast/error.hpp"
#include "hybridcast/models/forecast.hpp"
#include "hybridcast/numeric/least_squares.hpp"
#include "hybridcast/numeric/nelder_mead.hpp"
#include "hybridcast/numeric/polynomial.hpp"
#include "hybridcast/numeric/stats.hpp"
#include "hybridcast/preprocess/transforms.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::arima {

struct ArimaOrder {
    std::size_t p = 0;
    std::size_t d = 0;
    std::size_t q = 0;
    friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

struct SeasonalOrder {
    std::size_t P = 0;
    std::size_t D = 0;
    std::size_t Q = 0;
    std::size_t s = 0;
    [[nodiscard]] bool active() const noexcept { return P + D + Q > 0; }
    friend bool operator==(const SeasonalOrder&, const SeasonalOrder&) = default;
};

/// MA terms enter with a plus sign: w_t = c + AR part + e_t + sum theta_k e_{t-k}.
struct ArimaParams {
    std::vector<double> phi;
    std::vector<double> theta;
    std::vector<double> seasonal_phi;
    std::vector<double> seasonal_theta;
    double intercept = 0.0;
    double sigma2 = 1.0;
};

struct ArimaOptions {
    /// Defaults to true when d + D == 0.
    std::optional<bool> include_intercept;
    std::uint64_t seed = 20240607;
    std::size_t restarts = 3;
    std::size_t max_iterations = 2000;
    double tolerance = 1e-8;
};

struct FittedArima {
    ArimaOrder order;
    SeasonalOrder seasonal;
    bool include_intercept = false;
    ArimaParams params;
    /// Seasonal differences first, then regular ones, in application order.
    std::vector<preprocess::DifferenceRecord> differencing;
    double css = 0.0;
    double aic = 0.0;
    std::size_t n_effective = 0;
    /// One-step innovations; residuals[0] belongs to series index residual_offset.
    std::vector<double> residuals;
    std::size_t residual_offset = 0;
    std::vector<double> working_tail;
    std::vector<double> residual_tail;
    double working_mean = 0.0;
    Timestamp last_timestamp = 0;
    std::int64_t frequency = 1;
    std::size_t series_length = 0;

    [[nodiscard]] std::size_t estimated_parameters() const {
        return order.p + order.q + seasonal.P + seasonal.Q + (include_intercept ? 1 : 0);
    }
};

/// n_eff * ln(css / n_eff) + 2 * (k + 1); the variance counts as one parameter.
/// css / n_eff is floored at the smallest normal double so a perfect fit stays finite.
[[nodiscard]] inline double arima_aic(double css, std::size_t n_effective, std::size_t estimated) {
    const double n = static_cast<double>(n_effective);
    return n * std::log(std::max(css / n, std::numeric_limits<double>::min())) + 2.0 * static_cast<double>(estimated + 1);
}

namespace detail {

struct Expanded {
    poly::Poly ar;  // 1 - a_1 B - a_2 B^2 ...
    poly::Poly ma;  // 1 + b_1 B + ...
};

inline Expanded expand(const ArimaParams& p, std::size_t s) {
    return {poly::multiply(poly::lag_polynomial(p.phi, 1, -1.0), poly::lag_polynomial(p.seasonal_phi, std::max<std::size_t>(s, 1), -1.0)),
            poly::multiply(poly::lag_polynomial(p.theta, 1, 1.0), poly::lag_polynomial(p.seasonal_theta, std::max<std::size_t>(s, 1), 1.0))};
}

/// e_t for t >= t0 (earlier entries stay 0); pre-sample w is the working mean.
inline std::vector<double> innovations(std::span<const double> w, double c, const Expanded& e, double w_mean) {
    const std::size_t n = w.size();
    const std::size_t t0 = e.ar.size() - 1;
    std::vector<double> eps(n, 0.0);
    for (std::size_t t = t0; t < n; ++t) {
        double v = w[t] - c;
        for (std::size_t k = 1; k < e.ar.size(); ++k) v += e.ar[k] * (t >= k ? w[t - k] : w_mean);
        for (std::size_t k = 1; k < e.ma.size() && k <= t; ++k) v -= e.ma[k] * eps[t - k];
        eps[t] = v;
    }
    return eps;
}

/// Sum of max(0, 1.001 - |root|) over the four lag polynomials.
inline double root_violation(const ArimaParams& p) {
    double v = 0.0;
    for (const auto* coeffs : {&p.phi, &p.seasonal_phi}) {
        if (!coeffs->empty()) v += std::max(0.0, 1.001 - poly::min_root_modulus(poly::lag_polynomial(*coeffs, 1, -1.0)));
    }
    for (const auto* coeffs : {&p.theta, &p.seasonal_theta}) {
        if (!coeffs->empty()) v += std::max(0.0, 1.001 - poly::min_root_modulus(poly::lag_polynomial(*coeffs, 1, 1.0)));
    }
    return v;
}

struct Layout {
    bool intercept;
    std::size_t p, q, P, Q;
    [[nodiscard]] std::size_t size() const { return (intercept ? 1 : 0) + p + q + P + Q; }

    [[nodiscard]] ArimaParams unpack(std::span<const double> x) const {
        ArimaParams out;
        std::size_t i = 0;
        if (intercept) out.intercept = x[i++];
        auto take = [&](std::vector<double>& dst, std::size_t count) {
            dst.assign(x.begin() + static_cast<std::ptrdiff_t>(i), x.begin() + static_cast<std::ptrdiff_t>(i + count));
            i += count;
        };
        take(out.phi, p);
        take(out.theta, q);
        take(out.seasonal_phi, P);
        take(out.seasonal_theta, Q);
        return out;
    }

    [[nodiscard]] std::vector<double> pack(const ArimaParams& a) const {
        std::vector<double> x;
        if (intercept) x.push_back(a.intercept);
        x.insert(x.end(), a.phi.begin(), a.phi.end());
        x.insert(x.end(), a.theta.begin(), a.theta.end());
        x.insert(x.end(), a.seasonal_phi.begin(), a.seasonal_phi.end());
        x.insert(x.end(), a.seasonal_theta.begin(), a.seasonal_theta.end());
        return x;
    }
};

/// Regresses w_t on an optional constant, lags of w and lags of `eps`.
inline std::optional<Eigen::VectorXd> lagged_regression(std::span<const double> w, std::span<const double> eps,
                                                        bool intercept, const std::vector<std::size_t>& w_lags,
                                                        const std::vector<std::size_t>& e_lags, std::size_t start) {
    const std::size_t cols = (intercept ? 1 : 0) + w_lags.size() + e_lags.size();
    if (cols == 0 || w.size() <= start + cols + 2) return std::nullopt;
    const auto rows = static_cast<Eigen::Index>(w.size() - start);
    Eigen::MatrixXd X(rows, static_cast<Eigen::Index>(cols));
    Eigen::VectorXd y(rows);
    for (std::size_t t = start; t < w.size(); ++t) {
        const auto r = static_cast<Eigen::Index>(t - start);
        y(r) = w[t];
        Eigen::Index c = 0;
        if (intercept) X(r, c++) = 1.0;
        for (auto k : w_lags) X(r, c++) = w[t - k];
        for (auto k : e_lags) X(r, c++) = eps[t - k];
    }
    try {
        return linalg::ols(X, y).coefficients;
    } catch (const Error&) {
        return std::nullopt;
    }
}

inline std::vector<std::size_t> lag_set(std::size_t count, std::size_t stride) {
    std::vector<std::size_t> out;
    for (std::size_t k = 1; k <= count; ++k) out.push_back(k * stride);
    return out;
}

/// Hannan-Rissanen: a long autoregression supplies innovation proxies, then
/// one least-squares pass on lagged values and lagged proxies.
inline ArimaParams hannan_rissanen(std::span<const double> w, const Layout& layout, std::size_t s, double w_mean) {
    ArimaParams init;
    init.phi.assign(layout.p, 0.0);
    init.theta.assign(layout.q, 0.0);
    init.seasonal_phi.assign(layout.P, 0.0);
    init.seasonal_theta.assign(layout.Q, 0.0);
    init.intercept = layout.intercept ? w_mean : 0.0;

    const auto ar_lags = lag_set(layout.p, 1);
    auto sar = lag_set(layout.P, s);
    auto w_lags = ar_lags;
    w_lags.insert(w_lags.end(), sar.begin(), sar.end());
    auto e_lags = lag_set(layout.q, 1);
    const auto sma = lag_set(layout.Q, s);
    e_lags.insert(e_lags.end(), sma.begin(), sma.end());

    std::vector<double> eps(w.size(), 0.0);
    std::size_t start = w_lags.empty() ? 0 : *std::max_element(w_lags.begin(), w_lags.end());
    if (!e_lags.empty()) {
        const std::size_t reach = std::max(start, *std::max_element(e_lags.begin(), e_lags.end()));
        std::size_t m = std::min<std::size_t>(reach + 5, w.size() / 3);
        m = std::max<std::size_t>(m, 1);
        const auto long_ar = lagged_regression(w, eps, layout.intercept, lag_set(m, 1), {}, m);
        if (!long_ar) return init;
        for (std::size_t t = m; t < w.size(); ++t) {
            double pred = layout.intercept ? (*long_ar)(0) : 0.0;
            for (std::size_t k = 1; k <= m; ++k) pred += (*long_ar)(static_cast<Eigen::Index>(k - 1 + (layout.intercept ? 1 : 0))) * w[t - k];
            eps[t] = w[t] - pred;
        }
        start = m + reach;
    }
    const auto coef = lagged_regression(w, eps, layout.intercept, w_lags, e_lags, start);
    if (!coef) return init;
    Eigen::Index c = 0;
    if (layout.intercept) init.intercept = (*coef)(c++);
    for (auto& v : init.phi) v = (*coef)(c++);
    for (auto& v : init.seasonal_phi) v = (*coef)(c++);
    for (auto& v : init.theta) v = (*coef)(c++);
    for (auto& v : init.seasonal_theta) v = (*coef)(c++);

    // Pull a non-stationary or non-invertible start back inside the region.
    for (int shrink = 0; shrink < 20 && root_violation(init) > 0.0; ++shrink) {
        for (auto* coeffs : {&init.phi, &init.theta, &init.seasonal_phi, &init.seasonal_theta}) {
            for (auto& v : *coeffs) v *= 0.7;
        }
    }
    return init;
}

inline void validate(const ArimaOrder& order, const SeasonalOrder& seasonal, bool intercept) {
    if (seasonal.active() && seasonal.s < 2) {
        throw Error(ErrorCode::configuration, "seasonal period must be at least 2 when P, D or Q is positive");
    }
    if (order.p + order.q + seasonal.P + seasonal.Q == 0 && order.d + seasonal.D == 0 && !intercept) {
        throw Error(ErrorCode::configuration, "ARIMA order estimates nothing: need p + q >= 1, differencing or an intercept");
    }
}

}  // namespace detail

[[nodiscard]] inline std::string describe(const ArimaOrder& o, const SeasonalOrder& s) {
    std::string out = "ARIMA(" + std::to_string(o.p) + "," + std::to_string(o.d) + "," + std::to_string(o.q) + ")";
    if (s.active()) {
        out = "S" + out + "(" + std::to_string(s.P) + "," + std::to_string(s.D) + "," + std::to_string(s.Q) + ")_" +
              std::to_string(s.s);
    }
    return out;
}

/// Conditional-sum-of-squares fit of ARIMA(p,d,q)(P,D,Q)_s on w = diff^d diff_s^D x.
/// The objective sums innovations from t0 = p + P*s onward, so pure AR fits
/// reduce to least squares on lagged values.
[[nodiscard]] inline FittedArima fit_arima(const TimeSeries& series, const ArimaOrder& order,
                                           const std::optional<SeasonalOrder>& seasonal_in = std::nullopt,
                                           const ArimaOptions& options = {}) {
    const SeasonalOrder seasonal = seasonal_in.value_or(SeasonalOrder{});
    const bool intercept = options.include_intercept.value_or(order.d + seasonal.D == 0);
    detail::validate(order, seasonal, intercept);
    if (series.has_missing()) throw Error(ErrorCode::data, "series has missing values; impute before fitting");

    const std::size_t n_params = order.p + order.q + seasonal.P + seasonal.Q;
    const std::size_t consumed = order.d + seasonal.D * seasonal.s;
    if (series.size() < consumed + 10 + n_params) {
        throw Error(ErrorCode::data, "series of " + std::to_string(series.size()) + " points is too short for " +
                                         describe(order, seasonal) + " (needs " +
                                         std::to_string(consumed + 10 + n_params) + ")");
    }

    FittedArima fit;
    fit.order = order;
    fit.seasonal = seasonal;
    fit.include_intercept = intercept;
    fit.last_timestamp = series.last_timestamp();
    fit.frequency = series.frequency();
    fit.series_length = series.size();

    std::vector<double> w(series.values().begin(), series.values().end());
    auto apply_diff = [&](std::size_t lag) {
        preprocess::DifferenceRecord rec{lag, w.size(), {w.begin(), w.begin() + static_cast<std::ptrdiff_t>(lag)},
                                         {w.end() - static_cast<std::ptrdiff_t>(lag), w.end()}};
        w = preprocess::difference_values(w, lag);
        fit.differencing.push_back(std::move(rec));
    };
    for (std::size_t k = 0; k < seasonal.D; ++k) apply_diff(seasonal.s);
    for (std::size_t k = 0; k < order.d; ++k) apply_diff(1);

    const double w_mean = stats::mean(w);
    fit.working_mean = w_mean;
    const std::size_t s = std::max<std::size_t>(seasonal.s, 1);
    const detail::Layout layout{intercept, order.p, order.q, seasonal.P, seasonal.Q};
    const std::size_t t0 = order.p + seasonal.P * s;
    if (w.size() <= t0 + 1) throw Error(ErrorCode::data, "too few working observations after conditioning");

    auto css_of = [&](const ArimaParams& params) {
        const auto e = detail::expand(params, s);
        const auto eps = detail::innovations(w, params.intercept, e, w_mean);
        double css = 0.0;
        for (std::size_t t = t0; t < eps.size(); ++t) css += eps[t] * eps[t];
        return css;
    };
    auto objective = [&](const optim::Point& x) {
        const auto params = layout.unpack(x);
        const double css = css_of(params);
        return css + 1e6 * detail::root_violation(params);
    };

    const auto init = detail::hannan_rissanen(w, layout, s, w_mean);
    optim::Point best_x = layout.pack(init);
    double best_value = objective(best_x);

    if (layout.size() > 0) {
        const double sd = stats::population_std(w);
        const double c_scale = std::max({sd, std::abs(w_mean), 1e-3});
        optim::NelderMeadOptions nm;
        nm.step.assign(layout.size(), 0.1);
        if (intercept) nm.step[0] = 0.1 * c_scale;
        nm.max_iterations = options.max_iterations;
        nm.diameter_tolerance = options.tolerance;

        std::mt19937_64 rng(options.seed);
        std::normal_distribution<double> jitter(0.0, 0.1);
        const optim::Point start = layout.pack(init);
        for (std::size_t run = 0; run <= options.restarts; ++run) {
            optim::Point x0 = start;
            if (run > 0) {
                for (std::size_t i = 0; i < x0.size(); ++i) x0[i] += jitter(rng) * (intercept && i == 0 ? c_scale : 1.0);
            }
            const auto r = optim::nelder_mead(objective, x0, nm);
            if (std::isfinite(r.value) && r.value < best_value) {
                best_value = r.value;
                best_x = r.x;
            }
        }
    }
    if (!std::isfinite(best_value)) {
        throw Error(ErrorCode::fit_failure, describe(order, seasonal) + ": objective is not finite at any restart");
    }

    fit.params = layout.unpack(best_x);
    const auto e = detail::expand(fit.params, s);
    const auto eps = detail::innovations(w, fit.params.intercept, e, w_mean);
    fit.css = 0.0;
    for (std::size_t t = t0; t < eps.size(); ++t) fit.css += eps[t] * eps[t];
    fit.n_effective = w.size() - t0;
    fit.params.sigma2 = std::max(fit.css / static_cast<double>(fit.n_effective), std::numeric_limits<double>::min());
    fit.aic = arima_aic(fit.css, fit.n_effective, fit.estimated_parameters());
    fit.residuals.assign(eps.begin() + static_cast<std::ptrdiff_t>(t0), eps.end());
    fit.residual_offset = consumed + t0;

    const std::size_t ar_reach = e.ar.size() - 1, ma_reach = e.ma.size() - 1;
    fit.working_tail.assign(w.end() - static_cast<std::ptrdiff_t>(std::min(ar_reach, w.size())), w.end());
    fit.residual_tail.assign(eps.end() - static_cast<std::ptrdiff_t>(std::min(ma_reach, eps.size())), eps.end());
    return fit;
}

/// Full AR operator including the differencing factors, for psi weights.
[[nodiscard]] inline poly::Poly integrated_ar(const FittedArima& fit) {
    const auto e = detail::expand(fit.params, std::max<std::size_t>(fit.seasonal.s, 1));
    auto ar = poly::multiply(e.ar, poly::difference_operator(1, fit.order.d));
    if (fit.seasonal.D > 0) ar = poly::multiply(ar, poly::difference_operator(fit.seasonal.s, fit.seasonal.D));
    return ar;
}

[[nodiscard]] inline std::vector<double> psi_weights(const FittedArima& fit, std::size_t count) {
    const auto e = detail::expand(fit.params, std::max<std::size_t>(fit.seasonal.s, 1));
    return poly::psi_weights(integrated_ar(fit), e.ma, count);
}

/// Recursive point forecasts (future innovations zero) mapped back through
/// the differencing; Gaussian intervals from the psi weights.
[[nodiscard]] inline Forecast forecast_arima(const FittedArima& fit, Horizon horizon, double confidence = 0.95) {
    const double z = interval_multiplier(confidence);
    const auto e = detail::expand(fit.params, std::max<std::size_t>(fit.seasonal.s, 1));
    const std::size_t ar_reach = e.ar.size() - 1, ma_reach = e.ma.size() - 1;

    std::vector<double> w = fit.working_tail;
    std::vector<double> eps = fit.residual_tail;
    // Pad with the pre-sample conventions if the working series was shorter than the reach.
    w.insert(w.begin(), ar_reach - std::min(ar_reach, w.size()), fit.working_mean);
    eps.insert(eps.begin(), ma_reach - std::min(ma_reach, eps.size()), 0.0);

    std::vector<double> future;
    for (std::size_t h = 0; h < horizon.steps; ++h) {
        double v = fit.params.intercept;
        for (std::size_t k = 1; k <= ar_reach; ++k) v -= e.ar[k] * w[w.size() - k];
        for (std::size_t k = 1; k <= ma_reach; ++k) v += e.ma[k] * eps[eps.size() - k];
        w.push_back(v);
        eps.push_back(0.0);
        future.push_back(v);
    }
    for (auto it = fit.differencing.rbegin(); it != fit.differencing.rend(); ++it) {
        future = preprocess::integrate_forecast(future, *it);
    }

    const auto psi = psi_weights(fit, horizon.steps);
    std::vector<double> half(horizon.steps);
    double acc = 0.0;
    const double sigma = std::sqrt(fit.params.sigma2);
    for (std::size_t h = 0; h < horizon.steps; ++h) {
        acc += psi[h] * psi[h];
        half[h] = z * sigma * std::sqrt(acc);
    }
    return make_forecast(fit.last_timestamp, fit.frequency, future, std::span<const double>(half), confidence);
}

/// One-step-ahead predictions in original units, recomputed from the series
/// the model was fitted on. Indices before residual_offset have none.
[[nodiscard]] inline std::vector<std::optional<double>> one_step_predictions(const FittedArima& fit, const TimeSeries& series) {
    if (series.size() != fit.series_length) throw Error(ErrorCode::argument, "series does not match the fitted model");
    std::vector<double> w(series.values().begin(), series.values().end());
    for (const auto& rec : fit.differencing) w = preprocess::difference_values(w, rec.lag);
    const auto e = detail::expand(fit.params, std::max<std::size_t>(fit.seasonal.s, 1));
    const std::size_t t0 = e.ar.size() - 1;
    std::vector<double> eps(w.size(), 0.0);
    std::vector<std::optional<double>> out(series.size());
    const std::size_t consumed = series.size() - w.size();
    for (std::size_t t = t0; t < w.size(); ++t) {
        double pred = fit.params.intercept;
        for (std::size_t k = 1; k < e.ar.size(); ++k) pred -= e.ar[k] * w[t - k];
        for (std::size_t k = 1; k < e.ma.size() && k <= t; ++k) pred += e.ma[k] * eps[t - k];
        eps[t] = w[t] - pred;
        // Differencing is linear in known past values, so the error carries over unchanged.
        out[consumed + t] = series[consumed + t] - eps[t];
    }
    return out;
}

// ---------------------------------------------------------------- grid search

enum class Criterion { aic, validation_mae };

struct GridRanges {
    std::size_t p_max = 2, d_max = 1, q_max = 2;
    std::size_t P_max = 0, D_max = 0, Q_max = 0;
    std::optional<std::size_t> s;
};

struct GridEntry {
    ArimaOrder order;
    SeasonalOrder seasonal;
    double score = std::numeric_limits<double>::infinity();
    std::optional<std::string> error;
};

inline constexpr std::size_t kMaxGridCombinations = 10000;

/// Fits every order combination; failures keep an infinite score and their
/// cause. Sorted by score, ties broken lexicographically on (p,d,q,P,D,Q).
[[nodiscard]] inline std::vector<GridEntry> grid_search_arima(const TimeSeries& train, const TimeSeries& validation,
                                                              const GridRanges& ranges, Criterion criterion,
                                                              const ArimaOptions& options = {}) {
    const bool seasonal = ranges.P_max + ranges.D_max + ranges.Q_max > 0;
    if (seasonal && (!ranges.s || *ranges.s < 2)) {
        throw Error(ErrorCode::argument, "seasonal ranges need a period s >= 2");
    }
    const double combos = static_cast<double>(ranges.p_max + 1) * static_cast<double>(ranges.d_max + 1) *
                          static_cast<double>(ranges.q_max + 1) * static_cast<double>(ranges.P_max + 1) *
                          static_cast<double>(ranges.D_max + 1) * static_cast<double>(ranges.Q_max + 1);
    if (combos > static_cast<double>(kMaxGridCombinations)) {
        throw Error(ErrorCode::argument, "grid of " + format_number(combos) + " combinations exceeds the budget of " +
                                             std::to_string(kMaxGridCombinations));
    }

    std::vector<GridEntry> entries;
    for (std::size_t p = 0; p <= ranges.p_max; ++p)
        for (std::size_t d = 0; d <= ranges.d_max; ++d)
            for (std::size_t q = 0; q <= ranges.q_max; ++q)
                for (std::size_t P = 0; P <= ranges.P_max; ++P)
                    for (std::size_t D = 0; D <= ranges.D_max; ++D)
                        for (std::size_t Q = 0; Q <= ranges.Q_max; ++Q) {
                            GridEntry entry;
                            entry.order = {p, d, q};
                            entry.seasonal = {P, D, Q, seasonal ? *ranges.s : 0};
                            if (!entry.seasonal.active()) entry.seasonal.s = 0;
                            try {
                                const auto fit = fit_arima(train, entry.order, entry.seasonal, options);
                                if (criterion == Criterion::aic) {
                                    entry.score = fit.aic;
                                } else {
                                    const auto fc = forecast_arima(fit, Horizon(validation.size()), 0.95);
                                    double mae = 0.0;
                                    for (std::size_t i = 0; i < validation.size(); ++i) {
                                        mae += std::abs(validation[i] - fc.steps[i].point);
                                    }
                                    entry.score = mae / static_cast<double>(validation.size());
                                }
                                if (!std::isfinite(entry.score)) {
                                    entry.score = std::numeric_limits<double>::infinity();
                                    entry.error = "non-finite score";
                                }
                            } catch (const Error& e) {
                                entry.error = e.what();
                            }
                            entries.push_back(std::move(entry));
                        }

    auto key = [](const GridEntry& e) {
        return std::make_tuple(e.order.p, e.order.d, e.order.q, e.seasonal.P, e.seasonal.D, e.seasonal.Q);
    };
    std::sort(entries.begin(), entries.end(), [&](const GridEntry& a, const GridEntry& b) {
        if (a.score != b.score) return a.score < b.score;
        return key(a) < key(b);
    });
    if (std::none_of(entries.begin(), entries.end(), [](const GridEntry& e) { return !e.error.has_value(); })) {
        std::string causes;
        for (const auto& e : entries) causes += "\n  " + describe(e.order, e.seasonal) + ": " + *e.error;
        throw Error(ErrorCode::search_failure, "every ARIMA combination failed:" + causes);
    }
    return entries;
}

// ---------------------------------------------------------------- serialization

inline nlohmann::json to_json(const FittedArima& f) {
    nlohmann::json diffs = nlohmann::json::array();
    for (const auto& d : f.differencing) diffs.push_back(preprocess::to_json(preprocess::TransformRecord{d}));
    return {{"order", {{"p", f.order.p}, {"d", f.order.d}, {"q", f.order.q}}},
            {"seasonal_order", {{"P", f.seasonal.P}, {"D", f.seasonal.D}, {"Q", f.seasonal.Q}, {"s", f.seasonal.s}}},
            {"include_intercept", f.include_intercept},
            {"params",
             {{"phi", f.params.phi},
              {"theta", f.params.theta},
              {"seasonal_phi", f.params.seasonal_phi},
              {"seasonal_theta", f.params.seasonal_theta},
              {"intercept", f.params.intercept},
              {"sigma2", f.params.sigma2}}},
            {"transform_records", diffs},
            {"css", f.css},
            {"aic", f.aic},
            {"n_effective", f.n_effective},
            {"residuals", f.residuals},
            {"residual_offset", f.residual_offset},
            {"working_tail", f.working_tail},
            {"residual_tail", f.residual_tail},
            {"working_mean", f.working_mean},
            {"last_timestamp", f.last_timestamp},
            {"frequency", f.frequency},
            {"series_length", f.series_length}};
}

inline FittedArima fitted_arima_from_json(const nlohmann::json& j) {
    FittedArima f;
    const auto& o = j.at("order");
    f.order = {o.at("p").get<std::size_t>(), o.at("d").get<std::size_t>(), o.at("q").get<std::size_t>()};
    const auto& so = j.at("seasonal_order");
    f.seasonal = {so.at("P").get<std::size_t>(), so.at("D").get<std::size_t>(), so.at("Q").get<std::size_t>(),
                  so.at("s").get<std::size_t>()};
    f.include_intercept = j.at("include_intercept").get<bool>();
    const auto& p = j.at("params");
    f.params.phi = p.at("phi").get<std::vector<double>>();
    f.params.theta = p.at("theta").get<std::vector<double>>();
    f.params.seasonal_phi = p.at("seasonal_phi").get<std::vector<double>>();
    f.params.seasonal_theta = p.at("seasonal_theta").get<std::vector<double>>();
    f.params.intercept = p.at("intercept").get<double>();
    f.params.sigma2 = p.at("sigma2").get<double>();
    for (const auto& r : j.at("transform_records")) {
        const auto rec = preprocess::transform_from_json(r);
        const auto* d = std::get_if<preprocess::DifferenceRecord>(&rec);
        if (d == nullptr) throw Error(ErrorCode::argument, "ARIMA model carries a non-difference transform record");
        f.differencing.push_back(*d);
    }
    f.css = j.at("css").get<double>();
    f.aic = j.at("aic").get<double>();
    f.n_effective = j.at("n_effective").get<std::size_t>();
    f.residuals = j.at("residuals").get<std::vector<double>>();
    f.residual_offset = j.at("residual_offset").get<std::size_t>();
    f.working_tail = j.at("working_tail").get<std::vector<double>>();
    f.residual_tail = j.at("residual_tail").get<std::vector<double>>();
    f.working_mean = j.at("working_mean").get<double>();
    f.last_timestamp = j.at("last_timestamp").get<Timestamp>();
    f.frequency = j.at("frequency").get<std::int64_t>();
    f.series_length = j.at("series_length").get<std::size_t>();
    if (f.params.phi.size() != f.order.p || f.params.theta.size() != f.order.q ||
        f.params.seasonal_phi.size() != f.seasonal.P || f.params.seasonal_theta.size() != f.seasonal.Q ||
        !(f.params.sigma2 > 0.0)) {
        throw Error(ErrorCode::argument, "ARIMA coefficients do not match the stored order");
    }
    return f;
}

}  // namespace hybridcast::arima
