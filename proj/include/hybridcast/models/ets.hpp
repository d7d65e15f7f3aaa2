#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hybridcast/error.hpp"
#include "hybridcast/models/forecast.hpp"
#include "hybridcast/numeric/nelder_mead.hpp"
#include "hybridcast/numeric/stats.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::ets {

enum class TrendKind { none, additive };
enum class SeasonalKind { none, additive, multiplicative };

struct EtsSpec {
    TrendKind trend = TrendKind::none;
    SeasonalKind seasonal = SeasonalKind::none;
    std::size_t period = 0;
    friend bool operator==(const EtsSpec&, const EtsSpec&) = default;
};

[[nodiscard]] inline std::string to_string(TrendKind t) { return t == TrendKind::none ? "none" : "additive"; }
[[nodiscard]] inline std::string to_string(SeasonalKind s) {
    switch (s) {
        case SeasonalKind::none: return "none";
        case SeasonalKind::additive: return "additive";
        case SeasonalKind::multiplicative: return "multiplicative";
    }
    return "none";
}
[[nodiscard]] inline TrendKind trend_from_string(const std::string& s) {
    if (s == "none") return TrendKind::none;
    if (s == "additive") return TrendKind::additive;
    throw Error(ErrorCode::configuration, "unknown ETS trend '" + s + "'");
}
[[nodiscard]] inline SeasonalKind seasonal_from_string(const std::string& s) {
    if (s == "none") return SeasonalKind::none;
    if (s == "additive") return SeasonalKind::additive;
    if (s == "multiplicative") return SeasonalKind::multiplicative;
    throw Error(ErrorCode::configuration, "unknown ETS seasonal component '" + s + "'");
}

[[nodiscard]] inline std::string describe(const EtsSpec& spec) {
    std::string out = "ETS(trend=" + to_string(spec.trend) + ",seasonal=" + to_string(spec.seasonal);
    if (spec.seasonal != SeasonalKind::none) out += ",period=" + std::to_string(spec.period);
    return out + ")";
}

/// initial_seasonals[j] is the seasonal state applied to observation j (j < m).
struct EtsParams {
    double alpha = 0.5;
    std::optional<double> beta;
    std::optional<double> gamma;
    double initial_level = 0.0;
    double initial_trend = 0.0;
    std::vector<double> initial_seasonals;
};

/// Values held fixed instead of optimized.
struct EtsFixed {
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> gamma;
    std::optional<double> initial_level;
    std::optional<double> initial_trend;
};

struct FilterResult {
    std::vector<double> fitted;
    std::vector<double> residuals;
    double sse = 0.0;
    double level = 0.0;
    double trend = 0.0;
    /// Ring indexed by phase: entry (t mod m) is the latest seasonal for that phase.
    std::vector<double> seasonals;
};

struct FittedEts {
    EtsSpec spec;
    EtsParams params;
    double sse = 0.0;
    double aic = 0.0;
    std::size_t free_parameters = 0;
    std::vector<double> residuals;
    std::vector<double> fitted_values;
    double final_level = 0.0;
    double final_trend = 0.0;
    std::vector<double> final_seasonals;
    std::size_t n = 0;
    Timestamp last_timestamp = 0;
    std::int64_t frequency = 1;
};

inline void validate(const EtsSpec& spec) {
    if (spec.seasonal != SeasonalKind::none && spec.period < 2) {
        throw Error(ErrorCode::configuration, "seasonal ETS needs a period of at least 2");
    }
}

/// Runs the smoothing recursions with the given parameters. The sse
/// accumulates (y_t - yhat_{t|t-1})^2 over every observation.
[[nodiscard]] inline FilterResult ets_filter(const EtsSpec& spec, const EtsParams& p, std::span<const double> y) {
    const bool has_trend = spec.trend == TrendKind::additive;
    const bool additive_season = spec.seasonal == SeasonalKind::additive;
    const bool mult_season = spec.seasonal == SeasonalKind::multiplicative;
    const std::size_t m = spec.seasonal == SeasonalKind::none ? 1 : spec.period;
    const double alpha = p.alpha;
    const double beta = has_trend ? p.beta.value_or(0.0) : 0.0;
    const double gamma = spec.seasonal != SeasonalKind::none ? p.gamma.value_or(0.0) : 0.0;

    FilterResult r;
    double level = p.initial_level;
    double trend = has_trend ? p.initial_trend : 0.0;
    std::vector<double> season(m, mult_season ? 1.0 : 0.0);
    if (spec.seasonal != SeasonalKind::none) {
        if (p.initial_seasonals.size() != m) throw Error(ErrorCode::configuration, "initial seasonals do not match the period");
        season = p.initial_seasonals;
    }
    r.fitted.resize(y.size());
    r.residuals.resize(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        const std::size_t phase = t % m;
        const double s_old = season[phase];
        const double base = level + trend;
        double pred = base;
        if (additive_season) pred = base + s_old;
        if (mult_season) pred = base * s_old;
        r.fitted[t] = pred;
        r.residuals[t] = y[t] - pred;
        r.sse += r.residuals[t] * r.residuals[t];

        double new_level;
        if (additive_season) {
            new_level = alpha * (y[t] - s_old) + (1.0 - alpha) * base;
            season[phase] = gamma * (y[t] - base) + (1.0 - gamma) * s_old;
        } else if (mult_season) {
            new_level = alpha * (y[t] / s_old) + (1.0 - alpha) * base;
            season[phase] = gamma * (y[t] / base) + (1.0 - gamma) * s_old;
        } else {
            new_level = alpha * y[t] + (1.0 - alpha) * base;
        }
        if (has_trend) trend = beta * (new_level - level) + (1.0 - beta) * trend;
        level = new_level;
    }
    r.level = level;
    r.trend = trend;
    r.seasonals = season;
    return r;
}

/// Free parameter count used by the AIC: optimized smoothing parameters
/// plus optimized initial states (m - 1 seasonal degrees of freedom).
[[nodiscard]] inline double ets_aic(double sse, std::size_t n, std::size_t k, double floor_per_point) {
    const double nn = static_cast<double>(n);
    return nn * std::log(std::max(sse / nn, floor_per_point)) + 2.0 * static_cast<double>(k);
}

namespace detail {

struct Heuristic {
    double level;
    double trend;
    std::vector<double> seasonals;
};

/// Level: mean of the first period (first 4 points without seasonality).
/// Trend: difference of the first two period means over the period.
/// Seasonals: per-phase averages of the first two periods after removing
/// each period's mean, re-centred (additive) or re-scaled (multiplicative).
inline Heuristic initial_states(const EtsSpec& spec, std::span<const double> y) {
    const bool seasonal = spec.seasonal != SeasonalKind::none;
    const std::size_t m = seasonal ? spec.period : 4;
    auto block_mean = [&](std::size_t start) {
        double s = 0.0;
        for (std::size_t i = start; i < start + m && i < y.size(); ++i) s += y[i];
        return s / static_cast<double>(std::min(m, y.size() - start));
    };
    Heuristic h;
    h.level = block_mean(0);
    h.trend = 0.0;
    if (spec.trend == TrendKind::additive) {
        h.trend = y.size() >= 2 * m ? (block_mean(m) - block_mean(0)) / static_cast<double>(m)
                                    : (y.back() - y.front()) / static_cast<double>(y.size() - 1);
    }
    if (seasonal) {
        const double m0 = block_mean(0), m1 = block_mean(m);
        h.seasonals.assign(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            if (spec.seasonal == SeasonalKind::additive) {
                h.seasonals[j] = 0.5 * ((y[j] - m0) + (y[m + j] - m1));
            } else {
                h.seasonals[j] = 0.5 * (y[j] / m0 + y[m + j] / m1);
            }
        }
        double avg = 0.0;
        for (double v : h.seasonals) avg += v / static_cast<double>(m);
        for (double& v : h.seasonals) v = spec.seasonal == SeasonalKind::additive ? v - avg : v / avg;
    }
    return h;
}

/// With the smoothing parameters held, the one-step errors of a model
/// without multiplicative seasonality are affine in the initial states,
/// e(y, x) = e(y, 0) + e(0, x). Replaces the free states of `p` with the
/// least-squares solution; seasonal states are constrained to sum to zero.
inline void solve_initial_states(const EtsSpec& spec, EtsParams& p, std::span<const double> y, bool free_level, bool free_trend) {
    const bool has_trend = spec.trend == TrendKind::additive;
    free_trend = free_trend && has_trend;
    const std::size_t m = spec.seasonal == SeasonalKind::additive ? spec.period : 0;

    EtsParams base = p;
    if (free_level) base.initial_level = 0.0;
    if (free_trend) base.initial_trend = 0.0;
    if (m > 0) base.initial_seasonals.assign(m, 0.0);
    const auto e0 = ets_filter(spec, base, y).residuals;

    EtsParams zero = base;
    zero.initial_level = 0.0;
    zero.initial_trend = 0.0;
    std::vector<EtsParams> units;
    if (free_level) units.push_back(zero), units.back().initial_level = 1.0;
    if (free_trend) units.push_back(zero), units.back().initial_trend = 1.0;
    for (std::size_t j = 0; j + 1 < m; ++j) {
        units.push_back(zero);
        units.back().initial_seasonals[j] = 1.0;
        units.back().initial_seasonals[m - 1] = -1.0;
    }
    if (units.empty()) return;

    const std::vector<double> silent(y.size(), 0.0);
    const auto rows = static_cast<Eigen::Index>(y.size());
    Eigen::MatrixXd design(rows, static_cast<Eigen::Index>(units.size()));
    for (std::size_t c = 0; c < units.size(); ++c) {
        const auto r = ets_filter(spec, units[c], silent).residuals;
        design.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(r.data(), rows);
    }
    const Eigen::VectorXd target = -Eigen::Map<const Eigen::VectorXd>(e0.data(), rows);
    const Eigen::VectorXd x = design.colPivHouseholderQr().solve(target);

    Eigen::Index c = 0;
    if (free_level) p.initial_level = x[c++];
    if (free_trend) p.initial_trend = x[c++];
    if (m > 0) {
        p.initial_seasonals.assign(m, 0.0);
        double sum = 0.0;
        for (std::size_t j = 0; j + 1 < m; ++j) sum += p.initial_seasonals[j] = x[c++];
        p.initial_seasonals[m - 1] = -sum;
    }
}

/// Newton steps on the leading `coords` coordinates (smoothing parameters
/// in [0,1]) from central-difference derivatives. Coordinates near a bound
/// are left alone, and a step that raises the objective is discarded.
template <typename Objective>
optim::Point newton_polish(Objective&& f, optim::Point x, std::size_t coords) {
    constexpr double h = 1e-4;
    for (int iter = 0; iter < 6; ++iter) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < coords; ++i) {
            if (x[i] > 2 * h && x[i] < 1.0 - 2 * h) idx.push_back(i);
        }
        if (idx.empty()) break;
        const auto k = static_cast<Eigen::Index>(idx.size());
        const double f0 = f(x);
        auto at = [&](Eigen::Index a, double da, Eigen::Index b, double db) {
            auto q = x;
            q[idx[static_cast<std::size_t>(a)]] += da;
            q[idx[static_cast<std::size_t>(b)]] += db;
            return f(q);
        };
        Eigen::VectorXd g(k);
        Eigen::MatrixXd H(k, k);
        for (Eigen::Index a = 0; a < k; ++a) {
            const double up = at(a, h, a, 0.0), down = at(a, -h, a, 0.0);
            g[a] = (up - down) / (2 * h);
            H(a, a) = (up - 2 * f0 + down) / (h * h);
            for (Eigen::Index b = 0; b < a; ++b) {
                H(a, b) = H(b, a) = (at(a, h, b, h) - at(a, h, b, -h) - at(a, -h, b, h) + at(a, -h, b, -h)) / (4 * h * h);
            }
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(H);
        if (llt.info() != Eigen::Success) break;
        const Eigen::VectorXd step = -llt.solve(g);
        auto next = x;
        for (Eigen::Index a = 0; a < k; ++a) {
            auto& v = next[idx[static_cast<std::size_t>(a)]];
            v = std::clamp(v + step[a], 0.0, 1.0);
        }
        if (!(f(next) <= f0 + 1e-10 * std::max(1.0, std::abs(f0)))) break;
        x = std::move(next);
        if (step.lpNorm<Eigen::Infinity>() < 1e-12) break;
    }
    return x;
}

}  // namespace detail

struct EtsOptions {
    EtsFixed fixed;
    std::size_t max_restarts = 8;
};

/// Minimizes the one-step SSE over smoothing parameters (projected onto
/// [0,1]) and initial states. Without multiplicative seasonality the
/// states are solved exactly for each trial of the smoothing parameters,
/// and the simplex result is refined by Newton steps. Multiplicative
/// states are searched as offsets from the heuristic instead.
[[nodiscard]] inline FittedEts fit_ets(const TimeSeries& series, const EtsSpec& spec, const EtsOptions& options = {}) {
    validate(spec);
    if (series.has_missing()) throw Error(ErrorCode::data, "series has missing values; impute before fitting");
    const auto y = series.values();
    const bool seasonal = spec.seasonal != SeasonalKind::none;
    const bool has_trend = spec.trend == TrendKind::additive;
    const std::size_t min_len = seasonal ? 2 * spec.period + 2 : 4;
    if (y.size() < min_len) {
        throw Error(ErrorCode::data, describe(spec) + " needs at least " + std::to_string(min_len) + " points, got " +
                                         std::to_string(y.size()));
    }
    if (spec.seasonal == SeasonalKind::multiplicative) {
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!(y[i] > 0.0)) {
                throw Error(ErrorCode::domain, "multiplicative seasonality needs positive data; index " + std::to_string(i) +
                                                   " is " + format_number(y[i]), i);
            }
        }
    }
    for (auto v : {options.fixed.alpha, options.fixed.beta, options.fixed.gamma}) {
        if (v && !(*v >= 0.0 && *v <= 1.0)) throw Error(ErrorCode::configuration, "smoothing parameters must lie in [0,1]");
    }

    // Additive models are searched on a mean-centred copy, so a constant
    // shift of the data cannot change the optimizer's path.
    const double offset = spec.seasonal == SeasonalKind::multiplicative ? 0.0 : stats::mean(y);
    std::vector<double> centred(y.begin(), y.end());
    for (double& v : centred) v -= offset;
    const auto heur = detail::initial_states(spec, centred);
    const double scale = std::max(stats::population_std(centred), 1e-8 * (1.0 + std::abs(stats::mean(y))));
    const std::size_t m = seasonal ? spec.period : 0;
    const bool concentrated = spec.seasonal != SeasonalKind::multiplicative;

    // Parameter layout: [alpha][beta][gamma][level offset][trend offset][m-1 seasonal offsets]
    struct Slot {
        bool alpha, beta, gamma, level, trend;
        std::size_t seasons;
    } slot{!options.fixed.alpha,
           has_trend && !options.fixed.beta,
           seasonal && !options.fixed.gamma,
           !concentrated && !options.fixed.initial_level,
           !concentrated && has_trend && !options.fixed.initial_trend,
           concentrated || !seasonal ? 0 : m - 1};
    const std::size_t n_smoothing = (slot.alpha ? 1 : 0) + (slot.beta ? 1 : 0) + (slot.gamma ? 1 : 0);
    const std::size_t n_states =
        (options.fixed.initial_level ? 0 : 1) + (has_trend && !options.fixed.initial_trend ? 1 : 0) + (seasonal ? m - 1 : 0);

    auto unpack = [&](const optim::Point& x) {
        EtsParams p;
        std::size_t i = 0;
        p.alpha = slot.alpha ? x[i++] : *options.fixed.alpha;
        if (has_trend) p.beta = slot.beta ? x[i++] : *options.fixed.beta;
        if (seasonal) p.gamma = slot.gamma ? x[i++] : *options.fixed.gamma;
        if (concentrated) {
            if (options.fixed.initial_level) p.initial_level = *options.fixed.initial_level - offset;
            if (has_trend && options.fixed.initial_trend) p.initial_trend = *options.fixed.initial_trend;
            detail::solve_initial_states(spec, p, centred, !options.fixed.initial_level, !options.fixed.initial_trend);
            return p;
        }
        // Multiplicative seasonality from here on, so offset is 0.
        p.initial_level = slot.level ? heur.level + x[i++] * scale : *options.fixed.initial_level;
        if (has_trend) p.initial_trend = slot.trend ? heur.trend + x[i++] * scale / static_cast<double>(std::max<std::size_t>(m, 1))
                                                    : *options.fixed.initial_trend;
        if (seasonal) {
            p.initial_seasonals = heur.seasonals;
            double sum = 0.0;
            for (std::size_t j = 0; j + 1 < m; ++j) sum += p.initial_seasonals[j] += x[i++];
            p.initial_seasonals[m - 1] = static_cast<double>(m) - sum;
        }
        return p;
    };
    auto objective = [&](const optim::Point& x) {
        const auto p = unpack(x);
        if (spec.seasonal == SeasonalKind::multiplicative && p.initial_seasonals.back() <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        return ets_filter(spec, p, centred).sse / (scale * scale);
    };

    optim::Point x;
    if (slot.alpha) x.push_back(0.3);
    if (slot.beta) x.push_back(0.1);
    if (slot.gamma) x.push_back(0.1);
    if (slot.level) x.push_back(0.0);
    if (slot.trend) x.push_back(0.0);
    for (std::size_t j = 0; j < slot.seasons; ++j) x.push_back(0.0);

    optim::NelderMeadOptions nm;
    nm.step.assign(x.size(), 0.1);
    nm.max_iterations = 2000 + 400 * x.size();
    nm.diameter_tolerance = 1e-10;
    nm.project = [n_smoothing](optim::Point& p) {
        for (std::size_t i = 0; i < n_smoothing; ++i) p[i] = std::clamp(p[i], 0.0, 1.0);
    };

    double best = objective(x);
    if (!x.empty()) {
        // Restarting from the incumbent with a fresh simplex guards against collapse.
        for (std::size_t run = 0; run < options.max_restarts; ++run) {
            const auto r = optim::nelder_mead(objective, x, nm);
            const double improvement = best - r.value;
            if (r.value <= best) {
                x = r.x;
                best = r.value;
            }
            if (!(improvement > 1e-12 * std::max(1.0, std::abs(best)))) break;
            nm.step.assign(x.size(), 0.05);
        }
        if (concentrated) {
            x = detail::newton_polish(objective, x, n_smoothing);
            best = objective(x);
        }
    }
    if (!std::isfinite(best)) throw Error(ErrorCode::fit_failure, describe(spec) + ": SSE is not finite");

    FittedEts fit;
    fit.spec = spec;
    fit.params = unpack(x);
    fit.params.initial_level += offset;
    const auto run = ets_filter(spec, fit.params, y);
    fit.sse = run.sse;
    fit.residuals = run.residuals;
    fit.fitted_values = run.fitted;
    fit.final_level = run.level;
    fit.final_trend = run.trend;
    fit.final_seasonals = run.seasonals;
    fit.n = y.size();
    fit.free_parameters = n_smoothing + n_states;
    fit.aic = ets_aic(fit.sse, fit.n, fit.free_parameters, 1e-20 * scale * scale);
    fit.last_timestamp = series.last_timestamp();
    fit.frequency = series.frequency();
    return fit;
}

/// Point forecasts continue the final states; Gaussian intervals use
/// sigma^2 = sse / n times the additive-error variance multiplier v_h.
[[nodiscard]] inline Forecast forecast_ets(const FittedEts& fit, Horizon horizon, double confidence = 0.95) {
    const double z = interval_multiplier(confidence);
    const auto& spec = fit.spec;
    const bool seasonal = spec.seasonal != SeasonalKind::none;
    const std::size_t m = seasonal ? spec.period : 1;
    const double alpha = fit.params.alpha;
    const double beta = fit.params.beta.value_or(0.0);
    const double gamma = fit.params.gamma.value_or(0.0);
    const double sigma = std::sqrt(fit.sse / static_cast<double>(fit.n));

    auto season_at = [&](std::size_t h) {  // h >= 1
        if (!seasonal) return spec.seasonal == SeasonalKind::multiplicative ? 1.0 : 0.0;
        return fit.final_seasonals[(fit.n + h - 1) % m];
    };

    std::vector<double> points(horizon.steps), half(horizon.steps);
    for (std::size_t h = 1; h <= horizon.steps; ++h) {
        const double base = fit.final_level + static_cast<double>(h) * fit.final_trend;
        double point = base;
        if (spec.seasonal == SeasonalKind::additive) point = base + season_at(h);
        if (spec.seasonal == SeasonalKind::multiplicative) point = base * season_at(h);
        points[h - 1] = point;

        double v = 1.0;
        for (std::size_t j = 1; j < h; ++j) {
            const double jj = static_cast<double>(j);
            const bool same_phase = seasonal && j % m == 0;
            double c;
            if (spec.seasonal == SeasonalKind::multiplicative) {
                // First-order propagation: level shocks scale by the target
                // seasonal relative to the seasonal of the shocked step.
                const double s_target = season_at(h);
                const double s_shock = season_at(h - j);
                const double base_ratio = (fit.final_level + static_cast<double>(h) * fit.final_trend) /
                                          (fit.final_level + fit.final_trend);
                c = alpha * (1.0 + jj * beta) * s_target / s_shock + (same_phase ? gamma * base_ratio : 0.0);
            } else {
                c = alpha * (1.0 + jj * beta) + (same_phase ? gamma : 0.0);
            }
            v += c * c;
        }
        half[h - 1] = z * sigma * std::sqrt(v);
    }
    return make_forecast(fit.last_timestamp, fit.frequency, points, std::span<const double>(half), confidence);
}

struct SelectionEntry {
    EtsSpec spec;
    double aic = std::numeric_limits<double>::infinity();
    std::size_t free_parameters = 0;
    std::optional<std::string> error;
};

/// Fits each candidate and ranks by AIC; ties go to fewer parameters, then
/// to the lexicographic (trend, seasonal, period) order.
[[nodiscard]] inline std::vector<SelectionEntry> select_ets(const TimeSeries& series, const std::vector<EtsSpec>& candidates) {
    if (candidates.empty()) throw Error(ErrorCode::selection, "no ETS candidates given");
    const auto y = series.values();
    const bool positive = std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
    std::vector<SelectionEntry> out;
    for (const auto& spec : candidates) {
        SelectionEntry entry;
        entry.spec = spec;
        if (spec.seasonal == SeasonalKind::multiplicative && !positive) {
            entry.error = "multiplicative seasonality needs positive data";
        } else {
            try {
                const auto fit = fit_ets(series, spec);
                entry.aic = fit.aic;
                entry.free_parameters = fit.free_parameters;
            } catch (const Error& e) {
                entry.error = e.what();
            }
        }
        out.push_back(std::move(entry));
    }
    std::stable_sort(out.begin(), out.end(), [](const SelectionEntry& a, const SelectionEntry& b) {
        if (a.aic != b.aic) return a.aic < b.aic;
        if (a.free_parameters != b.free_parameters) return a.free_parameters < b.free_parameters;
        return std::make_tuple(a.spec.trend, a.spec.seasonal, a.spec.period) <
               std::make_tuple(b.spec.trend, b.spec.seasonal, b.spec.period);
    });
    if (std::all_of(out.begin(), out.end(), [](const SelectionEntry& e) { return e.error.has_value(); })) {
        std::string causes;
        for (const auto& e : out) causes += "\n  " + describe(e.spec) + ": " + *e.error;
        throw Error(ErrorCode::selection, "no ETS candidate could be fitted:" + causes);
    }
    return out;
}

// ---------------------------------------------------------------- serialization

inline nlohmann::json to_json(const EtsSpec& s) {
    return {{"trend", to_string(s.trend)}, {"seasonal", to_string(s.seasonal)}, {"period", s.period}};
}

inline EtsSpec ets_spec_from_json(const nlohmann::json& j) {
    EtsSpec s;
    s.trend = trend_from_string(j.value("trend", std::string("none")));
    s.seasonal = seasonal_from_string(j.value("seasonal", std::string("none")));
    s.period = j.value("period", std::size_t{0});
    validate(s);
    return s;
}

inline nlohmann::json to_json(const FittedEts& f) {
    nlohmann::json params{{"alpha", f.params.alpha},
                          {"initial_level", f.params.initial_level},
                          {"initial_trend", f.params.initial_trend},
                          {"initial_seasonals", f.params.initial_seasonals}};
    params["beta"] = f.params.beta ? nlohmann::json(*f.params.beta) : nlohmann::json(nullptr);
    params["gamma"] = f.params.gamma ? nlohmann::json(*f.params.gamma) : nlohmann::json(nullptr);
    return {{"spec", to_json(f.spec)},
            {"params", params},
            {"sse", f.sse},
            {"aic", f.aic},
            {"free_parameters", f.free_parameters},
            {"residuals", f.residuals},
            {"fitted_values", f.fitted_values},
            {"state", {{"level", f.final_level}, {"trend", f.final_trend}, {"seasonals", f.final_seasonals}}},
            {"n", f.n},
            {"last_timestamp", f.last_timestamp},
            {"frequency", f.frequency}};
}

inline FittedEts fitted_ets_from_json(const nlohmann::json& j) {
    FittedEts f;
    f.spec = ets_spec_from_json(j.at("spec"));
    const auto& p = j.at("params");
    f.params.alpha = p.at("alpha").get<double>();
    if (!p.at("beta").is_null()) f.params.beta = p.at("beta").get<double>();
    if (!p.at("gamma").is_null()) f.params.gamma = p.at("gamma").get<double>();
    f.params.initial_level = p.at("initial_level").get<double>();
    f.params.initial_trend = p.at("initial_trend").get<double>();
    f.params.initial_seasonals = p.at("initial_seasonals").get<std::vector<double>>();
    f.sse = j.at("sse").get<double>();
    f.aic = j.at("aic").get<double>();
    f.free_parameters = j.at("free_parameters").get<std::size_t>();
    f.residuals = j.at("residuals").get<std::vector<double>>();
    f.fitted_values = j.at("fitted_values").get<std::vector<double>>();
    const auto& s = j.at("state");
    f.final_level = s.at("level").get<double>();
    f.final_trend = s.at("trend").get<double>();
    f.final_seasonals = s.at("seasonals").get<std::vector<double>>();
    f.n = j.at("n").get<std::size_t>();
    f.last_timestamp = j.at("last_timestamp").get<Timestamp>();
    f.frequency = j.at("frequency").get<std::int64_t>();
    const std::size_t m = f.spec.seasonal == SeasonalKind::none ? 1 : f.spec.period;
    if (f.final_seasonals.size() != m || f.n == 0 || f.residuals.size() != f.n) {
        throw Error(ErrorCode::argument, "ETS state does not match its spec");
    }
    return f;
}

}  // namespace hybridcast::ets
