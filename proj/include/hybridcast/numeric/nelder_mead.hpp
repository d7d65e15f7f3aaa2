#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace hybridcast::optim {

using Point = std::vector<double>;

struct NelderMeadOptions {
    /// Per-coordinate initial simplex edge; a single entry is broadcast.
    std::vector<double> step{0.1};
    /// Stop once every vertex is within this infinity-norm distance of the best.
    double diameter_tolerance = 1e-8;
    std::size_t max_iterations = 2000;
    /// Applied to every trial point, e.g. a box projection.
    std::function<void(Point&)> project;
};

struct NelderMeadResult {
    Point x;
    double value = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
};

/// Derivative-free simplex minimization (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). Non-finite objective values rank as +inf.
template <typename Objective>
[[nodiscard]] NelderMeadResult nelder_mead(Objective&& objective, Point start, const NelderMeadOptions& options = {}) {
    const std::size_t n = start.size();
    auto eval = [&](Point& p) {
        if (options.project) options.project(p);
        const double v = objective(static_cast<const Point&>(p));
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    NelderMeadResult result;
    if (n == 0) {
        result.x = start;
        result.value = eval(result.x);
        result.converged = true;
        return result;
    }

    std::vector<Point> simplex(n + 1, start);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = options.step.size() == 1 ? options.step[0] : options.step.at(i);
        simplex[i + 1][i] += h;
    }
    for (std::size_t i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(n + 1);
    Point centroid(n), trial(n), trial2(n);
    std::size_t iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[best][j]));
            }
        }
        if (diameter < options.diameter_tolerance) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const auto& v = simplex[order[k]];
            for (std::size_t j = 0; j < n; ++j) centroid[j] += v[j] / static_cast<double>(n);
        }

        for (std::size_t j = 0; j < n; ++j) trial[j] = centroid[j] + (centroid[j] - simplex[worst][j]);
        const double f_reflect = eval(trial);

        if (f_reflect < values[best]) {
            for (std::size_t j = 0; j < n; ++j) trial2[j] = centroid[j] + 2.0 * (centroid[j] - simplex[worst][j]);
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_expand;
            } else {
                simplex[worst] = trial;
                values[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < values[second]) {
            simplex[worst] = trial;
            values[worst] = f_reflect;
            continue;
        }

        const bool outside = f_reflect < values[worst];
        for (std::size_t j = 0; j < n; ++j) {
            trial2[j] = outside ? centroid[j] + 0.5 * (trial[j] - centroid[j])
                                : centroid[j] + 0.5 * (simplex[worst][j] - centroid[j]);
        }
        const double f_contract = eval(trial2);
        if (f_contract < (outside ? f_reflect : values[worst])) {
            simplex[worst] = trial2;
            values[worst] = f_contract;
            continue;
        }

        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            }
            values[i] = eval(simplex[i]);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    result.x = simplex[best];
    result.value = values[best];
    result.iterations = iter;
    return result;
}

}  // namespace hybridcast::optim
