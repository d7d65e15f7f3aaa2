#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "hybridcast/error.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::synth {

/// Standard normal draws by Box-Muller on 53-bit uniforms, so a seed gives
/// the same stream with every standard library.
class Gaussian {
public:
    explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// 2020-01-01T00:00:00Z
inline constexpr Timestamp kDefaultStart = 1577836800;
inline constexpr std::int64_t kDay = 86400;

struct SeasonalRecipe {
    std::size_t n = 240;
    std::size_t period = 12;
    double level = 100.0;
    double slope = 0.5;
    double amplitude = 10.0;
    double noise_sd = 2.0;
    std::uint64_t seed = 7;
};

/// level + slope * t + amplitude * sin(2 pi t / period) + N(0, noise_sd^2),
/// floored at 1 so the series stays positive.
[[nodiscard]] inline TimeSeries seasonal(const SeasonalRecipe& r) {
    if (r.n < 3 || r.period < 2) throw Error(ErrorCode::argument, "synthetic series needs n >= 3 and period >= 2");
    Gaussian noise(r.seed);
    std::vector<double> v(r.n);
    for (std::size_t t = 0; t < r.n; ++t) {
        const double x = static_cast<double>(t);
        const double y = r.level + r.slope * x + r.amplitude * std::sin(2.0 * std::numbers::pi * x / static_cast<double>(r.period)) +
                         r.noise_sd * noise();
        v[t] = std::max(y, 1.0);
    }
    return TimeSeries(kDefaultStart, kDay, std::move(v), "seasonal");
}

struct TrafficRecipe {
    std::size_t n = 240;
    std::size_t period = 7;
    double level = 1000.0;
    double slope = 1.0;
    double weekly_amplitude = 150.0;
    double noise_sd = 20.0;
    std::size_t spikes = 1;
    /// Spike height in units of noise_sd.
    double spike_height = 10.0;
    std::uint64_t seed = 11;
};

struct TrafficSeries {
    TimeSeries series;
    std::vector<std::size_t> spike_indices;
};

/// Daily web-traffic-like counts: trend, a weekday/weekend profile and
/// Gaussian noise, with upward spikes injected at seeded positions in the
/// second half of the series.
[[nodiscard]] inline TrafficSeries traffic(const TrafficRecipe& r) {
    if (r.n < 4 * r.period || r.period < 2) throw Error(ErrorCode::argument, "traffic series needs n >= 4 * period");
    Gaussian noise(r.seed);
    std::vector<double> v(r.n);
    for (std::size_t t = 0; t < r.n; ++t) {
        const double phase = 2.0 * std::numbers::pi * static_cast<double>(t % r.period) / static_cast<double>(r.period);
        const double weekly = r.weekly_amplitude * (std::sin(phase) + 0.5 * std::cos(2.0 * phase));
        v[t] = std::max(r.level + r.slope * static_cast<double>(t) + weekly + r.noise_sd * noise(), 1.0);
    }
    std::vector<std::size_t> spikes;
    const std::size_t lo = r.n / 2;
    const std::size_t span = r.n - lo - 2;
    while (spikes.size() < r.spikes && spikes.size() < span / 3) {
        const auto idx = lo + static_cast<std::size_t>(noise.uniform() * static_cast<double>(span));
        bool clear = true;
        for (auto s : spikes) clear = clear && (idx > s + 2 || s > idx + 2);
        if (!clear) continue;
        spikes.push_back(idx);
        v[idx] += r.spike_height * r.noise_sd;
    }
    std::sort(spikes.begin(), spikes.end());
    return {TimeSeries(kDefaultStart, kDay, std::move(v), "traffic"), std::move(spikes)};
}

}  // namespace hybridcast::synth
