#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "hybridcast/csv.hpp"
#include "hybridcast/error.hpp"

namespace hybridcast {

/// UTC instant in whole seconds since the Unix epoch.
using Timestamp = std::int64_t;

[[nodiscard]] inline bool is_missing(double v) noexcept { return std::isnan(v); }
[[nodiscard]] inline double missing_value() noexcept { return std::numeric_limits<double>::quiet_NaN(); }

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline bool parse_fixed_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
        value = value * 10 + (s[i] - '0');
    }
    out = value;
    return true;
}

}  // namespace detail

/// Parses an ISO-8601 date or date-time (`YYYY-MM-DD`, `YYYY-MM-DDTHH:MM[:SS]`
/// with optional `Z` or numeric offset) or a bare epoch-seconds integer.
[[nodiscard]] inline std::optional<Timestamp> parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    text = detail::trim(text);
    if (text.empty()) return std::nullopt;

    const bool looks_epoch = std::all_of(text.begin(), text.end(), [](char c) { return (c >= '0' && c <= '9') || c == '-'; }) &&
                             text.find('-', 1) == std::string_view::npos;
    if (looks_epoch) {
        Timestamp value = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
        return value;
    }

    int y = 0, mo = 0, d = 0, hh = 0, mi = 0, ss = 0;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    if (!detail::parse_fixed_int(text, 0, 4, y) || !detail::parse_fixed_int(text, 5, 2, mo) ||
        !detail::parse_fixed_int(text, 8, 2, d)) {
        return std::nullopt;
    }
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;

    std::size_t pos = 10;
    std::int64_t offset = 0;
    if (pos < text.size()) {
        if (text[pos] != 'T' && text[pos] != ' ') return std::nullopt;
        ++pos;
        if (!detail::parse_fixed_int(text, pos, 2, hh) || pos + 2 >= text.size() || text[pos + 2] != ':' ||
            !detail::parse_fixed_int(text, pos + 3, 2, mi)) {
            return std::nullopt;
        }
        pos += 5;
        if (pos < text.size() && text[pos] == ':') {
            if (!detail::parse_fixed_int(text, pos + 1, 2, ss)) return std::nullopt;
            pos += 3;
            if (pos < text.size() && (text[pos] == '.' || text[pos] == ',')) {
                ++pos;
                const std::size_t start = pos;
                while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                    if (text[pos] != '0') return std::nullopt;  // sub-second precision is not representable
                    ++pos;
                }
                if (pos == start) return std::nullopt;
            }
        }
        if (hh > 23 || mi > 59 || ss > 60) return std::nullopt;
        if (pos < text.size()) {
            if (text[pos] == 'Z' && pos + 1 == text.size()) {
                pos += 1;
            } else if (text[pos] == '+' || text[pos] == '-') {
                const int sign = text[pos] == '+' ? 1 : -1;
                int oh = 0, om = 0;
                if (!detail::parse_fixed_int(text, pos + 1, 2, oh)) return std::nullopt;
                std::size_t mpos = pos + 3;
                if (mpos < text.size() && text[mpos] == ':') ++mpos;
                if (!detail::parse_fixed_int(text, mpos, 2, om) || mpos + 2 != text.size()) return std::nullopt;
                offset = sign * (oh * 3600 + om * 60);
                pos = text.size();
            } else {
                return std::nullopt;
            }
        }
    }
    if (pos != text.size()) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<Timestamp>(days) * 86400 + hh * 3600 + mi * 60 + ss - offset;
}

/// Formats as `YYYY-MM-DDTHH:MM:SSZ`.
[[nodiscard]] inline std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    std::int64_t days = t / 86400;
    std::int64_t secs = t % 86400;
    if (secs < 0) {
        secs += 86400;
        days -= 1;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(secs / 3600),
                  static_cast<int>((secs / 60) % 60), static_cast<int>(secs % 60));
    return buf;
}

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] inline std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

[[nodiscard]] inline std::optional<double> parse_number(std::string_view text) {
    text = detail::trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

/// Uniformly spaced univariate series. Immutable after construction; the
/// grid (start + i * frequency) makes the spacing invariant structural.
/// Missing observations are NaN.
class TimeSeries {
public:
    TimeSeries(Timestamp start, std::int64_t frequency, std::vector<double> values, std::string name = {})
        : start_(start), frequency_(frequency), values_(std::move(values)), name_(std::move(name)) {
        if (values_.empty()) throw Error(ErrorCode::argument, "time series must contain at least one value");
        if (frequency_ <= 0) throw Error(ErrorCode::argument, "time series frequency must be positive");
    }

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] Timestamp start() const noexcept { return start_; }
    [[nodiscard]] std::int64_t frequency() const noexcept { return frequency_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] Timestamp timestamp(std::size_t i) const noexcept {
        return start_ + static_cast<Timestamp>(i) * frequency_;
    }
    [[nodiscard]] Timestamp last_timestamp() const noexcept { return timestamp(size() - 1); }

    [[nodiscard]] std::vector<Timestamp> timestamps() const {
        std::vector<Timestamp> out(size());
        for (std::size_t i = 0; i < size(); ++i) out[i] = timestamp(i);
        return out;
    }

    [[nodiscard]] bool has_missing() const noexcept {
        return std::any_of(values_.begin(), values_.end(), [](double v) { return is_missing(v); });
    }

    /// Contiguous sub-range [offset, offset + count).
    [[nodiscard]] TimeSeries slice(std::size_t offset, std::size_t count) const {
        if (count == 0 || offset + count > size()) throw Error(ErrorCode::argument, "slice out of range");
        return TimeSeries(timestamp(offset), frequency_,
                          std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(offset),
                                              values_.begin() + static_cast<std::ptrdiff_t>(offset + count)),
                          name_);
    }

    /// Same grid, new values (length may differ; start is kept).
    [[nodiscard]] TimeSeries with_values(std::vector<double> values) const {
        return TimeSeries(start_, frequency_, std::move(values), name_);
    }

    friend bool operator==(const TimeSeries& a, const TimeSeries& b) {
        if (a.start_ != b.start_ || a.frequency_ != b.frequency_ || a.values_.size() != b.values_.size()) return false;
        for (std::size_t i = 0; i < a.values_.size(); ++i) {
            const double x = a.values_[i], y = b.values_[i];
            if (is_missing(x) != is_missing(y)) return false;
            if (!is_missing(x) && x != y) return false;
        }
        return true;
    }

private:
    Timestamp start_;
    std::int64_t frequency_;
    std::vector<double> values_;
    std::string name_;
};

/// Chronological split fractions; the remainder is the test segment.
struct SplitSpec {
    double train_fraction = 0.7;
    double validation_fraction = 0.15;
};

struct Horizon {
    std::size_t steps = 1;

    explicit Horizon(std::size_t s) : steps(s) {
        if (steps < 1) throw Error(ErrorCode::argument, "horizon must be at least one step");
    }
};

struct Split {
    TimeSeries train;
    TimeSeries validation;
    TimeSeries test;
};

/// Reads a headered CSV, sorts rows by time, infers the modal spacing and
/// fills grid gaps with missing markers.
[[nodiscard]] inline TimeSeries ingest_csv(std::string_view raw, std::string_view timestamp_column = "timestamp",
                                           std::string_view value_column = "value", std::string name = {}) {
    const auto rows = csv::parse(raw);
    if (rows.empty()) throw Error(ErrorCode::ingest, "CSV has no header row");
    const auto& header = rows.front();
    auto column_of = [&](std::string_view wanted) -> std::size_t {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (detail::trim(header[c]) == wanted) return c;
        }
        throw Error(ErrorCode::ingest, "CSV header has no column '" + std::string(wanted) + "'");
    };
    const std::size_t tcol = column_of(timestamp_column);
    const std::size_t vcol = column_of(value_column);

    std::map<Timestamp, double> points;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::string where = "row " + std::to_string(r) + " (line " + std::to_string(r + 1) + ")";
        if (row.size() <= std::max(tcol, vcol)) {
            throw Error(ErrorCode::ingest, where + ": too few fields", r);
        }
        const auto ts = parse_timestamp(row[tcol]);
        if (!ts) throw Error(ErrorCode::ingest, where + ": unparseable timestamp '" + row[tcol] + "'", r);
        double value = missing_value();
        const auto vtext = detail::trim(row[vcol]);
        if (!(vtext.empty() || vtext == "NA" || vtext == "NaN" || vtext == "nan" || vtext == "null")) {
            const auto parsed = parse_number(vtext);
            if (!parsed) throw Error(ErrorCode::ingest, where + ": unparseable value '" + row[vcol] + "'", r);
            value = *parsed;
        }
        if (!points.emplace(*ts, value).second) {
            throw Error(ErrorCode::ingest, where + ": duplicate timestamp " + format_timestamp(*ts), r);
        }
    }
    if (points.size() < 3) {
        throw Error(ErrorCode::too_short, "series needs at least 3 rows, got " + std::to_string(points.size()));
    }

    // Modal gap, ties broken towards the smaller gap.
    std::map<std::int64_t, std::size_t> gap_counts;
    for (auto it = std::next(points.begin()); it != points.end(); ++it) {
        ++gap_counts[it->first - std::prev(it)->first];
    }
    std::int64_t freq = 0;
    std::size_t best = 0;
    for (const auto& [gap, count] : gap_counts) {
        if (count > best) {
            best = count;
            freq = gap;
        }
    }
    const Timestamp start = points.begin()->first;
    const std::int64_t span = points.rbegin()->first - start;
    for (const auto& [gap, count] : gap_counts) {
        if (gap % freq != 0) {
            throw Error(ErrorCode::irregular_series,
                        "timestamps do not lie on a regular grid (modal spacing " + std::to_string(freq) + "s)");
        }
    }
    const auto grid_len = static_cast<std::size_t>(span / freq) + 1;
    if (grid_len > 100 * points.size() + 1000) {
        throw Error(ErrorCode::irregular_series, "gaps too large relative to modal spacing");
    }
    std::vector<double> values(grid_len, missing_value());
    for (const auto& [t, v] : points) values[static_cast<std::size_t>((t - start) / freq)] = v;
    return TimeSeries(start, freq, std::move(values), std::move(name));
}

/// Canonical two-column export: `timestamp,value`, ISO-8601 UTC, shortest
/// round-trip decimal, missing as an empty field.
[[nodiscard]] inline std::string to_csv(const TimeSeries& series) {
    std::string out = "timestamp,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += format_timestamp(series.timestamp(i));
        out += ',';
        if (!is_missing(series[i])) out += format_number(series[i]);
        out += '\n';
    }
    return out;
}

/// train = floor(n * train_fraction), validation = floor(n * validation_fraction),
/// test = remainder. No shuffling.
[[nodiscard]] inline Split split_chronological(const TimeSeries& series, const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) ||
        !(spec.validation_fraction >= 0.0 && spec.validation_fraction < 1.0) ||
        spec.train_fraction + spec.validation_fraction >= 1.0) {
        throw Error(ErrorCode::split, "split fractions must satisfy 0 < train, 0 <= validation, train + validation < 1");
    }
    if (series.has_missing()) throw Error(ErrorCode::split, "series contains missing values; impute first");
    const auto n = series.size();
    // The epsilon absorbs products such as 10 * 0.7 landing just below an integer.
    const auto train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.train_fraction + 1e-9));
    const auto validation =
        static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.validation_fraction + 1e-9));
    if (train == 0 || validation == 0 || train + validation >= n) {
        throw Error(ErrorCode::split, "split of " + std::to_string(n) + " points leaves an empty segment (train " +
                                          std::to_string(train) + ", validation " + std::to_string(validation) + ")");
    }
    return Split{series.slice(0, train), series.slice(train, validation),
                 series.slice(train + validation, n - train - validation)};
}

/// Joins contiguous segments that share a grid.
[[nodiscard]] inline TimeSeries concatenate(std::span<const TimeSeries> parts) {
    if (parts.empty()) throw Error(ErrorCode::argument, "nothing to concatenate");
    std::vector<double> values;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto& p = parts[k];
        if (k > 0) {
            const auto& prev = parts[k - 1];
            if (p.frequency() != prev.frequency() || p.start() != prev.last_timestamp() + prev.frequency()) {
                throw Error(ErrorCode::argument, "segments are not contiguous");
            }
        }
        values.insert(values.end(), p.values().begin(), p.values().end());
    }
    return TimeSeries(parts.front().start(), parts.front().frequency(), std::move(values), parts.front().name());
}

}  // namespace hybridcast
