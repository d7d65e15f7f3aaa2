#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "hybridcast/evaluate/cv.hpp"
#include "hybridcast/timeseries.hpp"

namespace hybridcast::evaluate {

/// Fixed-width leaderboard: Model | MAE | MSE | RMSE | MAPE. Numbers use the
/// shortest round-trip form, so the table and the JSON carry the same values.
[[nodiscard]] inline std::string leaderboard_table(const std::vector<EvaluationReport>& reports) {
    std::vector<std::array<std::string, 5>> rows;
    rows.push_back({"Model", "MAE", "MSE", "RMSE", "MAPE"});
    for (const auto& r : reports) {
        if (r.ok()) {
            rows.push_back({r.model, format_number(r.pooled.mae), format_number(r.pooled.mse), format_number(r.pooled.rmse),
                            r.pooled.mape ? format_number(*r.pooled.mape) : std::string("n/a")});
        } else {
            rows.push_back({r.model, "failed", "-", "-", "-"});
        }
    }
    std::array<std::size_t, 5> width{};
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    auto emit = [&](const std::array<std::string, 5>& row) {
        for (std::size_t c = 0; c < 5; ++c) {
            if (c > 0) out += " | ";
            const auto pad = std::string(width[c] - row[c].size(), ' ');
            out += c == 0 ? row[c] + pad : pad + row[c];
        }
        out += '\n';
    };
    emit(rows.front());
    for (std::size_t c = 0; c < 5; ++c) {
        if (c > 0) out += "-+-";
        out += std::string(width[c], '-');
    }
    out += '\n';
    for (std::size_t i = 1; i < rows.size(); ++i) emit(rows[i]);
    for (const auto& r : reports) {
        if (!r.ok()) out += "! " + r.model + ": " + *r.error + '\n';
    }
    return out;
}

}  // namespace hybridcast::evaluate
