// Fits a seasonal ARIMA and a Holt-Winters model to a synthetic series,
// prints a 12-step forecast from each and a cross-validated leaderboard.

#include <iostream>

#include "hybridcast/evaluate/compare.hpp"
#include "hybridcast/evaluate/report.hpp"
#include "hybridcast/models/model.hpp"
#include "hybridcast/synth.hpp"

int main() {
    namespace hc = hybridcast;
    const auto series = hc::synth::seasonal({});

    hc::ModelSpec sarima;
    sarima.family = hc::Family::sarima;
    sarima.config = hc::ArimaModelSpec{{1, 1, 1}, hc::arima::SeasonalOrder{1, 1, 1, 12}, std::nullopt};

    hc::ModelSpec holt_winters;
    holt_winters.family = hc::Family::ets;
    holt_winters.config = hc::EtsModelSpec{{hc::ets::TrendKind::additive, hc::ets::SeasonalKind::additive, 12}, {}};

    for (const auto& spec : {sarima, holt_winters}) {
        const auto model = hc::fit_model(series, spec);
        const auto fc = hc::forecast(model, hc::Horizon{12}, 0.95);
        std::cout << hc::describe(spec) << "\n";
        for (const auto& step : fc.steps) {
            std::cout << "  " << hc::format_timestamp(step.timestamp) << "  " << step.point << "  [" << *step.lower << ", "
                      << *step.upper << "]\n";
        }
    }

    const auto board = hc::evaluate::compare_models(series, {sarima, holt_winters}, {4, 12});
    std::cout << '\n' << hc::evaluate::leaderboard_table(board);
}
