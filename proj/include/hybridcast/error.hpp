#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hybridcast {

/// Machine-readable failure category shared by every module.
enum class ErrorCode {
    ingest,
    too_short,
    irregular_series,
    split,
    impute,
    argument,
    domain,
    degenerate_range,
    numerical,
    data,
    fit_failure,
    search_failure,
    selection,
    comparison,
    configuration,
    divergence,
    not_found,
    conflict,
};

[[nodiscard]] constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ingest: return "ingest_error";
        case ErrorCode::too_short: return "too_short";
        case ErrorCode::irregular_series: return "irregular_series";
        case ErrorCode::split: return "split_error";
        case ErrorCode::impute: return "impute_error";
        case ErrorCode::argument: return "argument_error";
        case ErrorCode::domain: return "domain_error";
        case ErrorCode::degenerate_range: return "degenerate_range";
        case ErrorCode::numerical: return "numerical_error";
        case ErrorCode::data: return "data_error";
        case ErrorCode::fit_failure: return "fit_failure";
        case ErrorCode::search_failure: return "search_failure";
        case ErrorCode::selection: return "selection_error";
        case ErrorCode::comparison: return "comparison_error";
        case ErrorCode::configuration: return "configuration_error";
        case ErrorCode::divergence: return "divergence_error";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::conflict: return "conflict";
    }
    return "error";
}

/// Exception type thrown by the library. `index` carries the offending
/// row, element or pipeline step when the failure is positional.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> index = std::nullopt)
        : std::runtime_error(message), code_(code), index_(index) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::optional<std::size_t> index() const noexcept { return index_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> index_;
};

}  // namespace hybridcast
