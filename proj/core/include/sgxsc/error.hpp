#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sgxsc {

enum class Errc {
    duplicate_name,
    unresolved_dependency,
    cycle_detected,
    unknown_package,
    top_n_out_of_range,
    duplicate_patch_id,
    missing_repo,
    nothing_pending,
    corrupt_repo,
    stale_escalation,
    empty_axis,
    duplicate_axis_value,
    runner_unavailable,
    retire_unknown_version,
    unknown_callee,
    duplicate_function,
    missing_sensitivity,
    io_failure,
    schema_mismatch,
    invalid_argument,
    parse_error,
};

std::string_view errc_name(Errc code);

/// Toolkit-wide exception. `detail` carries structured context such as a
/// cycle path or the names involved in a violation.
class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message, std::vector<std::string> detail = {})
        : std::runtime_error(std::move(message)), code_(code), detail_(std::move(detail)) {}

    Errc code() const { return code_; }
    const std::vector<std::string>& detail() const { return detail_; }

private:
    Errc code_;
    std::vector<std::string> detail_;
};

} // namespace sgxsc
