#include "sgxsc/error.hpp"

namespace sgxsc {

std::string_view errc_name(Errc code) {
    switch (code) {
    case Errc::duplicate_name: return "DuplicateName";
    case Errc::unresolved_dependency: return "UnresolvedDependency";
    case Errc::cycle_detected: return "CycleDetected";
    case Errc::unknown_package: return "UnknownPackage";
    case Errc::top_n_out_of_range: return "TopNOutOfRange";
    case Errc::duplicate_patch_id: return "DuplicatePatchId";
    case Errc::missing_repo: return "MissingRepo";
    case Errc::nothing_pending: return "NothingPending";
    case Errc::corrupt_repo: return "CorruptRepo";
    case Errc::stale_escalation: return "StaleEscalation";
    case Errc::empty_axis: return "EmptyAxis";
    case Errc::duplicate_axis_value: return "DuplicateAxisValue";
    case Errc::runner_unavailable: return "RunnerUnavailable";
    case Errc::retire_unknown_version: return "RetireUnknownVersion";
    case Errc::unknown_callee: return "UnknownCallee";
    case Errc::duplicate_function: return "DuplicateFunction";
    case Errc::missing_sensitivity: return "MissingSensitivity";
    case Errc::io_failure: return "IoFailure";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::parse_error: return "ParseError";
    }
    return "UnknownError";
}

} // namespace sgxsc
