#pragma once

#include <string_view>

namespace sgxsc {

/// Capabilities an enclave must not take from the untrusted environment
/// without review. Shared by the port planner and the call-graph auditor.
enum class ResourceKind {
    FileIO,
    Time,
    Randomness,
    ThreadSpawn,
    Network,
    EnvVar,
    ProcessSpawn,
};

inline constexpr ResourceKind kAllResourceKinds[] = {
    ResourceKind::FileIO,      ResourceKind::Time,   ResourceKind::Randomness,
    ResourceKind::ThreadSpawn, ResourceKind::Network, ResourceKind::EnvVar,
    ResourceKind::ProcessSpawn,
};

std::string_view to_string(ResourceKind kind);

/// Parses the wire spelling (`file_io`, `thread_spawn`, ...). Throws
/// Error(parse_error) on unknown input.
ResourceKind resource_kind_from_string(std::string_view text);

} // namespace sgxsc
