#include "sgxsc/resource.hpp"

#include <string>

#include "sgxsc/error.hpp"

namespace sgxsc {

std::string_view to_string(ResourceKind kind) {
    switch (kind) {
    case ResourceKind::FileIO: return "file_io";
    case ResourceKind::Time: return "time";
    case ResourceKind::Randomness: return "randomness";
    case ResourceKind::ThreadSpawn: return "thread_spawn";
    case ResourceKind::Network: return "network";
    case ResourceKind::EnvVar: return "env_var";
    case ResourceKind::ProcessSpawn: return "process_spawn";
    }
    return "file_io";
}

ResourceKind resource_kind_from_string(std::string_view text) {
    for (ResourceKind kind : kAllResourceKinds) {
        if (to_string(kind) == text) {
            return kind;
        }
    }
    throw Error(Errc::parse_error, "unknown resource kind: " + std::string(text));
}

} // namespace sgxsc
