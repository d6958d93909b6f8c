#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sgxsc::store {

struct Snapshot {
    nlohmann::json payload;
    int schema_version = 0;
    std::int64_t written_at = 0;
};

/// Write-to-temporary then atomic rename; a failure anywhere before the
/// rename leaves the previous snapshot intact.
void write_snapshot(const nlohmann::json& payload, int schema_version,
                    std::int64_t written_at, const std::filesystem::path& path);

/// Throws Error(schema_mismatch) when the file's schema version differs
/// from `expected_version`.
Snapshot read_snapshot(const std::filesystem::path& path, int expected_version);

/// Appends one record as a single JSON line; the trailing newline is the
/// commit marker.
void append_record(const std::filesystem::path& path, const nlohmann::json& record);

struct Replay {
    std::vector<nlohmann::json> records;
    bool truncated = false; // a partial trailing record was detected and dropped
};

Replay replay_log(const std::filesystem::path& path);

// Failpoints for crash-consistency tests: an armed failpoint makes the
// matching store operation fail as if the process died there.
void failpoint_arm(const std::string& name);
void failpoint_disarm_all();
bool failpoint_armed(std::string_view name);

inline constexpr std::string_view kFailpointSnapshotBeforeRename = "snapshot_before_rename";

} // namespace sgxsc::store
