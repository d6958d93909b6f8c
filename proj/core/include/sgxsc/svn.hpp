#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sgxsc::svn {

/// One enclave build of a library: the library's own security revision
/// paired with the SDK security version it was built against.
struct BuildPoint {
    std::string library;
    std::uint32_t lib_rev = 0;
    std::uint32_t sdk_svn = 0;
    bool live = true;

    nlohmann::json to_json() const;

    friend bool operator==(const BuildPoint&, const BuildPoint&) = default;
};

struct VersionEvent {
    enum class Type { LibRelease, SdkBump, Retire };

    Type type = Type::LibRelease;
    std::string library;       // LibRelease / Retire
    bool security_bump = false; // LibRelease
    std::uint32_t lib_rev = 0;  // Retire

    nlohmann::json to_json() const;
    static VersionEvent from_json(const nlohmann::json& doc);

    friend bool operator==(const VersionEvent&, const VersionEvent&) = default;
};

std::vector<VersionEvent> load_events(const std::filesystem::path& file); // JSONL

/// Partial order over builds. Builds of different libraries live in
/// separate SVN spaces and are never compared; within a library the order
/// is componentwise on (lib_rev, sdk_svn).
struct SecurityOrder {
    std::vector<BuildPoint> builds; // sorted by (library, lib_rev, sdk_svn)

    static bool leq(const BuildPoint& a, const BuildPoint& b);
    static bool comparable(const BuildPoint& a, const BuildPoint& b);

    std::vector<BuildPoint> live_builds() const;
};

/// Replays the event stream. A library's first release creates revision
/// 0; later releases with a security bump create revision +1. An SDK bump
/// spawns a new build for every live build at the next SDK SVN, keeping
/// the old builds live. Retire kills every build of the given revision.
SecurityOrder derive_order(const std::vector<VersionEvent>& events);

struct SvnAssignment {
    std::vector<std::pair<BuildPoint, std::uint32_t>> svns;

    nlohmann::json to_json() const;
};

struct LinearCheck {
    std::optional<SvnAssignment> assignment;
    std::optional<std::pair<BuildPoint, BuildPoint>> violation;

    bool ok() const { return assignment.has_value(); }

    nlohmann::json to_json() const;
};

/// A sound linear SVN assignment (svn(a) <= svn(b) iff a <= b over live
/// builds of each library) exists exactly when every library's live
/// builds form a chain. Returns the rank assignment or a witness pair of
/// incomparable live builds.
LinearCheck check_linear(const SecurityOrder& order);

/// Rewrites the stream to the latest-only policy by inserting a Retire
/// for the previous revision in front of every revision-bumping release.
/// Idempotent; the rewritten stream always passes check_linear.
std::vector<VersionEvent> enforce_latest_only(const std::vector<VersionEvent>& events);

} // namespace sgxsc::svn
