#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgxsc/repo.hpp"

namespace sgxsc::scheduler {

struct Patch {
    std::string id;
    std::string library;
    std::string message;
    std::int64_t timestamp = 0;
    std::string upstream_commit;

    nlohmann::json to_json() const;
    static Patch from_json(const nlohmann::json& doc);

    friend bool operator==(const Patch&, const Patch&) = default;
};

struct PatchCache {
    std::string library;
    std::vector<Patch> entries; // arrival order
    std::size_t capacity = 10;

    friend bool operator==(const PatchCache&, const PatchCache&) = default;
};

struct SchedulerConfig {
    std::vector<std::string> keywords{"fix", "bug", "issue", "release"};
    std::int64_t max_age_seconds = 30LL * 86400;
    std::size_t default_capacity = 10;
    std::set<std::string> manual_review;
};

enum class Trigger { Keyword, Age, Capacity };
enum class Route { AutoMerge, ManualReview };

std::string_view to_string(Trigger trigger);
std::string_view to_string(Route route);

struct MergeDecision {
    std::string library;
    Trigger trigger = Trigger::Keyword;
    std::vector<std::string> patch_ids;
    Route routed_to = Route::AutoMerge;
    std::int64_t timestamp = 0;
    std::string approver; // set when a human approval led to this decision

    nlohmann::json to_json() const;
    static MergeDecision from_json(const nlohmann::json& doc);

    friend bool operator==(const MergeDecision&, const MergeDecision&) = default;
};

struct ReviewEntry {
    std::string library;
    std::vector<Patch> patches;
    Trigger reason = Trigger::Keyword;

    friend bool operator==(const ReviewEntry&, const ReviewEntry&) = default;
};

struct SchedulerState {
    std::map<std::string, PatchCache> caches;
    std::map<std::string, std::int64_t> last_merge;
    std::vector<ReviewEntry> review_queue;
    std::vector<MergeDecision> decision_log; // persisted separately, append-only

    /// caches + last_merge + review_queue; the decision log lives in its
    /// own append-only file.
    nlohmann::json snapshot_payload() const;
    static SchedulerState from_snapshot(const nlohmann::json& payload);

    friend bool operator==(const SchedulerState&, const SchedulerState&) = default;
};

/// True when `message` contains any keyword as a whole word
/// (case-insensitive; alphanumeric runs are words, so "prefixed" does not
/// match "fix").
bool message_matches_keywords(const std::string& message,
                              const std::vector<std::string>& keywords);

/// Appends the patch to its library's cache, creating the cache on first
/// use. No trigger evaluation happens here.
void enqueue_patch(SchedulerState& state, const SchedulerConfig& config, Patch patch);

/// Trigger rules in priority order: a keyword in any cached message, a
/// cache at or over capacity, or a nonempty cache idle for max_age (with
/// no previous merge, age counts from the earliest cached patch).
std::optional<Trigger> evaluate_triggers(const PatchCache& cache, const SchedulerConfig& config,
                                         std::int64_t now,
                                         std::optional<std::int64_t> last_merge);

struct StepAction {
    enum class Kind { Merged, Escalated, Queued };

    Kind kind = Kind::Merged;
    std::string library;
    Trigger trigger = Trigger::Keyword;
    std::vector<std::string> patch_ids;
    std::optional<repo::Escalation> escalation; // set when kind == Escalated

    nlohmann::json to_json() const;
};

/// One scheduler pass over all caches in library-name order. Triggered
/// manual-review libraries move to the review queue; others are merged,
/// clearing the cache on success. A conflicted merge keeps the cache so a
/// later resolution consumes the patches exactly once.
std::vector<StepAction> scheduler_step(SchedulerState& state, const SchedulerConfig& config,
                                       std::map<std::string, repo::RepoState>& repos,
                                       std::int64_t now);

/// Approves the oldest pending review entry for `library` and hands it to
/// the merge path. The decision records the approver and stays routed to
/// ManualReview: security-critical libraries never produce AutoMerge
/// decisions.
std::vector<StepAction> approve_review(SchedulerState& state, const SchedulerConfig& config,
                                       std::map<std::string, repo::RepoState>& repos,
                                       const std::string& library, const std::string& approver,
                                       std::int64_t now);

} // namespace sgxsc::scheduler
