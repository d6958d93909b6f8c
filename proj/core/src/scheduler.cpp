#include "sgxsc/scheduler.hpp"

#include <algorithm>
#include <cctype>

#include "sgxsc/error.hpp"

namespace sgxsc::scheduler {

std::string_view to_string(Trigger trigger) {
    switch (trigger) {
    case Trigger::Keyword: return "keyword";
    case Trigger::Age: return "age";
    case Trigger::Capacity: return "capacity";
    }
    return "keyword";
}

std::string_view to_string(Route route) {
    return route == Route::AutoMerge ? "auto_merge" : "manual_review";
}

namespace {

Trigger trigger_from_string(std::string_view text) {
    if (text == "keyword") return Trigger::Keyword;
    if (text == "age") return Trigger::Age;
    if (text == "capacity") return Trigger::Capacity;
    throw Error(Errc::parse_error, "unknown trigger: " + std::string(text));
}

Route route_from_string(std::string_view text) {
    if (text == "auto_merge") return Route::AutoMerge;
    if (text == "manual_review") return Route::ManualReview;
    throw Error(Errc::parse_error, "unknown route: " + std::string(text));
}

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void append_decision(SchedulerState& state, MergeDecision decision) {
    if (!state.decision_log.empty() &&
        decision.timestamp < state.decision_log.back().timestamp) {
        throw Error(Errc::invalid_argument, "decision timestamps must be non-decreasing");
    }
    state.decision_log.push_back(std::move(decision));
}

std::vector<std::string> patch_ids(const std::vector<Patch>& patches) {
    std::vector<std::string> ids;
    ids.reserve(patches.size());
    for (const auto& patch : patches) {
        ids.push_back(patch.id);
    }
    return ids;
}

repo::RepoState& repo_for(std::map<std::string, repo::RepoState>& repos,
                          const std::string& library) {
    auto it = repos.find(library);
    if (it == repos.end()) {
        throw Error(Errc::missing_repo, "no repository for library " + library, {library});
    }
    return it->second;
}

} // namespace

nlohmann::json Patch::to_json() const {
    nlohmann::json out;
    out["id"] = id;
    out["library"] = library;
    out["message"] = message;
    out["timestamp"] = timestamp;
    out["upstream_commit"] = upstream_commit;
    return out;
}

Patch Patch::from_json(const nlohmann::json& doc) {
    Patch patch;
    try {
        patch.id = doc.at("id").get<std::string>();
        patch.library = doc.at("library").get<std::string>();
        patch.message = doc.at("message").get<std::string>();
        patch.timestamp = doc.at("timestamp").get<std::int64_t>();
        patch.upstream_commit = doc.value("upstream_commit", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("patch record: ") + e.what());
    }
    if (patch.id.empty() || patch.library.empty()) {
        throw Error(Errc::parse_error, "patch id and library must be nonempty");
    }
    if (patch.timestamp < 0) {
        throw Error(Errc::parse_error, "patch timestamp must be >= 0");
    }
    return patch;
}

nlohmann::json MergeDecision::to_json() const {
    nlohmann::json out;
    out["library"] = library;
    out["trigger"] = std::string(to_string(trigger));
    out["patch_ids"] = patch_ids;
    out["routed_to"] = std::string(to_string(routed_to));
    out["timestamp"] = timestamp;
    if (!approver.empty()) {
        out["approver"] = approver;
    }
    return out;
}

MergeDecision MergeDecision::from_json(const nlohmann::json& doc) {
    MergeDecision decision;
    try {
        decision.library = doc.at("library").get<std::string>();
        decision.trigger = trigger_from_string(doc.at("trigger").get<std::string>());
        decision.patch_ids = doc.at("patch_ids").get<std::vector<std::string>>();
        decision.routed_to = route_from_string(doc.at("routed_to").get<std::string>());
        decision.timestamp = doc.at("timestamp").get<std::int64_t>();
        decision.approver = doc.value("approver", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("decision record: ") + e.what());
    }
    return decision;
}

nlohmann::json SchedulerState::snapshot_payload() const {
    nlohmann::json caches_doc = nlohmann::json::object();
    for (const auto& [library, cache] : caches) {
        nlohmann::json entry;
        entry["capacity"] = cache.capacity;
        auto patches = nlohmann::json::array();
        for (const auto& patch : cache.entries) {
            patches.push_back(patch.to_json());
        }
        entry["entries"] = std::move(patches);
        caches_doc[library] = std::move(entry);
    }
    nlohmann::json last_merge_doc = nlohmann::json::object();
    for (const auto& [library, when] : last_merge) {
        last_merge_doc[library] = when;
    }
    auto queue = nlohmann::json::array();
    for (const auto& entry : review_queue) {
        nlohmann::json item;
        item["library"] = entry.library;
        item["reason"] = std::string(to_string(entry.reason));
        auto patches = nlohmann::json::array();
        for (const auto& patch : entry.patches) {
            patches.push_back(patch.to_json());
        }
        item["patches"] = std::move(patches);
        queue.push_back(std::move(item));
    }
    nlohmann::json out;
    out["caches"] = std::move(caches_doc);
    out["last_merge"] = std::move(last_merge_doc);
    out["review_queue"] = std::move(queue);
    return out;
}

SchedulerState SchedulerState::from_snapshot(const nlohmann::json& payload) {
    SchedulerState state;
    try {
        for (const auto& [library, entry] : payload.at("caches").items()) {
            PatchCache cache;
            cache.library = library;
            cache.capacity = entry.at("capacity").get<std::size_t>();
            if (cache.capacity == 0) {
                throw Error(Errc::parse_error, "cache capacity must be >= 1: " + library);
            }
            for (const auto& patch : entry.at("entries")) {
                cache.entries.push_back(Patch::from_json(patch));
            }
            state.caches.emplace(library, std::move(cache));
        }
        for (const auto& [library, when] : payload.at("last_merge").items()) {
            state.last_merge[library] = when.get<std::int64_t>();
        }
        for (const auto& item : payload.at("review_queue")) {
            ReviewEntry entry;
            entry.library = item.at("library").get<std::string>();
            entry.reason = trigger_from_string(item.at("reason").get<std::string>());
            for (const auto& patch : item.at("patches")) {
                entry.patches.push_back(Patch::from_json(patch));
            }
            state.review_queue.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("scheduler state: ") + e.what());
    }
    return state;
}

bool message_matches_keywords(const std::string& message,
                              const std::vector<std::string>& keywords) {
    std::string word;
    auto check = [&] {
        if (word.empty()) {
            return false;
        }
        for (const auto& keyword : keywords) {
            if (word == lowercase(keyword)) {
                return true;
            }
        }
        return false;
    };
    for (unsigned char c : message) {
        if (std::isalnum(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else {
            if (check()) {
                return true;
            }
            word.clear();
        }
    }
    return check();
}

void enqueue_patch(SchedulerState& state, const SchedulerConfig& config, Patch patch) {
    auto [it, created] = state.caches.try_emplace(patch.library);
    PatchCache& cache = it->second;
    if (created) {
        cache.library = patch.library;
        cache.capacity = config.default_capacity;
    }
    for (const auto& existing : cache.entries) {
        if (existing.id == patch.id) {
            throw Error(Errc::duplicate_patch_id,
                        "patch " + patch.id + " already cached for " + patch.library,
                        {patch.id});
        }
    }
    cache.entries.push_back(std::move(patch));
}

std::optional<Trigger> evaluate_triggers(const PatchCache& cache, const SchedulerConfig& config,
                                         std::int64_t now,
                                         std::optional<std::int64_t> last_merge) {
    if (cache.entries.empty()) {
        return std::nullopt;
    }
    for (const auto& patch : cache.entries) {
        if (message_matches_keywords(patch.message, config.keywords)) {
            return Trigger::Keyword;
        }
    }
    if (cache.entries.size() >= cache.capacity) {
        return Trigger::Capacity;
    }
    std::int64_t since = 0;
    if (last_merge) {
        since = *last_merge;
    } else {
        since = cache.entries.front().timestamp;
        for (const auto& patch : cache.entries) {
            since = std::min(since, patch.timestamp);
        }
    }
    if (now - since >= config.max_age_seconds) {
        return Trigger::Age;
    }
    return std::nullopt;
}

nlohmann::json StepAction::to_json() const {
    nlohmann::json out;
    switch (kind) {
    case Kind::Merged: out["kind"] = "merged"; break;
    case Kind::Escalated: out["kind"] = "escalated"; break;
    case Kind::Queued: out["kind"] = "queued"; break;
    }
    out["library"] = library;
    out["trigger"] = std::string(to_string(trigger));
    out["patch_ids"] = patch_ids;
    if (escalation) {
        out["escalation"] = escalation->to_json();
    }
    return out;
}

std::vector<StepAction> scheduler_step(SchedulerState& state, const SchedulerConfig& config,
                                       std::map<std::string, repo::RepoState>& repos,
                                       std::int64_t now) {
    std::vector<StepAction> actions;
    for (auto& [library, cache] : state.caches) {
        std::optional<std::int64_t> last;
        if (auto it = state.last_merge.find(library); it != state.last_merge.end()) {
            last = it->second;
        }
        auto trigger = evaluate_triggers(cache, config, now, last);
        if (!trigger) {
            continue;
        }
        std::vector<std::string> ids = patch_ids(cache.entries);
        if (config.manual_review.count(library)) {
            state.review_queue.push_back({library, std::move(cache.entries), *trigger});
            cache.entries.clear();
            append_decision(state, {library, *trigger, ids, Route::ManualReview, now, {}});
            actions.push_back({StepAction::Kind::Queued, library, *trigger, ids, std::nullopt});
            continue;
        }
        repo::RepoState& repo = repo_for(repos, library);
        repo::MergeResult result = repo::attempt_merge(repo, library, now);
        if (result.merged) {
            cache.entries.clear();
            state.last_merge[library] = now;
            append_decision(state, {library, *trigger, ids, Route::AutoMerge, now, {}});
            actions.push_back({StepAction::Kind::Merged, library, *trigger, ids, std::nullopt});
        } else {
            // Patches stay cached; a later resolution consumes them exactly once.
            actions.push_back({StepAction::Kind::Escalated, library, *trigger, ids,
                               std::move(result.escalation)});
        }
    }
    return actions;
}

std::vector<StepAction> approve_review(SchedulerState& state, const SchedulerConfig& config,
                                       std::map<std::string, repo::RepoState>& repos,
                                       const std::string& library, const std::string& approver,
                                       std::int64_t now) {
    (void)config;
    auto it = std::find_if(state.review_queue.begin(), state.review_queue.end(),
                           [&](const ReviewEntry& entry) { return entry.library == library; });
    if (it == state.review_queue.end()) {
        throw Error(Errc::nothing_pending, "no pending review for " + library, {library});
    }
    ReviewEntry entry = std::move(*it);
    state.review_queue.erase(it);

    std::vector<std::string> ids = patch_ids(entry.patches);
    append_decision(state, {library, entry.reason, ids, Route::ManualReview, now, approver});

    repo::RepoState& repo = repo_for(repos, library);
    repo::MergeResult result = repo::attempt_merge(repo, library, now);
    std::vector<StepAction> actions;
    if (result.merged) {
        state.last_merge[library] = now;
        actions.push_back({StepAction::Kind::Merged, library, entry.reason, ids, std::nullopt});
    } else {
        actions.push_back({StepAction::Kind::Escalated, library, entry.reason, ids,
                           std::move(result.escalation)});
    }
    return actions;
}

} // namespace sgxsc::scheduler
