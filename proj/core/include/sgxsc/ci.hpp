#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sgxsc::ci {

struct BuildMatrix {
    std::vector<std::string> package_managers;
    std::vector<std::string> os_versions;
    std::vector<std::string> build_types;
};

struct PipelineConfig {
    std::string package_manager;
    std::string os_version;
    std::string build_type;

    std::string key() const; // "<pm>|<os>|<build_type>"

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// Full cross-product in declared axis and value order (build type varies
/// fastest). Validates that every axis is nonempty and duplicate-free.
std::vector<PipelineConfig> expand_matrix(const BuildMatrix& matrix);

enum class FailureCategory {
    TransientNetwork,
    Deterministic,
    ExternalDependencyBreakage,
};

std::string_view to_string(FailureCategory category);
FailureCategory failure_category_from_string(std::string_view text);

struct RawOutcome {
    bool pass = true;
    FailureCategory category = FailureCategory::Deterministic; // meaningful when !pass
};

using Runner = std::function<RawOutcome(const std::string& library, const PipelineConfig&)>;

struct CiRecord {
    std::string library;
    PipelineConfig config;
    std::int64_t when = 0;
    bool pass = true;
    std::optional<FailureCategory> category; // present iff !pass

    nlohmann::json to_json() const;
    static CiRecord from_json(const nlohmann::json& doc);
};

/// One record per config. Transient network failures are retried up to
/// `retry_budget` extra attempts; all other failures are final on the
/// first run.
std::vector<CiRecord> run_ci(const std::string& library,
                             const std::vector<PipelineConfig>& configs, const Runner& runner,
                             std::size_t retry_budget, std::int64_t now);

struct MassFailureEvent {
    std::size_t failing_libraries = 0;
    bool suspected_external = false;

    nlohmann::json to_json() const;
};

struct SweepResult {
    std::vector<CiRecord> records;
    std::optional<MassFailureEvent> event;
};

/// Daily pass over every library. When at least `mass_failure_threshold`
/// of the libraries fail the same sweep, the failure is flagged as a
/// suspected external-dependency breakage.
SweepResult daily_sweep(const std::vector<std::string>& libraries,
                        const std::vector<PipelineConfig>& configs, const Runner& runner,
                        std::size_t retry_budget, std::int64_t now,
                        double mass_failure_threshold);

struct Attempt {
    std::int64_t when = 0;
    bool failed = false;
};

struct WeeklyReport {
    std::size_t week_index = 0; // week 0 starts at the configured epoch
    std::size_t total_attempts = 0;
    std::size_t failed_attempts = 0;

    double failure_rate() const;
};

/// Buckets attempts into 7-day windows from `epoch`, reporting every week
/// from 0 through the last week containing an attempt (empty weeks
/// included). Attempts before the epoch are rejected.
std::vector<WeeklyReport> weekly_aggregate(const std::vector<Attempt>& attempts,
                                           std::int64_t epoch,
                                           std::int64_t week_seconds = 7LL * 86400);

std::string weekly_report_csv(const std::vector<WeeklyReport>& reports);

/// Deterministic test double: outcomes are scripted per key, consumed in
/// order. Lookup precedence: "<library>|<pm>|<os>|<build_type>", then
/// "<library>", then "*"; an exhausted or missing script yields pass.
class ScriptedRunner {
public:
    static ScriptedRunner from_json(const nlohmann::json& doc);
    static ScriptedRunner load(const std::filesystem::path& file);

    void add_script(const std::string& key, std::vector<std::string> outcomes);

    RawOutcome next(const std::string& library, const PipelineConfig& config);
    Runner as_runner(); // shares this object; keep it alive while running

private:
    std::map<std::string, std::deque<std::string>> scripts_;
};

RawOutcome parse_outcome(std::string_view text);

} // namespace sgxsc::ci
