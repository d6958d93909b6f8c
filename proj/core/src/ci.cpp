#include "sgxsc/ci.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "sgxsc/error.hpp"

namespace sgxsc::ci {

std::string PipelineConfig::key() const {
    return package_manager + "|" + os_version + "|" + build_type;
}

namespace {

void check_axis(const std::vector<std::string>& values, const char* axis) {
    if (values.empty()) {
        throw Error(Errc::empty_axis, std::string("matrix axis is empty: ") + axis);
    }
    std::set<std::string> seen;
    for (const auto& value : values) {
        if (!seen.insert(value).second) {
            throw Error(Errc::duplicate_axis_value,
                        std::string("duplicate value in axis ") + axis + ": " + value);
        }
    }
}

} // namespace

std::vector<PipelineConfig> expand_matrix(const BuildMatrix& matrix) {
    check_axis(matrix.package_managers, "package_managers");
    check_axis(matrix.os_versions, "os_versions");
    check_axis(matrix.build_types, "build_types");

    std::vector<PipelineConfig> configs;
    configs.reserve(matrix.package_managers.size() * matrix.os_versions.size() *
                    matrix.build_types.size());
    for (const auto& pm : matrix.package_managers) {
        for (const auto& os : matrix.os_versions) {
            for (const auto& build : matrix.build_types) {
                configs.push_back({pm, os, build});
            }
        }
    }
    return configs;
}

std::string_view to_string(FailureCategory category) {
    switch (category) {
    case FailureCategory::TransientNetwork: return "transient_network";
    case FailureCategory::Deterministic: return "deterministic";
    case FailureCategory::ExternalDependencyBreakage: return "external_dependency_breakage";
    }
    return "deterministic";
}

FailureCategory failure_category_from_string(std::string_view text) {
    if (text == "transient_network") return FailureCategory::TransientNetwork;
    if (text == "deterministic") return FailureCategory::Deterministic;
    if (text == "external_dependency_breakage") return FailureCategory::ExternalDependencyBreakage;
    throw Error(Errc::parse_error, "unknown failure category: " + std::string(text));
}

nlohmann::json CiRecord::to_json() const {
    nlohmann::json out;
    out["library"] = library;
    out["package_manager"] = config.package_manager;
    out["os_version"] = config.os_version;
    out["build_type"] = config.build_type;
    out["when"] = when;
    out["pass"] = pass;
    if (category) {
        out["category"] = std::string(to_string(*category));
    }
    return out;
}

CiRecord CiRecord::from_json(const nlohmann::json& doc) {
    CiRecord record;
    try {
        record.library = doc.at("library").get<std::string>();
        record.config.package_manager = doc.at("package_manager").get<std::string>();
        record.config.os_version = doc.at("os_version").get<std::string>();
        record.config.build_type = doc.at("build_type").get<std::string>();
        record.when = doc.at("when").get<std::int64_t>();
        record.pass = doc.at("pass").get<bool>();
        if (doc.contains("category")) {
            record.category = failure_category_from_string(doc["category"].get<std::string>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("ci record: ") + e.what());
    }
    if (record.pass == record.category.has_value()) {
        throw Error(Errc::parse_error, "ci record: category must be present exactly on failure");
    }
    return record;
}

std::vector<CiRecord> run_ci(const std::string& library,
                             const std::vector<PipelineConfig>& configs, const Runner& runner,
                             std::size_t retry_budget, std::int64_t now) {
    if (!runner) {
        throw Error(Errc::runner_unavailable, "no CI runner configured");
    }
    std::vector<CiRecord> records;
    records.reserve(configs.size());
    for (const auto& config : configs) {
        RawOutcome outcome = runner(library, config);
        std::size_t retries = 0;
        while (!outcome.pass && outcome.category == FailureCategory::TransientNetwork &&
               retries < retry_budget) {
            ++retries;
            outcome = runner(library, config);
        }
        CiRecord record;
        record.library = library;
        record.config = config;
        record.when = now;
        record.pass = outcome.pass;
        if (!outcome.pass) {
            record.category = outcome.category;
        }
        records.push_back(std::move(record));
    }
    return records;
}

nlohmann::json MassFailureEvent::to_json() const {
    nlohmann::json out;
    out["failing_libraries"] = failing_libraries;
    out["suspected_external"] = suspected_external;
    return out;
}

SweepResult daily_sweep(const std::vector<std::string>& libraries,
                        const std::vector<PipelineConfig>& configs, const Runner& runner,
                        std::size_t retry_budget, std::int64_t now,
                        double mass_failure_threshold) {
    if (!(mass_failure_threshold > 0.0) || mass_failure_threshold > 1.0) {
        throw Error(Errc::invalid_argument, "mass failure threshold must be in (0, 1]");
    }
    SweepResult result;
    std::size_t failing = 0;
    for (const auto& library : libraries) {
        auto records = run_ci(library, configs, runner, retry_budget, now);
        bool failed = std::any_of(records.begin(), records.end(),
                                  [](const CiRecord& record) { return !record.pass; });
        if (failed) {
            ++failing;
        }
        result.records.insert(result.records.end(), records.begin(), records.end());
    }
    if (!libraries.empty()) {
        double fraction = static_cast<double>(failing) / static_cast<double>(libraries.size());
        if (fraction >= mass_failure_threshold) {
            result.event = MassFailureEvent{failing, true};
        }
    }
    return result;
}

double WeeklyReport::failure_rate() const {
    if (total_attempts == 0) {
        return 0.0;
    }
    return static_cast<double>(failed_attempts) / static_cast<double>(total_attempts);
}

std::vector<WeeklyReport> weekly_aggregate(const std::vector<Attempt>& attempts,
                                           std::int64_t epoch, std::int64_t week_seconds) {
    if (week_seconds <= 0) {
        throw Error(Errc::invalid_argument, "week length must be positive");
    }
    std::size_t max_week = 0;
    bool any = false;
    for (const auto& attempt : attempts) {
        if (attempt.when < epoch) {
            throw Error(Errc::invalid_argument, "attempt timestamp precedes the report epoch");
        }
        auto week = static_cast<std::size_t>((attempt.when - epoch) / week_seconds);
        max_week = std::max(max_week, week);
        any = true;
    }
    if (!any) {
        return {};
    }
    std::vector<WeeklyReport> reports(max_week + 1);
    for (std::size_t week = 0; week < reports.size(); ++week) {
        reports[week].week_index = week;
    }
    for (const auto& attempt : attempts) {
        auto week = static_cast<std::size_t>((attempt.when - epoch) / week_seconds);
        ++reports[week].total_attempts;
        if (attempt.failed) {
            ++reports[week].failed_attempts;
        }
    }
    return reports;
}

std::string weekly_report_csv(const std::vector<WeeklyReport>& reports) {
    std::string out = "# attempt = one per-library ci invocation or auto-merge attempt\n";
    out += "week,total,failed,rate\n";
    for (const auto& report : reports) {
        char line[96];
        std::snprintf(line, sizeof(line), "%zu,%zu,%zu,%.6f\n", report.week_index,
                      report.total_attempts, report.failed_attempts, report.failure_rate());
        out += line;
    }
    return out;
}

RawOutcome parse_outcome(std::string_view text) {
    if (text == "pass") {
        return {true, FailureCategory::Deterministic};
    }
    if (text == "fail" || text.rfind("fail:", 0) == 0) {
        std::string_view kind = text == "fail" ? "" : text.substr(5);
        if (kind == "network") {
            return {false, FailureCategory::TransientNetwork};
        }
        if (kind == "external") {
            return {false, FailureCategory::ExternalDependencyBreakage};
        }
        // Unclassified failures are treated as deterministic so a human looks.
        return {false, FailureCategory::Deterministic};
    }
    throw Error(Errc::parse_error, "unknown scripted outcome: " + std::string(text));
}

ScriptedRunner ScriptedRunner::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw Error(Errc::parse_error, "runner script must be an object of key -> outcomes");
    }
    ScriptedRunner runner;
    for (const auto& [key, outcomes] : doc.items()) {
        if (!outcomes.is_array()) {
            throw Error(Errc::parse_error, "runner script " + key + ": outcomes must be an array");
        }
        std::vector<std::string> list;
        for (const auto& outcome : outcomes) {
            parse_outcome(outcome.get<std::string>()); // validate eagerly
            list.push_back(outcome.get<std::string>());
        }
        runner.add_script(key, std::move(list));
    }
    return runner;
}

ScriptedRunner ScriptedRunner::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error(Errc::io_failure, "cannot open " + file.string());
    }
    try {
        return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, file.string() + ": " + e.what());
    }
}

void ScriptedRunner::add_script(const std::string& key, std::vector<std::string> outcomes) {
    auto& queue = scripts_[key];
    for (auto& outcome : outcomes) {
        queue.push_back(std::move(outcome));
    }
}

RawOutcome ScriptedRunner::next(const std::string& library, const PipelineConfig& config) {
    for (const std::string& key :
         {library + "|" + config.key(), library, std::string("*")}) {
        auto it = scripts_.find(key);
        if (it != scripts_.end() && !it->second.empty()) {
            std::string outcome = std::move(it->second.front());
            it->second.pop_front();
            return parse_outcome(outcome);
        }
    }
    return {true, FailureCategory::Deterministic};
}

Runner ScriptedRunner::as_runner() {
    return [this](const std::string& library, const PipelineConfig& config) {
        return next(library, config);
    };
}

} // namespace sgxsc::ci
