#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgxsc/planner.hpp"
#include "sgxsc/resource.hpp"

namespace sgxsc::auditor {

struct ResourceFact {
    ResourceKind kind = ResourceKind::FileIO;
    std::string site; // "path:line" or free-form

    friend bool operator==(const ResourceFact&, const ResourceFact&) = default;
};

struct FunctionFacts {
    std::vector<std::string> calls;
    std::vector<ResourceFact> resources;
    bool is_entrypoint = false;

    friend bool operator==(const FunctionFacts&, const FunctionFacts&) = default;
};

/// Call-graph facts for enclave code. Cycles are legal; every callee must
/// resolve to a declared function.
class CallGraph {
public:
    static CallGraph from_functions(std::map<std::string, FunctionFacts> functions);
    static CallGraph from_json(const nlohmann::json& doc);
    static CallGraph load(const std::filesystem::path& file);

    const std::map<std::string, FunctionFacts>& functions() const { return functions_; }
    bool contains(const std::string& name) const { return functions_.count(name) != 0; }

    nlohmann::ordered_json to_json() const;

private:
    CallGraph() = default;

    std::map<std::string, FunctionFacts> functions_;
};

enum class Severity { Warning, Error };

std::string_view to_string(Severity severity);

struct ResourceWarning {
    std::string entrypoint;
    std::string sink_function;
    ResourceKind kind = ResourceKind::FileIO;
    std::string site;
    std::vector<std::string> path; // entrypoint first, sink last
    Severity severity = Severity::Warning;

    nlohmann::json to_json() const;

    friend bool operator==(const ResourceWarning&, const ResourceWarning&) = default;
};

/// One warning per (entrypoint, reachable sink, resource kind), carrying
/// the shortest witness path (lexicographically smallest among equals).
/// Thread spawns are errors — ports must run single-threaded — everything
/// else is a review item. Output is sorted and independent of iteration
/// order.
std::vector<ResourceWarning> audit(const CallGraph& graph);

std::string format_warnings_text(const std::vector<ResourceWarning>& warnings);

using PatternTable = std::map<std::string, ResourceKind>;

PatternTable pattern_table_from_json(const nlohmann::json& doc);
PatternTable load_pattern_table(const std::filesystem::path& file);

/// The fixed extraction mini-convention: `fn name(` opens a definition
/// whose body runs to the next definition; a function is an entrypoint
/// when the preceding non-blank line equals `entry_marker`. Tokens are
/// runs of [A-Za-z0-9_:]; a token naming a known function and followed by
/// '(' is a call, and a token equal to a pattern-table key is a resource
/// use.
struct CallSyntax {
    std::string fn_keyword = "fn";
    std::string entry_marker = "#[ecall]";
};

/// Best-effort token-level fact extraction; never fails hard. Returns a
/// facts document in the same schema accepted by CallGraph::from_json.
nlohmann::ordered_json extract_facts(const std::map<std::string, std::string>& sources,
                                     const PatternTable& table,
                                     const CallSyntax& syntax = {});

/// Feeds distinct (sink, kind) findings through the port planner's
/// remediation rules. Every warned sink needs a sensitivity entry.
std::vector<planner::RemediationAction>
audit_to_plan(const std::vector<ResourceWarning>& warnings,
              const std::map<std::string, bool>& sensitivity);

} // namespace sgxsc::auditor
