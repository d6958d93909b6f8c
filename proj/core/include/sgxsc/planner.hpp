#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgxsc/registry.hpp"
#include "sgxsc/resource.hpp"

namespace sgxsc::planner {

struct ResourceUsage {
    std::string function;
    ResourceKind kind = ResourceKind::FileIO;
    bool security_sensitive = false;

    friend bool operator==(const ResourceUsage&, const ResourceUsage&) = default;
};

enum class RemediationKind {
    OCallWrapper,
    TrustedSubstitute,
    Prune,
};

std::string_view to_string(RemediationKind kind);

struct RemediationAction {
    ResourceUsage usage;
    RemediationKind action = RemediationKind::Prune;
    std::string substitute; // nonempty iff action == TrustedSubstitute

    friend bool operator==(const RemediationAction&, const RemediationAction&) = default;
};

struct TestCase {
    std::string name;
    bool depends_on_pruned = false;
};

struct FeatureFlag {
    std::string flag;
    bool sgx_relevant = false;
};

struct PlanRequest {
    std::vector<ResourceUsage> usages;
    std::vector<TestCase> tests;
    std::vector<FeatureFlag> features;

    static PlanRequest from_json(const nlohmann::json& doc);
    static PlanRequest load(const std::filesystem::path& file);
};

struct PortPlan {
    std::vector<std::string> order; // dependencies first, root last
    std::vector<RemediationAction> remediations;
    std::vector<std::string> thread_removals;
    std::vector<std::string> pruned_tests;
    std::string consolidated_entrypoint;
    std::vector<std::string> feature_prunes;

    nlohmann::ordered_json to_json() const;
};

struct PortOrderResult {
    std::vector<std::string> order;
    std::optional<std::string> blocker; // set when porting must abort

    bool aborted() const { return blocker.has_value(); }
};

/// Dependencies-first order over port_closure(root) plus the root itself
/// (root last). Aborts naming the first blocker when the closure contains
/// a package that cannot run inside an enclave at all. Ties are broken by
/// lexicographic name so plans are reproducible.
PortOrderResult port_order(const registry::RegistryGraph& graph, const std::string& root);

/// Maps each untrusted-resource usage to its remediation: non-sensitive
/// usages get an OCall wrapper; sensitive file/randomness/time usages get
/// the trusted counterpart; thread spawns and everything else sensitive is
/// pruned. Total and deterministic.
std::vector<RemediationAction> plan_remediations(const std::vector<ResourceUsage>& usages);

struct BuildPlanResult {
    std::optional<PortPlan> plan;
    std::optional<std::string> blocker;

    bool aborted() const { return blocker.has_value(); }
};

BuildPlanResult build_plan(const registry::RegistryGraph& graph, const std::string& root,
                           const PlanRequest& request);

} // namespace sgxsc::planner
