#include "sgxsc/planner.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>

#include "sgxsc/error.hpp"

namespace sgxsc::planner {

std::string_view to_string(RemediationKind kind) {
    switch (kind) {
    case RemediationKind::OCallWrapper: return "ocall_wrapper";
    case RemediationKind::TrustedSubstitute: return "trusted_substitute";
    case RemediationKind::Prune: return "prune";
    }
    return "prune";
}

PlanRequest PlanRequest::from_json(const nlohmann::json& doc) {
    PlanRequest request;
    try {
        for (const auto& entry : doc.value("usages", nlohmann::json::array())) {
            ResourceUsage usage;
            usage.function = entry.at("function").get<std::string>();
            usage.kind = resource_kind_from_string(entry.at("kind").get<std::string>());
            usage.security_sensitive = entry.value("security_sensitive", false);
            request.usages.push_back(std::move(usage));
        }
        for (const auto& entry : doc.value("tests", nlohmann::json::array())) {
            request.tests.push_back(
                {entry.at("name").get<std::string>(), entry.value("depends_on_pruned", false)});
        }
        for (const auto& entry : doc.value("features", nlohmann::json::array())) {
            request.features.push_back(
                {entry.at("flag").get<std::string>(), entry.value("sgx_relevant", false)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("plan request: ") + e.what());
    }
    return request;
}

PlanRequest PlanRequest::load(const std::filesystem::path& file) {
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

nlohmann::ordered_json PortPlan::to_json() const {
    nlohmann::ordered_json out;
    out["order"] = order;
    auto actions = nlohmann::ordered_json::array();
    for (const auto& remediation : remediations) {
        nlohmann::ordered_json entry;
        entry["function"] = remediation.usage.function;
        entry["kind"] = std::string(sgxsc::to_string(remediation.usage.kind));
        entry["security_sensitive"] = remediation.usage.security_sensitive;
        entry["action"] = std::string(to_string(remediation.action));
        if (remediation.action == RemediationKind::TrustedSubstitute) {
            entry["substitute"] = remediation.substitute;
        }
        actions.push_back(std::move(entry));
    }
    out["remediations"] = std::move(actions);
    out["thread_removals"] = thread_removals;
    nlohmann::ordered_json tests;
    tests["pruned_tests"] = pruned_tests;
    tests["consolidated_entrypoint"] = consolidated_entrypoint;
    out["test_actions"] = std::move(tests);
    out["feature_prunes"] = feature_prunes;
    return out;
}

PortOrderResult port_order(const registry::RegistryGraph& graph, const std::string& root) {
    std::set<std::string> closure = registry::port_closure(graph, root);
    for (const auto& name : closure) {
        if (graph.at(name).status == registry::PortStatus::Inapplicable) {
            return {.order = {}, .blocker = name};
        }
    }

    std::set<std::string> members(closure);
    members.insert(root);

    // A member depends on every member reachable from it, including paths
    // that pass through excluded meta / directly-usable packages.
    std::map<std::string, std::set<std::string>> depends_on;
    for (const auto& member : members) {
        std::set<std::string> visited;
        std::vector<std::string> frontier{member};
        while (!frontier.empty()) {
            std::string current = frontier.back();
            frontier.pop_back();
            for (const auto& dep : graph.at(current).deps) {
                if (visited.insert(dep).second) {
                    frontier.push_back(dep);
                }
            }
        }
        for (const auto& name : visited) {
            if (name != member && members.count(name)) {
                depends_on[member].insert(name);
            }
        }
    }

    std::map<std::string, std::size_t> pending;
    std::map<std::string, std::vector<std::string>> dependents;
    for (const auto& member : members) {
        pending[member] = depends_on[member].size();
        for (const auto& dep : depends_on[member]) {
            dependents[dep].push_back(member);
        }
    }
    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [name, count] : pending) {
        if (count == 0) {
            ready.push(name);
        }
    }
    PortOrderResult result;
    while (!ready.empty()) {
        std::string name = ready.top();
        ready.pop();
        result.order.push_back(name);
        for (const auto& dependent : dependents[name]) {
            if (--pending[dependent] == 0) {
                ready.push(dependent);
            }
        }
    }
    return result;
}

std::vector<RemediationAction> plan_remediations(const std::vector<ResourceUsage>& usages) {
    std::vector<RemediationAction> actions;
    actions.reserve(usages.size());
    for (const auto& usage : usages) {
        RemediationAction action{.usage = usage};
        if (usage.kind == ResourceKind::ThreadSpawn) {
            // Threading is removed wholesale by the dedicated pass.
            action.action = RemediationKind::Prune;
        } else if (!usage.security_sensitive) {
            action.action = RemediationKind::OCallWrapper;
        } else {
            switch (usage.kind) {
            case ResourceKind::FileIO:
                action.action = RemediationKind::TrustedSubstitute;
                action.substitute = "protected-fs";
                break;
            case ResourceKind::Randomness:
                action.action = RemediationKind::TrustedSubstitute;
                action.substitute = "hw-rng";
                break;
            case ResourceKind::Time:
                action.action = RemediationKind::TrustedSubstitute;
                action.substitute = "trusted-time";
                break;
            default:
                action.action = RemediationKind::Prune;
                break;
            }
        }
        actions.push_back(std::move(action));
    }
    return actions;
}

BuildPlanResult build_plan(const registry::RegistryGraph& graph, const std::string& root,
                           const PlanRequest& request) {
    PortOrderResult order = port_order(graph, root);
    if (order.aborted()) {
        return {.plan = std::nullopt, .blocker = order.blocker};
    }
    PortPlan plan;
    plan.order = std::move(order.order);
    plan.remediations = plan_remediations(request.usages);

    std::set<std::string> spawners;
    for (const auto& usage : request.usages) {
        if (usage.kind == ResourceKind::ThreadSpawn) {
            spawners.insert(usage.function);
        }
    }
    plan.thread_removals.assign(spawners.begin(), spawners.end());

    for (const auto& test : request.tests) {
        if (test.depends_on_pruned) {
            plan.pruned_tests.push_back(test.name);
        }
    }
    plan.consolidated_entrypoint = "ecall_run_all_tests";

    for (const auto& feature : request.features) {
        if (!feature.sgx_relevant) {
            plan.feature_prunes.push_back(feature.flag);
        }
    }
    return {.plan = std::move(plan), .blocker = std::nullopt};
}

} // namespace sgxsc::planner
