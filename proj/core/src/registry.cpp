#include "sgxsc/registry.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include "sgxsc/error.hpp"

namespace sgxsc::registry {

namespace {

nlohmann::json parse_json_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error(Errc::io_failure, "cannot open " + file.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, file.string() + ": " + e.what());
    }
}

} // namespace

std::string_view to_string(PortStatus status) {
    switch (status) {
    case PortStatus::Ported: return "ported";
    case PortStatus::DirectlyUsable: return "directly_usable";
    case PortStatus::Inapplicable: return "inapplicable";
    case PortStatus::Candidate: return "candidate";
    }
    return "candidate";
}

PortStatus port_status_from_string(std::string_view text) {
    if (text == "ported") return PortStatus::Ported;
    if (text == "directly_usable") return PortStatus::DirectlyUsable;
    if (text == "inapplicable") return PortStatus::Inapplicable;
    if (text == "candidate") return PortStatus::Candidate;
    throw Error(Errc::parse_error, "unknown status: " + std::string(text));
}

RegistryGraph RegistryGraph::from_records(std::vector<PackageRecord> records) {
    RegistryGraph graph;
    for (auto& record : records) {
        if (record.name.empty()) {
            throw Error(Errc::invalid_argument, "package name must be nonempty");
        }
        if (record.is_meta && record.status != PortStatus::DirectlyUsable) {
            throw Error(Errc::invalid_argument,
                        "meta package must be directly usable: " + record.name);
        }
        auto name = record.name;
        if (!graph.packages_.emplace(name, std::move(record)).second) {
            throw Error(Errc::duplicate_name, "duplicate package: " + name, {name});
        }
    }
    for (const auto& [name, record] : graph.packages_) {
        for (const auto& dep : record.deps) {
            if (!graph.packages_.count(dep)) {
                throw Error(Errc::unresolved_dependency,
                            "package " + name + " depends on unknown " + dep, {dep});
            }
            ++graph.edge_count_;
        }
    }

    // Cycle check: iterative DFS with colors, reporting the offending path.
    std::map<std::string, int> color; // 0 white, 1 on stack, 2 done
    std::vector<std::string> stack;
    for (const auto& [start, unused] : graph.packages_) {
        if (color[start] != 0) {
            continue;
        }
        struct Frame {
            std::string name;
            std::size_t next = 0;
        };
        std::vector<Frame> frames{{start}};
        color[start] = 1;
        stack.push_back(start);
        while (!frames.empty()) {
            Frame& frame = frames.back();
            const auto& deps = graph.packages_.at(frame.name).deps;
            if (frame.next >= deps.size()) {
                color[frame.name] = 2;
                stack.pop_back();
                frames.pop_back();
                continue;
            }
            const std::string& dep = deps[frame.next++];
            if (color[dep] == 1) {
                auto it = std::find(stack.begin(), stack.end(), dep);
                std::vector<std::string> cycle(it, stack.end());
                cycle.push_back(dep);
                std::string text;
                for (const auto& node : cycle) {
                    if (!text.empty()) text += " -> ";
                    text += node;
                }
                throw Error(Errc::cycle_detected, "dependency cycle: " + text, cycle);
            }
            if (color[dep] == 0) {
                color[dep] = 1;
                stack.push_back(dep);
                frames.push_back({dep});
            }
        }
    }
    return graph;
}

RegistryGraph RegistryGraph::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("packages") || !doc["packages"].is_array()) {
        throw Error(Errc::parse_error, "snapshot must be an object with a \"packages\" array");
    }
    std::vector<PackageRecord> records;
    for (const auto& entry : doc["packages"]) {
        PackageRecord record;
        if (!entry.contains("name") || !entry["name"].is_string()) {
            throw Error(Errc::parse_error, "package entry missing \"name\"");
        }
        record.name = entry["name"].get<std::string>();
        if (!entry.contains("status") || !entry["status"].is_string()) {
            throw Error(Errc::parse_error, "package " + record.name + " missing \"status\"");
        }
        record.status = port_status_from_string(entry["status"].get<std::string>());
        record.version = entry.value("version", std::string{});
        record.is_meta = entry.value("is_meta", false);
        record.category = entry.value("category", std::string{});
        record.security_critical = entry.value("security_critical", false);
        if (entry.contains("deps")) {
            if (!entry["deps"].is_array()) {
                throw Error(Errc::parse_error, "package " + record.name + ": \"deps\" must be an array");
            }
            for (const auto& dep : entry["deps"]) {
                record.deps.push_back(dep.get<std::string>());
            }
        }
        records.push_back(std::move(record));
    }
    return from_records(std::move(records));
}

RegistryGraph RegistryGraph::load(const std::filesystem::path& file) {
    return from_json(parse_json_file(file));
}

const PackageRecord& RegistryGraph::at(const std::string& name) const {
    auto it = packages_.find(name);
    if (it == packages_.end()) {
        throw Error(Errc::unknown_package, "unknown package: " + name, {name});
    }
    return it->second;
}

std::vector<std::string> RegistryGraph::names() const {
    std::vector<std::string> out;
    out.reserve(packages_.size());
    for (const auto& [name, unused] : packages_) {
        out.push_back(name);
    }
    return out;
}

std::vector<std::string> RegistryGraph::topological_order() const {
    // Kahn over remaining-dependency counts with a name-ordered frontier:
    // dependencies always precede their dependents.
    std::map<std::string, std::size_t> pending;
    std::map<std::string, std::vector<std::string>> dependents;
    for (const auto& [name, record] : packages_) {
        pending[name] = record.deps.size();
        for (const auto& dep : record.deps) {
            dependents[dep].push_back(name);
        }
    }
    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [name, count] : pending) {
        if (count == 0) {
            ready.push(name);
        }
    }
    std::vector<std::string> order;
    order.reserve(packages_.size());
    while (!ready.empty()) {
        std::string name = ready.top();
        ready.pop();
        order.push_back(name);
        for (const auto& dependent : dependents[name]) {
            if (--pending[dependent] == 0) {
                ready.push(dependent);
            }
        }
    }
    return order;
}

std::set<std::string> port_closure(const RegistryGraph& graph, const std::string& root) {
    const PackageRecord& start = graph.at(root);
    std::set<std::string> visited{root};
    std::vector<const PackageRecord*> frontier{&start};
    while (!frontier.empty()) {
        const PackageRecord* record = frontier.back();
        frontier.pop_back();
        for (const auto& dep : record->deps) {
            if (visited.insert(dep).second) {
                frontier.push_back(&graph.at(dep));
            }
        }
    }
    std::set<std::string> closure;
    for (const auto& name : visited) {
        if (name == root) {
            continue;
        }
        const PackageRecord& record = graph.at(name);
        if (record.is_meta || record.status == PortStatus::DirectlyUsable) {
            continue;
        }
        closure.insert(name);
    }
    return closure;
}

std::string_view ClosureHistogram::bucket_label(std::size_t bucket) {
    static constexpr std::string_view kLabels[kBucketCount] = {
        "0", "1", "2", "3", "4", "5", "6-10", "11-20", ">=21",
    };
    return kLabels[bucket];
}

std::size_t ClosureHistogram::bucket_for(std::size_t closure_size) {
    if (closure_size <= 5) return closure_size;
    if (closure_size <= 10) return 6;
    if (closure_size <= 20) return 7;
    return 8;
}

std::size_t ClosureHistogram::total() const {
    std::size_t sum = 0;
    for (std::size_t count : counts) {
        sum += count;
    }
    return sum;
}

nlohmann::ordered_json ClosureHistogram::to_json() const {
    nlohmann::ordered_json buckets;
    for (std::size_t i = 0; i < kBucketCount; ++i) {
        buckets[std::string(bucket_label(i))] = counts[i];
    }
    nlohmann::ordered_json out;
    out["buckets"] = std::move(buckets);
    out["total"] = total();
    return out;
}

ClosureHistogram closure_histogram(const RegistryGraph& graph,
                                   const std::vector<std::string>& roots) {
    ClosureHistogram histogram;
    for (const auto& root : roots) {
        std::size_t size = port_closure(graph, root).size();
        ++histogram.counts[ClosureHistogram::bucket_for(size)];
    }
    return histogram;
}

nlohmann::ordered_json CoverageReport::to_json() const {
    nlohmann::ordered_json out;
    out["total"] = total;
    out["ported"] = ported;
    out["directly_usable"] = directly_usable;
    out["inapplicable"] = inapplicable;
    out["not_ported"] = not_ported;
    out["availability_rate"] = availability_rate;
    return out;
}

CoverageReport coverage_report(const RegistryGraph& graph,
                               const std::vector<std::string>& ranked, std::size_t top_n) {
    if (top_n > ranked.size()) {
        throw Error(Errc::top_n_out_of_range,
                    "top_n " + std::to_string(top_n) + " exceeds ranked list size " +
                        std::to_string(ranked.size()));
    }
    for (const auto& name : ranked) {
        (void)graph.at(name);
    }
    CoverageReport report;
    report.total = top_n;
    for (std::size_t i = 0; i < top_n; ++i) {
        switch (graph.at(ranked[i]).status) {
        case PortStatus::Ported: ++report.ported; break;
        case PortStatus::DirectlyUsable: ++report.directly_usable; break;
        case PortStatus::Inapplicable: ++report.inapplicable; break;
        case PortStatus::Candidate: ++report.not_ported; break;
        }
    }
    report.availability_rate =
        top_n == 0 ? 0.0
                   : static_cast<double>(report.ported + report.directly_usable) /
                         static_cast<double>(top_n);
    return report;
}

std::map<std::string, std::size_t> category_tally(const RegistryGraph& graph) {
    std::map<std::string, std::size_t> tally;
    for (const auto& [name, record] : graph.packages()) {
        if (record.status == PortStatus::Ported) {
            ++tally[record.category];
        }
    }
    return tally;
}

std::vector<ManifestEntry> load_manifests(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error(Errc::io_failure, "cannot open " + file.string());
    }
    std::vector<ManifestEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::parse_error,
                        file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        ManifestEntry entry;
        if (!doc.contains("id") || !doc["id"].is_string()) {
            throw Error(Errc::parse_error,
                        file.string() + ":" + std::to_string(line_no) + ": missing \"id\"");
        }
        entry.id = doc["id"].get<std::string>();
        entry.manifest_text = doc.value("manifest_text", std::string{});
        entry.has_description = doc.value("has_description", false);
        entry.has_docs = doc.value("has_docs", false);
        entry.active_commits = doc.value("active_commits", false);
        entry.is_educational = doc.value("is_educational", false);
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<std::string> find_dependents(const std::vector<ManifestEntry>& manifests,
                                         const std::string& keyword) {
    if (keyword.empty()) {
        throw Error(Errc::invalid_argument, "keyword must be nonempty");
    }
    std::vector<std::string> out;
    for (const auto& entry : manifests) {
        if (entry.manifest_text.find(keyword) == std::string::npos) {
            continue;
        }
        if (!entry.has_description || !entry.has_docs || !entry.active_commits ||
            entry.is_educational) {
            continue;
        }
        out.push_back(entry.id);
    }
    return out;
}

nlohmann::ordered_json AdmissionReport::to_json() const {
    nlohmann::ordered_json out;
    out["score"] = score;
    out["admitted_hint"] = admitted_hint;
    return out;
}

AdmissionReport admission_check(const AdmissionCriteria& candidate) {
    AdmissionReport report;
    report.score = static_cast<int>(candidate.widely_demanded) +
                   static_cast<int>(candidate.high_quality) +
                   static_cast<int>(candidate.api_stable) +
                   static_cast<int>(candidate.irreplaceable_dependency);
    report.admitted_hint = report.score >= 2;
    return report;
}

} // namespace sgxsc::registry
