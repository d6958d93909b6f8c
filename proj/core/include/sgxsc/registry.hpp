#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace sgxsc::registry {

enum class PortStatus {
    Ported,
    DirectlyUsable,
    Inapplicable,
    Candidate,
};

std::string_view to_string(PortStatus status);
PortStatus port_status_from_string(std::string_view text);

struct PackageRecord {
    std::string name;
    std::string version;
    std::vector<std::string> deps;
    PortStatus status = PortStatus::Candidate;
    bool is_meta = false;
    std::string category;
    bool security_critical = false;
};

/// Immutable dependency graph over a registry snapshot. Construction
/// validates uniqueness, dependency resolution and acyclicity; after that
/// the graph is safe for concurrent reads.
class RegistryGraph {
public:
    static RegistryGraph from_records(std::vector<PackageRecord> records);
    static RegistryGraph from_json(const nlohmann::json& doc);
    static RegistryGraph load(const std::filesystem::path& file);

    bool contains(const std::string& name) const { return packages_.count(name) != 0; }
    const PackageRecord& at(const std::string& name) const;

    std::size_t size() const { return packages_.size(); }
    std::size_t edge_count() const { return edge_count_; }

    /// All package names in sorted order.
    std::vector<std::string> names() const;

    /// Dependencies-first order over the whole graph; existence is
    /// guaranteed by the acyclicity check at construction.
    std::vector<std::string> topological_order() const;

    const std::map<std::string, PackageRecord>& packages() const { return packages_; }

private:
    RegistryGraph() = default;

    std::map<std::string, PackageRecord> packages_;
    std::size_t edge_count_ = 0;
};

/// Transitive dependencies of `root` that actually require porting work:
/// the root itself, meta packages and directly-usable packages are
/// excluded from the result (traversal still passes through them).
std::set<std::string> port_closure(const RegistryGraph& graph, const std::string& root);

/// Closure-size histogram with fixed buckets 0,1,2,3,4,5,6-10,11-20,>=21.
struct ClosureHistogram {
    static constexpr std::size_t kBucketCount = 9;

    std::array<std::size_t, kBucketCount> counts{};

    static std::string_view bucket_label(std::size_t bucket);
    static std::size_t bucket_for(std::size_t closure_size);

    std::size_t total() const;
    nlohmann::ordered_json to_json() const;
};

ClosureHistogram closure_histogram(const RegistryGraph& graph,
                                   const std::vector<std::string>& roots);

struct CoverageReport {
    std::size_t total = 0;
    std::size_t ported = 0;
    std::size_t directly_usable = 0;
    std::size_t inapplicable = 0;
    std::size_t not_ported = 0;
    double availability_rate = 0.0;

    nlohmann::ordered_json to_json() const;
};

/// Status breakdown of the first `top_n` entries of a popularity-ranked
/// name list. availability_rate = (ported + directly_usable) / top_n,
/// defined as 0 for an empty window.
CoverageReport coverage_report(const RegistryGraph& graph,
                               const std::vector<std::string>& ranked,
                               std::size_t top_n);

/// Category -> count over packages with status Ported.
std::map<std::string, std::size_t> category_tally(const RegistryGraph& graph);

struct ManifestEntry {
    std::string id;
    std::string manifest_text;
    bool has_description = false;
    bool has_docs = false;
    bool active_commits = false;
    bool is_educational = false;
};

std::vector<ManifestEntry> load_manifests(const std::filesystem::path& file);

/// Projects whose manifest text contains `keyword` and that pass the
/// screening pass (description, docs and active commits present; not an
/// educational project). Order of the input is preserved.
std::vector<std::string> find_dependents(const std::vector<ManifestEntry>& manifests,
                                         const std::string& keyword);

struct AdmissionCriteria {
    bool widely_demanded = false;
    bool high_quality = false;
    bool api_stable = false;
    bool irreplaceable_dependency = false;
};

struct AdmissionReport {
    int score = 0;          // number of criteria met, 0..4
    bool admitted_hint = false;

    nlohmann::ordered_json to_json() const;
};

/// Advisory only: scores the selection criteria and hints at admission
/// when at least two are met. Final admission stays a human call.
AdmissionReport admission_check(const AdmissionCriteria& candidate);

} // namespace sgxsc::registry
