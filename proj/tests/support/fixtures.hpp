#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "sgxsc/registry.hpp"
#include "sgxsc/svn.hpp"

// Desk-scale fixtures mirroring eighteen months of operating data from
// the production supply chain this toolkit models.
namespace testsupport::fixture {

struct CategoryCount {
    const char* category;
    std::size_t count;
};

/// 22 functionality categories over the 159 maintained libraries.
inline const std::vector<CategoryCount>& category_counts() {
    static const std::vector<CategoryCount> counts = {
        {"String Manipulation", 7},
        {"Data Structure and Algorithm", 6},
        {"Parsing", 3},
        {"Binary Data Processing", 10},
        {"Time and Date", 2},
        {"Compression", 5},
        {"Logging", 2},
        {"Serialization", 11},
        {"Randomness", 3},
        {"Non-Cryptographic Hash", 20},
        {"Image Processing", 5},
        {"Crypto", 42},
        {"Network", 7},
        {"Safe Integer Processing", 8},
        {"I/O", 2},
        {"Scientific Computation", 2},
        {"WebAssembly", 3},
        {"Machine Learning", 1},
        {"Blockchain Utils", 8},
        {"Threading", 2},
        {"Database", 2},
        {"Miscellaneous", 8},
    };
    return counts;
}

/// Dependency-closure sizes of the 159 libraries, bucketed.
struct ClosureBucket {
    std::size_t sample_size; // representative closure size for the bucket
    std::size_t libraries;
};

inline const std::vector<ClosureBucket>& closure_buckets() {
    static const std::vector<ClosureBucket> buckets = {
        {0, 45}, {1, 16}, {2, 19}, {3, 19}, {4, 13}, {5, 21}, {8, 12}, {15, 12}, {23, 2},
    };
    return buckets;
}

/// Security-critical libraries whose merges always need a human.
inline const std::vector<std::string>& mandatory_review_libraries() {
    static const std::vector<std::string> libraries = {
        "rustls", "webpki", "ring", "cryptocorrosion", "wasmi",
    };
    return libraries;
}

struct Registry159 {
    sgxsc::registry::RegistryGraph graph;
    std::vector<std::string> roots; // the 159 maintained libraries
};

/// 159 ported roots with closure sizes matching closure_buckets() and
/// categories matching category_counts(). Each root also pulls in one
/// shared meta helper, which closures must ignore. Closure fillers are
/// dedicated candidate chains.
inline Registry159 make_registry_159() {
    using sgxsc::registry::PackageRecord;
    using sgxsc::registry::PortStatus;

    std::vector<PackageRecord> records;
    std::vector<std::string> roots;

    PackageRecord meta;
    meta.name = "syntax-sugar-kit";
    meta.version = "1.0.0";
    meta.status = PortStatus::DirectlyUsable;
    meta.is_meta = true;
    meta.category = "Miscellaneous";
    records.push_back(meta);

    // Category labels are handed out across the 159 roots in order.
    std::vector<std::string> category_sequence;
    for (const auto& [category, count] : category_counts()) {
        for (std::size_t i = 0; i < count; ++i) {
            category_sequence.emplace_back(category);
        }
    }

    std::size_t root_index = 0;
    for (const auto& bucket : closure_buckets()) {
        for (std::size_t i = 0; i < bucket.libraries; ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "lib%03zu", root_index + 1);
            PackageRecord root;
            root.name = name;
            root.version = "0.9.1";
            root.status = PortStatus::Ported;
            root.category = category_sequence.at(root_index);
            root.deps.push_back("syntax-sugar-kit");

            std::string previous;
            for (std::size_t d = 1; d <= bucket.sample_size; ++d) {
                char dep_name[48];
                std::snprintf(dep_name, sizeof(dep_name), "%s-dep%02zu", name, d);
                PackageRecord dep;
                dep.name = dep_name;
                dep.version = "0.1.0";
                dep.status = PortStatus::Candidate;
                dep.category = "Miscellaneous";
                if (!previous.empty()) {
                    // Chain, so the closure is exactly bucket.sample_size.
                    records.back().deps.push_back(dep_name);
                } else {
                    root.deps.push_back(dep_name);
                }
                previous = dep_name;
                records.push_back(std::move(dep));
            }
            roots.emplace_back(root.name);
            records.push_back(std::move(root));
            ++root_index;
        }
    }

    return {sgxsc::registry::RegistryGraph::from_records(std::move(records)),
            std::move(roots)};
}

struct RankedRegistry {
    sgxsc::registry::RegistryGraph graph;
    std::vector<std::string> ranked; // 100 names, most popular first
};

/// Popularity-ranked fixture: the top 20 hold 18 covered + 2 inapplicable
/// packages (90% availability), the full top 100 hold 60 covered, 31
/// inapplicable and 9 not ported yet.
inline RankedRegistry make_ranked_registry() {
    using sgxsc::registry::PackageRecord;
    using sgxsc::registry::PortStatus;

    auto status_at = [](std::size_t rank) {
        if (rank < 20) {
            if (rank == 7 || rank == 15) return PortStatus::Inapplicable;
            return rank % 3 == 0 ? PortStatus::DirectlyUsable : PortStatus::Ported;
        }
        // Ranks 20..99: 42 covered, 29 inapplicable, 9 candidates.
        std::size_t offset = rank - 20;
        if (offset < 42) {
            return offset % 4 == 0 ? PortStatus::DirectlyUsable : PortStatus::Ported;
        }
        if (offset < 42 + 29) return PortStatus::Inapplicable;
        return PortStatus::Candidate;
    };

    std::vector<PackageRecord> records;
    std::vector<std::string> ranked;
    for (std::size_t rank = 0; rank < 100; ++rank) {
        char name[32];
        std::snprintf(name, sizeof(name), "popular%03zu", rank + 1);
        PackageRecord record;
        record.name = name;
        record.version = "1.0.0";
        record.status = status_at(rank);
        record.category = "Miscellaneous";
        ranked.emplace_back(record.name);
        records.push_back(std::move(record));
    }
    return {sgxsc::registry::RegistryGraph::from_records(std::move(records)),
            std::move(ranked)};
}

struct WeeklyActivity {
    std::size_t total;
    std::size_t failed;
};

/// 47 weeks of auto-merge and CI attempt counts (total, failed).
inline const std::vector<WeeklyActivity>& weekly_activity() {
    static const std::vector<WeeklyActivity> weeks = {
        {72, 36},   {19, 4},    {15, 1},    {18, 1},   {20, 7},   {18, 4},   {14, 0},
        {18, 2},    {21, 6},    {21, 8},    {23, 8},   {21, 7},   {21, 8},   {21, 9},
        {21, 7},    {23, 12},   {68, 43},   {63, 35},  {24, 12},  {24, 9},   {78, 42},
        {51, 10},   {32, 11},   {32, 8},    {35, 14},  {49, 18},  {154, 41}, {542, 151},
        {302, 47},  {429, 120}, {631, 159}, {1001, 249}, {912, 230}, {470, 48}, {526, 91},
        {523, 67},  {498, 20},  {498, 12},  {569, 84}, {571, 154}, {534, 11}, {522, 11},
        {581, 80},  {800, 192}, {835, 109}, {723, 134}, {504, 69},
    };
    return weeks;
}

/// The SDK/library double-update that breaks linear SVN assignment: two
/// releases followed by an SDK bump, with no version retired.
inline std::vector<sgxsc::svn::VersionEvent> svn_branching_scenario() {
    using Event = sgxsc::svn::VersionEvent;
    Event release1{Event::Type::LibRelease, "lib", false, 0};
    Event release2{Event::Type::LibRelease, "lib", true, 0};
    Event bump{Event::Type::SdkBump, "", false, 0};
    return {release1, release2, bump};
}

} // namespace testsupport::fixture
