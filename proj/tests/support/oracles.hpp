#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sgxsc/auditor.hpp"
#include "sgxsc/registry.hpp"
#include "sgxsc/repo.hpp"
#include "sgxsc/svn.hpp"

// Brute-force reference implementations. These deliberately take the
// dumbest correct route so they share as little structure as possible
// with the production code they check.
namespace testsupport::oracle {

// ---- registry ----

/// Naive iterate-until-stable expansion of the dependency set, filtering
/// meta and directly-usable packages from the final answer.
inline std::set<std::string> closure(const sgxsc::registry::RegistryGraph& graph,
                                     const std::string& root) {
    std::set<std::string> reached{root};
    bool grew = true;
    while (grew) {
        grew = false;
        for (const auto& name : std::set<std::string>(reached)) {
            for (const auto& dep : graph.at(name).deps) {
                if (reached.insert(dep).second) {
                    grew = true;
                }
            }
        }
    }
    std::set<std::string> out;
    for (const auto& name : reached) {
        if (name == root) continue;
        const auto& record = graph.at(name);
        if (record.is_meta || record.status == sgxsc::registry::PortStatus::DirectlyUsable) {
            continue;
        }
        out.insert(name);
    }
    return out;
}

// ---- repo merge ----

struct FileHunks {
    std::vector<sgxsc::repo::Hunk> upstream;
    std::vector<sgxsc::repo::Hunk> fork;
};

inline std::map<std::string, FileHunks> hunks_by_path(const sgxsc::repo::FileTree& base,
                                                      const sgxsc::repo::FileTree& upstream,
                                                      const sgxsc::repo::FileTree& fork) {
    std::map<std::string, FileHunks> out;
    for (auto& hunk : sgxsc::repo::diff(base, upstream)) {
        out[hunk.path].upstream.push_back(hunk);
    }
    for (auto& hunk : sgxsc::repo::diff(base, fork)) {
        out[hunk.path].fork.push_back(hunk);
    }
    return out;
}

inline bool edit_hunks_collide(const sgxsc::repo::Hunk& a, const sgxsc::repo::Hunk& b) {
    if (a.base_len == 0 && b.base_len == 0) {
        return a.base_start == b.base_start;
    }
    return a.base_start < b.base_start + b.base_len && b.base_start < a.base_start + a.base_len;
}

/// All-pairs conflict test over the two diffs, file kind by file kind.
inline bool predicts_conflict(const sgxsc::repo::FileTree& base,
                              const sgxsc::repo::FileTree& upstream,
                              const sgxsc::repo::FileTree& fork) {
    for (const auto& [path, hunks] : hunks_by_path(base, upstream, fork)) {
        for (const auto& up : hunks.upstream) {
            for (const auto& fk : hunks.fork) {
                if (up == fk) {
                    continue; // identical change collapses
                }
                using Kind = sgxsc::repo::Hunk::Kind;
                if (up.kind == Kind::Edit && fk.kind == Kind::Edit) {
                    if (edit_hunks_collide(up, fk)) {
                        return true;
                    }
                } else {
                    // AddFile/AddFile with different content, or a removal
                    // against any other change, is a whole-file conflict.
                    return true;
                }
            }
        }
    }
    return false;
}

/// Sequential application of both diffs: upstream hunks first, then fork
/// hunks with their positions shifted by the upstream edits before them.
/// Only meaningful when predicts_conflict() is false.
inline sgxsc::repo::FileTree sequential_merge(const sgxsc::repo::FileTree& base,
                                              const sgxsc::repo::FileTree& upstream,
                                              const sgxsc::repo::FileTree& fork) {
    sgxsc::repo::FileTree result = base;
    auto grouped = hunks_by_path(base, upstream, fork);
    for (const auto& [path, hunks] : grouped) {
        std::vector<sgxsc::repo::Hunk> fork_only;
        for (const auto& fk : hunks.fork) {
            if (std::find(hunks.upstream.begin(), hunks.upstream.end(), fk) ==
                hunks.upstream.end()) {
                fork_only.push_back(fk);
            }
        }
        result = sgxsc::repo::apply_hunks(result, hunks.upstream);
        std::vector<sgxsc::repo::Hunk> shifted;
        for (auto fk : fork_only) {
            if (fk.kind == sgxsc::repo::Hunk::Kind::Edit) {
                std::ptrdiff_t shift = 0;
                for (const auto& up : hunks.upstream) {
                    if (up.kind == sgxsc::repo::Hunk::Kind::Edit &&
                        up.base_start + up.base_len <= fk.base_start) {
                        shift += static_cast<std::ptrdiff_t>(up.lines.size()) -
                                 static_cast<std::ptrdiff_t>(up.base_len);
                    }
                }
                fk.base_start = static_cast<std::size_t>(
                    static_cast<std::ptrdiff_t>(fk.base_start) + shift);
            }
            shifted.push_back(std::move(fk));
        }
        // apply_hunks reads line content from its base argument, so feed it
        // the intermediate tree.
        result = sgxsc::repo::apply_hunks(result, shifted);
    }
    return result;
}

// ---- auditor ----

inline std::set<std::string> reachable(const sgxsc::auditor::CallGraph& graph,
                                       const std::string& start) {
    std::set<std::string> seen{start};
    std::vector<std::string> stack{start};
    while (!stack.empty()) {
        std::string current = stack.back();
        stack.pop_back();
        for (const auto& callee : graph.functions().at(current).calls) {
            if (seen.insert(callee).second) {
                stack.push_back(callee);
            }
        }
    }
    return seen;
}

inline std::map<std::string, std::size_t> bfs_distance(const sgxsc::auditor::CallGraph& graph,
                                                       const std::string& start) {
    std::map<std::string, std::size_t> dist{{start, 0}};
    std::vector<std::string> frontier{start};
    while (!frontier.empty()) {
        std::vector<std::string> next;
        for (const auto& node : frontier) {
            for (const auto& callee : graph.functions().at(node).calls) {
                if (!dist.count(callee)) {
                    dist[callee] = dist[node] + 1;
                    next.push_back(callee);
                }
            }
        }
        frontier = std::move(next);
    }
    return dist;
}

struct ExpectedWarning {
    std::string entrypoint;
    std::string sink;
    sgxsc::ResourceKind kind;

    auto operator<=>(const ExpectedWarning&) const = default;
};

inline std::set<ExpectedWarning> expected_warnings(const sgxsc::auditor::CallGraph& graph) {
    std::set<ExpectedWarning> expected;
    for (const auto& [entry, facts] : graph.functions()) {
        if (!facts.is_entrypoint) continue;
        for (const auto& sink : reachable(graph, entry)) {
            for (const auto& resource : graph.functions().at(sink).resources) {
                expected.insert({entry, sink, resource.kind});
            }
        }
    }
    return expected;
}

// ---- svn ----

/// Exhaustive search over assignments with svn values in [0, n): does any
/// sound linear assignment exist for the live builds?
inline bool sound_assignment_exists(const std::vector<sgxsc::svn::BuildPoint>& live) {
    std::map<std::string, std::vector<sgxsc::svn::BuildPoint>> by_library;
    for (const auto& build : live) {
        by_library[build.library].push_back(build);
    }
    for (const auto& [library, builds] : by_library) {
        const std::size_t n = builds.size();
        if (n <= 1) continue;
        std::size_t combos = 1;
        for (std::size_t i = 0; i < n; ++i) combos *= n;
        bool found = false;
        for (std::size_t code = 0; code < combos && !found; ++code) {
            std::vector<std::uint32_t> svn(n);
            std::size_t rest = code;
            for (std::size_t i = 0; i < n; ++i) {
                svn[i] = static_cast<std::uint32_t>(rest % n);
                rest /= n;
            }
            bool sound = true;
            for (std::size_t i = 0; i < n && sound; ++i) {
                for (std::size_t j = 0; j < n && sound; ++j) {
                    bool svn_leq = svn[i] <= svn[j];
                    bool order_leq = sgxsc::svn::SecurityOrder::leq(builds[i], builds[j]);
                    if (svn_leq != order_leq) {
                        sound = false;
                    }
                }
            }
            found = sound;
        }
        if (!found) {
            return false;
        }
    }
    return true;
}

} // namespace testsupport::oracle
