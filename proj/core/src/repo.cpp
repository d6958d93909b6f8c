#include "sgxsc/repo.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>

#include "sgxsc/error.hpp"

namespace sgxsc::repo {

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

void write_json_file(const std::filesystem::path& file, const nlohmann::json& doc) {
    std::ofstream out(file, std::ios::trunc);
    if (!out) {
        throw Error(Errc::io_failure, "cannot write " + file.string());
    }
    out << doc.dump(2) << '\n';
}

std::uint64_t fnv1a(std::uint64_t hash, const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= bytes[i];
        hash *= 1099511628211ULL;
    }
    return hash;
}

} // namespace

std::string FileTree::normalize_path(const std::string& path) {
    std::string out;
    out.reserve(path.size());
    bool last_sep = true; // strips a leading '/'
    for (char c : path) {
        if (c == '/') {
            if (!last_sep) {
                out.push_back('/');
            }
            last_sep = true;
        } else {
            out.push_back(c);
            last_sep = false;
        }
    }
    while (!out.empty() && out.back() == '/') {
        out.pop_back();
    }
    if (out.rfind("./", 0) == 0) {
        out.erase(0, 2);
    }
    if (out.empty()) {
        throw Error(Errc::invalid_argument, "empty file path");
    }
    return out;
}

void FileTree::set_file(const std::string& path, Lines lines) {
    files_[normalize_path(path)] = std::move(lines);
}

void FileTree::remove_file(const std::string& path) {
    files_.erase(normalize_path(path));
}

const FileTree::Lines* FileTree::find(const std::string& path) const {
    auto it = files_.find(normalize_path(path));
    return it == files_.end() ? nullptr : &it->second;
}

std::vector<std::string> FileTree::paths() const {
    std::vector<std::string> out;
    out.reserve(files_.size());
    for (const auto& [path, unused] : files_) {
        out.push_back(path);
    }
    return out;
}

nlohmann::json FileTree::to_json() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [path, lines] : files_) {
        out[path] = lines;
    }
    return out;
}

FileTree FileTree::from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) {
        throw Error(Errc::parse_error, "file tree must be an object of path -> lines");
    }
    FileTree tree;
    for (const auto& [path, lines] : doc.items()) {
        if (!lines.is_array()) {
            throw Error(Errc::parse_error, "file " + path + ": lines must be an array");
        }
        tree.set_file(path, lines.get<Lines>());
    }
    return tree;
}

namespace {

struct LineHunk {
    std::size_t start = 0; // 0-based index into the base lines
    std::size_t len = 0;
    std::vector<std::string> repl;

    friend bool operator==(const LineHunk&, const LineHunk&) = default;
};

// Grouped LCS diff: hunks are sorted, non-overlapping and separated by at
// least one unchanged line.
std::vector<LineHunk> diff_lines(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
    std::size_t prefix = 0;
    while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) {
        ++prefix;
    }
    std::size_t suffix = 0;
    while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
           a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
        ++suffix;
    }
    const std::size_t an = a.size() - prefix - suffix;
    const std::size_t bn = b.size() - prefix - suffix;
    if (an == 0 && bn == 0) {
        return {};
    }
    if (an * bn > 4'000'000) {
        // One coarse hunk for pathological inputs; still round-trips.
        return {{prefix, an, {b.begin() + static_cast<std::ptrdiff_t>(prefix),
                              b.end() - static_cast<std::ptrdiff_t>(suffix)}}};
    }

    // dp[i][j] = LCS length of a[prefix+i..], b[prefix+j..] within the middle.
    std::vector<std::vector<std::uint32_t>> dp(an + 1, std::vector<std::uint32_t>(bn + 1, 0));
    for (std::size_t i = an; i-- > 0;) {
        for (std::size_t j = bn; j-- > 0;) {
            if (a[prefix + i] == b[prefix + j]) {
                dp[i][j] = dp[i + 1][j + 1] + 1;
            } else {
                dp[i][j] = std::max(dp[i + 1][j], dp[i][j + 1]);
            }
        }
    }

    std::vector<LineHunk> hunks;
    std::size_t i = 0;
    std::size_t j = 0;
    bool open = false;
    LineHunk pending;
    auto flush = [&] {
        if (open) {
            hunks.push_back(std::move(pending));
            pending = {};
            open = false;
        }
    };
    auto touch = [&] {
        if (!open) {
            pending.start = prefix + i;
            pending.len = 0;
            open = true;
        }
    };
    while (i < an || j < bn) {
        if (i < an && j < bn && a[prefix + i] == b[prefix + j]) {
            flush();
            ++i;
            ++j;
        } else if (j >= bn || (i < an && dp[i + 1][j] >= dp[i][j + 1])) {
            touch();
            ++pending.len;
            ++i;
        } else {
            touch();
            pending.repl.push_back(b[prefix + j]);
            ++j;
        }
    }
    flush();
    return hunks;
}

std::vector<std::string> apply_line_hunks(const std::vector<std::string>& base,
                                          const std::vector<LineHunk>& hunks) {
    std::vector<std::string> out;
    std::size_t cursor = 0;
    for (const auto& hunk : hunks) {
        if (hunk.start < cursor || hunk.start + hunk.len > base.size()) {
            throw Error(Errc::invalid_argument, "hunk out of range");
        }
        out.insert(out.end(), base.begin() + static_cast<std::ptrdiff_t>(cursor),
                   base.begin() + static_cast<std::ptrdiff_t>(hunk.start));
        out.insert(out.end(), hunk.repl.begin(), hunk.repl.end());
        cursor = hunk.start + hunk.len;
    }
    out.insert(out.end(), base.begin() + static_cast<std::ptrdiff_t>(cursor), base.end());
    return out;
}

// Overlap semantics shared by merge and its test oracle: half-open ranges
// intersect; an insertion conflicts only strictly inside a replaced range
// or with another insertion at the same point.
bool line_hunks_collide(const LineHunk& x, const LineHunk& y) {
    if (x.len == 0 && y.len == 0) {
        return x.start == y.start;
    }
    return x.start < y.start + y.len && y.start < x.start + x.len;
}

} // namespace

std::vector<Hunk> diff(const FileTree& base, const FileTree& derived) {
    std::vector<Hunk> hunks;
    std::set<std::string> paths;
    for (const auto& path : base.paths()) paths.insert(path);
    for (const auto& path : derived.paths()) paths.insert(path);

    for (const auto& path : paths) {
        const auto* base_lines = base.find(path);
        const auto* derived_lines = derived.find(path);
        if (base_lines && !derived_lines) {
            hunks.push_back({Hunk::Kind::RemoveFile, path, 0, base_lines->size(), {}});
        } else if (!base_lines && derived_lines) {
            hunks.push_back({Hunk::Kind::AddFile, path, 0, 0, *derived_lines});
        } else if (base_lines && derived_lines) {
            for (auto& line_hunk : diff_lines(*base_lines, *derived_lines)) {
                hunks.push_back({Hunk::Kind::Edit, path, line_hunk.start, line_hunk.len,
                                 std::move(line_hunk.repl)});
            }
        }
    }
    return hunks;
}

FileTree apply_hunks(const FileTree& base, const std::vector<Hunk>& hunks) {
    FileTree out = base;
    std::map<std::string, std::vector<LineHunk>> edits;
    for (const auto& hunk : hunks) {
        switch (hunk.kind) {
        case Hunk::Kind::AddFile:
            out.set_file(hunk.path, hunk.lines);
            break;
        case Hunk::Kind::RemoveFile:
            out.remove_file(hunk.path);
            break;
        case Hunk::Kind::Edit:
            edits[hunk.path].push_back({hunk.base_start, hunk.base_len, hunk.lines});
            break;
        }
    }
    for (auto& [path, line_hunks] : edits) {
        const auto* lines = base.find(path);
        if (!lines) {
            throw Error(Errc::invalid_argument, "edit hunk for missing file " + path);
        }
        std::sort(line_hunks.begin(), line_hunks.end(),
                  [](const LineHunk& a, const LineHunk& b) { return a.start < b.start; });
        out.set_file(path, apply_line_hunks(*lines, line_hunks));
    }
    return out;
}

nlohmann::json Conflict::to_json() const {
    nlohmann::json out;
    out["path"] = path;
    out["first_line"] = first_line;
    out["last_line"] = last_line;
    out["upstream_lines"] = upstream_lines;
    out["fork_lines"] = fork_lines;
    return out;
}

Conflict Conflict::from_json(const nlohmann::json& doc) {
    Conflict conflict;
    try {
        conflict.path = doc.at("path").get<std::string>();
        conflict.first_line = doc.at("first_line").get<std::size_t>();
        conflict.last_line = doc.at("last_line").get<std::size_t>();
        conflict.upstream_lines = doc.at("upstream_lines").get<std::vector<std::string>>();
        conflict.fork_lines = doc.at("fork_lines").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("conflict record: ") + e.what());
    }
    return conflict;
}

namespace {

struct TaggedHunk {
    LineHunk hunk;
    bool from_fork = false;
    bool conflicted = false;
};

// diff3 on one file present in all three trees. Returns conflicts; fills
// `merged` only when there are none.
std::vector<Conflict> merge_file_lines(const std::string& path,
                                       const std::vector<std::string>& base,
                                       const std::vector<LineHunk>& upstream_hunks,
                                       const std::vector<LineHunk>& fork_hunks,
                                       std::vector<std::string>& merged) {
    std::vector<TaggedHunk> all;
    for (const auto& hunk : upstream_hunks) all.push_back({hunk, false, false});
    for (const auto& hunk : fork_hunks) all.push_back({hunk, true, false});

    bool any_conflict = false;
    for (auto& upstream : all) {
        if (upstream.from_fork) continue;
        for (auto& fork : all) {
            if (!fork.from_fork) continue;
            if (upstream.hunk == fork.hunk) continue; // identical change, collapses
            if (line_hunks_collide(upstream.hunk, fork.hunk)) {
                upstream.conflicted = fork.conflicted = true;
                any_conflict = true;
            }
        }
    }

    if (!any_conflict) {
        std::vector<LineHunk> combined;
        for (const auto& tagged : all) {
            if (tagged.from_fork &&
                std::find(upstream_hunks.begin(), upstream_hunks.end(), tagged.hunk) !=
                    upstream_hunks.end()) {
                continue; // identical on both sides, keep one copy
            }
            combined.push_back(tagged.hunk);
        }
        std::sort(combined.begin(), combined.end(), [](const LineHunk& a, const LineHunk& b) {
            if (a.start != b.start) return a.start < b.start;
            return a.len < b.len; // insertion sits before a replacement at the same point
        });
        merged = apply_line_hunks(base, combined);
        return {};
    }

    // Conflict regions: connected spans of colliding hunks, widened until
    // no hunk from either side straddles a region boundary.
    struct Region {
        std::size_t lo = 0;
        std::size_t hi = 0; // half-open over base lines
    };
    std::vector<Region> regions;
    for (const auto& tagged : all) {
        if (tagged.conflicted) {
            regions.push_back({tagged.hunk.start, tagged.hunk.start + tagged.hunk.len});
        }
    }
    auto absorbs = [](const Region& region, const LineHunk& hunk) {
        if (hunk.len == 0) {
            return region.lo < hunk.start && hunk.start < region.hi;
        }
        return hunk.start < region.hi && region.lo < hunk.start + hunk.len;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& region : regions) {
            for (const auto& tagged : all) {
                if (!absorbs(region, tagged.hunk)) continue;
                std::size_t lo = std::min(region.lo, tagged.hunk.start);
                std::size_t hi = std::max(region.hi, tagged.hunk.start + tagged.hunk.len);
                if (lo != region.lo || hi != region.hi) {
                    region = {lo, hi};
                    changed = true;
                }
            }
        }
        std::sort(regions.begin(), regions.end(), [](const Region& a, const Region& b) {
            if (a.lo != b.lo) return a.lo < b.lo;
            return a.hi < b.hi;
        });
        // Overlapping spans fuse; merely touching spans stay apart.
        std::vector<Region> fused;
        for (const auto& region : regions) {
            if (!fused.empty() && region.lo == fused.back().lo && region.hi == fused.back().hi) {
                continue;
            }
            if (!fused.empty() && region.lo < fused.back().hi) {
                if (region.hi > fused.back().hi) {
                    fused.back().hi = region.hi;
                    changed = true;
                }
                continue;
            }
            fused.push_back(region);
        }
        regions = std::move(fused);
    }

    // Geometric membership: the widening above guarantees every hunk is
    // either wholly inside a region or wholly outside all of them.
    auto belongs = [](const Region& region, const LineHunk& hunk) {
        if (hunk.len == 0) {
            return (region.lo == region.hi && hunk.start == region.lo) ||
                   (region.lo < hunk.start && hunk.start < region.hi);
        }
        return hunk.start >= region.lo && hunk.start + hunk.len <= region.hi;
    };

    auto region_content = [&](const Region& region, bool from_fork) {
        std::vector<std::string> content;
        std::size_t cursor = region.lo;
        for (const auto& tagged : all) {
            if (tagged.from_fork != from_fork || !belongs(region, tagged.hunk)) continue;
            const LineHunk& hunk = tagged.hunk;
            content.insert(content.end(), base.begin() + static_cast<std::ptrdiff_t>(cursor),
                           base.begin() + static_cast<std::ptrdiff_t>(hunk.start));
            content.insert(content.end(), hunk.repl.begin(), hunk.repl.end());
            cursor = hunk.start + hunk.len;
        }
        content.insert(content.end(), base.begin() + static_cast<std::ptrdiff_t>(cursor),
                       base.begin() + static_cast<std::ptrdiff_t>(region.hi));
        return content;
    };

    std::vector<Conflict> conflicts;
    for (const auto& region : regions) {
        Conflict conflict;
        conflict.path = path;
        conflict.first_line = region.lo + 1;
        conflict.last_line = region.hi; // hi == lo yields an insertion-point marker
        conflict.upstream_lines = region_content(region, false);
        conflict.fork_lines = region_content(region, true);
        conflicts.push_back(std::move(conflict));
    }
    return conflicts;
}

} // namespace

MergeOutcome three_way_merge(const FileTree& base, const FileTree& upstream,
                             const FileTree& fork) {
    std::set<std::string> paths;
    for (const auto& path : base.paths()) paths.insert(path);
    for (const auto& path : upstream.paths()) paths.insert(path);
    for (const auto& path : fork.paths()) paths.insert(path);

    MergeOutcome outcome;
    FileTree merged;
    for (const auto& path : paths) {
        const auto* b = base.find(path);
        const auto* u = upstream.find(path);
        const auto* f = fork.find(path);

        auto equal = [](const FileTree::Lines* x, const FileTree::Lines* y) {
            if (!x || !y) return x == y;
            return *x == *y;
        };

        if (equal(u, b)) {
            if (f) merged.set_file(path, *f);
            continue;
        }
        if (equal(f, b)) {
            if (u) merged.set_file(path, *u);
            continue;
        }
        if (equal(u, f)) {
            if (u) merged.set_file(path, *u);
            continue;
        }

        // Both sides changed the file in different ways.
        if (!b) {
            outcome.conflicts.push_back({path, 1, 0, u ? *u : FileTree::Lines{},
                                         f ? *f : FileTree::Lines{}});
            continue;
        }
        if (!u || !f) {
            // Deleted on one side, edited on the other.
            outcome.conflicts.push_back({path, 1, b->size(), u ? *u : FileTree::Lines{},
                                         f ? *f : FileTree::Lines{}});
            continue;
        }
        std::vector<std::string> merged_lines;
        auto file_conflicts =
            merge_file_lines(path, *b, diff_lines(*b, *u), diff_lines(*b, *f), merged_lines);
        if (file_conflicts.empty()) {
            merged.set_file(path, std::move(merged_lines));
        } else {
            outcome.conflicts.insert(outcome.conflicts.end(), file_conflicts.begin(),
                                     file_conflicts.end());
        }
    }
    if (outcome.conflicts.empty()) {
        outcome.merged = std::move(merged);
    }
    return outcome;
}

std::string commit_id(const std::string& parent, const std::string& merge_parent,
                      const FileTree& tree, const std::string& message,
                      std::int64_t timestamp) {
    nlohmann::json canonical;
    canonical["parent"] = parent;
    canonical["merge_parent"] = merge_parent;
    canonical["message"] = message;
    canonical["timestamp"] = timestamp;
    canonical["tree"] = tree.to_json();
    std::string body = canonical.dump();
    std::uint64_t hash = fnv1a(1469598103934665603ULL, body.data(), body.size());
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

nlohmann::json Escalation::to_json() const {
    nlohmann::json out;
    out["library"] = library;
    out["upstream_head"] = upstream_head;
    out["created_at"] = created_at;
    auto list = nlohmann::json::array();
    for (const auto& conflict : conflicts) {
        list.push_back(conflict.to_json());
    }
    out["conflicts"] = std::move(list);
    return out;
}

Escalation Escalation::from_json(const nlohmann::json& doc) {
    Escalation escalation;
    try {
        escalation.library = doc.at("library").get<std::string>();
        escalation.upstream_head = doc.at("upstream_head").get<std::string>();
        escalation.created_at = doc.at("created_at").get<std::int64_t>();
        for (const auto& entry : doc.at("conflicts")) {
            escalation.conflicts.push_back(Conflict::from_json(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("escalation record: ") + e.what());
    }
    return escalation;
}

RepoState RepoState::init(FileTree base, const std::string& message, std::int64_t timestamp) {
    RepoState repo;
    Commit commit;
    commit.parent.clear();
    commit.message = message;
    commit.timestamp = timestamp;
    commit.tree = std::move(base);
    commit.id = commit_id(commit.parent, commit.merge_parent, commit.tree, commit.message,
                          commit.timestamp);
    repo.upstream_head_ = repo.fork_head_ = repo.merge_base_ = commit.id;
    repo.commits_.emplace(commit.id, std::move(commit));
    return repo;
}

const Commit& RepoState::commit(const std::string& id) const {
    auto it = commits_.find(id);
    if (it == commits_.end()) {
        throw Error(Errc::corrupt_repo, "unknown commit: " + id);
    }
    return it->second;
}

std::string RepoState::commit_upstream(FileTree tree, const std::string& message,
                                       std::int64_t timestamp) {
    Commit commit;
    commit.parent = upstream_head_;
    commit.message = message;
    commit.timestamp = timestamp;
    commit.tree = std::move(tree);
    commit.id = commit_id(commit.parent, commit.merge_parent, commit.tree, commit.message,
                          commit.timestamp);
    upstream_head_ = commit.id;
    commits_.emplace(commit.id, std::move(commit));
    return upstream_head_;
}

std::string RepoState::commit_fork(FileTree tree, const std::string& message,
                                   std::int64_t timestamp) {
    Commit commit;
    commit.parent = fork_head_;
    commit.message = message;
    commit.timestamp = timestamp;
    commit.tree = std::move(tree);
    commit.id = commit_id(commit.parent, commit.merge_parent, commit.tree, commit.message,
                          commit.timestamp);
    fork_head_ = commit.id;
    commits_.emplace(commit.id, std::move(commit));
    return fork_head_;
}

std::string RepoState::commit_fork_merge(FileTree tree, const std::string& message,
                                         std::int64_t timestamp,
                                         const std::string& merged_head) {
    Commit commit;
    commit.parent = fork_head_;
    commit.merge_parent = merged_head;
    commit.message = message;
    commit.timestamp = timestamp;
    commit.tree = std::move(tree);
    commit.id = commit_id(commit.parent, commit.merge_parent, commit.tree, commit.message,
                          commit.timestamp);
    fork_head_ = commit.id;
    commits_.emplace(commit.id, std::move(commit));
    return fork_head_;
}

bool RepoState::is_ancestor(const std::string& ancestor, const std::string& descendant) const {
    std::set<std::string> seen;
    std::vector<std::string> frontier{descendant};
    while (!frontier.empty()) {
        std::string current = std::move(frontier.back());
        frontier.pop_back();
        if (current.empty() || !seen.insert(current).second) {
            continue;
        }
        if (current == ancestor) {
            return true;
        }
        auto it = commits_.find(current);
        if (it == commits_.end()) {
            throw Error(Errc::corrupt_repo, "unknown commit in parent chain: " + current);
        }
        frontier.push_back(it->second.parent);
        frontier.push_back(it->second.merge_parent);
    }
    return false;
}

void RepoState::validate() const {
    for (const auto& [id, commit] : commits_) {
        if (commit.id != id || commit_id(commit.parent, commit.merge_parent, commit.tree,
                                         commit.message, commit.timestamp) != id) {
            throw Error(Errc::corrupt_repo, "commit id does not match content: " + id);
        }
        if (!commit.parent.empty() && !commits_.count(commit.parent)) {
            throw Error(Errc::corrupt_repo, "commit " + id + " has unknown parent");
        }
        if (!commit.merge_parent.empty() && !commits_.count(commit.merge_parent)) {
            throw Error(Errc::corrupt_repo, "commit " + id + " has unknown merge parent");
        }
    }
    if (!commits_.count(upstream_head_) || !commits_.count(fork_head_) ||
        !commits_.count(merge_base_)) {
        throw Error(Errc::corrupt_repo, "repository heads do not resolve");
    }
    if (!is_ancestor(merge_base_, upstream_head_) || !is_ancestor(merge_base_, fork_head_)) {
        throw Error(Errc::corrupt_repo, "merge base is not an ancestor of both heads");
    }
}

void RepoState::save(const std::filesystem::path& dir) const {
    std::error_code ec;
    std::filesystem::create_directories(dir / "commits", ec);
    if (ec) {
        throw Error(Errc::io_failure, "cannot create " + (dir / "commits").string());
    }
    for (const auto& [id, commit] : commits_) {
        nlohmann::json doc;
        doc["id"] = commit.id;
        doc["parent"] = commit.parent;
        doc["merge_parent"] = commit.merge_parent;
        doc["message"] = commit.message;
        doc["timestamp"] = commit.timestamp;
        doc["tree"] = commit.tree.to_json();
        write_json_file(dir / "commits" / (id + ".json"), doc);
    }
    nlohmann::json heads;
    heads["upstream_head"] = upstream_head_;
    heads["fork_head"] = fork_head_;
    heads["merge_base"] = merge_base_;
    write_json_file(dir / "HEADS.json", heads);
}

RepoState RepoState::load(const std::filesystem::path& dir) {
    RepoState repo;
    nlohmann::json heads = parse_json_file(dir / "HEADS.json");
    try {
        repo.upstream_head_ = heads.at("upstream_head").get<std::string>();
        repo.fork_head_ = heads.at("fork_head").get<std::string>();
        repo.merge_base_ = heads.at("merge_base").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::corrupt_repo, std::string("HEADS.json: ") + e.what());
    }
    std::error_code ec;
    for (const auto& entry : std::filesystem::directory_iterator(dir / "commits", ec)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") {
            continue;
        }
        nlohmann::json doc = parse_json_file(entry.path());
        Commit commit;
        try {
            commit.id = doc.at("id").get<std::string>();
            commit.parent = doc.at("parent").get<std::string>();
            commit.merge_parent = doc.value("merge_parent", std::string{});
            commit.message = doc.at("message").get<std::string>();
            commit.timestamp = doc.at("timestamp").get<std::int64_t>();
            commit.tree = FileTree::from_json(doc.at("tree"));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::corrupt_repo, entry.path().string() + ": " + e.what());
        }
        repo.commits_.emplace(commit.id, std::move(commit));
    }
    if (ec) {
        throw Error(Errc::io_failure, "cannot read " + (dir / "commits").string());
    }
    repo.validate();
    return repo;
}

bool operator==(const RepoState& a, const RepoState& b) {
    return a.commits_ == b.commits_ && a.upstream_head_ == b.upstream_head_ &&
           a.fork_head_ == b.fork_head_ && a.merge_base_ == b.merge_base_;
}

struct RepoAccess {
    static void set_merge_base(RepoState& repo, const std::string& id) {
        repo.merge_base_ = id;
    }
};

MergeResult attempt_merge(RepoState& repo, const std::string& library, std::int64_t now) {
    if (repo.upstream_head() == repo.merge_base()) {
        return {true, repo.fork_head(), repo.merge_base(), std::nullopt};
    }
    const FileTree& base = repo.commit(repo.merge_base()).tree;
    const FileTree& upstream = repo.commit(repo.upstream_head()).tree;
    const FileTree& fork = repo.commit(repo.fork_head()).tree;

    MergeOutcome outcome = three_way_merge(base, upstream, fork);
    if (!outcome.clean()) {
        Escalation escalation;
        escalation.library = library;
        escalation.conflicts = std::move(outcome.conflicts);
        escalation.upstream_head = repo.upstream_head();
        escalation.created_at = now;
        return {false, {}, {}, std::move(escalation)};
    }
    if (*outcome.merged == fork) {
        // Upstream changes were already present; only the bookkeeping moves.
        RepoAccess::set_merge_base(repo, repo.upstream_head());
        return {true, repo.fork_head(), repo.merge_base(), std::nullopt};
    }
    std::string new_head =
        repo.commit_fork_merge(std::move(*outcome.merged),
                               "merge upstream " + repo.upstream_head(), now,
                               repo.upstream_head());
    RepoAccess::set_merge_base(repo, repo.upstream_head());
    return {true, new_head, repo.merge_base(), std::nullopt};
}

std::string resolve_escalation(RepoState& repo, const Escalation& escalation, FileTree resolved,
                               std::int64_t now) {
    if (escalation.upstream_head != repo.upstream_head()) {
        throw Error(Errc::stale_escalation,
                    "upstream advanced past " + escalation.upstream_head + " since escalation");
    }
    std::string new_head = repo.commit_fork_merge(
        std::move(resolved), "resolve conflicts with upstream " + repo.upstream_head(), now,
        repo.upstream_head());
    RepoAccess::set_merge_base(repo, repo.upstream_head());
    return new_head;
}

} // namespace sgxsc::repo
