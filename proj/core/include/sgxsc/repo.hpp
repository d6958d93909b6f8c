#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sgxsc::repo {

/// Line-based file tree. Paths are normalized on insertion (duplicate
/// separators collapsed, leading "./" and surrounding '/' stripped).
class FileTree {
public:
    using Lines = std::vector<std::string>;

    void set_file(const std::string& path, Lines lines);
    void remove_file(const std::string& path);
    const Lines* find(const std::string& path) const;

    std::vector<std::string> paths() const;
    std::size_t file_count() const { return files_.size(); }
    bool empty() const { return files_.empty(); }

    static std::string normalize_path(const std::string& path);

    nlohmann::json to_json() const;
    static FileTree from_json(const nlohmann::json& doc);

    friend bool operator==(const FileTree&, const FileTree&) = default;

private:
    std::map<std::string, Lines> files_;
};

struct Hunk {
    enum class Kind { Edit, AddFile, RemoveFile };

    Kind kind = Kind::Edit;
    std::string path;
    std::size_t base_start = 0; // 0-based line index into the base file
    std::size_t base_len = 0;   // number of base lines replaced
    std::vector<std::string> lines; // replacement content

    friend bool operator==(const Hunk&, const Hunk&) = default;
};

/// Minimal line hunks turning `base` into `derived`; per file they are
/// sorted, non-overlapping and separated by at least one unchanged line.
std::vector<Hunk> diff(const FileTree& base, const FileTree& derived);

/// Applies diff output; apply(diff(a, b), a) == b.
FileTree apply_hunks(const FileTree& base, const std::vector<Hunk>& hunks);

struct Conflict {
    std::string path;
    std::size_t first_line = 0; // 1-based inclusive over the base file;
    std::size_t last_line = 0;  // last_line < first_line marks a pure insertion point
    std::vector<std::string> upstream_lines;
    std::vector<std::string> fork_lines;

    nlohmann::json to_json() const;
    static Conflict from_json(const nlohmann::json& doc);

    friend bool operator==(const Conflict&, const Conflict&) = default;
};

struct MergeOutcome {
    std::optional<FileTree> merged; // set iff conflicts is empty
    std::vector<Conflict> conflicts;

    bool clean() const { return conflicts.empty(); }
};

/// diff3 over line hunks: disjoint changes both apply, identical changes
/// collapse, overlapping changes become conflict entries covering the
/// touched base region. Conflicts are a value, not an error.
MergeOutcome three_way_merge(const FileTree& base, const FileTree& upstream,
                             const FileTree& fork);

struct Commit {
    std::string id;
    std::string parent;       // empty for the root commit
    std::string merge_parent; // second parent of a merge commit, else empty
    std::string message;
    std::int64_t timestamp = 0;
    FileTree tree;

    friend bool operator==(const Commit&, const Commit&) = default;
};

/// Content hash over (parents, tree, message, timestamp); commit ids are
/// reproducible across runs.
std::string commit_id(const std::string& parent, const std::string& merge_parent,
                      const FileTree& tree, const std::string& message,
                      std::int64_t timestamp);

struct Escalation {
    std::string library;
    std::vector<Conflict> conflicts;
    std::string upstream_head;
    std::int64_t created_at = 0;

    nlohmann::json to_json() const;
    static Escalation from_json(const nlohmann::json& doc);
};

/// Simulated upstream/fork repository pair sharing one commit store.
class RepoState {
public:
    static RepoState init(FileTree base, const std::string& message, std::int64_t timestamp);

    const Commit& commit(const std::string& id) const;
    const std::string& upstream_head() const { return upstream_head_; }
    const std::string& fork_head() const { return fork_head_; }
    const std::string& merge_base() const { return merge_base_; }

    std::string commit_upstream(FileTree tree, const std::string& message, std::int64_t timestamp);
    std::string commit_fork(FileTree tree, const std::string& message, std::int64_t timestamp);

    /// Fork commit with a second parent, recording that the upstream head
    /// was merged in.
    std::string commit_fork_merge(FileTree tree, const std::string& message,
                                  std::int64_t timestamp, const std::string& merged_head);

    /// Directory layout: commits/<id>.json plus HEADS.json. Load validates
    /// all invariants and throws Error(corrupt_repo) on violation.
    void save(const std::filesystem::path& dir) const;
    static RepoState load(const std::filesystem::path& dir);

    friend bool operator==(const RepoState&, const RepoState&);

private:
    RepoState() = default;
    bool is_ancestor(const std::string& ancestor, const std::string& descendant) const;
    void validate() const;

    std::map<std::string, Commit> commits_;
    std::string upstream_head_;
    std::string fork_head_;
    std::string merge_base_;

    friend struct RepoAccess;
};

bool operator==(const RepoState& a, const RepoState& b);

struct MergeResult {
    bool merged = false;
    std::string fork_head;  // valid when merged
    std::string merge_base; // valid when merged
    std::optional<Escalation> escalation;
};

/// Merges upstream into the fork. Clean merge advances fork_head (unless
/// the merge changes nothing) and sets merge_base := upstream_head; a
/// conflict leaves the repository untouched and returns an escalation
/// record for expert review.
MergeResult attempt_merge(RepoState& repo, const std::string& library, std::int64_t now);

/// Lands an expert-resolved tree for a previously escalated merge. Throws
/// Error(stale_escalation) when upstream moved after the escalation was
/// recorded. Returns the new fork head.
std::string resolve_escalation(RepoState& repo, const Escalation& escalation,
                               FileTree resolved, std::int64_t now);

} // namespace sgxsc::repo
