#include "sgxsc/auditor.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <set>

#include "sgxsc/error.hpp"

namespace sgxsc::auditor {

std::string_view to_string(Severity severity) {
    return severity == Severity::Error ? "error" : "warning";
}

CallGraph CallGraph::from_functions(std::map<std::string, FunctionFacts> functions) {
    for (const auto& [name, facts] : functions) {
        for (const auto& callee : facts.calls) {
            if (!functions.count(callee)) {
                throw Error(Errc::unknown_callee,
                            name + " calls undeclared function " + callee, {callee});
            }
        }
    }
    CallGraph graph;
    graph.functions_ = std::move(functions);
    return graph;
}

CallGraph CallGraph::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("functions") || !doc["functions"].is_array()) {
        throw Error(Errc::parse_error, "facts must be an object with a \"functions\" array");
    }
    std::map<std::string, FunctionFacts> functions;
    for (const auto& entry : doc["functions"]) {
        std::string name;
        FunctionFacts facts;
        try {
            name = entry.at("name").get<std::string>();
            facts.is_entrypoint = entry.value("is_entrypoint", false);
            if (entry.contains("calls")) {
                facts.calls = entry["calls"].get<std::vector<std::string>>();
            }
            for (const auto& resource : entry.value("resources", nlohmann::json::array())) {
                facts.resources.push_back(
                    {resource_kind_from_string(resource.at("kind").get<std::string>()),
                     resource.value("site", std::string{})});
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::parse_error, std::string("function facts: ") + e.what());
        }
        if (!functions.emplace(name, std::move(facts)).second) {
            throw Error(Errc::duplicate_function, "duplicate function: " + name, {name});
        }
    }
    return from_functions(std::move(functions));
}

CallGraph CallGraph::load(const std::filesystem::path& file) {
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

nlohmann::ordered_json CallGraph::to_json() const {
    auto functions = nlohmann::ordered_json::array();
    for (const auto& [name, facts] : functions_) {
        nlohmann::ordered_json entry;
        entry["name"] = name;
        entry["is_entrypoint"] = facts.is_entrypoint;
        entry["calls"] = facts.calls;
        auto resources = nlohmann::ordered_json::array();
        for (const auto& resource : facts.resources) {
            nlohmann::ordered_json fact;
            fact["kind"] = std::string(sgxsc::to_string(resource.kind));
            fact["site"] = resource.site;
            resources.push_back(std::move(fact));
        }
        entry["resources"] = std::move(resources);
        functions.push_back(std::move(entry));
    }
    nlohmann::ordered_json out;
    out["functions"] = std::move(functions);
    return out;
}

nlohmann::json ResourceWarning::to_json() const {
    nlohmann::json out;
    out["entrypoint"] = entrypoint;
    out["sink_function"] = sink_function;
    out["kind"] = std::string(sgxsc::to_string(kind));
    out["site"] = site;
    out["path"] = path;
    out["severity"] = std::string(to_string(severity));
    return out;
}

namespace {

// Distances to every node reachable from `start` over forward edges.
std::map<std::string, std::size_t> bfs_distances(const CallGraph& graph,
                                                 const std::string& start, bool reversed) {
    std::map<std::string, std::vector<std::string>> adjacency;
    for (const auto& [name, facts] : graph.functions()) {
        for (const auto& callee : facts.calls) {
            if (reversed) {
                adjacency[callee].push_back(name);
            } else {
                adjacency[name].push_back(callee);
            }
        }
    }
    std::map<std::string, std::size_t> dist{{start, 0}};
    std::deque<std::string> queue{start};
    while (!queue.empty()) {
        std::string current = std::move(queue.front());
        queue.pop_front();
        for (const auto& next : adjacency[current]) {
            if (!dist.count(next)) {
                dist[next] = dist[current] + 1;
                queue.push_back(next);
            }
        }
    }
    return dist;
}

// Lexicographically smallest shortest path: walk forward, always taking
// the smallest callee that stays on some shortest path to the sink.
std::vector<std::string> witness_path(const CallGraph& graph, const std::string& entry,
                                      const std::string& sink,
                                      const std::map<std::string, std::size_t>& dist_to_sink) {
    std::vector<std::string> path{entry};
    std::string current = entry;
    while (current != sink) {
        std::size_t remaining = dist_to_sink.at(current);
        const std::string* best = nullptr;
        for (const auto& callee : graph.functions().at(current).calls) {
            auto it = dist_to_sink.find(callee);
            if (it == dist_to_sink.end() || it->second != remaining - 1) {
                continue;
            }
            if (!best || callee < *best) {
                best = &callee;
            }
        }
        path.push_back(*best);
        current = *best;
    }
    return path;
}

} // namespace

std::vector<ResourceWarning> audit(const CallGraph& graph) {
    std::vector<ResourceWarning> warnings;
    for (const auto& [entry, entry_facts] : graph.functions()) {
        if (!entry_facts.is_entrypoint) {
            continue;
        }
        auto reachable = bfs_distances(graph, entry, false);
        for (const auto& [sink, sink_facts] : graph.functions()) {
            if (!reachable.count(sink) || sink_facts.resources.empty()) {
                continue;
            }
            // One warning per kind; the first declared site wins.
            std::map<ResourceKind, std::string> kinds;
            for (const auto& resource : sink_facts.resources) {
                kinds.emplace(resource.kind, resource.site);
            }
            auto dist_to_sink = bfs_distances(graph, sink, true);
            auto path = witness_path(graph, entry, sink, dist_to_sink);
            for (const auto& [kind, site] : kinds) {
                ResourceWarning warning;
                warning.entrypoint = entry;
                warning.sink_function = sink;
                warning.kind = kind;
                warning.site = site;
                warning.path = path;
                warning.severity =
                    kind == ResourceKind::ThreadSpawn ? Severity::Error : Severity::Warning;
                warnings.push_back(std::move(warning));
            }
        }
    }
    std::sort(warnings.begin(), warnings.end(),
              [](const ResourceWarning& a, const ResourceWarning& b) {
                  if (a.entrypoint != b.entrypoint) return a.entrypoint < b.entrypoint;
                  if (a.sink_function != b.sink_function) return a.sink_function < b.sink_function;
                  return a.kind < b.kind;
              });
    return warnings;
}

std::string format_warnings_text(const std::vector<ResourceWarning>& warnings) {
    std::string out;
    for (const auto& warning : warnings) {
        out += to_string(warning.severity);
        out += ' ';
        out += sgxsc::to_string(warning.kind);
        out += ' ';
        out += warning.entrypoint;
        out += ' ';
        for (std::size_t i = 0; i < warning.path.size(); ++i) {
            if (i) out += "→";
            out += warning.path[i];
        }
        out += ' ';
        out += warning.site;
        out += '\n';
    }
    return out;
}

PatternTable pattern_table_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || doc.empty()) {
        throw Error(Errc::parse_error, "pattern table must be a nonempty object");
    }
    PatternTable table;
    for (const auto& [pattern, kind] : doc.items()) {
        if (pattern.empty()) {
            throw Error(Errc::parse_error, "pattern table keys must be nonempty");
        }
        table[pattern] = resource_kind_from_string(kind.get<std::string>());
    }
    return table;
}

PatternTable load_pattern_table(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error(Errc::io_failure, "cannot open " + file.string());
    }
    try {
        return pattern_table_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, file.string() + ": " + e.what());
    }
}

namespace {

bool is_token_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == ':';
}

std::string trim(const std::string& text) {
    std::size_t first = text.find_first_not_of(" \t");
    if (first == std::string::npos) {
        return {};
    }
    std::size_t last = text.find_last_not_of(" \t");
    return text.substr(first, last - first + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) {
        lines.push_back(std::move(current));
    }
    return lines;
}

// Name in "fn name(..." after the keyword, or empty when this line is not
// a definition.
std::string definition_name(const std::string& line, const std::string& fn_keyword) {
    std::string trimmed = trim(line);
    if (trimmed.rfind(fn_keyword + " ", 0) != 0) {
        return {};
    }
    std::size_t pos = fn_keyword.size() + 1;
    while (pos < trimmed.size() && trimmed[pos] == ' ') ++pos;
    std::string name;
    while (pos < trimmed.size() && is_token_char(trimmed[pos])) {
        name.push_back(trimmed[pos++]);
    }
    if (name.empty() || pos >= trimmed.size() || trimmed[pos] != '(') {
        return {};
    }
    return name;
}

} // namespace

nlohmann::ordered_json extract_facts(const std::map<std::string, std::string>& sources,
                                     const PatternTable& table, const CallSyntax& syntax) {
    struct Definition {
        std::string file;
        std::size_t first_body_line; // 0-based index into the file's lines
        std::size_t end_line;        // exclusive
        bool is_entrypoint = false;
    };

    std::map<std::string, std::vector<std::string>> file_lines;
    std::map<std::string, Definition> definitions;

    for (const auto& [path, text] : sources) {
        auto lines = split_lines(text);
        std::string previous_nonblank;
        std::string open_function;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            std::string name = definition_name(lines[i], syntax.fn_keyword);
            if (!name.empty()) {
                if (!open_function.empty()) {
                    definitions[open_function].end_line = i;
                }
                // Later duplicates are ignored; extraction is best-effort.
                if (!definitions.count(name)) {
                    definitions[name] = {path, i + 1, lines.size(),
                                         trim(previous_nonblank) == syntax.entry_marker};
                    open_function = name;
                } else {
                    open_function.clear();
                }
            }
            if (!trim(lines[i]).empty()) {
                previous_nonblank = lines[i];
            }
        }
        file_lines[path] = std::move(lines);
    }

    std::map<std::string, FunctionFacts> functions;
    for (const auto& [name, def] : definitions) {
        FunctionFacts facts;
        facts.is_entrypoint = def.is_entrypoint;
        const auto& lines = file_lines[def.file];
        std::set<std::string> seen_calls;
        for (std::size_t i = def.first_body_line; i < def.end_line && i < lines.size(); ++i) {
            const std::string& line = lines[i];
            if (trim(line) == syntax.entry_marker) {
                continue;
            }
            std::size_t pos = 0;
            while (pos < line.size()) {
                if (!is_token_char(line[pos])) {
                    ++pos;
                    continue;
                }
                std::size_t start = pos;
                while (pos < line.size() && is_token_char(line[pos])) ++pos;
                std::string token = line.substr(start, pos - start);
                if (auto it = table.find(token); it != table.end()) {
                    facts.resources.push_back(
                        {it->second, def.file + ":" + std::to_string(i + 1)});
                    continue;
                }
                std::size_t after = pos;
                while (after < line.size() && line[after] == ' ') ++after;
                if (after < line.size() && line[after] == '(' && definitions.count(token) &&
                    seen_calls.insert(token).second) {
                    facts.calls.push_back(token);
                }
            }
        }
        functions.emplace(name, std::move(facts));
    }

    return CallGraph::from_functions(std::move(functions)).to_json();
}

std::vector<planner::RemediationAction>
audit_to_plan(const std::vector<ResourceWarning>& warnings,
              const std::map<std::string, bool>& sensitivity) {
    std::set<std::pair<std::string, ResourceKind>> seen;
    std::vector<planner::ResourceUsage> usages;
    for (const auto& warning : warnings) {
        if (!seen.insert({warning.sink_function, warning.kind}).second) {
            continue;
        }
        auto it = sensitivity.find(warning.sink_function);
        if (it == sensitivity.end()) {
            throw Error(Errc::missing_sensitivity,
                        "no sensitivity entry for " + warning.sink_function,
                        {warning.sink_function});
        }
        usages.push_back({warning.sink_function, warning.kind, it->second});
    }
    return planner::plan_remediations(usages);
}

} // namespace sgxsc::auditor
