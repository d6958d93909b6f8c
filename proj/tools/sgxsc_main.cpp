// sgxsc: supply-chain maintenance toolkit for SGX-ported libraries.
//
// Exit codes: 0 clean, 1 findings (conflicts, violations, warnings, CI
// failures), 2 usage or input errors. Machine output goes to stdout as
// JSON; diagnostics go to stderr.

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sgxsc/auditor.hpp"
#include "sgxsc/ci.hpp"
#include "sgxsc/config.hpp"
#include "sgxsc/error.hpp"
#include "sgxsc/planner.hpp"
#include "sgxsc/registry.hpp"
#include "sgxsc/repo.hpp"
#include "sgxsc/scheduler.hpp"
#include "sgxsc/store.hpp"
#include "sgxsc/svn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitFindings = 1;
constexpr int kExitUsage = 2;
constexpr int kStateSchema = 1;

struct Context {
    fs::path state_dir;
    std::optional<std::int64_t> now_flag;

    std::int64_t now() const {
        return now_flag ? *now_flag : static_cast<std::int64_t>(std::time(nullptr));
    }
    fs::path config_file() const { return state_dir / "scheduler.toml"; }
    fs::path state_file() const { return state_dir / "scheduler_state.json"; }
    fs::path decisions_file() const { return state_dir / "decisions.jsonl"; }
    fs::path escalations_file() const { return state_dir / "escalations.jsonl"; }
    fs::path ci_history_file() const { return state_dir / "ci_history.jsonl"; }
    fs::path repos_dir() const { return state_dir / "repos"; }
};

sgxsc::config::ToolkitConfig load_config(const Context& ctx) {
    if (fs::exists(ctx.config_file())) {
        return sgxsc::config::load_config(ctx.config_file());
    }
    return {};
}

sgxsc::scheduler::SchedulerState load_state(const Context& ctx) {
    sgxsc::scheduler::SchedulerState state;
    if (fs::exists(ctx.state_file())) {
        auto snapshot = sgxsc::store::read_snapshot(ctx.state_file(), kStateSchema);
        state = sgxsc::scheduler::SchedulerState::from_snapshot(snapshot.payload);
    }
    auto replay = sgxsc::store::replay_log(ctx.decisions_file());
    if (replay.truncated) {
        std::cerr << "warning: dropped a torn trailing record in "
                  << ctx.decisions_file().string() << "\n";
    }
    for (const auto& record : replay.records) {
        state.decision_log.push_back(sgxsc::scheduler::MergeDecision::from_json(record));
    }
    return state;
}

void save_state(const Context& ctx, const sgxsc::scheduler::SchedulerState& state,
                std::size_t decisions_already_logged, std::int64_t now) {
    fs::create_directories(ctx.state_dir);
    sgxsc::store::write_snapshot(state.snapshot_payload(), kStateSchema, now, ctx.state_file());
    for (std::size_t i = decisions_already_logged; i < state.decision_log.size(); ++i) {
        sgxsc::store::append_record(ctx.decisions_file(), state.decision_log[i].to_json());
    }
}

std::map<std::string, sgxsc::repo::RepoState> load_repos(const Context& ctx) {
    std::map<std::string, sgxsc::repo::RepoState> repos;
    if (!fs::exists(ctx.repos_dir())) {
        return repos;
    }
    for (const auto& entry : fs::directory_iterator(ctx.repos_dir())) {
        if (entry.is_directory()) {
            repos.emplace(entry.path().filename().string(),
                          sgxsc::repo::RepoState::load(entry.path()));
        }
    }
    return repos;
}

std::vector<std::string> read_name_list(const fs::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw sgxsc::Error(sgxsc::Errc::io_failure, "cannot open " + file.string());
    }
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (!line.empty()) {
            names.push_back(line);
        }
    }
    return names;
}

sgxsc::repo::FileTree load_tree(const fs::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw sgxsc::Error(sgxsc::Errc::io_failure, "cannot open " + file.string());
    }
    try {
        return sgxsc::repo::FileTree::from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw sgxsc::Error(sgxsc::Errc::parse_error, file.string() + ": " + e.what());
    }
}

void emit(const json& doc) { std::cout << doc.dump(2) << "\n"; }
void emit(const nlohmann::ordered_json& doc) { std::cout << doc.dump(2) << "\n"; }

int emit_actions(const Context& ctx, const std::vector<sgxsc::scheduler::StepAction>& actions) {
    bool escalated = false;
    auto out = json::array();
    for (const auto& action : actions) {
        out.push_back(action.to_json());
        if (action.escalation) {
            sgxsc::store::append_record(ctx.escalations_file(), action.escalation->to_json());
            escalated = true;
        }
    }
    emit(out);
    return escalated ? kExitFindings : kExitClean;
}

void save_repos(const Context& ctx, const std::map<std::string, sgxsc::repo::RepoState>& repos) {
    for (const auto& [library, repo] : repos) {
        repo.save(ctx.repos_dir() / library);
    }
}

// ---- subcommand bodies ----

int cmd_registry_report(const Context&, const std::string& snapshot, const std::string& ranked,
                        std::size_t top, const std::string& format) {
    auto graph = sgxsc::registry::RegistryGraph::load(snapshot);
    auto names = read_name_list(ranked);
    auto report = sgxsc::registry::coverage_report(graph, names, top);
    if (format == "text") {
        std::cout << "top " << report.total << ": " << report.ported << " ported, "
                  << report.directly_usable << " directly usable, " << report.inapplicable
                  << " inapplicable, " << report.not_ported << " not ported; availability "
                  << report.availability_rate << "\n";
    } else {
        emit(report.to_json());
    }
    return kExitClean;
}

int cmd_registry_histogram(const Context&, const std::string& snapshot,
                           const std::string& roots) {
    auto graph = sgxsc::registry::RegistryGraph::load(snapshot);
    auto histogram = sgxsc::registry::closure_histogram(graph, read_name_list(roots));
    emit(histogram.to_json());
    return kExitClean;
}

int cmd_registry_dependents(const Context&, const std::string& manifests,
                            const std::string& keyword) {
    auto entries = sgxsc::registry::load_manifests(manifests);
    emit(json(sgxsc::registry::find_dependents(entries, keyword)));
    return kExitClean;
}

int cmd_registry_admission(const sgxsc::registry::AdmissionCriteria& criteria) {
    emit(sgxsc::registry::admission_check(criteria).to_json());
    return kExitClean;
}

int cmd_plan(const Context&, const std::string& snapshot, const std::string& root,
             const std::string& usages) {
    auto graph = sgxsc::registry::RegistryGraph::load(snapshot);
    sgxsc::planner::PlanRequest request;
    if (!usages.empty()) {
        request = sgxsc::planner::PlanRequest::load(usages);
    }
    if (!graph.contains(root)) {
        throw sgxsc::Error(sgxsc::Errc::unknown_package, "unknown package: " + root);
    }
    auto result = sgxsc::planner::build_plan(graph, root, request);
    if (result.aborted()) {
        json out;
        out["aborted"] = true;
        out["blocker"] = *result.blocker;
        emit(out);
        std::cerr << "porting must abort: closure member " << *result.blocker
                  << " is inapplicable to enclaves\n";
        return kExitFindings;
    }
    emit(result.plan->to_json());
    return kExitClean;
}

int cmd_scheduler_ingest(const Context& ctx, const std::string& patches) {
    auto config = load_config(ctx);
    auto state = load_state(ctx);
    std::size_t logged = state.decision_log.size();
    auto replay = sgxsc::store::replay_log(patches);
    if (replay.truncated) {
        std::cerr << "warning: dropped a torn trailing record in " << patches << "\n";
    }
    std::size_t count = 0;
    for (const auto& record : replay.records) {
        sgxsc::scheduler::enqueue_patch(state, config.scheduler,
                                        sgxsc::scheduler::Patch::from_json(record));
        ++count;
    }
    save_state(ctx, state, logged, ctx.now());
    emit(json{{"ingested", count}});
    return kExitClean;
}

int cmd_scheduler_step(const Context& ctx) {
    auto config = load_config(ctx);
    auto state = load_state(ctx);
    std::size_t logged = state.decision_log.size();
    auto repos = load_repos(ctx);
    auto actions = sgxsc::scheduler::scheduler_step(state, config.scheduler, repos, ctx.now());
    save_repos(ctx, repos);
    save_state(ctx, state, logged, ctx.now());
    return emit_actions(ctx, actions);
}

int cmd_scheduler_approve(const Context& ctx, const std::string& library,
                          const std::string& approver) {
    auto config = load_config(ctx);
    auto state = load_state(ctx);
    std::size_t logged = state.decision_log.size();
    auto repos = load_repos(ctx);
    auto actions = sgxsc::scheduler::approve_review(state, config.scheduler, repos, library,
                                                    approver, ctx.now());
    save_repos(ctx, repos);
    save_state(ctx, state, logged, ctx.now());
    return emit_actions(ctx, actions);
}

int cmd_repo_init(const Context& ctx, const std::string& library, const std::string& tree,
                  const std::string& message) {
    auto repo = sgxsc::repo::RepoState::init(load_tree(tree), message, ctx.now());
    repo.save(ctx.repos_dir() / library);
    emit(json{{"library", library}, {"head", repo.fork_head()}});
    return kExitClean;
}

int cmd_repo_commit(const Context& ctx, const std::string& library, const std::string& side,
                    const std::string& tree, const std::string& message) {
    auto dir = ctx.repos_dir() / library;
    auto repo = sgxsc::repo::RepoState::load(dir);
    std::string head;
    if (side == "upstream") {
        head = repo.commit_upstream(load_tree(tree), message, ctx.now());
    } else if (side == "fork") {
        head = repo.commit_fork(load_tree(tree), message, ctx.now());
    } else {
        throw sgxsc::Error(sgxsc::Errc::invalid_argument, "side must be upstream or fork");
    }
    repo.save(dir);
    emit(json{{"library", library}, {"side", side}, {"head", head}});
    return kExitClean;
}

int cmd_repo_resolve(const Context& ctx, const std::string& library, const std::string& tree) {
    auto dir = ctx.repos_dir() / library;
    auto repo = sgxsc::repo::RepoState::load(dir);

    // The resolution answers the most recent escalation for this library.
    auto replay = sgxsc::store::replay_log(ctx.escalations_file());
    std::optional<sgxsc::repo::Escalation> escalation;
    for (const auto& record : replay.records) {
        auto parsed = sgxsc::repo::Escalation::from_json(record);
        if (parsed.library == library) {
            escalation = std::move(parsed);
        }
    }
    if (!escalation) {
        throw sgxsc::Error(sgxsc::Errc::nothing_pending,
                           "no recorded escalation for " + library);
    }
    auto head = sgxsc::repo::resolve_escalation(repo, *escalation, load_tree(tree), ctx.now());
    repo.save(dir);
    emit(json{{"library", library}, {"fork_head", head}});
    return kExitClean;
}

sgxsc::ci::Runner make_runner(sgxsc::ci::ScriptedRunner& scripted, const std::string& script) {
    if (script.empty()) {
        throw sgxsc::Error(sgxsc::Errc::runner_unavailable,
                           "--script is required: this build drives CI through a scripted runner");
    }
    scripted = sgxsc::ci::ScriptedRunner::load(script);
    return scripted.as_runner();
}

int cmd_ci_run(const Context& ctx, const std::string& library, const std::string& script) {
    auto config = load_config(ctx);
    auto configs = sgxsc::ci::expand_matrix(config.matrix);
    sgxsc::ci::ScriptedRunner scripted;
    auto runner = make_runner(scripted, script);
    auto records = sgxsc::ci::run_ci(library, configs, runner, config.retry_budget, ctx.now());
    fs::create_directories(ctx.state_dir);
    bool failed = false;
    auto out = json::array();
    for (const auto& record : records) {
        sgxsc::store::append_record(ctx.ci_history_file(), record.to_json());
        out.push_back(record.to_json());
        failed = failed || !record.pass;
    }
    emit(out);
    return failed ? kExitFindings : kExitClean;
}

int cmd_ci_sweep(const Context& ctx, const std::string& script) {
    auto config = load_config(ctx);
    auto configs = sgxsc::ci::expand_matrix(config.matrix);
    std::vector<std::string> libraries;
    if (fs::exists(ctx.repos_dir())) {
        for (const auto& entry : fs::directory_iterator(ctx.repos_dir())) {
            if (entry.is_directory()) {
                libraries.push_back(entry.path().filename().string());
            }
        }
    }
    std::sort(libraries.begin(), libraries.end());
    sgxsc::ci::ScriptedRunner scripted;
    auto runner = make_runner(scripted, script);
    auto result = sgxsc::ci::daily_sweep(libraries, configs, runner, config.retry_budget,
                                         ctx.now(), config.mass_failure_threshold);
    fs::create_directories(ctx.state_dir);
    bool failed = false;
    for (const auto& record : result.records) {
        sgxsc::store::append_record(ctx.ci_history_file(), record.to_json());
        failed = failed || !record.pass;
    }
    json out;
    out["libraries"] = libraries.size();
    out["records"] = result.records.size();
    if (result.event) {
        out["mass_failure"] = result.event->to_json();
    }
    emit(out);
    return (failed || result.event) ? kExitFindings : kExitClean;
}

int cmd_ci_report(const Context& ctx, const std::string& format) {
    auto config = load_config(ctx);
    std::vector<sgxsc::ci::Attempt> attempts;
    for (const auto& record : sgxsc::store::replay_log(ctx.ci_history_file()).records) {
        auto parsed = sgxsc::ci::CiRecord::from_json(record);
        attempts.push_back({parsed.when, !parsed.pass});
    }
    // Auto-merge attempts: successful ones from the decision log, failed
    // ones from the escalation log.
    for (const auto& record : sgxsc::store::replay_log(ctx.decisions_file()).records) {
        auto decision = sgxsc::scheduler::MergeDecision::from_json(record);
        if (decision.routed_to == sgxsc::scheduler::Route::AutoMerge) {
            attempts.push_back({decision.timestamp, false});
        }
    }
    for (const auto& record : sgxsc::store::replay_log(ctx.escalations_file()).records) {
        attempts.push_back({sgxsc::repo::Escalation::from_json(record).created_at, true});
    }
    auto reports = sgxsc::ci::weekly_aggregate(attempts, config.week_epoch);
    if (format == "json") {
        auto out = json::array();
        for (const auto& report : reports) {
            out.push_back(json{{"week", report.week_index},
                               {"total", report.total_attempts},
                               {"failed", report.failed_attempts},
                               {"rate", report.failure_rate()}});
        }
        emit(out);
    } else {
        std::cout << sgxsc::ci::weekly_report_csv(reports);
    }
    return kExitClean;
}

int cmd_svn_check(const Context&, const std::string& events_file, bool latest_only) {
    auto events = sgxsc::svn::load_events(events_file);
    if (latest_only) {
        events = sgxsc::svn::enforce_latest_only(events);
    }
    auto check = sgxsc::svn::check_linear(sgxsc::svn::derive_order(events));
    emit(check.to_json());
    if (!check.ok()) {
        const auto& [a, b] = *check.violation;
        std::cerr << "linear svn assignment impossible: (" << a.library << " rev " << a.lib_rev
                  << ", sdk " << a.sdk_svn << ") and (" << b.library << " rev " << b.lib_rev
                  << ", sdk " << b.sdk_svn << ") are incomparable\n";
        return kExitFindings;
    }
    return kExitClean;
}

int cmd_audit(const Context&, const std::string& facts, const std::string& sources,
              const std::string& patterns, const std::string& format) {
    sgxsc::auditor::CallGraph graph = [&] {
        if (!facts.empty()) {
            return sgxsc::auditor::CallGraph::load(facts);
        }
        auto table = sgxsc::auditor::load_pattern_table(patterns);
        std::map<std::string, std::string> texts;
        for (const auto& entry : fs::recursive_directory_iterator(sources)) {
            if (!entry.is_regular_file()) {
                continue;
            }
            std::ifstream in(entry.path());
            texts[fs::relative(entry.path(), sources).generic_string()] =
                std::string((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        }
        return sgxsc::auditor::CallGraph::from_json(
            sgxsc::auditor::extract_facts(texts, table));
    }();

    auto warnings = sgxsc::auditor::audit(graph);
    if (format == "text") {
        std::cout << sgxsc::auditor::format_warnings_text(warnings);
    } else {
        auto out = json::array();
        for (const auto& warning : warnings) {
            out.push_back(warning.to_json());
        }
        emit(out);
    }
    return warnings.empty() ? kExitClean : kExitFindings;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"supply-chain maintenance toolkit for SGX-ported libraries"};
    app.require_subcommand(1);

    Context ctx;
    const char* env_state = std::getenv("SGXSC_STATE");
    ctx.state_dir = env_state ? fs::path(env_state) : fs::path("sgxsc-state");
    app.add_option("--state", ctx.state_dir, "state directory (env: SGXSC_STATE)");

    auto add_now = [&](CLI::App* cmd) {
        cmd->add_option_function<std::int64_t>(
            "--now", [&](std::int64_t value) { ctx.now_flag = value; },
            "logical clock in seconds since epoch");
    };

    int rc = kExitClean;
    std::string snapshot, ranked, roots, manifests, keyword, root, usages;
    std::size_t top = 0;
    std::string format = "json";

    auto* registry = app.add_subcommand("registry", "registry reports");
    auto* report = registry->add_subcommand("report", "status coverage of a ranked list");
    report->add_option("--snapshot", snapshot)->required();
    report->add_option("--ranked", ranked)->required();
    report->add_option("--top", top)->required();
    report->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));
    report->callback([&] { rc = cmd_registry_report(ctx, snapshot, ranked, top, format); });

    auto* histogram = registry->add_subcommand("histogram", "dependency-closure size histogram");
    histogram->add_option("--snapshot", snapshot)->required();
    histogram->add_option("--roots", roots)->required();
    histogram->callback([&] { rc = cmd_registry_histogram(ctx, snapshot, roots); });

    auto* dependents = registry->add_subcommand("dependents", "find dependent projects");
    dependents->add_option("--manifests", manifests)->required();
    dependents->add_option("--keyword", keyword)->required();
    dependents->callback([&] { rc = cmd_registry_dependents(ctx, manifests, keyword); });

    sgxsc::registry::AdmissionCriteria criteria;
    auto* admission = registry->add_subcommand("admission", "score the selection checklist");
    admission->add_flag("--widely-demanded", criteria.widely_demanded);
    admission->add_flag("--high-quality", criteria.high_quality);
    admission->add_flag("--api-stable", criteria.api_stable);
    admission->add_flag("--irreplaceable", criteria.irreplaceable_dependency);
    admission->callback([&] { rc = cmd_registry_admission(criteria); });

    auto* plan = app.add_subcommand("plan", "porting plan for a candidate library");
    plan->add_option("--snapshot", snapshot)->required();
    plan->add_option("--root", root)->required();
    plan->add_option("--usages", usages, "plan request json (usages, tests, features)");
    plan->callback([&] { rc = cmd_plan(ctx, snapshot, root, usages); });

    std::string patches, library, approver, side, tree, message = "update";
    auto* scheduler = app.add_subcommand("scheduler", "patch cache and merge scheduler");
    auto* ingest = scheduler->add_subcommand("ingest", "enqueue patches from a jsonl feed");
    ingest->add_option("--patches", patches)->required();
    add_now(ingest);
    ingest->callback([&] { rc = cmd_scheduler_ingest(ctx, patches); });

    auto* step = scheduler->add_subcommand("step", "evaluate triggers and merge");
    add_now(step);
    step->callback([&] { rc = cmd_scheduler_step(ctx); });

    auto* approve = scheduler->add_subcommand("approve", "approve a pending review entry");
    approve->add_option("--library", library)->required();
    approve->add_option("--approver", approver)->required();
    add_now(approve);
    approve->callback([&] { rc = cmd_scheduler_approve(ctx, library, approver); });

    auto* repo = app.add_subcommand("repo", "simulated upstream/fork repositories");
    auto* init = repo->add_subcommand("init", "create a repository");
    init->add_option("--library", library)->required();
    init->add_option("--tree", tree)->required();
    init->add_option("--message", message);
    add_now(init);
    init->callback([&] { rc = cmd_repo_init(ctx, library, tree, message); });

    auto* commit = repo->add_subcommand("commit", "advance one side");
    commit->add_option("--library", library)->required();
    commit->add_option("--side", side)->required()->check(CLI::IsMember({"upstream", "fork"}));
    commit->add_option("--tree", tree)->required();
    commit->add_option("--message", message);
    add_now(commit);
    commit->callback([&] { rc = cmd_repo_commit(ctx, library, side, tree, message); });

    auto* resolve = repo->add_subcommand("resolve", "land an expert conflict resolution");
    resolve->add_option("--library", library)->required();
    resolve->add_option("--tree", tree)->required();
    add_now(resolve);
    resolve->callback([&] { rc = cmd_repo_resolve(ctx, library, tree); });

    std::string script;
    auto* ci = app.add_subcommand("ci", "continuous integration");
    auto* run = ci->add_subcommand("run", "run the pipeline matrix for one library");
    run->add_option("--library", library)->required();
    run->add_option("--script", script, "scripted runner outcomes (json)");
    add_now(run);
    run->callback([&] { rc = cmd_ci_run(ctx, library, script); });

    auto* sweep = ci->add_subcommand("sweep", "daily pass over every library");
    sweep->add_option("--script", script, "scripted runner outcomes (json)");
    add_now(sweep);
    sweep->callback([&] { rc = cmd_ci_sweep(ctx, script); });

    bool weekly = false;
    std::string report_format = "csv";
    auto* ci_report = ci->add_subcommand("report", "aggregate attempt history");
    ci_report->add_flag("--weekly", weekly, "bucket by 7-day windows");
    ci_report->add_option("--format", report_format)->check(CLI::IsMember({"csv", "json"}));
    ci_report->callback([&] { rc = cmd_ci_report(ctx, report_format); });

    std::string events_file;
    bool latest_only = false;
    auto* svn = app.add_subcommand("svn", "security version number checks");
    auto* check = svn->add_subcommand("check", "linear svn assignment check");
    check->add_option("--events", events_file)->required();
    check->add_flag("--enforce-latest", latest_only,
                    "rewrite the stream to the latest-only policy first");
    check->callback([&] { rc = cmd_svn_check(ctx, events_file, latest_only); });

    std::string facts, sources_dir, patterns;
    auto* audit = app.add_subcommand("audit", "call-graph audit of untrusted resources");
    audit->add_option("--facts", facts, "call-graph facts json");
    audit->add_option("--sources", sources_dir, "source directory to extract facts from");
    audit->add_option("--patterns", patterns, "pattern table json (with --sources)");
    audit->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));
    audit->callback([&] {
        if (facts.empty() == sources_dir.empty()) {
            throw CLI::ValidationError("audit", "pass exactly one of --facts or --sources");
        }
        if (!sources_dir.empty() && patterns.empty()) {
            throw CLI::ValidationError("audit", "--sources requires --patterns");
        }
        rc = cmd_audit(ctx, facts, sources_dir, patterns, format);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const sgxsc::Error& e) {
        std::cerr << "error (" << sgxsc::errc_name(e.code()) << "): " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return rc;
}
