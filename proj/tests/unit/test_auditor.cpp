#include <doctest.h>

#include "sgxsc/auditor.hpp"
#include "sgxsc/error.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace sgxsc;
using namespace sgxsc::auditor;

namespace {

CallGraph graph_from(const char* json_text) {
    return CallGraph::from_json(nlohmann::json::parse(json_text));
}

} // namespace

TEST_CASE("load_facts validates callees and duplicates, allows recursion") {
    auto graph = graph_from(R"({"functions": [
        {"name": "a", "calls": ["b"]},
        {"name": "b", "calls": []}
    ]})");
    CHECK(graph.functions().size() == 2);

    CHECK_THROWS_AS(graph_from(R"({"functions": [{"name": "a", "calls": ["ghost"]}]})"), Error);
    CHECK_THROWS_AS(graph_from(R"({"functions": [{"name": "a"}, {"name": "a"}]})"), Error);
    CHECK_NOTHROW(graph_from(R"({"functions": [{"name": "rec", "calls": ["rec"]}]})"));
}

TEST_CASE("audit reports nothing for a resource-free graph") {
    auto graph = graph_from(R"({"functions": [
        {"name": "ecall_main", "is_entrypoint": true, "calls": ["helper"]},
        {"name": "helper", "calls": []}
    ]})");
    CHECK(audit(graph).empty());
}

TEST_CASE("audit carries the witness path from entrypoint to sink") {
    auto graph = graph_from(R"({"functions": [
        {"name": "ecall_main", "is_entrypoint": true, "calls": ["helper"]},
        {"name": "helper", "calls": ["reader"]},
        {"name": "reader", "resources": [{"kind": "file_io", "site": "src/r.rs:10"}]}
    ]})");
    auto warnings = audit(graph);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].entrypoint == "ecall_main");
    CHECK(warnings[0].sink_function == "reader");
    CHECK(warnings[0].kind == ResourceKind::FileIO);
    CHECK(warnings[0].path == std::vector<std::string>{"ecall_main", "helper", "reader"});
    CHECK(warnings[0].severity == Severity::Warning);
    CHECK(warnings[0].site == "src/r.rs:10");
}

TEST_CASE("sinks not reachable from an entrypoint stay silent") {
    auto graph = graph_from(R"({"functions": [
        {"name": "ecall_main", "is_entrypoint": true, "calls": []},
        {"name": "orphan", "calls": ["reader"]},
        {"name": "reader", "resources": [{"kind": "file_io", "site": "s:1"}]}
    ]})");
    CHECK(audit(graph).empty());
}

TEST_CASE("thread spawns are errors, everything else warnings") {
    auto graph = graph_from(R"({"functions": [
        {"name": "ecall", "is_entrypoint": true, "calls": ["spawner"]},
        {"name": "spawner", "resources": [{"kind": "thread_spawn", "site": "s:5"}]}
    ]})");
    auto warnings = audit(graph);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].severity == Severity::Error);
}

TEST_CASE("an entrypoint that is itself a sink warns with a length-one path") {
    auto graph = graph_from(R"({"functions": [
        {"name": "ecall", "is_entrypoint": true,
         "resources": [{"kind": "network", "site": "s:2"}]}
    ]})");
    auto warnings = audit(graph);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].path == std::vector<std::string>{"ecall"});
}

TEST_CASE("witness paths prefer the lexicographically smallest shortest route") {
    auto graph = graph_from(R"({"functions": [
        {"name": "ecall", "is_entrypoint": true, "calls": ["zeta", "alpha"]},
        {"name": "zeta", "calls": ["sink"]},
        {"name": "alpha", "calls": ["sink"]},
        {"name": "sink", "resources": [{"kind": "time", "site": "s:3"}]}
    ]})");
    auto warnings = audit(graph);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].path == std::vector<std::string>{"ecall", "alpha", "sink"});
}

TEST_CASE("audit agrees with the brute-force reachability oracle") {
    testsupport::Rng rng(424242);
    for (int trial = 0; trial < 150; ++trial) {
        auto graph = testsupport::random_call_graph(rng);
        auto warnings = audit(graph);

        std::set<testsupport::oracle::ExpectedWarning> got;
        for (const auto& warning : warnings) {
            got.insert({warning.entrypoint, warning.sink_function, warning.kind});
        }
        // Distinct (entry, sink, kind) triples from the DFS oracle.
        CHECK(got == testsupport::oracle::expected_warnings(graph));
        // No duplicates in the report.
        CHECK(got.size() == warnings.size());

        for (const auto& warning : warnings) {
            // Path validity: starts at the entrypoint, ends at the sink,
            // follows real edges.
            REQUIRE(!warning.path.empty());
            CHECK(warning.path.front() == warning.entrypoint);
            CHECK(warning.path.back() == warning.sink_function);
            CHECK(graph.functions().at(warning.entrypoint).is_entrypoint);
            for (std::size_t i = 0; i + 1 < warning.path.size(); ++i) {
                const auto& calls = graph.functions().at(warning.path[i]).calls;
                CHECK(std::count(calls.begin(), calls.end(), warning.path[i + 1]) > 0);
            }
            // Minimality against an independent BFS.
            auto dist = testsupport::oracle::bfs_distance(graph, warning.entrypoint);
            CHECK(warning.path.size() - 1 == dist.at(warning.sink_function));
        }

        // Determinism: a second run produces the identical report.
        CHECK(audit(graph) == warnings);
    }
}

TEST_CASE("extract_facts follows the documented mini-convention") {
    std::map<std::string, std::string> sources;
    sources["src/enclave.rs"] =
        "#[ecall]\n"
        "fn ecall_main(input: &[u8]) {\n"
        "    helper(input);\n"
        "}\n"
        "\n"
        "fn helper(data: &[u8]) {\n"
        "    let content = fs::read(\"config\");\n"
        "    time_now();\n"
        "}\n";
    PatternTable table{{"fs::read", ResourceKind::FileIO}};

    auto facts = extract_facts(sources, table);
    auto graph = CallGraph::from_json(facts);
    REQUIRE(graph.contains("ecall_main"));
    REQUIRE(graph.contains("helper"));
    CHECK(graph.functions().at("ecall_main").is_entrypoint);
    CHECK_FALSE(graph.functions().at("helper").is_entrypoint);
    CHECK(graph.functions().at("ecall_main").calls == std::vector<std::string>{"helper"});
    REQUIRE(graph.functions().at("helper").resources.size() == 1);
    CHECK(graph.functions().at("helper").resources[0].kind == ResourceKind::FileIO);
    // "time_now" is not in the table: no fact.
    CHECK(graph.functions().at("helper").resources[0].site == "src/enclave.rs:7");
}

TEST_CASE("extraction and hand-written facts audit identically") {
    std::map<std::string, std::string> sources;
    sources["src/a.rs"] =
        "#[ecall]\n"
        "fn ecall_run() {\n"
        "    stage_one();\n"
        "}\n"
        "fn stage_one() {\n"
        "    spawn_thread(worker);\n"
        "    net::connect(\"example\");\n"
        "}\n";
    sources["src/b.rs"] =
        "fn worker() {\n"
        "    rand::random();\n"
        "}\n";
    PatternTable table{
        {"spawn_thread", ResourceKind::ThreadSpawn},
        {"net::connect", ResourceKind::Network},
        {"rand::random", ResourceKind::Randomness},
    };

    auto extracted = CallGraph::from_json(extract_facts(sources, table));

    std::map<std::string, FunctionFacts> hand;
    hand["ecall_run"] = {{"stage_one"}, {}, true};
    hand["stage_one"] = {{},
                         {{ResourceKind::ThreadSpawn, "src/a.rs:6"},
                          {ResourceKind::Network, "src/a.rs:7"}},
                         false};
    hand["worker"] = {{}, {{ResourceKind::Randomness, "src/b.rs:2"}}, false};
    auto handwritten = CallGraph::from_functions(std::move(hand));

    CHECK(audit(extracted) == audit(handwritten));
}

TEST_CASE("audit_to_plan feeds findings through the remediation rules") {
    auto graph = graph_from(R"({"functions": [
        {"name": "ecall", "is_entrypoint": true, "calls": ["io", "rng"]},
        {"name": "io", "resources": [{"kind": "file_io", "site": "s:1"}]},
        {"name": "rng", "resources": [{"kind": "randomness", "site": "s:2"}]}
    ]})");
    auto warnings = audit(graph);
    REQUIRE(warnings.size() == 2);

    auto actions = audit_to_plan(warnings, {{"io", false}, {"rng", true}});
    REQUIRE(actions.size() == 2);
    CHECK(actions[0].usage.function == "io");
    CHECK(actions[0].action == planner::RemediationKind::OCallWrapper);
    CHECK(actions[1].usage.function == "rng");
    CHECK(actions[1].action == planner::RemediationKind::TrustedSubstitute);
    CHECK(actions[1].substitute == "hw-rng");

    CHECK_THROWS_AS(audit_to_plan(warnings, {{"io", false}}), Error);
}

TEST_CASE("warning text report has one line per finding") {
    auto graph = graph_from(R"({"functions": [
        {"name": "ecall", "is_entrypoint": true, "calls": ["spawner"]},
        {"name": "spawner", "resources": [{"kind": "thread_spawn", "site": "s:5"}]}
    ]})");
    auto text = format_warnings_text(audit(graph));
    CHECK(text == "error thread_spawn ecall ecall→spawner s:5\n");
}
