#include <doctest.h>

#include "sgxsc/ci.hpp"
#include "sgxsc/error.hpp"
#include "support/generators.hpp"

using namespace sgxsc;
using namespace sgxsc::ci;

TEST_CASE("expand_matrix produces the full cross product in declared order") {
    BuildMatrix matrix{{"cargo", "xargo"}, {"ubuntu-16.04", "ubuntu-18.04"}, {"release", "debug"}};
    auto configs = expand_matrix(matrix);
    REQUIRE(configs.size() == 8);
    CHECK(configs[0].key() == "cargo|ubuntu-16.04|release");
    CHECK(configs[1].key() == "cargo|ubuntu-16.04|debug");
    CHECK(configs[7].key() == "xargo|ubuntu-18.04|debug");

    CHECK(expand_matrix({{"a"}, {"b"}, {"c"}}).size() == 1);
    CHECK_THROWS_AS(expand_matrix({{}, {"b"}, {"c"}}), Error);
    CHECK_THROWS_AS(expand_matrix({{"a", "a"}, {"b"}, {"c"}}), Error);
}

TEST_CASE("expand_matrix has no duplicates and multiplies cardinalities") {
    testsupport::Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        auto axis = [&](const char* prefix) {
            std::vector<std::string> values;
            std::size_t count = testsupport::pick(rng, 1, 4);
            for (std::size_t i = 0; i < count; ++i) {
                values.push_back(std::string(prefix) + std::to_string(i));
            }
            return values;
        };
        BuildMatrix matrix{axis("pm"), axis("os"), axis("bt")};
        auto configs = expand_matrix(matrix);
        CHECK(configs.size() == matrix.package_managers.size() * matrix.os_versions.size() *
                                    matrix.build_types.size());
        std::set<std::string> keys;
        for (const auto& config : configs) keys.insert(config.key());
        CHECK(keys.size() == configs.size());
    }
}

TEST_CASE("run_ci retries only transient network failures") {
    auto configs = expand_matrix({{"cargo"}, {"u18"}, {"release"}});

    SUBCASE("a pass is recorded once") {
        int calls = 0;
        auto records = run_ci(
            "lib", configs,
            [&](const std::string&, const PipelineConfig&) {
                ++calls;
                return RawOutcome{true, FailureCategory::Deterministic};
            },
            5, 1000);
        CHECK(calls == 1);
        REQUIRE(records.size() == 1);
        CHECK(records[0].pass);
        CHECK_FALSE(records[0].category.has_value());
    }

    SUBCASE("network failure then pass within budget") {
        int calls = 0;
        auto records = run_ci(
            "lib", configs,
            [&](const std::string&, const PipelineConfig&) {
                ++calls;
                return calls == 1 ? RawOutcome{false, FailureCategory::TransientNetwork}
                                  : RawOutcome{true, FailureCategory::Deterministic};
            },
            2, 1000);
        CHECK(calls == 2);
        CHECK(records[0].pass);
    }

    SUBCASE("deterministic failure is never retried") {
        int calls = 0;
        auto records = run_ci(
            "lib", configs,
            [&](const std::string&, const PipelineConfig&) {
                ++calls;
                return RawOutcome{false, FailureCategory::Deterministic};
            },
            5, 1000);
        CHECK(calls == 1);
        CHECK_FALSE(records[0].pass);
        CHECK(records[0].category == FailureCategory::Deterministic);
    }

    SUBCASE("budget bounds the total calls per config") {
        int calls = 0;
        auto records = run_ci(
            "lib", configs,
            [&](const std::string&, const PipelineConfig&) {
                ++calls;
                return RawOutcome{false, FailureCategory::TransientNetwork};
            },
            3, 1000);
        CHECK(calls == 4); // 1 + retry budget
        CHECK_FALSE(records[0].pass);
        CHECK(records[0].category == FailureCategory::TransientNetwork);
    }

    SUBCASE("a missing runner is an error") {
        CHECK_THROWS_AS(run_ci("lib", configs, Runner{}, 0, 0), Error);
    }
}

TEST_CASE("daily_sweep flags a mass failure day") {
    auto configs = expand_matrix({{"cargo", "xargo"}, {"u16", "u18"}, {"release", "debug"}});
    std::vector<std::string> libraries;
    for (int i = 1; i <= 159; ++i) {
        char name[16];
        std::snprintf(name, sizeof(name), "lib%03d", i);
        libraries.emplace_back(name);
    }
    // The first 58 libraries break on every xargo pipeline.
    auto runner = [](const std::string& library, const PipelineConfig& config) {
        int index = std::stoi(library.substr(3));
        if (index <= 58 && config.package_manager == "xargo") {
            return RawOutcome{false, FailureCategory::ExternalDependencyBreakage};
        }
        return RawOutcome{true, FailureCategory::Deterministic};
    };

    auto result = daily_sweep(libraries, configs, runner, 2, 1000, 0.25);
    CHECK(result.records.size() == libraries.size() * configs.size());
    REQUIRE(result.event.has_value());
    CHECK(result.event->failing_libraries == 58);
    CHECK(result.event->suspected_external);

    auto few = daily_sweep(libraries, configs,
                           [](const std::string& library, const PipelineConfig&) {
                               int index = std::stoi(library.substr(3));
                               return index <= 3
                                          ? RawOutcome{false, FailureCategory::Deterministic}
                                          : RawOutcome{true, FailureCategory::Deterministic};
                           },
                           2, 1000, 0.25);
    CHECK_FALSE(few.event.has_value());

    auto nothing = daily_sweep({}, configs, runner, 2, 1000, 0.25);
    CHECK(nothing.records.empty());
    CHECK_FALSE(nothing.event.has_value());

    CHECK_THROWS_AS(daily_sweep(libraries, configs, runner, 2, 1000, 0.0), Error);
}

TEST_CASE("weekly_aggregate buckets attempts into seven-day windows") {
    constexpr std::int64_t kDay = 86400;
    std::vector<Attempt> attempts;
    // Week 0: 3 attempts, 1 failed. Week 2: 2 attempts, 2 failed. Week 1 empty.
    attempts.push_back({0, false});
    attempts.push_back({3 * kDay, true});
    attempts.push_back({6 * kDay + 86399, false});
    attempts.push_back({14 * kDay, true});
    attempts.push_back({20 * kDay, true});

    auto reports = weekly_aggregate(attempts, 0);
    REQUIRE(reports.size() == 3);
    CHECK(reports[0].total_attempts == 3);
    CHECK(reports[0].failed_attempts == 1);
    CHECK(reports[1].total_attempts == 0);
    CHECK(reports[1].failure_rate() == 0.0);
    CHECK(reports[2].total_attempts == 2);
    CHECK(reports[2].failure_rate() == 1.0);

    // Conservation.
    std::size_t sum = 0;
    for (const auto& report : reports) sum += report.total_attempts;
    CHECK(sum == attempts.size());

    CHECK(weekly_aggregate({}, 0).empty());
    CHECK_THROWS_AS(weekly_aggregate({{-1, false}}, 0), Error);
}

TEST_CASE("weekly totals are conserved on random histories") {
    testsupport::Rng rng(777);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Attempt> attempts;
        std::size_t count = testsupport::pick(rng, 0, 200);
        for (std::size_t i = 0; i < count; ++i) {
            attempts.push_back({static_cast<std::int64_t>(testsupport::pick(rng, 0, 90) * 86400 +
                                                          testsupport::pick(rng, 0, 86399)),
                                testsupport::chance(rng, 0.3)});
        }
        auto reports = weekly_aggregate(attempts, 0);
        std::size_t total = 0;
        std::size_t failed = 0;
        for (const auto& report : reports) {
            total += report.total_attempts;
            failed += report.failed_attempts;
            CHECK(report.failed_attempts <= report.total_attempts);
        }
        CHECK(total == attempts.size());
        std::size_t expected_failed = 0;
        for (const auto& attempt : attempts) {
            expected_failed += attempt.failed ? 1 : 0;
        }
        CHECK(failed == expected_failed);
    }
}

TEST_CASE("scripted runner consumes outcomes by key precedence") {
    auto runner = ScriptedRunner::from_json(nlohmann::json::parse(R"({
        "serde|cargo|u18|release": ["fail:network"],
        "serde": ["fail"],
        "*": ["pass", "fail:external"]
    })"));
    PipelineConfig exact{"cargo", "u18", "release"};
    PipelineConfig other{"xargo", "u18", "release"};

    auto first = runner.next("serde", exact);
    CHECK_FALSE(first.pass);
    CHECK(first.category == FailureCategory::TransientNetwork);
    // Exact script exhausted: falls back to the library script.
    auto second = runner.next("serde", exact);
    CHECK(second.category == FailureCategory::Deterministic);
    // Library exhausted too: global script.
    CHECK(runner.next("serde", other).pass);
    CHECK(runner.next("other", other).category == FailureCategory::ExternalDependencyBreakage);
    // Everything exhausted: default pass.
    CHECK(runner.next("other", other).pass);

    CHECK_THROWS_AS(ScriptedRunner::from_json(nlohmann::json::parse(R"({"k": ["maybe"]})")),
                    Error);
}

TEST_CASE("ci records round-trip through json") {
    CiRecord record;
    record.library = "serde";
    record.config = {"cargo", "u18", "release"};
    record.when = 123;
    record.pass = false;
    record.category = FailureCategory::TransientNetwork;
    auto restored = CiRecord::from_json(record.to_json());
    CHECK(restored.library == record.library);
    CHECK(restored.config == record.config);
    CHECK(restored.when == record.when);
    CHECK(restored.pass == record.pass);
    CHECK(restored.category == record.category);

    auto bad = record.to_json();
    bad.erase("category");
    CHECK_THROWS_AS(CiRecord::from_json(bad), Error);
}
