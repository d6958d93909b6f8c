#include <doctest.h>

#include "sgxsc/config.hpp"
#include "sgxsc/error.hpp"

using namespace sgxsc;
using namespace sgxsc::config;

TEST_CASE("defaults match the operating policy") {
    ToolkitConfig config;
    CHECK(config.scheduler.keywords ==
          std::vector<std::string>{"fix", "bug", "issue", "release"});
    CHECK(config.scheduler.max_age_seconds == 30 * 86400);
    CHECK(config.scheduler.default_capacity == 10);
    CHECK(config.matrix.package_managers.size() == 2);
    CHECK(config.matrix.os_versions.size() == 2);
    CHECK(config.matrix.build_types.size() == 2);
    CHECK(config.retry_budget == 2);
    CHECK(config.mass_failure_threshold == 0.25);
}

TEST_CASE("parse_config reads both sections") {
    auto config = parse_config(R"(
# toolkit configuration
[scheduler]
keywords = fix, bug, issue, release, security
max_age_days = 14
capacity = 5
manual_review = rustls, webpki, ring

[ci]
package_managers = cargo
os_versions = u18, u20
build_types = release
retry_budget = 1
mass_failure_threshold = 0.5
week_epoch = 1000
)");
    CHECK(config.scheduler.keywords.size() == 5);
    CHECK(config.scheduler.max_age_seconds == 14 * 86400);
    CHECK(config.scheduler.default_capacity == 5);
    CHECK(config.scheduler.manual_review ==
          std::set<std::string>{"ring", "rustls", "webpki"});
    CHECK(config.matrix.package_managers == std::vector<std::string>{"cargo"});
    CHECK(config.matrix.os_versions.size() == 2);
    CHECK(config.retry_budget == 1);
    CHECK(config.mass_failure_threshold == 0.5);
    CHECK(config.week_epoch == 1000);
}

TEST_CASE("keywords are lowercased on load") {
    auto config = parse_config("[scheduler]\nkeywords = FIX, Bug\n");
    CHECK(config.scheduler.keywords == std::vector<std::string>{"fix", "bug"});
}

TEST_CASE("unknown keys and malformed lines are rejected") {
    CHECK_THROWS_AS(parse_config("[scheduler]\ntypo_key = 1\n"), Error);
    CHECK_THROWS_AS(parse_config("[nope]\n"), Error);
    CHECK_THROWS_AS(parse_config("[scheduler]\nno equals sign\n"), Error);
    CHECK_THROWS_AS(parse_config("[scheduler]\nmax_age_days = soon\n"), Error);
    CHECK_THROWS_AS(parse_config("[scheduler]\ncapacity = 0\n"), Error);
}

TEST_CASE("render then parse is the identity on the interesting fields") {
    ToolkitConfig config;
    config.scheduler.manual_review = {"rustls", "wasmi"};
    config.week_epoch = 42;
    auto reparsed = parse_config(render_config(config));
    CHECK(reparsed.scheduler.keywords == config.scheduler.keywords);
    CHECK(reparsed.scheduler.manual_review == config.scheduler.manual_review);
    CHECK(reparsed.scheduler.max_age_seconds == config.scheduler.max_age_seconds);
    CHECK(reparsed.matrix.package_managers == config.matrix.package_managers);
    CHECK(reparsed.week_epoch == 42);
}
