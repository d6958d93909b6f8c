#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "sgxsc/ci.hpp"
#include "sgxsc/scheduler.hpp"

namespace sgxsc::config {

struct ToolkitConfig {
    scheduler::SchedulerConfig scheduler;
    ci::BuildMatrix matrix{
        {"cargo", "xargo"},
        {"ubuntu-16.04", "ubuntu-18.04"},
        {"release", "debug"},
    };
    std::size_t retry_budget = 2;
    double mass_failure_threshold = 0.25;
    std::int64_t week_epoch = 0;
};

/// Key/value file with [scheduler] and [ci] sections; lists are
/// comma-separated. Unknown keys are rejected so typos fail loudly.
ToolkitConfig parse_config(const std::string& text);
ToolkitConfig load_config(const std::filesystem::path& file);

std::string render_config(const ToolkitConfig& config);

} // namespace sgxsc::config
