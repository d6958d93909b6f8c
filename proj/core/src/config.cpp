#include "sgxsc/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "sgxsc/error.hpp"

namespace sgxsc::config {

namespace {

std::string trim(const std::string& text) {
    std::size_t first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    std::size_t last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

std::string unquote(std::string value) {
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
        return value.substr(1, value.size() - 2);
    }
    return value;
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream stream(value);
    std::string item;
    while (std::getline(stream, item, ',')) {
        item = unquote(trim(item));
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

std::int64_t parse_int(const std::string& value, std::size_t line_no) {
    try {
        std::size_t used = 0;
        std::int64_t parsed = std::stoll(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
        return parsed;
    } catch (const std::exception&) {
        throw Error(Errc::parse_error,
                    "config line " + std::to_string(line_no) + ": not an integer: " + value);
    }
}

double parse_double(const std::string& value, std::size_t line_no) {
    try {
        std::size_t used = 0;
        double parsed = std::stod(value, &used);
        if (used != value.size()) {
            throw std::invalid_argument(value);
        }
        return parsed;
    } catch (const std::exception&) {
        throw Error(Errc::parse_error,
                    "config line " + std::to_string(line_no) + ": not a number: " + value);
    }
}

std::string lowercase(std::string text) {
    std::transform(text.begin(), text.end(), text.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return text;
}

} // namespace

ToolkitConfig parse_config(const std::string& text) {
    ToolkitConfig config;
    std::string section = "scheduler";
    std::stringstream stream(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(stream, raw)) {
        ++line_no;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw Error(Errc::parse_error,
                            "config line " + std::to_string(line_no) + ": unterminated section");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section != "scheduler" && section != "ci") {
                throw Error(Errc::parse_error, "config line " + std::to_string(line_no) +
                                                   ": unknown section [" + section + "]");
            }
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(Errc::parse_error,
                        "config line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));

        if (section == "scheduler") {
            if (key == "keywords") {
                config.scheduler.keywords.clear();
                for (auto& keyword : parse_list(value)) {
                    config.scheduler.keywords.push_back(lowercase(keyword));
                }
            } else if (key == "max_age_days") {
                std::int64_t days = parse_int(value, line_no);
                if (days <= 0) {
                    throw Error(Errc::parse_error, "max_age_days must be positive");
                }
                config.scheduler.max_age_seconds = days * 86400;
            } else if (key == "capacity") {
                std::int64_t capacity = parse_int(value, line_no);
                if (capacity < 1) {
                    throw Error(Errc::parse_error, "capacity must be >= 1");
                }
                config.scheduler.default_capacity = static_cast<std::size_t>(capacity);
            } else if (key == "manual_review") {
                config.scheduler.manual_review.clear();
                for (auto& name : parse_list(value)) {
                    config.scheduler.manual_review.insert(name);
                }
            } else {
                throw Error(Errc::parse_error, "config line " + std::to_string(line_no) +
                                                   ": unknown scheduler key " + key);
            }
        } else { // ci
            if (key == "package_managers") {
                config.matrix.package_managers = parse_list(value);
            } else if (key == "os_versions") {
                config.matrix.os_versions = parse_list(value);
            } else if (key == "build_types") {
                config.matrix.build_types = parse_list(value);
            } else if (key == "retry_budget") {
                std::int64_t budget = parse_int(value, line_no);
                if (budget < 0) {
                    throw Error(Errc::parse_error, "retry_budget must be >= 0");
                }
                config.retry_budget = static_cast<std::size_t>(budget);
            } else if (key == "mass_failure_threshold") {
                config.mass_failure_threshold = parse_double(value, line_no);
            } else if (key == "week_epoch") {
                config.week_epoch = parse_int(value, line_no);
            } else {
                throw Error(Errc::parse_error, "config line " + std::to_string(line_no) +
                                                   ": unknown ci key " + key);
            }
        }
    }
    return config;
}

ToolkitConfig load_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error(Errc::io_failure, "cannot open " + file.string());
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::string render_config(const ToolkitConfig& config) {
    auto join = [](const auto& values) {
        std::string out;
        for (const auto& value : values) {
            if (!out.empty()) out += ", ";
            out += value;
        }
        return out;
    };
    std::stringstream out;
    out << "[scheduler]\n";
    out << "keywords = " << join(config.scheduler.keywords) << "\n";
    out << "max_age_days = " << config.scheduler.max_age_seconds / 86400 << "\n";
    out << "capacity = " << config.scheduler.default_capacity << "\n";
    out << "manual_review = " << join(config.scheduler.manual_review) << "\n";
    out << "\n[ci]\n";
    out << "package_managers = " << join(config.matrix.package_managers) << "\n";
    out << "os_versions = " << join(config.matrix.os_versions) << "\n";
    out << "build_types = " << join(config.matrix.build_types) << "\n";
    out << "retry_budget = " << config.retry_budget << "\n";
    out << "mass_failure_threshold = " << config.mass_failure_threshold << "\n";
    out << "week_epoch = " << config.week_epoch << "\n";
    return out.str();
}

} // namespace sgxsc::config
