#include "sgxsc/store.hpp"

#include <fstream>
#include <set>
#include <system_error>

#include "sgxsc/error.hpp"

namespace sgxsc::store {

namespace {

std::set<std::string>& failpoints() {
    static std::set<std::string> armed;
    return armed;
}

} // namespace

void failpoint_arm(const std::string& name) { failpoints().insert(name); }

void failpoint_disarm_all() { failpoints().clear(); }

bool failpoint_armed(std::string_view name) {
    return failpoints().count(std::string(name)) != 0;
}

void write_snapshot(const nlohmann::json& payload, int schema_version,
                    std::int64_t written_at, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["schema_version"] = schema_version;
    doc["written_at"] = written_at;
    doc["payload"] = payload;

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw Error(Errc::io_failure, "cannot write " + tmp.string());
        }
        out << doc.dump(2) << '\n';
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error(Errc::io_failure, "write failed for " + tmp.string());
        }
    }
    if (failpoint_armed(kFailpointSnapshotBeforeRename)) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw Error(Errc::io_failure, "simulated crash before snapshot rename");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignore;
        std::filesystem::remove(tmp, ignore);
        throw Error(Errc::io_failure, "rename failed for " + path.string() + ": " + ec.message());
    }
}

Snapshot read_snapshot(const std::filesystem::path& path, int expected_version) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Errc::io_failure, "cannot open " + path.string());
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, path.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema_version") ||
        !doc["schema_version"].is_number_integer()) {
        throw Error(Errc::schema_mismatch, path.string() + ": missing schema version");
    }
    Snapshot snapshot;
    snapshot.schema_version = doc["schema_version"].get<int>();
    if (snapshot.schema_version != expected_version) {
        throw Error(Errc::schema_mismatch,
                    path.string() + ": schema version " +
                        std::to_string(snapshot.schema_version) + ", expected " +
                        std::to_string(expected_version));
    }
    snapshot.written_at = doc.value("written_at", std::int64_t{0});
    if (!doc.contains("payload")) {
        throw Error(Errc::schema_mismatch, path.string() + ": missing payload");
    }
    snapshot.payload = doc["payload"];
    return snapshot;
}

void append_record(const std::filesystem::path& path, const nlohmann::json& record) {
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw Error(Errc::io_failure, "cannot open " + path.string() + " for append");
    }
    out << record.dump() << '\n';
    out.flush();
    if (!out) {
        throw Error(Errc::io_failure, "append failed for " + path.string());
    }
}

Replay replay_log(const std::filesystem::path& path) {
    Replay replay;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return replay; // a log that was never written is empty
    }
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t newline = content.find('\n', start);
        if (newline == std::string::npos) {
            // No commit marker: the record was torn mid-write. Drop it.
            replay.truncated = true;
            break;
        }
        std::string line = content.substr(start, newline - start);
        start = newline + 1;
        if (line.empty()) {
            continue;
        }
        try {
            replay.records.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::parse_error, path.string() + ": corrupt record: " + e.what());
        }
    }
    return replay;
}

} // namespace sgxsc::store
