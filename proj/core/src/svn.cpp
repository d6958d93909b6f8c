#include "sgxsc/svn.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "sgxsc/error.hpp"

namespace sgxsc::svn {

nlohmann::json BuildPoint::to_json() const {
    nlohmann::json out;
    out["library"] = library;
    out["lib_rev"] = lib_rev;
    out["sdk_svn"] = sdk_svn;
    out["live"] = live;
    return out;
}

nlohmann::json VersionEvent::to_json() const {
    nlohmann::json out;
    switch (type) {
    case Type::LibRelease:
        out["type"] = "lib_release";
        out["library"] = library;
        out["security_bump"] = security_bump;
        break;
    case Type::SdkBump:
        out["type"] = "sdk_bump";
        break;
    case Type::Retire:
        out["type"] = "retire";
        out["library"] = library;
        out["lib_rev"] = lib_rev;
        break;
    }
    return out;
}

VersionEvent VersionEvent::from_json(const nlohmann::json& doc) {
    VersionEvent event;
    try {
        std::string type = doc.at("type").get<std::string>();
        if (type == "lib_release") {
            event.type = Type::LibRelease;
            event.library = doc.at("library").get<std::string>();
            event.security_bump = doc.value("security_bump", false);
        } else if (type == "sdk_bump") {
            event.type = Type::SdkBump;
        } else if (type == "retire") {
            event.type = Type::Retire;
            event.library = doc.at("library").get<std::string>();
            event.lib_rev = doc.at("lib_rev").get<std::uint32_t>();
        } else {
            throw Error(Errc::parse_error, "unknown event type: " + type);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::parse_error, std::string("version event: ") + e.what());
    }
    return event;
}

std::vector<VersionEvent> load_events(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw Error(Errc::io_failure, "cannot open " + file.string());
    }
    std::vector<VersionEvent> events;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        try {
            events.push_back(VersionEvent::from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(Errc::parse_error,
                        file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return events;
}

bool SecurityOrder::leq(const BuildPoint& a, const BuildPoint& b) {
    return a.library == b.library && a.lib_rev <= b.lib_rev && a.sdk_svn <= b.sdk_svn;
}

bool SecurityOrder::comparable(const BuildPoint& a, const BuildPoint& b) {
    return leq(a, b) || leq(b, a);
}

std::vector<BuildPoint> SecurityOrder::live_builds() const {
    std::vector<BuildPoint> out;
    for (const auto& build : builds) {
        if (build.live) {
            out.push_back(build);
        }
    }
    return out;
}

SecurityOrder derive_order(const std::vector<VersionEvent>& events) {
    SecurityOrder order;
    std::map<std::string, std::uint32_t> current_rev;
    std::uint32_t sdk = 0;

    auto upsert = [&](const std::string& library, std::uint32_t rev, std::uint32_t svn) {
        for (auto& build : order.builds) {
            if (build.library == library && build.lib_rev == rev && build.sdk_svn == svn) {
                build.live = true;
                return;
            }
        }
        order.builds.push_back({library, rev, svn, true});
    };

    for (const auto& event : events) {
        switch (event.type) {
        case VersionEvent::Type::LibRelease: {
            auto it = current_rev.find(event.library);
            std::uint32_t rev = 0;
            if (it == current_rev.end()) {
                rev = 0;
            } else {
                rev = event.security_bump ? it->second + 1 : it->second;
            }
            current_rev[event.library] = rev;
            upsert(event.library, rev, sdk);
            break;
        }
        case VersionEvent::Type::SdkBump: {
            ++sdk;
            std::vector<std::pair<std::string, std::uint32_t>> spawn;
            for (const auto& build : order.builds) {
                if (build.live) {
                    spawn.emplace_back(build.library, build.lib_rev);
                }
            }
            for (const auto& [library, rev] : spawn) {
                upsert(library, rev, sdk);
            }
            break;
        }
        case VersionEvent::Type::Retire: {
            bool known = false;
            for (auto& build : order.builds) {
                if (build.library == event.library && build.lib_rev == event.lib_rev) {
                    build.live = false;
                    known = true;
                }
            }
            if (!known) {
                throw Error(Errc::retire_unknown_version,
                            "retire of unknown version " + event.library + " rev " +
                                std::to_string(event.lib_rev));
            }
            break;
        }
        }
    }

    std::sort(order.builds.begin(), order.builds.end(),
              [](const BuildPoint& a, const BuildPoint& b) {
                  if (a.library != b.library) return a.library < b.library;
                  if (a.lib_rev != b.lib_rev) return a.lib_rev < b.lib_rev;
                  return a.sdk_svn < b.sdk_svn;
              });
    return order;
}

nlohmann::json SvnAssignment::to_json() const {
    auto out = nlohmann::json::array();
    for (const auto& [build, svn] : svns) {
        nlohmann::json entry;
        entry["library"] = build.library;
        entry["lib_rev"] = build.lib_rev;
        entry["sdk_svn"] = build.sdk_svn;
        entry["svn"] = svn;
        out.push_back(std::move(entry));
    }
    return out;
}

nlohmann::json LinearCheck::to_json() const {
    nlohmann::json out;
    out["ok"] = ok();
    if (assignment) {
        out["assignment"] = assignment->to_json();
    }
    if (violation) {
        out["violation"] = nlohmann::json::array(
            {violation->first.to_json(), violation->second.to_json()});
    }
    return out;
}

LinearCheck check_linear(const SecurityOrder& order) {
    std::vector<BuildPoint> live = order.live_builds(); // keeps the sorted order

    for (std::size_t i = 0; i < live.size(); ++i) {
        for (std::size_t j = i + 1; j < live.size(); ++j) {
            if (live[i].library != live[j].library) {
                continue; // separate SVN spaces
            }
            if (!SecurityOrder::comparable(live[i], live[j])) {
                LinearCheck check;
                check.violation = {live[i], live[j]};
                return check;
            }
        }
    }

    // Each library's live builds form a chain; ranks within the library
    // are a sound assignment.
    SvnAssignment assignment;
    std::map<std::string, std::uint32_t> next_rank;
    for (const auto& build : live) {
        assignment.svns.emplace_back(build, next_rank[build.library]++);
    }
    LinearCheck check;
    check.assignment = std::move(assignment);
    return check;
}

std::vector<VersionEvent> enforce_latest_only(const std::vector<VersionEvent>& events) {
    std::vector<VersionEvent> out;
    // Replay shadow state: which revisions of each library are still live.
    std::map<std::string, std::uint32_t> current_rev;
    std::map<std::string, std::map<std::uint32_t, bool>> live_revs;

    auto apply = [&](const VersionEvent& event) {
        switch (event.type) {
        case VersionEvent::Type::LibRelease: {
            auto it = current_rev.find(event.library);
            std::uint32_t rev =
                it == current_rev.end() ? 0 : (event.security_bump ? it->second + 1 : it->second);
            current_rev[event.library] = rev;
            live_revs[event.library][rev] = true;
            break;
        }
        case VersionEvent::Type::SdkBump:
            break; // does not change which revisions are live
        case VersionEvent::Type::Retire: {
            auto lib = live_revs.find(event.library);
            if (lib == live_revs.end() || !lib->second.count(event.lib_rev)) {
                throw Error(Errc::retire_unknown_version,
                            "retire of unknown version " + event.library + " rev " +
                                std::to_string(event.lib_rev));
            }
            lib->second[event.lib_rev] = false;
            break;
        }
        }
    };

    for (const auto& event : events) {
        if (event.type == VersionEvent::Type::LibRelease && event.security_bump) {
            auto it = current_rev.find(event.library);
            if (it != current_rev.end() && live_revs[event.library][it->second]) {
                VersionEvent retire;
                retire.type = VersionEvent::Type::Retire;
                retire.library = event.library;
                retire.lib_rev = it->second;
                apply(retire);
                out.push_back(std::move(retire));
            }
        }
        apply(event);
        out.push_back(event);
    }
    return out;
}

} // namespace sgxsc::svn
