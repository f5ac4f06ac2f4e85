#pragma once

// Single-binary CLI: fold, scan, gen, model, classify and trace subcommands
// over the library, with JSON reporting and CI-friendly exit codes.
//
//   0  clean        3  findings (collisions or violations)
//   2  usage or input error        4  environment unavailable (live mode)

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "collide/casegen.hpp"
#include "collide/diff.hpp"
#include "collide/fold.hpp"
#include "collide/harness.hpp"
#include "collide/live.hpp"
#include "collide/refutils.hpp"
#include "collide/scanner.hpp"
#include "collide/tracer.hpp"
#include "collide/vfs.hpp"

namespace collide::cli {

using nlohmann::json;

inline constexpr int kExitClean = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitFindings = 3;
inline constexpr int kExitEnvironment = 4;

struct RunConfig {
    std::string profile = "ascii";
    std::string format = "text";  // text|json
    std::string mount;            // live mode target
    int timeout_seconds = 30;
    bool strict_times = false;
    std::string unicode_version = tables::kUnicodeVersion;  // read-only

    json to_json() const {
        return json{{"profile", profile},
                    {"format", format},
                    {"mount", mount},
                    {"timeout_seconds", timeout_seconds},
                    {"strict_times", strict_times},
                    {"unicode_version", unicode_version}};
    }
};

namespace detail {

// Optional key=value config file; command-line flags override it.
inline void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::bad_input, "cannot open config file " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key == "profile") cfg.profile = value;
        else if (key == "format") cfg.format = value;
        else if (key == "mount") cfg.mount = value;
        else if (key == "timeout") cfg.timeout_seconds = std::stoi(value);
        else if (key == "strict-times") cfg.strict_times = value == "true" || value == "1";
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::bad_input, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline json scan_report(const scanner::ScanResult& r, const RunConfig& cfg) {
    json groups = json::array();
    for (const auto& g : r.groups) {
        json members = json::array();
        for (const auto& m : g.members)
            members.push_back({{"path", m.path},
                               {"kind", scanner::entry_kind_token(m.kind)},
                               {"ordinal", m.ordinal}});
        groups.push_back({{"parent", g.parent},
                          {"members", members},
                          {"kind_pair", g.kind_pair},
                          {"predicted_survivor", g.predicted_survivor}});
    }
    return json{{"profile", r.profile},
                {"unicode_version", r.unicode_version},
                {"caveat", scanner::fold_rule_caveat(profile_by_name(r.profile))},
                {"groups", groups},
                {"issues", r.issues},
                {"config", cfg.to_json()}};
}

inline void print_scan_text(const scanner::ScanResult& r, std::ostream& out) {
    out << scanner::fold_rule_caveat(profile_by_name(r.profile)) << "\n";
    for (const auto& issue : r.issues) out << "issue: " << issue << "\n";
    if (r.groups.empty()) {
        out << "no collisions\n";
        return;
    }
    for (const auto& g : r.groups) {
        out << "group " << g.kind_pair << " under " << g.parent << ":\n";
        for (const auto& m : g.members)
            out << "  " << m.path << " (" << scanner::entry_kind_token(m.kind) << ", #"
                << m.ordinal << ")\n";
        out << "  predicted survivor: " << g.predicted_survivor << "\n";
    }
}

inline json classification_json(const harness::Classification& c) {
    json codes = json::array();
    for (const auto& code : c.codes) codes.push_back(code);
    json evidence = json::array();
    for (const auto& ev : c.evidence) evidence.push_back({{"code", ev.code}, {"detail", ev.detail}});
    return json{{"codes", codes}, {"evidence", evidence}, {"notes", c.notes}};
}

// auditd log adapter: best-effort conversion of SYSCALL/PATH record pairs
// into the normalized tab-separated trace format.
inline std::string adapt_auditd(std::istream& in) {
    static const std::map<int, std::string> kSyscalls = {
        {2, "open"},    {83, "mkdir"},   {84, "rmdir"},   {85, "creat"},  {86, "link"},
        {87, "unlink"}, {88, "symlink"}, {82, "rename"},  {133, "mknod"}, {257, "openat"},
        {258, "mkdirat"}, {259, "mknodat"}, {263, "unlinkat"}, {265, "linkat"},
        {266, "symlinkat"}, {264, "renameat"}, {316, "renameat2"}, {437, "openat2"}};
    auto field = [](const std::string& line, const std::string& key) -> std::string {
        size_t pos = line.find(key + "=");
        if (pos == std::string::npos) return "";
        pos += key.size() + 1;
        if (pos < line.size() && line[pos] == '"') {
            size_t end = line.find('"', pos + 1);
            return line.substr(pos + 1, end - pos - 1);
        }
        size_t end = line.find_first_of(" \n", pos);
        return line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    };
    auto msg_id = [](const std::string& line) -> std::string {
        size_t pos = line.find("msg=audit(");
        if (pos == std::string::npos) return "";
        size_t colon = line.find(':', pos);
        size_t close = line.find(')', colon);
        if (colon == std::string::npos || close == std::string::npos) return "";
        return line.substr(colon + 1, close - colon - 1);
    };

    struct SyscallInfo {
        std::string syscall = "openat";
        std::string comm = "unknown";
        std::string pid = "0";
        bool success = true;
    };
    std::map<std::string, SyscallInfo> by_msg;
    std::ostringstream out;
    std::string line;
    std::vector<std::string> path_lines;
    while (std::getline(in, line)) {
        if (line.find("type=SYSCALL") != std::string::npos) {
            SyscallInfo info;
            std::string n = field(line, "syscall");
            if (!n.empty()) {
                auto it = kSyscalls.find(std::atoi(n.c_str()));
                if (it != kSyscalls.end()) info.syscall = it->second;
            }
            std::string comm = field(line, "comm");
            if (!comm.empty()) info.comm = comm;
            std::string pid = field(line, "pid");
            if (!pid.empty()) info.pid = pid;
            info.success = field(line, "success") != "no";
            by_msg[msg_id(line)] = info;
        } else if (line.find("type=PATH") != std::string::npos) {
            path_lines.push_back(line);
        }
    }
    long seq = 1;
    for (const auto& pl : path_lines) {
        std::string id = msg_id(pl);
        auto it = by_msg.find(id);
        SyscallInfo info = it != by_msg.end() ? it->second : SyscallInfo{};
        std::string nametype = field(pl, "nametype");
        std::string name = field(pl, "name");
        std::string inode = field(pl, "inode");
        std::string dev = field(pl, "dev");
        if (name.empty() || name == "(null)" || nametype == "PARENT") continue;
        std::string op = nametype == "CREATE"   ? "create"
                         : nametype == "DELETE" ? "delete"
                                                : "use";
        out << seq++ << '\t' << op << '\t' << info.syscall << '\t' << info.comm << '\t'
            << info.pid << '\t' << (dev.empty() ? "00:00" : dev) << '\t'
            << (inode.empty() ? "0" : inode) << '\t' << name << "\t-\t"
            << (info.success ? "success" : "failure") << '\n';
    }
    return out.str();
}

}  // namespace detail

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"file-name collision toolkit: predict, generate, reproduce and detect\n"
                 "case-folding name collisions"};
    app.footer(
        "Examples:\n"
        "  $ collide fold --profile ascii foo FOO\n"
        "  $ collide gen --list\n"
        "  $ collide gen --id file-file-d1-tf --out ./case-tree\n"
        "  $ collide scan --dir ./case-tree --profile ascii\n"
        "  $ collide model --utility rsync --case hardlink-hardlink-d1-tf --dump\n"
        "  $ collide classify --utility tar --case file-file-d1-tf --json\n");

    RunConfig cfg;
    if (const char* env_mount = ::getenv("COLLIDE_MOUNT")) cfg.mount = env_mount;
    std::string config_file;
    app.add_option("--config", config_file, "key=value config file (flags override it)");

    // ---- fold -------------------------------------------------------------
    auto* fold_cmd = app.add_subcommand("fold", "fold names and decide collisions");
    std::string fold_profile = "ascii";
    bool fold_normalize = false;
    std::vector<std::string> fold_names;
    fold_cmd->add_option("--profile", fold_profile,
                         "ascii|simple-fold|full-fold|sensitive");
    fold_cmd->add_flag("--normalize", fold_normalize, "canonical composition before folding");
    fold_cmd->add_option("names", fold_names, "one name (print key) or two (decide)")
        ->expected(1, 2);

    // ---- scan -------------------------------------------------------------
    auto* scan_cmd = app.add_subcommand("scan", "lint archives, trees or listings for collisions");
    std::string scan_tar_path, scan_dir_path, scan_list_path, scan_baseline, scan_profile;
    bool scan_json = false;
    scan_cmd->add_option("--tar", scan_tar_path, "ustar/pax archive to scan");
    scan_cmd->add_option("--dir", scan_dir_path, "directory tree to scan");
    scan_cmd->add_option("--list", scan_list_path,
                         "newline-delimited listing (path[TAB kind]); zip adapter");
    scan_cmd->add_option("--baseline", scan_baseline,
                         "listing of names already present in the target");
    scan_cmd->add_option("--profile", scan_profile, "fold profile (default from config)");
    scan_cmd->add_flag("--json", scan_json, "JSON report");

    // ---- gen --------------------------------------------------------------
    auto* gen_cmd = app.add_subcommand("gen", "generate collision test cases");
    bool gen_list = false, gen_control = false;
    std::string gen_id, gen_out, gen_image;
    gen_cmd->add_flag("--list", gen_list, "list the matrix as JSON lines");
    gen_cmd->add_option("--id", gen_id, "case id, e.g. file-file-d1-tf");
    gen_cmd->add_option("--out", gen_out, "materialize onto this (case-sensitive) directory");
    gen_cmd->add_option("--image", gen_image, "materialize onto a fresh image; write its dump");
    gen_cmd->add_flag("--control", gen_control, "use the de-collided control variant");

    // ---- model ------------------------------------------------------------
    auto* model_cmd = app.add_subcommand("model", "run a utility behavior model on an image");
    std::string model_utility, model_case, model_scenario;
    bool model_dump = false, model_json = false;
    model_cmd->add_option("--utility", model_utility, "tar|zip|cp|cp*|rsync|dropbox");
    model_cmd->add_option("--case", model_case, "case id from gen --list");
    model_cmd->add_option("--scenario", model_scenario,
                          "git_cve|rsync_traversal|httpd_migration|dpkg_db");
    model_cmd->add_flag("--dump", model_dump, "print the final image dump");
    model_cmd->add_flag("--json", model_json, "JSON outcome");

    // ---- classify ---------------------------------------------------------
    auto* classify_cmd =
        app.add_subcommand("classify", "run a case and classify the response codes");
    std::string cls_utility, cls_case, cls_mount;
    bool cls_live = false, cls_json = false, cls_strict_times = false;
    int cls_timeout = -1;
    classify_cmd->add_option("--utility", cls_utility, "tar|zip|cp|cp*|rsync|dropbox")
        ->required();
    classify_cmd->add_option("--case", cls_case, "case id")->required();
    classify_cmd->add_flag("--live", cls_live, "run the real utility on --mount");
    classify_cmd->add_option("--mount", cls_mount, "case-insensitive mount (or COLLIDE_MOUNT)");
    classify_cmd->add_flag("--json", cls_json, "JSON report");
    classify_cmd->add_option("--timeout", cls_timeout, "live-mode timeout seconds");
    classify_cmd->add_flag("--strict-times", cls_strict_times,
                           "include timestamps in mismatch detection");

    // ---- trace ------------------------------------------------------------
    auto* trace_cmd = app.add_subcommand("trace", "detect create-use name inconsistencies");
    std::string trace_in, trace_profile, trace_device;
    bool trace_json = false, trace_text = false;
    trace_cmd->add_option("--in", trace_in, "normalized tab-separated trace file")->required();
    trace_cmd->add_option("--profile", trace_profile, "fold profile");
    trace_cmd->add_option("--device-filter", trace_device,
                          "only monitor this device (e.g. 00:39)");
    trace_cmd->add_flag("--json", trace_json, "JSON violations");
    trace_cmd->add_flag("--text", trace_text, "two-line USE/CREATE blocks");

    // ---- adapt-auditd -----------------------------------------------------
    auto* adapt_cmd =
        app.add_subcommand("adapt-auditd", "best-effort auditd log to trace-format converter");
    std::string adapt_in, adapt_out;
    adapt_cmd->add_option("--in", adapt_in, "auditd log file")->required();
    adapt_cmd->add_option("--out", adapt_out, "output file (default stdout)");

    try {
        std::vector<const char*> argv;
        argv.push_back("collide");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitClean;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (!config_file.empty()) detail::load_config_file(config_file, cfg);

        if (*fold_cmd) {
            const FoldProfile* base = find_profile(fold_profile);
            if (!base) throw Error(Errc::bad_input, "unknown profile " + fold_profile);
            FoldProfile profile = *base;
            profile.normalize = fold_normalize;
            if (fold_names.size() == 2) {
                bool collide = names_collide(fold_names[0], fold_names[1], profile);
                out << (collide ? "collide" : "distinct") << "\n";
                return collide ? kExitFindings : kExitClean;
            }
            CanonicalKey key = fold_name(fold_names[0], profile);
            out << key.bytes << "\n";
            return kExitClean;
        }

        if (*scan_cmd) {
            if (!scan_profile.empty()) cfg.profile = scan_profile;
            const FoldProfile& profile = profile_by_name(cfg.profile);
            std::vector<scanner::PathEntry> baseline;
            std::vector<std::string> issues;
            if (!scan_baseline.empty()) {
                std::ifstream in(scan_baseline);
                if (!in) throw Error(Errc::bad_input, "cannot open " + scan_baseline);
                auto entries = scanner::parse_listing(in, 0, &issues);
                int n = static_cast<int>(entries.size());
                for (auto& e : entries) e.ordinal -= n;  // merged below every input ordinal
                baseline = std::move(entries);
            }
            scanner::ScanResult result;
            if (!scan_tar_path.empty()) {
                result = scanner::scan_tar(detail::read_file(scan_tar_path), profile);
            } else if (!scan_dir_path.empty()) {
                result = scanner::scan_host_dir(scan_dir_path, profile);
            } else if (!scan_list_path.empty()) {
                std::ifstream in(scan_list_path);
                if (!in) throw Error(Errc::bad_input, "cannot open " + scan_list_path);
                auto entries = scanner::parse_listing(in, 0, &issues);
                entries.insert(entries.end(), baseline.begin(), baseline.end());
                result = scanner::scan_paths(entries, profile);
            } else {
                err << "usage error: one of --tar, --dir or --list is required\n";
                return kExitUsage;
            }
            if (!baseline.empty() && scan_list_path.empty()) {
                err << "usage error: --baseline applies to --list input\n";
                return kExitUsage;
            }
            result.issues.insert(result.issues.end(), issues.begin(), issues.end());
            if (scan_json || cfg.format == "json")
                out << detail::scan_report(result, cfg).dump(2) << "\n";
            else
                detail::print_scan_text(result, out);
            return result.groups.empty() ? kExitClean : kExitFindings;
        }

        if (*gen_cmd) {
            if (gen_list) {
                for (const auto& tc : casegen::generate_matrix()) {
                    json j{{"id", tc.id},
                           {"target", casegen::kind_token(tc.target_kind)},
                           {"source", casegen::kind_token(tc.source_kind)},
                           {"order", tc.order == casegen::Order::target_first ? "target-first"
                                                                              : "source-first"},
                           {"depth", tc.depth},
                           {"steps", tc.tree.size()}};
                    out << j.dump() << "\n";
                }
                return kExitClean;
            }
            if (gen_id.empty()) {
                err << "usage error: gen needs --list or --id\n";
                return kExitUsage;
            }
            auto tc = casegen::find_case(gen_id);
            if (!tc) throw Error(Errc::bad_input, "unknown case id " + gen_id);
            if (gen_control) *tc = casegen::control_variant(*tc);
            if (!gen_out.empty()) {
                std::filesystem::create_directories(gen_out);
                auto report = casegen::materialize_host(*tc, gen_out);
                for (const auto& w : report.warnings) err << "warning: " << w << "\n";
                out << "materialized " << report.created.size() << " entries under " << gen_out
                    << "\n";
                return kExitClean;
            }
            if (!gen_image.empty()) {
                FsImage img("00:39");
                Metadata m;
                m.mode = 0755;
                img.mkdir("/", "src", m, FoldSpec::sensitive);
                casegen::materialize(*tc, img, "/src");
                std::ofstream o(gen_image);
                if (!o) throw Error(Errc::bad_input, "cannot write " + gen_image);
                o << img.dump();
                out << "image dump written to " << gen_image << "\n";
                return kExitClean;
            }
            err << "usage error: gen --id needs --out or --image\n";
            return kExitUsage;
        }

        if (*model_cmd) {
            if (!model_scenario.empty()) {
                auto sc = refutils::scenario_from_token(model_scenario);
                if (!sc) throw Error(Errc::bad_input, "unknown scenario " + model_scenario);
                auto result = refutils::run_scenario(*sc);
                bool all_ok = result.ok();
                if (model_json || cfg.format == "json") {
                    json checks = json::array();
                    for (const auto& c : result.checks)
                        checks.push_back({{"claim", c.claim}, {"holds", c.holds}});
                    out << json{{"scenario", model_scenario}, {"checks", checks}}.dump(2)
                        << "\n";
                } else {
                    for (const auto& c : result.checks)
                        out << (c.holds ? "ok   " : "FAIL ") << c.claim << "\n";
                }
                if (model_dump) out << result.outcome.final_image.dump();
                return all_ok ? kExitFindings : kExitUsage;  // a reproduced attack is a finding
            }
            auto u = refutils::utility_from_token(model_utility);
            if (!u) throw Error(Errc::bad_input, "unknown utility " + model_utility);
            auto tc = casegen::find_case(model_case);
            if (!tc) throw Error(Errc::bad_input, "unknown case id " + model_case);
            auto run = harness::run_emulation(*u, *tc);
            if (model_dump) out << run.outcome.final_image.dump();
            if (model_json || cfg.format == "json") {
                json events = json::array();
                for (const auto& e : run.outcome.events)
                    events.push_back({{"dest", e.dest_path},
                                      {"resolved", e.resolved_path},
                                      {"src", e.src_path},
                                      {"collided", e.collided}});
                out << json{{"case", tc->id},
                            {"utility", model_utility},
                            {"events", events}}
                           .dump(2)
                    << "\n";
            }
            return kExitClean;
        }

        if (*classify_cmd) {
            if (cls_timeout > 0) cfg.timeout_seconds = cls_timeout;
            if (!cls_mount.empty()) cfg.mount = cls_mount;
            cfg.strict_times = cls_strict_times;
            auto tc = casegen::find_case(cls_case);
            if (!tc) throw Error(Errc::bad_input, "unknown case id " + cls_case);
            json report;
            harness::Classification classification;
            std::vector<std::string> discrepancies;
            if (cls_live) {
                if (cfg.mount.empty()) {
                    err << "environment: live mode needs --mount or COLLIDE_MOUNT\n";
                    return kExitEnvironment;
                }
                try {
                    live::LiveOptions opts;
                    opts.timeout_seconds = cfg.timeout_seconds;
                    auto lr = live::run_live(cls_utility, *tc, cfg.mount, opts);
                    classification = lr.classification;
                    discrepancies = lr.discrepancies;
                } catch (const Error& e) {
                    if (e.code() == Errc::mount_not_case_insensitive ||
                        e.code() == Errc::utility_missing) {
                        err << "environment: " << e.what() << "\n";
                        return kExitEnvironment;
                    }
                    throw;
                }
            } else {
                auto u = refutils::utility_from_token(cls_utility);
                if (!u) throw Error(Errc::bad_input, "unknown utility " + cls_utility);
                harness::ClassifyOptions copts;
                copts.strict_times = cfg.strict_times;
                auto run = harness::run_emulation(*u, *tc, nullptr, "ascii", copts);
                classification = run.classification;
            }
            report = detail::classification_json(classification);
            report["case"] = tc->id;
            report["utility"] = cls_utility;
            report["mode"] = cls_live ? "live" : "emulation";
            report["discrepancies"] = discrepancies;
            report["config"] = cfg.to_json();
            if (cls_json || cfg.format == "json") {
                out << report.dump(2) << "\n";
            } else {
                out << "codes:";
                for (const auto& c : classification.codes) out << " " << c;
                out << "\n";
                for (const auto& ev : classification.evidence)
                    out << "  " << ev.code << ": " << ev.detail << "\n";
                for (const auto& d : discrepancies) out << "  discrepancy: " << d << "\n";
            }
            return classification.codes.empty() ? kExitClean : kExitFindings;
        }

        if (*trace_cmd) {
            if (!trace_profile.empty()) cfg.profile = trace_profile;
            const FoldProfile& profile = profile_by_name(cfg.profile);
            std::ifstream in(trace_in);
            if (!in) throw Error(Errc::bad_input, "cannot open " + trace_in);
            auto table = tracer::ingest(in);
            tracer::DetectOptions opts;
            opts.device_filter = trace_device;
            auto violations = tracer::detect(table, profile, opts);
            if (trace_json || (cfg.format == "json" && !trace_text)) {
                json arr = json::array();
                for (const auto& v : violations)
                    arr.push_back(
                        {{"device", v.device},
                         {"inode", v.inode},
                         {"kind", v.kind == tracer::Violation::Kind::delete_and_replace
                                      ? "delete-and-replace"
                                      : "case-inconsistent-use"},
                         {"created_as", v.created_as},
                         {"used_as", v.used_as},
                         {"create_ref", v.create_ref},
                         {"use_ref", v.use_ref}});
                out << json{{"profile", cfg.profile},
                            {"unicode_version", cfg.unicode_version},
                            {"violations", arr},
                            {"parse_errors", table.parse_errors},
                            {"notes",
                             json::array({"strict matching: a directory component opened under "
                                          "one spelling does not legitimize later uses under "
                                          "another"})},
                            {"config", cfg.to_json()}}
                           .dump(2)
                    << "\n";
            } else {
                for (const auto& v : violations) out << tracer::render_violation(v) << "\n";
                if (table.parse_errors)
                    err << "note: " << table.parse_errors << " unparseable lines skipped\n";
            }
            return violations.empty() ? kExitClean : kExitFindings;
        }

        if (*adapt_cmd) {
            std::ifstream in(adapt_in);
            if (!in) throw Error(Errc::bad_input, "cannot open " + adapt_in);
            std::string tsv = detail::adapt_auditd(in);
            if (adapt_out.empty()) {
                out << tsv;
            } else {
                std::ofstream o(adapt_out);
                if (!o) throw Error(Errc::bad_input, "cannot write " + adapt_out);
                o << tsv;
            }
            return kExitClean;
        }

        out << app.help();
        return kExitClean;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace collide::cli
