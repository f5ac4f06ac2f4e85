#pragma once

// Create-use name-consistency detection over normalized file-operation
// traces. Resources are keyed by device|inode; a successful use whose path
// spelling differs bytewise from every registered spelling while folding
// equal to one of them is flagged, as is a delete followed by a create of a
// fold-equal destination name.
//
// Input format, tab-separated, one record per line:
//   seq  op_class  syscall  program  pid  device  inode  path  dirfd  outcome
// op_class: create|use|delete|rename|opendir; dirfd: "-" or an fd number
// (for opendir records it carries the fd the directory was opened as);
// outcome: success|failure.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "collide/fold.hpp"
#include "collide/vfs.hpp"

namespace collide::tracer {

enum class OpClass { create, use, del, rename, opendir };

inline const char* op_class_token(OpClass c) {
    switch (c) {
        case OpClass::create: return "create";
        case OpClass::use: return "use";
        case OpClass::del: return "delete";
        case OpClass::rename: return "rename";
        case OpClass::opendir: return "opendir";
    }
    return "?";
}

inline std::optional<OpClass> op_class_from_token(std::string_view t) {
    if (t == "create") return OpClass::create;
    if (t == "use") return OpClass::use;
    if (t == "delete") return OpClass::del;
    if (t == "rename") return OpClass::rename;
    if (t == "opendir") return OpClass::opendir;
    return std::nullopt;
}

struct TraceRecord {
    long seq = 0;
    OpClass op_class = OpClass::use;
    std::string syscall;
    std::string program;
    int pid = 0;
    std::string device;
    long inode = 0;
    std::string path;
    std::optional<int> dirfd;
    bool success = true;
};

inline std::string format_record(const TraceRecord& r) {
    std::ostringstream os;
    os << r.seq << '\t' << op_class_token(r.op_class) << '\t' << r.syscall << '\t' << r.program
       << '\t' << r.pid << '\t' << r.device << '\t' << r.inode << '\t' << r.path << '\t'
       << (r.dirfd ? std::to_string(*r.dirfd) : "-") << '\t'
       << (r.success ? "success" : "failure");
    return os.str();
}

inline std::optional<TraceRecord> parse_record(std::string_view line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t tab = line.find('\t', start);
        fields.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos
                                                                             : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
    }
    if (fields.size() != 10) return std::nullopt;
    TraceRecord r;
    try {
        r.seq = std::stol(fields[0]);
        auto oc = op_class_from_token(fields[1]);
        if (!oc) return std::nullopt;
        r.op_class = *oc;
        r.syscall = fields[2];
        r.program = fields[3];
        r.pid = std::stoi(fields[4]);
        r.device = fields[5];
        r.inode = std::stol(fields[6]);
        r.path = fields[7];
        if (fields[8] != "-") r.dirfd = std::stoi(fields[8]);
        if (fields[9] == "success") r.success = true;
        else if (fields[9] == "failure") r.success = false;
        else return std::nullopt;
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (r.path.empty()) return std::nullopt;
    return r;
}

struct TraceTable {
    std::vector<TraceRecord> records;  // seq order as ingested
    int parse_errors = 0;
    int unresolved_dirfd = 0;

    // per-(pid,fd) directory paths from successful opendir records
    std::map<std::pair<int, int>, std::string> dirfd_dirs;
};

inline TraceTable ingest(std::istream& in) {
    TraceTable t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto r = parse_record(line);
        if (!r) {
            t.parse_errors++;
            continue;
        }
        if (r->op_class == OpClass::opendir && r->success && r->dirfd)
            t.dirfd_dirs[{r->pid, *r->dirfd}] = r->path;
        t.records.push_back(std::move(*r));
    }
    return t;
}

struct Violation {
    std::string device;
    long inode = 0;
    std::string created_as;
    std::string used_as;
    long create_ref = 0;
    long use_ref = 0;
    enum class Kind { case_inconsistent_use, delete_and_replace } kind =
        Kind::case_inconsistent_use;
    std::string create_program, create_syscall;
    std::string use_program, use_syscall;
};

namespace detail {

// Componentwise: fold-equal along the whole path with at least one bytewise
// difference.
inline bool paths_fold_equal_differing(const std::string& a, const std::string& b,
                                       const FoldProfile& profile) {
    if (a == b) return false;
    auto pa = FsImage::split(a);
    auto pb = FsImage::split(b);
    if (pa.size() != pb.size()) return false;
    for (size_t i = 0; i < pa.size(); ++i) {
        try {
            if (fold_name(pa[i], profile) != fold_name(pb[i], profile)) return false;
        } catch (const Error&) {
            return false;
        }
    }
    return true;
}

struct Spelling {
    std::string path;
    long seq;
    std::string program, syscall;
};

struct Tracked {
    std::vector<Spelling> spellings;
};

struct PendingDelete {
    std::string device;
    long inode;
    Spelling recorded;
};

}  // namespace detail

struct DetectOptions {
    std::string device_filter;  // empty = all devices
};

inline std::vector<Violation> detect(const TraceTable& table, const FoldProfile& profile,
                                     const DetectOptions& opts = {}) {
    std::vector<Violation> out;
    std::map<std::pair<std::string, long>, detail::Tracked> live;
    std::vector<detail::PendingDelete> pending;

    for (const TraceRecord& r : table.records) {
        if (!r.success) continue;
        if (!opts.device_filter.empty() && r.device != opts.device_filter) continue;
        if (r.op_class == OpClass::opendir) continue;

        std::string path = r.path;
        if (r.dirfd) {
            auto it = table.dirfd_dirs.find({r.pid, *r.dirfd});
            if (it == table.dirfd_dirs.end()) continue;  // conservative skip, counted at ingest
            if (!path.empty() && path[0] != '/') path = FsImage::join(it->second, path);
        }
        auto key = std::make_pair(r.device, r.inode);

        switch (r.op_class) {
            case OpClass::create: {
                // A replacing create resolves an earlier delete of a
                // fold-equal, byte-differing name.
                for (size_t i = 0; i < pending.size(); ++i) {
                    const auto& p = pending[i];
                    if (p.device != r.device) continue;
                    if (p.recorded.path == path) {
                        pending.erase(pending.begin() + i);  // benign re-create
                        break;
                    }
                    if (detail::paths_fold_equal_differing(p.recorded.path, path, profile)) {
                        Violation v;
                        v.device = p.device;
                        v.inode = p.inode;
                        v.created_as = p.recorded.path;
                        v.used_as = path;
                        v.create_ref = p.recorded.seq;
                        v.use_ref = r.seq;
                        v.kind = Violation::Kind::delete_and_replace;
                        v.create_program = p.recorded.program;
                        v.create_syscall = p.recorded.syscall;
                        v.use_program = r.program;
                        v.use_syscall = r.syscall;
                        out.push_back(std::move(v));
                        pending.erase(pending.begin() + i);
                        break;
                    }
                }
                detail::Tracked& t = live[key];
                if (r.syscall == "link" || r.syscall == "linkat") {
                    // an additional accepted spelling for a hardlinked inode
                    t.spellings.push_back({path, r.seq, r.program, r.syscall});
                } else {
                    t.spellings = {{path, r.seq, r.program, r.syscall}};
                }
                break;
            }
            case OpClass::use: {
                auto it = live.find(key);
                if (it == live.end()) break;  // no recorded create
                bool clean = false;
                for (const auto& s : it->second.spellings)
                    if (s.path == path) {
                        clean = true;
                        break;
                    }
                if (clean) break;
                for (const auto& s : it->second.spellings) {
                    if (detail::paths_fold_equal_differing(s.path, path, profile)) {
                        Violation v;
                        v.device = r.device;
                        v.inode = r.inode;
                        v.created_as = s.path;
                        v.used_as = path;
                        v.create_ref = s.seq;
                        v.use_ref = r.seq;
                        v.kind = Violation::Kind::case_inconsistent_use;
                        v.create_program = s.program;
                        v.create_syscall = s.syscall;
                        v.use_program = r.program;
                        v.use_syscall = r.syscall;
                        out.push_back(std::move(v));
                        break;
                    }
                }
                break;
            }
            case OpClass::del: {
                auto it = live.find(key);
                if (it != live.end() && !it->second.spellings.empty()) {
                    pending.push_back({r.device, r.inode, it->second.spellings.front()});
                    live.erase(it);
                }
                break;
            }
            case OpClass::rename: {
                auto it = live.find(key);
                if (it != live.end())
                    it->second.spellings = {{path, r.seq, r.program, r.syscall}};
                break;
            }
            case OpClass::opendir:
                break;
        }
    }
    return out;
}

// Two-line violation block:
//   USE [msg=<seq>,'<program>'.<syscall>] <device>|<inode>| <path>
//   CREATE [msg=<seq>,'<program>'.<syscall>] <device>|<inode>| <path>
// Delete-and-replace blocks carry REPLACE in place of USE.
inline std::string render_violation(const Violation& v) {
    std::ostringstream os;
    os << (v.kind == Violation::Kind::delete_and_replace ? "REPLACE" : "USE") << " [msg="
       << v.use_ref << ",'" << v.use_program << "'." << v.use_syscall << "] " << v.device << '|'
       << v.inode << "| " << v.used_as << '\n';
    os << "CREATE [msg=" << v.create_ref << ",'" << v.create_program << "'." << v.create_syscall
       << "] " << v.device << '|' << v.inode << "| " << v.created_as << '\n';
    return os.str();
}

}  // namespace collide::tracer
