#pragma once

// Pre-expansion collision linting. Builds the component tree of an archive,
// directory or path list level by level, keyed by canonical fold keys, and
// reports every parent bucket whose children will contend for one name after
// expansion. Nested entries under colliding directories propagate as merge
// participants.

#include <algorithm>
#include <filesystem>
#include <istream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "collide/error.hpp"
#include "collide/fold.hpp"
#include "collide/tar.hpp"
#include "collide/vfs.hpp"

namespace collide::scanner {

enum class EntryKind { file, directory, symlink, hardlink, pipe, device, unknown };

inline const char* entry_kind_token(EntryKind k) {
    switch (k) {
        case EntryKind::file: return "file";
        case EntryKind::directory: return "dir";
        case EntryKind::symlink: return "symlink";
        case EntryKind::hardlink: return "hardlink";
        case EntryKind::pipe: return "pipe";
        case EntryKind::device: return "device";
        case EntryKind::unknown: return "unknown";
    }
    return "?";
}

inline EntryKind entry_kind_from_token(std::string_view t) {
    if (t == "file") return EntryKind::file;
    if (t == "dir" || t == "directory") return EntryKind::directory;
    if (t == "symlink") return EntryKind::symlink;
    if (t == "hardlink") return EntryKind::hardlink;
    if (t == "pipe") return EntryKind::pipe;
    if (t == "device") return EntryKind::device;
    return EntryKind::unknown;
}

struct PathEntry {
    std::vector<std::string> components;
    EntryKind kind = EntryKind::unknown;
    int ordinal = 0;
};

inline PathEntry make_entry(std::string_view path, EntryKind kind, int ordinal) {
    PathEntry e;
    e.components = FsImage::split(path);
    e.kind = kind;
    e.ordinal = ordinal;
    if (e.components.empty())
        throw Error(Errc::malformed_entry, "empty path");
    for (const auto& c : e.components)
        if (c == "." || c == "..")
            throw Error(Errc::malformed_entry, "dot segment in '" + std::string(path) + "'");
    return e;
}

struct CollisionGroup {
    std::string parent;  // canonical (folded) parent key path
    struct Member {
        std::string path;  // raw path
        EntryKind kind = EntryKind::unknown;
        int ordinal = 0;
        friend bool operator==(const Member&, const Member&) = default;
    };
    std::vector<Member> members;
    std::string kind_pair;
    std::string predicted_survivor;  // raw path of the highest-ordinal member
};

struct ScanResult {
    std::vector<CollisionGroup> groups;
    std::vector<std::string> issues;
    std::string profile;
    std::string unicode_version;
};

namespace detail {

// Kind ordering inside a kind_pair label: the more surprising kind first.
inline int kind_rank(EntryKind k) {
    switch (k) {
        case EntryKind::symlink: return 0;
        case EntryKind::pipe: return 1;
        case EntryKind::device: return 2;
        case EntryKind::hardlink: return 3;
        case EntryKind::unknown: return 4;
        case EntryKind::directory: return 5;
        case EntryKind::file: return 6;
    }
    return 7;
}

inline std::string kind_pair_label(std::vector<EntryKind> kinds) {
    std::sort(kinds.begin(), kinds.end(),
              [](EntryKind a, EntryKind b) { return kind_rank(a) < kind_rank(b); });
    if (kinds.empty()) return "unknown-unknown";
    EntryKind first = kinds.front();
    EntryKind second = kinds.size() > 1 ? kinds[1] : kinds.front();
    return std::string(entry_kind_token(first)) + "-" + entry_kind_token(second);
}

struct Contribution {
    std::string raw;         // raw final component
    std::string raw_parent;  // raw parent path
    std::string raw_path;    // full raw path
    EntryKind kind = EntryKind::directory;
    int ordinal = 0;
    bool declared = false;  // came from an entry's final component
};

}  // namespace detail

inline ScanResult scan_paths(const std::vector<PathEntry>& entries, const FoldProfile& profile) {
    ScanResult result;
    result.profile = profile.name;
    result.unicode_version = profile.unicode_version;

    // bucket key: (folded parent path, folded name)
    std::map<std::string, std::map<std::string, std::vector<detail::Contribution>>> buckets;
    for (const PathEntry& e : entries) {
        std::string folded_parent = "/";
        std::string raw_parent = "/";
        for (size_t i = 0; i < e.components.size(); ++i) {
            const std::string& comp = e.components[i];
            std::string folded = fold_name(comp, profile).bytes;
            bool is_final = i + 1 == e.components.size();
            detail::Contribution c;
            c.raw = comp;
            c.raw_parent = raw_parent;
            c.raw_path = FsImage::join(raw_parent, comp);
            c.kind = is_final ? e.kind : EntryKind::directory;
            c.ordinal = e.ordinal;
            c.declared = is_final;
            buckets[folded_parent][folded].push_back(std::move(c));
            folded_parent = FsImage::join(folded_parent, folded);
            raw_parent = FsImage::join(raw_parent, comp);
        }
    }

    // Shallow to deep so merged parents are known before their children.
    std::vector<std::string> parents;
    parents.reserve(buckets.size());
    for (const auto& [p, _] : buckets) parents.push_back(p);
    std::sort(parents.begin(), parents.end(), [](const std::string& a, const std::string& b) {
        size_t da = std::count(a.begin(), a.end(), '/');
        size_t db = std::count(b.begin(), b.end(), '/');
        return da != db ? da < db : a < b;
    });

    std::set<std::string> merged;  // folded paths whose buckets grouped
    for (const std::string& parent : parents) {
        bool parent_merged = merged.count(parent) != 0;
        for (const auto& [folded, contribs] : buckets[parent]) {
            // Merge contributions per (raw name, raw parent): keep the highest
            // ordinal; a declared non-directory kind wins over an implied one.
            std::map<std::pair<std::string, std::string>, detail::Contribution> dedup;
            for (const auto& c : contribs) {
                auto key = std::make_pair(c.raw, c.raw_parent);
                auto it = dedup.find(key);
                if (it == dedup.end()) {
                    dedup[key] = c;
                    continue;
                }
                detail::Contribution& d = it->second;
                d.ordinal = std::max(d.ordinal, c.ordinal);
                if (c.declared && c.kind != EntryKind::directory) d.kind = c.kind;
                d.declared = d.declared || c.declared;
            }
            std::set<std::string> raws;
            std::set<std::string> raw_parents;
            bool all_plain_dirs = true;
            for (const auto& [key, c] : dedup) {
                raws.insert(c.raw);
                raw_parents.insert(c.raw_parent);
                if (c.kind != EntryKind::directory) all_plain_dirs = false;
            }
            bool direct = raws.size() >= 2;
            bool via_merge = parent_merged && raw_parents.size() >= 2 && !all_plain_dirs;
            std::string child_key = FsImage::join(parent, folded);
            if (direct) merged.insert(child_key);
            if (raw_parents.size() >= 2 && parent_merged && all_plain_dirs && raws.size() < 2)
                merged.insert(child_key);  // same-named dirs keep merging silently
            if (!direct && !via_merge) continue;
            merged.insert(child_key);

            CollisionGroup g;
            g.parent = parent;
            std::vector<EntryKind> kinds;
            int best_ordinal = std::numeric_limits<int>::min();
            for (const auto& [key, c] : dedup) {
                g.members.push_back({c.raw_path, c.kind, c.ordinal});
                kinds.push_back(c.kind);
                if (c.ordinal >= best_ordinal) {
                    best_ordinal = c.ordinal;
                    g.predicted_survivor = c.raw_path;
                }
            }
            g.kind_pair = detail::kind_pair_label(std::move(kinds));
            result.groups.push_back(std::move(g));
        }
    }
    return result;
}

inline EntryKind entry_kind_from_typeflag(char t) {
    switch (t) {
        case '0':
        case '\0':
        case '7': return EntryKind::file;
        case '1': return EntryKind::hardlink;
        case '2': return EntryKind::symlink;
        case '3':
        case '4': return EntryKind::device;
        case '5': return EntryKind::directory;
        case '6': return EntryKind::pipe;
    }
    return EntryKind::unknown;
}

inline ScanResult scan_tar(std::string_view archive_bytes, const FoldProfile& profile) {
    tar::Archive archive = tar::parse(archive_bytes);
    std::vector<PathEntry> entries;
    ScanResult issues_carrier;
    int ordinal = 0;
    std::vector<std::string> issues;
    for (const tar::Issue& i : archive.issues)
        issues.push_back("member " + std::to_string(i.member_index) + ": " + i.message);
    for (const tar::Member& m : archive.members) {
        try {
            entries.push_back(make_entry(m.name, entry_kind_from_typeflag(m.typeflag), ordinal));
        } catch (const Error& e) {
            issues.push_back(std::string("skipped member '") + m.name + "': " + e.what());
        }
        ++ordinal;
    }
    ScanResult r = scan_paths(entries, profile);
    r.issues = std::move(issues);
    return r;
}

// Newline-delimited listing: "<path>[\t<kind>]" per line. This is also the
// ingestion adapter for zip contents (a listing, not the binary format).
inline std::vector<PathEntry> parse_listing(std::istream& in, int first_ordinal = 0,
                                            std::vector<std::string>* issues = nullptr) {
    std::vector<PathEntry> entries;
    std::string line;
    int ordinal = first_ordinal;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::string path = line;
        EntryKind kind = EntryKind::unknown;
        if (size_t tab = line.find('\t'); tab != std::string::npos) {
            path = line.substr(0, tab);
            kind = entry_kind_from_token(line.substr(tab + 1));
        }
        try {
            entries.push_back(make_entry(path, kind, ordinal++));
        } catch (const Error& e) {
            if (issues)
                issues->push_back("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return entries;
}

inline std::vector<PathEntry> entries_from_image(const FsImage& img, const std::string& root) {
    std::vector<PathEntry> entries;
    int ordinal = 0;
    size_t prefix = root == "/" ? 1 : root.size() + 1;
    auto walk = [&](auto&& self, const std::string& path) -> void {
        for (const std::string& name : img.readdir(path)) {
            std::string child = FsImage::join(path, name);
            const FsNode& n = img.node(*img.lookup(child));
            EntryKind kind = EntryKind::unknown;
            switch (n.kind) {
                case NodeKind::file:
                    kind = n.nlink > 1 ? EntryKind::hardlink : EntryKind::file;
                    break;
                case NodeKind::directory: kind = EntryKind::directory; break;
                case NodeKind::symlink: kind = EntryKind::symlink; break;
                case NodeKind::pipe: kind = EntryKind::pipe; break;
                case NodeKind::device: kind = EntryKind::device; break;
            }
            entries.push_back(make_entry(child.substr(prefix), kind, ordinal++));
            if (n.kind == NodeKind::directory) self(self, child);
        }
    };
    walk(walk, root);
    return entries;
}

inline ScanResult scan_dir(const FsImage& img, const std::string& root,
                           const FoldProfile& profile) {
    return scan_paths(entries_from_image(img, root), profile);
}

inline ScanResult scan_host_dir(const std::filesystem::path& root, const FoldProfile& profile) {
    namespace fs = std::filesystem;
    std::vector<PathEntry> entries;
    int ordinal = 0;
    std::vector<std::string> issues;
    auto walk = [&](auto&& self, const fs::path& dir) -> void {
        std::vector<fs::directory_entry> children;
        for (const auto& de : fs::directory_iterator(dir)) children.push_back(de);
        std::sort(children.begin(), children.end(),
                  [](const auto& a, const auto& b) { return a.path() < b.path(); });
        for (const auto& de : children) {
            EntryKind kind = EntryKind::unknown;
            auto st = de.symlink_status();
            if (fs::is_symlink(st)) kind = EntryKind::symlink;
            else if (fs::is_directory(st)) kind = EntryKind::directory;
            else if (fs::is_fifo(st)) kind = EntryKind::pipe;
            else if (fs::is_block_file(st) || fs::is_character_file(st)) kind = EntryKind::device;
            else if (fs::is_regular_file(st))
                kind = fs::hard_link_count(de.path()) > 1 ? EntryKind::hardlink : EntryKind::file;
            std::string rel = fs::relative(de.path(), root).string();
            try {
                entries.push_back(make_entry(rel, kind, ordinal++));
            } catch (const Error& e) {
                issues.push_back("skipped '" + rel + "': " + e.what());
            }
            if (fs::is_directory(st) && !fs::is_symlink(st)) self(self, de.path());
        }
    };
    walk(walk, root);
    ScanResult r = scan_paths(entries, profile);
    r.issues = std::move(issues);
    return r;
}

// Report caveat: the profile is an assumption about the eventual expansion
// target, whose own fold rules may differ.
inline std::string fold_rule_caveat(const FoldProfile& profile) {
    return "note: predictions assume fold profile '" + profile.name + "' (Unicode " +
           profile.unicode_version +
           "); the expanding file system's folding rules are not guaranteed to be the same";
}

}  // namespace collide::scanner
