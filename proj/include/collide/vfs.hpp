#pragma once

// In-memory file-system image with per-directory case-insensitivity. This is
// the deterministic substrate the behavior models, fixtures and oracles run
// on. Directories are case-preserving: entries keep the raw name given at
// creation and fold-flagged directories additionally resolve children by
// canonical key.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "collide/error.hpp"
#include "collide/fold.hpp"

namespace collide {

enum class NodeKind { file, directory, symlink, pipe, device };

inline const char* kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::file: return "file";
        case NodeKind::directory: return "dir";
        case NodeKind::symlink: return "symlink";
        case NodeKind::pipe: return "pipe";
        case NodeKind::device: return "device";
    }
    return "?";
}

struct Metadata {
    unsigned mode = 0644;  // permission bits only; the type lives in NodeKind
    int uid = 0;
    int gid = 0;
    std::int64_t mtime = 0;
    std::map<std::string, std::string> xattrs;

    friend bool operator==(const Metadata&, const Metadata&) = default;
};

struct DirEntry {
    std::string raw;   // case-preserved name as given at creation
    std::string key;   // canonical key under the directory's profile
    int inode = 0;
};

struct DirEntrySet {
    std::vector<DirEntry> entries;  // insertion order
    bool fold_flag = false;
    std::string profile_id = "sensitive";
};

struct FsNode {
    int inode = 0;
    NodeKind kind = NodeKind::file;
    std::string content;  // file bytes or symlink target
    std::string capture;  // pipes/devices: bytes written through them
    DirEntrySet dir;
    int nlink = 1;
    Metadata meta;
};

// Outcome details of a single mutation, rich enough for behavior models to
// derive events and trace records.
struct OpResult {
    int inode = -1;
    int prior_inode = -1;        // node displaced by retarget/unlink/overwrite
    std::string resolved_path;   // case-preserved path that was actually touched
    std::string entry_raw;       // raw name of the directory entry after the op
    bool collided = false;       // a fold-equal, byte-differing entry was involved
    bool through_symlink = false;
    std::string referent;        // final write location when through_symlink
};

struct CreateOptions {
    bool exclusive = false;       // O_EXCL: any existing mapping fails
    bool exclusive_name = false;  // refuse only when raw names differ bytewise
};

// Case behavior of a new directory. Directories created inside a fold-flagged
// directory inherit the flag, mirroring how the +F attribute propagates;
// sensitive opts out, folded opts in with an explicit profile.
enum class FoldSpec { inherit, sensitive, folded };

class FsImage {
public:
    static constexpr int kLoopLimit = 40;

    explicit FsImage(std::string device_id = "00:39") : device_id_(std::move(device_id)) {
        FsNode root;
        root.inode = kRoot;
        root.kind = NodeKind::directory;
        root.meta.mode = 0755;
        nodes_[kRoot] = std::move(root);
    }

    int root() const { return kRoot; }
    const std::string& device_id() const { return device_id_; }

    const FsNode& node(int inode) const {
        auto it = nodes_.find(inode);
        if (it == nodes_.end()) throw Error(Errc::bad_input, "dangling inode reference");
        return it->second;
    }

    bool has_node(int inode) const { return nodes_.count(inode) != 0; }

    // Resolves a path, following symlinks in non-final components. The final
    // component is not followed (lstat-like). Returns absent when any
    // component is missing.
    std::optional<int> lookup(std::string_view path, std::string* resolved_raw = nullptr) const {
        int budget = kLoopLimit;
        return resolve_path(path, false, budget, resolved_raw);
    }

    // Like lookup but follows a final symlink as well (stat-like).
    std::optional<int> resolve(std::string_view path, std::string* resolved_raw = nullptr) const {
        int budget = kLoopLimit;
        return resolve_path(path, true, budget, resolved_raw);
    }

    OpResult create(std::string_view parent_path, const std::string& raw_name, NodeKind kind,
                    const Metadata& meta, const CreateOptions& opts = {},
                    const std::string& content = "", int depth = 0) {
        if (kind == NodeKind::directory)
            throw Error(Errc::bad_input, "use mkdir for directories");
        if (kind == NodeKind::symlink)
            throw Error(Errc::bad_input, "use symlink for symlinks");
        if (depth > kLoopLimit) throw Error(Errc::loop_limit_exceeded, raw_name);
        auto [dir_inode, dir_path] = require_dir(parent_path);
        FsNode& dir = nodes_[dir_inode];
        OpResult res;
        if (const DirEntry* e = find_child(dir, raw_name)) {
            res.collided = e->raw != raw_name;
            if (opts.exclusive)
                throw Error(Errc::exists, join(dir_path, e->raw));
            if (opts.exclusive_name && res.collided)
                throw Error(Errc::collides_differing_name,
                            raw_name + " vs existing " + e->raw);
            FsNode& existing = nodes_[e->inode];
            if (existing.kind == NodeKind::symlink) {
                // open(O_CREAT) follows the link; a dangling referent is created.
                std::string target = absolute_target(dir_path, existing.content);
                res = create_through(target, kind, meta, content, depth + 1);
                res.collided = e->raw != raw_name;
                res.through_symlink = true;
                res.referent = res.resolved_path;
                res.entry_raw = e->raw;
                return res;
            }
            if (existing.kind == NodeKind::directory)
                throw Error(Errc::exists, join(dir_path, e->raw) + " is a directory");
            res.inode = e->inode;
            res.entry_raw = e->raw;
            res.resolved_path = join(dir_path, e->raw);
            write_node(existing, content, /*truncate=*/true);
            return res;
        }
        int ino = new_node(kind, meta);
        if (kind == NodeKind::file) {
            nodes_[ino].content = content;
        } else if (!content.empty()) {
            nodes_[ino].capture += content;
        }
        insert_entry(dir, raw_name, ino);
        res.inode = ino;
        res.entry_raw = raw_name;
        res.resolved_path = join(dir_path, raw_name);
        return res;
    }

    OpResult mkdir(std::string_view parent_path, const std::string& raw_name, const Metadata& meta,
                   FoldSpec spec = FoldSpec::inherit, const std::string& profile_id = "ascii") {
        auto [dir_inode, dir_path] = require_dir(parent_path);
        FsNode& dir = nodes_[dir_inode];
        if (const DirEntry* e = find_child(dir, raw_name))
            throw Error(Errc::exists, join(dir_path, e->raw));
        bool fold_flag = false;
        std::string profile = "sensitive";
        switch (spec) {
            case FoldSpec::inherit:
                fold_flag = dir.dir.fold_flag;
                profile = dir.dir.profile_id;
                break;
            case FoldSpec::sensitive:
                break;
            case FoldSpec::folded:
                fold_flag = true;
                profile = profile_id;
                break;
        }
        Metadata m = meta;
        int ino = new_node(NodeKind::directory, m);
        nodes_[ino].dir.fold_flag = fold_flag;
        nodes_[ino].dir.profile_id = fold_flag ? profile : "sensitive";
        insert_entry(nodes_[dir_inode], raw_name, ino);
        OpResult res;
        res.inode = ino;
        res.entry_raw = raw_name;
        res.resolved_path = join(dir_path, raw_name);
        return res;
    }

    OpResult symlink(const std::string& target, std::string_view parent_path,
                     const std::string& raw_name, const Metadata& meta = {}) {
        auto [dir_inode, dir_path] = require_dir(parent_path);
        FsNode& dir = nodes_[dir_inode];
        if (const DirEntry* e = find_child(dir, raw_name))
            throw Error(Errc::exists, join(dir_path, e->raw));
        Metadata m = meta;
        m.mode = 0777;
        int ino = new_node(NodeKind::symlink, m);
        nodes_[ino].content = target;
        insert_entry(dir, raw_name, ino);
        OpResult res;
        res.inode = ino;
        res.entry_raw = raw_name;
        res.resolved_path = join(dir_path, raw_name);
        return res;
    }

    // Hardlink. Linking a name that folds onto an existing, byte-differing
    // entry re-points that entry at the link target; the entry keeps its raw
    // name. Linking an identical raw name fails with Exists.
    OpResult link(std::string_view existing_path, std::string_view parent_path,
                  const std::string& raw_name) {
        std::string target_raw;
        std::optional<int> target = lookup(existing_path, &target_raw);
        if (!target) throw Error(Errc::parent_missing, std::string(existing_path) + " missing");
        if (nodes_[*target].kind == NodeKind::directory)
            throw Error(Errc::bad_input, "hardlink to directory");
        auto [dir_inode, dir_path] = require_dir(parent_path);
        FsNode& dir = nodes_[dir_inode];
        OpResult res;
        if (DirEntry* e = find_child_mut(dir, raw_name)) {
            if (e->raw == raw_name || e->inode == *target)
                throw Error(Errc::exists, join(dir_path, e->raw));
            res.collided = true;
            res.prior_inode = e->inode;
            nodes_[*target].nlink++;
            int displaced = e->inode;
            e->inode = *target;
            drop_reference(displaced);
            res.inode = *target;
            res.entry_raw = e->raw;
            res.resolved_path = join(dir_path, e->raw);
            return res;
        }
        insert_entry(dir, raw_name, *target);
        nodes_[*target].nlink++;
        res.inode = *target;
        res.entry_raw = raw_name;
        res.resolved_path = join(dir_path, raw_name);
        return res;
    }

    OpResult unlink(std::string_view path) {
        auto [dir_inode, raw_name, dir_path] = split_parent(path);
        FsNode& dir = nodes_[dir_inode];
        DirEntry* e = find_child_mut(dir, raw_name);
        if (!e) throw Error(Errc::parent_missing, std::string(path) + " missing");
        OpResult res;
        res.collided = e->raw != raw_name;
        res.inode = e->inode;
        res.entry_raw = e->raw;
        res.resolved_path = join(dir_path, e->raw);
        FsNode& victim = nodes_[e->inode];
        if (victim.kind == NodeKind::directory && !victim.dir.entries.empty())
            throw Error(Errc::bad_input, "directory not empty: " + res.resolved_path);
        int ino = e->inode;
        dir.dir.entries.erase(dir.dir.entries.begin() + (e - dir.dir.entries.data()));
        drop_reference(ino);
        return res;
    }

    // Writes through the final name, following symlinks all the way (open(2)
    // without O_NOFOLLOW). Pipes and devices record the bytes in their capture
    // buffer instead of storing them.
    OpResult write(std::string_view path, const std::string& bytes, bool truncate = true) {
        std::string raw;
        std::optional<int> ino = resolve(path, &raw);
        if (!ino) throw Error(Errc::parent_missing, std::string(path) + " missing");
        OpResult res;
        res.inode = *ino;
        res.resolved_path = raw;
        FsNode& n = nodes_[*ino];
        if (n.kind == NodeKind::directory)
            throw Error(Errc::not_a_directory, "cannot write to directory " + raw);
        write_node(n, bytes, truncate);
        std::string direct;
        if (auto direct_ino = lookup(path, &direct); direct_ino && *direct_ino != *ino) {
            res.through_symlink = true;
            res.referent = raw;
        }
        return res;
    }

    void set_meta(std::string_view path, const Metadata& meta) {
        std::optional<int> ino = lookup(path);
        if (!ino) throw Error(Errc::parent_missing, std::string(path) + " missing");
        nodes_[*ino].meta = meta;
    }

    void set_mode(std::string_view path, unsigned mode) {
        std::optional<int> ino = lookup(path);
        if (!ino) throw Error(Errc::parent_missing, std::string(path) + " missing");
        nodes_[*ino].meta.mode = mode;
    }

    // chattr +F: only valid on an empty directory.
    void set_fold_flag(std::string_view path, const std::string& profile_id) {
        std::optional<int> ino = resolve(path);
        if (!ino) throw Error(Errc::parent_missing, std::string(path) + " missing");
        FsNode& n = nodes_[*ino];
        if (n.kind != NodeKind::directory)
            throw Error(Errc::not_a_directory, std::string(path));
        if (!n.dir.entries.empty())
            throw Error(Errc::bad_input, "fold flag requires an empty directory");
        n.dir.fold_flag = true;
        n.dir.profile_id = profile_id;
    }

    std::vector<std::string> readdir(std::string_view path) const {
        int budget = kLoopLimit;
        std::optional<int> ino = resolve_path(path, true, budget, nullptr);
        if (!ino) throw Error(Errc::parent_missing, std::string(path) + " missing");
        const FsNode& n = node(*ino);
        if (n.kind != NodeKind::directory) throw Error(Errc::not_a_directory, std::string(path));
        std::vector<std::string> names;
        names.reserve(n.dir.entries.size());
        for (const auto& e : n.dir.entries) names.push_back(e.raw);
        return names;
    }

    bool exists(std::string_view path) const { return lookup(path).has_value(); }

    std::string read(std::string_view path) const {
        std::optional<int> ino = resolve(path);
        if (!ino) throw Error(Errc::parent_missing, std::string(path) + " missing");
        return node(*ino).content;
    }

    // All case-preserved paths referencing each inode, relative to root.
    std::map<int, std::vector<std::string>> paths_by_inode() const {
        std::map<int, std::vector<std::string>> out;
        walk("", kRoot, out);
        for (auto& [ino, paths] : out) std::sort(paths.begin(), paths.end());
        return out;
    }

    std::map<std::string, int> all_paths() const {
        std::map<std::string, int> out;
        auto by_inode = paths_by_inode();
        for (const auto& [ino, paths] : by_inode)
            for (const auto& p : paths) out[p] = ino;
        return out;
    }

    // Deterministic line dump, one node per line:
    //   inode|kind|mode|uid|gid|nlink|paths|digest
    std::string dump() const {
        auto by_inode = paths_by_inode();
        std::ostringstream os;
        for (const auto& [ino, paths] : by_inode) {
            const FsNode& n = node(ino);
            os << ino << '|' << kind_name(n.kind) << '|' << std::oct << n.meta.mode << std::dec
               << '|' << n.meta.uid << '|' << n.meta.gid << '|' << n.nlink << '|';
            for (size_t i = 0; i < paths.size(); ++i) {
                if (i) os << ',';
                os << (paths[i].empty() ? "/" : paths[i]);
            }
            os << '|';
            if (n.kind == NodeKind::directory) {
                os << (n.dir.fold_flag ? "F:" + n.dir.profile_id : std::string("-"));
            } else {
                os << fnv1a_hex(n.kind == NodeKind::file || n.kind == NodeKind::symlink
                                    ? n.content
                                    : n.capture);
            }
            os << '\n';
        }
        return os.str();
    }

    // Test hook: verifies the structural invariants hold.
    void check_invariants() const {
        std::map<int, int> refs;
        refs[kRoot] = 1;
        for (const auto& [ino, n] : nodes_) {
            if (n.kind != NodeKind::directory) continue;
            std::set<std::string> keys;
            for (const auto& e : n.dir.entries) {
                if (!nodes_.count(e.inode))
                    throw Error(Errc::bad_input, "dangling entry " + e.raw);
                refs[e.inode]++;
                if (n.dir.fold_flag && !keys.insert(e.key).second)
                    throw Error(Errc::bad_input,
                                "duplicate canonical key in fold-flagged dir: " + e.raw);
            }
        }
        for (const auto& [ino, n] : nodes_) {
            int expect = n.kind == NodeKind::directory ? 1 : refs[ino];
            if (n.kind != NodeKind::directory && n.nlink != expect)
                throw Error(Errc::bad_input, "nlink mismatch on inode " + std::to_string(ino));
        }
    }

    static std::string fnv1a_hex(std::string_view bytes) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    static std::vector<std::string> split(std::string_view path) {
        std::vector<std::string> parts;
        size_t i = 0;
        while (i < path.size()) {
            while (i < path.size() && path[i] == '/') ++i;
            size_t j = i;
            while (j < path.size() && path[j] != '/') ++j;
            if (j > i) parts.emplace_back(path.substr(i, j - i));
            i = j;
        }
        return parts;
    }

    static std::string join(std::string_view dir, std::string_view name) {
        if (dir.empty() || dir == "/") return "/" + std::string(name);
        return std::string(dir) + "/" + std::string(name);
    }

private:
    static constexpr int kRoot = 1;

    std::pair<int, std::string> require_dir(std::string_view path) {
        std::string raw;
        int budget = kLoopLimit;
        std::optional<int> ino = resolve_path(path, true, budget, &raw);
        if (!ino) throw Error(Errc::parent_missing, std::string(path));
        if (node(*ino).kind != NodeKind::directory)
            throw Error(Errc::not_a_directory, std::string(path));
        return {*ino, raw};
    }

    std::tuple<int, std::string, std::string> split_parent(std::string_view path) {
        auto parts = split(path);
        if (parts.empty()) throw Error(Errc::bad_input, "cannot address root");
        std::string leaf = parts.back();
        std::string parent = "/";
        for (size_t i = 0; i + 1 < parts.size(); ++i) parent = join(parent, parts[i]);
        auto [ino, raw] = require_dir(parent);
        return {ino, leaf, raw};
    }

    const FoldProfile& dir_profile(const DirEntrySet& d) const {
        return profile_by_name(d.fold_flag ? d.profile_id : "sensitive");
    }

    const DirEntry* find_child(const FsNode& dir, const std::string& name) const {
        if (dir.dir.fold_flag) {
            std::string key = fold_name(name, dir_profile(dir.dir)).bytes;
            for (const auto& e : dir.dir.entries)
                if (e.key == key) return &e;
            return nullptr;
        }
        for (const auto& e : dir.dir.entries)
            if (e.raw == name) return &e;
        return nullptr;
    }

    DirEntry* find_child_mut(FsNode& dir, const std::string& name) {
        return const_cast<DirEntry*>(find_child(dir, name));
    }

    void insert_entry(FsNode& dir, const std::string& raw, int inode) {
        DirEntry e;
        e.raw = raw;
        e.key = fold_name(raw, dir_profile(dir.dir)).bytes;
        e.inode = inode;
        dir.dir.entries.push_back(std::move(e));
    }

    int new_node(NodeKind kind, const Metadata& meta) {
        int ino = next_inode_++;
        FsNode n;
        n.inode = ino;
        n.kind = kind;
        n.meta = meta;
        nodes_[ino] = std::move(n);
        return ino;
    }

    void drop_reference(int inode) {
        FsNode& n = nodes_[inode];
        if (n.kind == NodeKind::directory) {
            nodes_.erase(inode);
            return;
        }
        if (--n.nlink <= 0) nodes_.erase(inode);
    }

    static void write_node(FsNode& n, const std::string& bytes, bool truncate) {
        if (n.kind == NodeKind::pipe || n.kind == NodeKind::device) {
            n.capture += bytes;
        } else if (truncate) {
            n.content = bytes;
        } else {
            n.content += bytes;
        }
    }

    static std::string absolute_target(const std::string& link_dir, const std::string& target) {
        if (!target.empty() && target[0] == '/') return target;
        return join(link_dir, target);
    }

    OpResult create_through(const std::string& path, NodeKind kind, const Metadata& meta,
                            const std::string& content, int depth) {
        auto parts = split(path);
        if (parts.empty()) throw Error(Errc::bad_input, "bad referent path");
        std::string parent = "/";
        for (size_t i = 0; i + 1 < parts.size(); ++i) parent = join(parent, parts[i]);
        return create(parent, parts.back(), kind, meta, {}, content, depth);
    }

    std::optional<int> resolve_path(std::string_view path, bool follow_final, int& budget,
                                    std::string* resolved_raw) const {
        std::vector<std::string> pending = split(path);
        int cur = kRoot;
        std::vector<std::string> raw_parts;
        size_t idx = 0;
        while (idx < pending.size()) {
            const FsNode& dir = node(cur);
            if (dir.kind != NodeKind::directory)
                throw Error(Errc::not_a_directory, pending[idx]);
            const DirEntry* e = find_child(dir, pending[idx]);
            if (!e) return std::nullopt;
            const FsNode& child = node(e->inode);
            bool is_final = idx + 1 == pending.size();
            if (child.kind == NodeKind::symlink && (!is_final || follow_final)) {
                if (--budget < 0) throw Error(Errc::loop_limit_exceeded, std::string(path));
                std::vector<std::string> target = split(child.content);
                std::vector<std::string> rest(pending.begin() + idx + 1, pending.end());
                if (!child.content.empty() && child.content[0] == '/') {
                    cur = kRoot;
                    raw_parts.clear();
                } else {
                    // relative: resolve against the symlink's directory
                }
                pending = std::move(target);
                pending.insert(pending.end(), rest.begin(), rest.end());
                idx = 0;
                continue;
            }
            raw_parts.push_back(e->raw);
            if (is_final) {
                if (resolved_raw) {
                    std::string out = "/";
                    for (size_t i = 0; i < raw_parts.size(); ++i)
                        out = join(out, raw_parts[i]);
                    *resolved_raw = out;
                }
                return e->inode;
            }
            cur = e->inode;
            ++idx;
        }
        // Empty path or path of only separators: the root itself.
        if (resolved_raw) *resolved_raw = "/";
        return kRoot;
    }

    void walk(const std::string& prefix, int ino,
              std::map<int, std::vector<std::string>>& out) const {
        out[ino].push_back(prefix.empty() ? "/" : prefix);
        const FsNode& n = node(ino);
        if (n.kind != NodeKind::directory) return;
        for (const auto& e : n.dir.entries)
            walk(prefix + "/" + e.raw, e.inode, out);
    }

    std::string device_id_;
    std::map<int, FsNode> nodes_;
    int next_inode_ = 2;
};

}  // namespace collide
