#pragma once

// Structured delta between two file-system images sharing a comparison root.
// The delta is complete: replaying added/removed/changed path facts onto the
// before image's path map yields the after image's, restricted to the root.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "collide/vfs.hpp"

namespace collide {

struct PathFacts {
    NodeKind kind = NodeKind::file;
    unsigned mode = 0;
    int uid = 0;
    int gid = 0;
    std::int64_t mtime = 0;
    std::map<std::string, std::string> xattrs;
    std::string content;  // file bytes / symlink target / pipe capture
    int inode = -1;
    int nlink = 1;

    bool meta_equal(const PathFacts& o) const {
        return mode == o.mode && uid == o.uid && gid == o.gid && xattrs == o.xattrs;
    }

    friend bool operator==(const PathFacts&, const PathFacts&) = default;
};

struct PathChange {
    std::string path;
    PathFacts before;
    PathFacts after;
    bool kind_changed = false;
    bool content_changed = false;
    bool meta_changed = false;
    bool mtime_changed = false;
    bool retargeted = false;  // same path, different node identity
};

struct SnapshotDelta {
    std::vector<std::pair<std::string, PathFacts>> added;
    std::vector<std::pair<std::string, PathFacts>> removed;
    std::vector<PathChange> changed;

    bool empty() const { return added.empty() && removed.empty() && changed.empty(); }

    const PathChange* find_changed(std::string_view path) const {
        for (const auto& c : changed)
            if (c.path == path) return &c;
        return nullptr;
    }
};

namespace detail {

inline PathFacts facts_for(const FsImage& img, int inode) {
    const FsNode& n = img.node(inode);
    PathFacts f;
    f.kind = n.kind;
    f.mode = n.meta.mode;
    f.uid = n.meta.uid;
    f.gid = n.meta.gid;
    f.mtime = n.meta.mtime;
    f.xattrs = n.meta.xattrs;
    f.content = (n.kind == NodeKind::pipe || n.kind == NodeKind::device) ? n.capture : n.content;
    f.inode = n.inode;
    f.nlink = n.nlink;
    return f;
}

inline bool under_root(const std::string& path, std::string_view root) {
    if (root.empty() || root == "/") return true;
    if (path.size() < root.size() || path.compare(0, root.size(), root) != 0) return false;
    return path.size() == root.size() || path[root.size()] == '/';
}

}  // namespace detail

inline std::map<std::string, PathFacts> path_facts(const FsImage& img, std::string_view root = "/") {
    std::map<std::string, PathFacts> out;
    for (const auto& [path, inode] : img.all_paths()) {
        if (!detail::under_root(path, root)) continue;
        out[path] = detail::facts_for(img, inode);
    }
    return out;
}

inline SnapshotDelta snapshot_diff(const FsImage& before, const FsImage& after,
                                   std::string_view root = "/") {
    SnapshotDelta delta;
    auto b = path_facts(before, root);
    auto a = path_facts(after, root);
    for (const auto& [path, facts] : a)
        if (!b.count(path)) delta.added.emplace_back(path, facts);
    for (const auto& [path, facts] : b)
        if (!a.count(path)) delta.removed.emplace_back(path, facts);
    for (const auto& [path, bf] : b) {
        auto it = a.find(path);
        if (it == a.end()) continue;
        const PathFacts& af = it->second;
        PathChange c;
        c.path = path;
        c.before = bf;
        c.after = af;
        c.kind_changed = bf.kind != af.kind;
        c.content_changed = bf.content != af.content;
        c.meta_changed = !bf.meta_equal(af);
        c.mtime_changed = bf.mtime != af.mtime;
        c.retargeted = bf.inode != af.inode;
        if (c.kind_changed || c.content_changed || c.meta_changed || c.retargeted)
            delta.changed.push_back(std::move(c));
    }
    return delta;
}

}  // namespace collide
