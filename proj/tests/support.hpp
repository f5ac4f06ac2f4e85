#pragma once

// Test-only oracles and frozen expectations, independent of the
// implementation paths they check.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "collide/fold.hpp"
#include "collide/harness.hpp"
#include "collide/scanner.hpp"
#include "collide/vfs.hpp"

namespace collide::testsupport {

// The documented response table, frozen: seven rows by six utilities. Cells
// are code sets over {×, +, C, ≠, T, R, A, E, ∞, −}.
struct GoldenCell {
    std::string case_id;
    std::string utility;
    std::set<std::string> codes;
};

inline std::vector<GoldenCell> golden_utility_cells() {
    using namespace harness;
    auto S = [](std::initializer_list<const char*> xs) {
        std::set<std::string> out;
        for (const char* x : xs) out.insert(x);
        return out;
    };
    std::vector<GoldenCell> cells;
    struct Row {
        const char* id;
        std::set<std::string> tar, zip, cp, cp_star, rsync;
    };
    std::vector<Row> rows = {
        {"file-file-d1-tf", S({kDeleteRecreate}), S({kAskUser}), S({kDeny}),
         S({kOverwrite, kMetadataMismatch}), S({kOverwrite, kMetadataMismatch})},
        {"symlinkfile-file-d1-tf", S({kDeleteRecreate}), S({kAskUser}), S({kDeny}),
         S({kOverwrite, kFollowSymlink}), S({kOverwrite, kMetadataMismatch})},
        {"pipe-file-d1-tf", S({kDeleteRecreate}), S({kUnsupported}), S({kDeny}), S({kOverwrite}),
         S({kOverwrite})},
        {"hardlink-file-d1-tf", S({kDeleteRecreate}), S({kUnsupported}), S({kDeny}),
         S({kOverwrite, kMetadataMismatch}), S({kOverwrite, kMetadataMismatch})},
        {"hardlink-hardlink-d1-tf", S({kCorrupt, kDeleteRecreate}), S({kUnsupported}), S({kDeny}),
         S({kCorrupt, kDeleteRecreate}), S({kCorrupt, kOverwrite, kMetadataMismatch})},
        {"dir-dir-d1-tf", S({kOverwrite, kMetadataMismatch}), S({kOverwrite, kMetadataMismatch}),
         S({kDeny}), S({kOverwrite, kMetadataMismatch}), S({kOverwrite, kMetadataMismatch})},
        {"symlinkdir-dir-d1-tf", S({kOverwrite}), S({kCrash}), S({kDeny}), S({kDeny}),
         S({kOverwrite, kFollowSymlink})},
    };
    for (const Row& r : rows) {
        cells.push_back({r.id, "tar", r.tar});
        cells.push_back({r.id, "zip", r.zip});
        cells.push_back({r.id, "cp", r.cp});
        cells.push_back({r.id, "cp*", r.cp_star});
        cells.push_back({r.id, "rsync", r.rsync});
    }
    return cells;
}

// The sync-utility column: rename cells for files and directories,
// unsupported for pipes, devices and hardlinks.
inline std::vector<GoldenCell> golden_dropbox_cells(bool rename_cells_only) {
    using namespace harness;
    std::vector<GoldenCell> cells = {
        {"file-file-d1-tf", "dropbox", {kRename}},
        {"dir-dir-d1-tf", "dropbox", {kRename}},
        {"symlinkdir-dir-d1-tf", "dropbox", {kRename}},
    };
    if (!rename_cells_only) {
        cells.push_back({"symlinkfile-file-d1-tf", "dropbox", {kRename}});
        cells.push_back({"pipe-file-d1-tf", "dropbox", {kUnsupported}});
        cells.push_back({"hardlink-file-d1-tf", "dropbox", {kUnsupported}});
        cells.push_back({"hardlink-hardlink-d1-tf", "dropbox", {kUnsupported}});
    }
    return cells;
}

// --- naive expansion engine ------------------------------------------------
// Expands a list of path entries into a fresh vfs directory, the way an
// unsuspecting extractor would: mkdir missing parents, create leaves,
// overwrite on name reuse. Returns enough facts to decide whether folding
// changed the outcome versus a case-sensitive expansion.

struct ExpansionOutcome {
    int node_count = 0;          // nodes created under the destination
    bool fold_collided = false;  // some operation hit a byte-differing entry
    bool conflict = false;       // a component needed a dir but found a non-dir
};

inline ExpansionOutcome expand_entries(const std::vector<scanner::PathEntry>& entries,
                                       bool fold_flag, const std::string& profile_id = "ascii") {
    FsImage img;
    Metadata meta;
    meta.mode = 0755;
    img.mkdir("/", "x", meta, fold_flag ? FoldSpec::folded : FoldSpec::sensitive, profile_id);
    ExpansionOutcome out;

    for (const auto& e : entries) {
        std::string parent = "/x";
        bool dead = false;
        for (size_t i = 0; i + 1 < e.components.size(); ++i) {
            std::string child = FsImage::join(parent, e.components[i]);
            std::string resolved;
            auto existing = img.lookup(child, &resolved);
            if (existing) {
                const FsNode& n = img.node(*existing);
                auto parts = FsImage::split(resolved);
                if (parts.back() != e.components[i]) out.fold_collided = true;
                if (n.kind != NodeKind::directory) {
                    out.conflict = true;
                    dead = true;
                    break;
                }
                parent = resolved;
            } else {
                img.mkdir(parent, e.components[i], meta);
                parent = FsImage::join(parent, e.components[i]);
            }
        }
        if (dead) continue;
        const std::string& leaf = e.components.back();
        std::string child = FsImage::join(parent, leaf);
        std::string resolved;
        auto existing = img.lookup(child, &resolved);
        if (existing) {
            auto parts = FsImage::split(resolved);
            if (parts.back() != leaf) out.fold_collided = true;
            const FsNode& n = img.node(*existing);
            if (e.kind == scanner::EntryKind::directory) {
                if (n.kind != NodeKind::directory) out.conflict = true;
                continue;  // reuse
            }
            if (n.kind == NodeKind::directory) {
                out.conflict = true;
                continue;
            }
            // overwrite in place
            continue;
        }
        Metadata fm;
        fm.mode = 0644;
        switch (e.kind) {
            case scanner::EntryKind::directory:
                img.mkdir(parent, leaf, meta);
                break;
            case scanner::EntryKind::pipe:
                img.create(parent, leaf, NodeKind::pipe, fm);
                break;
            case scanner::EntryKind::device:
                img.create(parent, leaf, NodeKind::device, fm);
                break;
            case scanner::EntryKind::symlink:
                img.symlink("/nowhere", parent, leaf);
                break;
            default:
                img.create(parent, leaf, NodeKind::file, fm, {}, "x");
                break;
        }
    }
    out.node_count = static_cast<int>(img.all_paths().size());
    return out;
}

// True when expanding under the fold profile loses nodes or resolves some
// entry differently than a case-sensitive expansion would.
inline bool expansion_detects_collision(const std::vector<scanner::PathEntry>& entries,
                                        const std::string& profile_id = "ascii") {
    ExpansionOutcome folded = expand_entries(entries, true, profile_id);
    ExpansionOutcome plain = expand_entries(entries, false);
    return folded.fold_collided || folded.node_count != plain.node_count ||
           folded.conflict != plain.conflict;
}

// --- brute-force group counting ---------------------------------------------
// Quadratic re-derivation of the scanner's group count: cluster every raw
// prefix node by componentwise fold equality of its full path, then apply the
// grouping conditions per cluster.

inline int brute_force_group_count(const std::vector<scanner::PathEntry>& entries,
                                   const FoldProfile& profile) {
    struct Node {
        std::vector<std::string> raw_path;
        scanner::EntryKind kind;
        bool declared;
    };
    std::map<std::string, Node> nodes;  // keyed by raw path string, deduped
    for (const auto& e : entries) {
        std::string raw;
        for (size_t i = 0; i < e.components.size(); ++i) {
            raw += "/" + e.components[i];
            bool is_final = i + 1 == e.components.size();
            auto it = nodes.find(raw);
            Node n;
            n.raw_path.assign(e.components.begin(), e.components.begin() + i + 1);
            n.kind = is_final ? e.kind : scanner::EntryKind::directory;
            n.declared = is_final;
            if (it == nodes.end()) {
                nodes[raw] = n;
            } else {
                if (n.declared && n.kind != scanner::EntryKind::directory) it->second.kind = n.kind;
                it->second.declared = it->second.declared || n.declared;
            }
        }
    }

    auto fold_eq = [&](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (fold_name(a[i], profile) != fold_name(b[i], profile)) return false;
        return true;
    };

    // Cluster by full folded path, pairwise.
    std::vector<const Node*> order;
    for (auto& [raw, n] : nodes) order.push_back(&n);
    std::vector<int> cluster(order.size(), -1);
    int n_clusters = 0;
    for (size_t i = 0; i < order.size(); ++i) {
        if (cluster[i] != -1) continue;
        cluster[i] = n_clusters++;
        for (size_t j = i + 1; j < order.size(); ++j)
            if (cluster[j] == -1 && fold_eq(order[i]->raw_path, order[j]->raw_path))
                cluster[j] = cluster[i];
    }

    // Decide, per cluster, whether it forms a reported group. Parent
    // grouping is looked up recursively through the cluster of the parent
    // path of any member.
    std::map<int, std::vector<const Node*>> by_cluster;
    for (size_t i = 0; i < order.size(); ++i) by_cluster[cluster[i]].push_back(order[i]);

    auto cluster_of_path = [&](const std::vector<std::string>& path) -> int {
        for (size_t i = 0; i < order.size(); ++i)
            if (fold_eq(order[i]->raw_path, path)) return cluster[i];
        return -1;
    };

    std::map<int, bool> grouped;  // reported group
    std::map<int, bool> merging;  // children see multiple raw parents
    std::vector<int> clusters_by_depth;
    for (auto& [c, members] : by_cluster) clusters_by_depth.push_back(c);
    std::sort(clusters_by_depth.begin(), clusters_by_depth.end(), [&](int a, int b) {
        return by_cluster[a][0]->raw_path.size() < by_cluster[b][0]->raw_path.size();
    });

    int count = 0;
    for (int c : clusters_by_depth) {
        auto& members = by_cluster[c];
        std::set<std::string> raw_finals, raw_parents;
        bool all_dirs = true;
        for (const Node* n : members) {
            raw_finals.insert(n->raw_path.back());
            std::string parent;
            for (size_t i = 0; i + 1 < n->raw_path.size(); ++i) parent += "/" + n->raw_path[i];
            raw_parents.insert(parent);
            if (n->kind != scanner::EntryKind::directory) all_dirs = false;
        }
        bool parent_merging = false;
        if (members[0]->raw_path.size() > 1) {
            std::vector<std::string> parent_path(members[0]->raw_path.begin(),
                                                 members[0]->raw_path.end() - 1);
            int pc = cluster_of_path(parent_path);
            parent_merging = pc != -1 && merging[pc];
        }
        bool direct = raw_finals.size() >= 2;
        bool via_merge = parent_merging && raw_parents.size() >= 2 && !all_dirs;
        if (direct || via_merge) {
            ++count;
            merging[c] = true;
        } else if (parent_merging && raw_parents.size() >= 2) {
            merging[c] = true;  // silent same-named dir merge propagates
        }
    }
    return count;
}

}  // namespace collide::testsupport
