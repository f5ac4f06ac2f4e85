#pragma once

// Deterministic behavior models of the studied copy utilities, written as
// specifications-as-code against the vfs. Each model reproduces its documented
// per-cell collision responses and the documented operation sequences; none
// of them shells out to the real utility.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "collide/casegen.hpp"
#include "collide/error.hpp"
#include "collide/tracer.hpp"
#include "collide/vfs.hpp"

namespace collide::refutils {

enum class UtilityId { tar, zip, cp, cp_star, rsync, dropbox };

inline const char* utility_token(UtilityId u) {
    switch (u) {
        case UtilityId::tar: return "tar";
        case UtilityId::zip: return "zip";
        case UtilityId::cp: return "cp";
        case UtilityId::cp_star: return "cp*";
        case UtilityId::rsync: return "rsync";
        case UtilityId::dropbox: return "dropbox";
    }
    return "?";
}

inline std::optional<UtilityId> utility_from_token(std::string_view t) {
    if (t == "tar") return UtilityId::tar;
    if (t == "zip") return UtilityId::zip;
    if (t == "cp") return UtilityId::cp;
    if (t == "cp*" || t == "cp_star" || t == "cpstar") return UtilityId::cp_star;
    if (t == "rsync") return UtilityId::rsync;
    if (t == "dropbox") return UtilityId::dropbox;
    return std::nullopt;
}

struct UtilityModel {
    UtilityId id = UtilityId::tar;
    std::vector<std::string> flags;
    int step_limit = 10000;
};

inline UtilityModel model_for(UtilityId id) {
    UtilityModel m;
    m.id = id;
    switch (id) {
        case UtilityId::tar: m.flags = {"-cf", "-x", "-v"}; break;
        case UtilityId::zip: m.flags = {"-r", "--symlinks"}; break;
        case UtilityId::cp: m.flags = {"-a"}; break;
        case UtilityId::cp_star: m.flags = {"-a"}; break;
        case UtilityId::rsync: m.flags = {"-a", "-H"}; break;
        case UtilityId::dropbox: m.flags = {}; break;
    }
    return m;
}

enum class EventOp {
    probe,
    copy_file,
    make_dir,
    merge_dir,
    make_symlink,
    make_node,
    link_new,
    unlink,
    overwrite,
    write_through,
    set_meta,
    rename_conflict,
    skip_unsupported,
    degrade_hardlink,
    prompt,
    error,
    loop_detected,
};

struct CopyEvent {
    EventOp op = EventOp::copy_file;
    std::string dest_path;      // path as the utility addressed it
    std::string resolved_path;  // case-preserved path actually touched
    std::string src_path;       // provenance: source path being replicated
    int inode = -1;
    int prior_inode = -1;  // displaced or traversed node
    bool collided = false;
    std::string detail;
};

struct CopyOutcome {
    FsImage final_image{"00:39"};
    std::vector<CopyEvent> events;
    enum class Terminated { ok, error_reported, user_prompt, step_limit_hit } terminated =
        Terminated::ok;

    const CopyEvent* find(EventOp op) const {
        for (const auto& e : events)
            if (e.op == op) return &e;
        return nullptr;
    }
};

enum class PromptAnswer { overwrite, skip, rename, abort };

namespace detail {

struct SourceEntry {
    std::string rel;  // path relative to the source root
    NodeKind kind = NodeKind::file;
    Metadata meta;
    std::string content;  // file bytes or symlink target
    int src_inode = -1;
    int nlink = 1;
};

inline std::vector<SourceEntry> list_source(const FsImage& img, const std::string& src_root) {
    std::vector<SourceEntry> out;
    auto walk = [&](auto&& self, const std::string& dir, const std::string& rel) -> void {
        for (const std::string& name : img.readdir(dir)) {
            std::string child = FsImage::join(dir, name);
            std::string child_rel = rel.empty() ? name : rel + "/" + name;
            const FsNode& n = img.node(*img.lookup(child));
            SourceEntry e;
            e.rel = child_rel;
            e.kind = n.kind;
            e.meta = n.meta;
            e.content = n.content;
            e.src_inode = n.inode;
            e.nlink = n.nlink;
            out.push_back(std::move(e));
            if (n.kind == NodeKind::directory) self(self, child, child_rel);
        }
    };
    walk(walk, src_root, "");
    return out;
}

// Hardlink groups among regular files, in listing order.
inline std::map<int, std::vector<size_t>> hardlink_groups(const std::vector<SourceEntry>& entries) {
    std::map<int, std::vector<size_t>> groups;
    for (size_t i = 0; i < entries.size(); ++i)
        if (entries[i].kind == NodeKind::file && entries[i].nlink > 1)
            groups[entries[i].src_inode].push_back(i);
    for (auto it = groups.begin(); it != groups.end();) {
        if (it->second.size() < 2) it = groups.erase(it);
        else ++it;
    }
    return groups;
}

struct Runner {
    FsImage img;
    std::string target;
    CopyOutcome out;
    const std::vector<PromptAnswer>* script = nullptr;
    size_t script_pos = 0;

    explicit Runner(const FsImage& base, std::string target_root,
                    const std::vector<PromptAnswer>* prompt_script)
        : img(base), target(std::move(target_root)), script(prompt_script) {}

    std::string dest_of(const std::string& rel) const { return FsImage::join(target, rel); }

    std::pair<std::string, std::string> split_leaf(const std::string& path) const {
        auto parts = FsImage::split(path);
        std::string parent = "/";
        for (size_t i = 0; i + 1 < parts.size(); ++i) parent = FsImage::join(parent, parts[i]);
        return {parent, parts.back()};
    }

    // The directory entry a destination path would hit, if any.
    std::optional<std::pair<std::string, int>> existing_entry(const std::string& dest) const {
        std::string resolved;
        auto ino = img.lookup(dest, &resolved);
        if (!ino) return std::nullopt;
        return std::make_pair(resolved, *ino);
    }

    // lstat of the destination name before acting on it; a fold-equal,
    // byte-differing hit is recorded as a probe event
    std::optional<std::pair<std::string, int>> probe_existing(const std::string& dest,
                                                              const std::string& src_rel) {
        auto hit = existing_entry(dest);
        if (hit) {
            std::string got = FsImage::split(hit->first).back();
            std::string want = FsImage::split(dest).back();
            if (got != want) {
                CopyEvent e;
                e.op = EventOp::probe;
                e.dest_path = dest;
                e.resolved_path = hit->first;
                e.src_path = src_rel;
                e.inode = hit->second;
                e.collided = true;
                out.events.push_back(std::move(e));
            }
        }
        return hit;
    }

    CopyEvent& push(EventOp op, const std::string& dest, const std::string& src_rel) {
        CopyEvent e;
        e.op = op;
        e.dest_path = dest;
        e.src_path = src_rel;
        out.events.push_back(std::move(e));
        return out.events.back();
    }

    void finish() { out.final_image = img; }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// tar: archive in listing order (first hardlink occurrence stored as a file,
// later ones as link members), extraction deletes whatever a colliding name
// resolves to and recreates the member under the source's raw spelling.
// Directory members merge into existing directories and take the archived
// metadata.
// ---------------------------------------------------------------------------
inline CopyOutcome run_tar(const FsImage& base, const std::string& src_root,
                           const std::string& target_root) {
    detail::Runner r(base, target_root, nullptr);
    auto entries = detail::list_source(base, src_root);
    auto groups = detail::hardlink_groups(entries);
    std::map<size_t, std::string> link_to;  // entry index -> linkname (relative)
    std::set<int> seen_inode;
    std::map<int, std::string> first_rel;
    for (size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.kind != NodeKind::file || e.nlink <= 1) continue;
        auto it = first_rel.find(e.src_inode);
        if (it == first_rel.end()) first_rel[e.src_inode] = e.rel;
        else link_to[i] = it->second;
    }

    for (size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        std::string dest = r.dest_of(e.rel);
        auto [parent, leaf] = r.split_leaf(dest);
        try {

        if (e.kind == NodeKind::directory) {
            auto existing = r.probe_existing(dest, e.rel);
            if (existing && r.img.node(existing->second).kind == NodeKind::directory) {
                auto& ev = r.push(EventOp::merge_dir, dest, e.rel);
                ev.resolved_path = existing->first;
                ev.inode = existing->second;
                ev.collided = FsImage::split(existing->first).back() != leaf;
                r.img.set_meta(existing->first, e.meta);
                auto& mev = r.push(EventOp::set_meta, dest, e.rel);
                mev.resolved_path = existing->first;
                mev.inode = existing->second;
                mev.collided = ev.collided;
                continue;
            }
            if (existing) {
                auto ur = r.img.unlink(dest);
                auto& uev = r.push(EventOp::unlink, dest, e.rel);
                uev.resolved_path = ur.resolved_path;
                uev.inode = ur.inode;
                uev.collided = ur.collided;
            }
            auto mr = r.img.mkdir(parent, leaf, e.meta);
            auto& ev = r.push(EventOp::make_dir, dest, e.rel);
            ev.resolved_path = mr.resolved_path;
            ev.inode = mr.inode;
            continue;
        }

        if (auto lt = link_to.find(i); lt != link_to.end()) {
            // hardlink member: link newpath to the stored linkname
            std::string oldpath = r.dest_of(lt->second);
            if (r.probe_existing(dest, e.rel)) {
                auto ur = r.img.unlink(dest);
                auto& uev = r.push(EventOp::unlink, dest, e.rel);
                uev.resolved_path = ur.resolved_path;
                uev.inode = ur.inode;
                uev.collided = ur.collided;
            }
            auto lr = r.img.link(oldpath, parent, leaf);
            auto& ev = r.push(EventOp::link_new, dest, e.rel);
            ev.resolved_path = lr.resolved_path;
            ev.inode = lr.inode;
            ev.detail = oldpath;  // as addressed by the utility
            continue;
        }

        // file, symlink, pipe or device member: delete and recreate
        if (r.probe_existing(dest, e.rel)) {
            auto ur = r.img.unlink(dest);
            auto& uev = r.push(EventOp::unlink, dest, e.rel);
            uev.resolved_path = ur.resolved_path;
            uev.inode = ur.inode;
            uev.collided = ur.collided;
        }
        OpResult cr;
        EventOp op = EventOp::copy_file;
        if (e.kind == NodeKind::symlink) {
            cr = r.img.symlink(e.content, parent, leaf, e.meta);
            op = EventOp::make_symlink;
        } else if (e.kind == NodeKind::file) {
            cr = r.img.create(parent, leaf, NodeKind::file, e.meta, {}, e.content);
        } else {
            cr = r.img.create(parent, leaf, e.kind, e.meta);
            op = EventOp::make_node;
        }
        if (e.kind != NodeKind::symlink) r.img.set_meta(cr.resolved_path, e.meta);
        auto& ev = r.push(op, dest, e.rel);
        ev.resolved_path = cr.resolved_path;
        ev.inode = cr.inode;

        } catch (const Error& err) {
            // report and keep extracting the remaining members
            auto& ev = r.push(EventOp::error, dest, e.rel);
            ev.detail = err.what();
            r.out.terminated = CopyOutcome::Terminated::error_reported;
        }
    }
    r.finish();
    return r.out;
}

// ---------------------------------------------------------------------------
// zip: pipes, devices and hardlinks are not representable. Unsupported
// resources are skipped (hardlink members degrade to fresh regular copies),
// and names that would collide with a skipped resource are suppressed with
// them. Extracting a file over an existing name asks the user; extracting a
// directory over a fold-equal symlink loops in directory resolution until the
// step limit models the hang.
// ---------------------------------------------------------------------------
inline CopyOutcome run_zip(const FsImage& base, const std::string& src_root,
                           const std::string& target_root,
                           const std::vector<PromptAnswer>* script,
                           const FoldProfile& view_profile, int step_limit) {
    detail::Runner r(base, target_root, script);
    auto entries = detail::list_source(base, src_root);

    // archive stage: find unsupported resources and their colliding partners
    std::set<size_t> skip, degrade;
    for (size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.kind == NodeKind::pipe || e.kind == NodeKind::device) skip.insert(i);
        if (e.kind == NodeKind::file && e.nlink > 1) degrade.insert(i);
    }
    auto leaf_of = [](const std::string& rel) { return FsImage::split(rel).back(); };
    std::set<size_t> voided = skip;
    for (size_t i : degrade) voided.insert(i);
    std::set<size_t> suppressed;
    for (size_t i = 0; i < entries.size(); ++i) {
        if (voided.count(i)) continue;
        for (size_t v : voided) {
            if (names_collide(leaf_of(entries[i].rel), leaf_of(entries[v].rel), view_profile)) {
                suppressed.insert(i);
                break;
            }
        }
    }
    // degraded members that themselves collide with a live name are void too
    std::set<size_t> degraded_suppressed;
    for (size_t v : degrade) {
        for (size_t i = 0; i < entries.size(); ++i) {
            if (i == v) continue;
            if (names_collide(leaf_of(entries[v].rel), leaf_of(entries[i].rel), view_profile)) {
                degraded_suppressed.insert(v);
                break;
            }
        }
    }

    for (size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        std::string dest = r.dest_of(e.rel);
        auto [parent, leaf] = r.split_leaf(dest);

        if (skip.count(i)) {
            auto& ev = r.push(EventOp::skip_unsupported, dest, e.rel);
            ev.detail = kind_name(e.kind);
            continue;
        }
        if (suppressed.count(i) || degraded_suppressed.count(i)) {
            auto& ev = r.push(EventOp::skip_unsupported, dest, e.rel);
            ev.detail = "collides with an unsupported resource";
            continue;
        }

        if (e.kind == NodeKind::directory) {
            auto existing = r.probe_existing(dest, e.rel);
            if (existing) {
                const FsNode& n = r.img.node(existing->second);
                if (n.kind == NodeKind::directory) {
                    auto& ev = r.push(EventOp::merge_dir, dest, e.rel);
                    ev.resolved_path = existing->first;
                    ev.inode = existing->second;
                    ev.collided = FsImage::split(existing->first).back() != leaf;
                    r.img.set_meta(existing->first, e.meta);
                    auto& mev = r.push(EventOp::set_meta, dest, e.rel);
                    mev.resolved_path = existing->first;
                    mev.inode = existing->second;
                    mev.collided = ev.collided;
                    continue;
                }
                if (n.kind == NodeKind::symlink) {
                    // directory-resolution loop: the member wants a directory,
                    // the name keeps resolving to the symlink
                    auto& ev = r.push(EventOp::loop_detected, dest, e.rel);
                    ev.resolved_path = existing->first;
                    ev.inode = existing->second;
                    ev.collided = true;
                    ev.detail = "resolution loop; gave up after " + std::to_string(step_limit) +
                                " steps";
                    volatile int steps = 0;
                    for (int s = 0; s < step_limit; ++s) steps = steps + 1;
                    r.out.terminated = CopyOutcome::Terminated::step_limit_hit;
                    r.finish();
                    return r.out;
                }
            }
            if (!existing) {
                auto mr = r.img.mkdir(parent, leaf, e.meta);
                auto& ev = r.push(EventOp::make_dir, dest, e.rel);
                ev.resolved_path = mr.resolved_path;
                ev.inode = mr.inode;
            }
            continue;
        }

        // file, symlink or degraded hardlink member
        auto existing = r.probe_existing(dest, e.rel);
        if (existing && r.img.node(existing->second).kind != NodeKind::directory) {
            PromptAnswer answer;
            bool collided = FsImage::split(existing->first).back() != leaf;
            if (!r.script || r.script_pos >= r.script->size()) {
                auto& ev = r.push(EventOp::prompt, dest, e.rel);
                ev.resolved_path = existing->first;
                ev.inode = existing->second;
                ev.collided = collided;
                ev.detail = "replace " + existing->first + "?";
                r.out.terminated = CopyOutcome::Terminated::user_prompt;
                r.finish();
                return r.out;
            }
            answer = (*r.script)[r.script_pos++];
            auto& ev = r.push(EventOp::prompt, dest, e.rel);
            ev.resolved_path = existing->first;
            ev.inode = existing->second;
            ev.collided = collided;
            if (answer == PromptAnswer::abort) {
                ev.detail = "abort";
                r.out.terminated = CopyOutcome::Terminated::user_prompt;
                r.finish();
                return r.out;
            }
            if (answer == PromptAnswer::skip) {
                ev.detail = "skip";
                continue;
            }
            if (answer == PromptAnswer::rename) {
                ev.detail = "rename";
                std::string renamed = leaf + " (1)";
                auto cr = r.img.create(parent, renamed, NodeKind::file, e.meta, {}, e.content);
                auto& rev = r.push(EventOp::rename_conflict, FsImage::join(parent, renamed),
                                   e.rel);
                rev.resolved_path = cr.resolved_path;
                rev.inode = cr.inode;
                continue;
            }
            ev.detail = "overwrite";
            auto cr = r.img.create(parent, leaf, NodeKind::file, e.meta, {}, e.content);
            r.img.set_meta(cr.through_symlink ? cr.referent : cr.resolved_path, e.meta);
            auto& oev = r.push(EventOp::overwrite, dest, e.rel);
            oev.resolved_path = cr.resolved_path;
            oev.inode = cr.inode;
            oev.collided = collided;
            continue;
        }
        try {
            OpResult cr;
            EventOp op = EventOp::copy_file;
            if (e.kind == NodeKind::symlink) {
                cr = r.img.symlink(e.content, parent, leaf, e.meta);
                op = EventOp::make_symlink;
            } else {
                cr = r.img.create(parent, leaf, NodeKind::file, e.meta, {}, e.content);
                r.img.set_meta(cr.resolved_path, e.meta);
                if (degrade.count(i)) op = EventOp::degrade_hardlink;
            }
            auto& ev = r.push(op, dest, e.rel);
            ev.resolved_path = cr.resolved_path;
            ev.inode = cr.inode;
            if (degrade.count(i)) ev.detail = "hardlink stored as a fresh regular file";
        } catch (const Error& err) {
            auto& ev = r.push(EventOp::error, dest, e.rel);
            ev.detail = err.what();
            r.out.terminated = CopyOutcome::Terminated::error_reported;
        }
    }
    r.finish();
    return r.out;
}

// ---------------------------------------------------------------------------
// cp (one rooted tree): creates everything it copies with exclusive
// semantics, so the first collision denies the operation and stops the copy.
// ---------------------------------------------------------------------------
inline CopyOutcome run_cp(const FsImage& base, const std::string& src_root,
                          const std::string& target_root) {
    detail::Runner r(base, target_root, nullptr);
    auto entries = detail::list_source(base, src_root);
    CreateOptions excl;
    excl.exclusive = true;
    for (const auto& e : entries) {
        std::string dest = r.dest_of(e.rel);
        auto [parent, leaf] = r.split_leaf(dest);
        try {
            OpResult cr;
            EventOp op = EventOp::copy_file;
            switch (e.kind) {
                case NodeKind::directory: {
                    if (r.existing_entry(dest))
                        throw Error(Errc::exists, dest);
                    cr = r.img.mkdir(parent, leaf, e.meta);
                    op = EventOp::make_dir;
                    break;
                }
                case NodeKind::symlink:
                    if (r.existing_entry(dest)) throw Error(Errc::exists, dest);
                    cr = r.img.symlink(e.content, parent, leaf, e.meta);
                    op = EventOp::make_symlink;
                    break;
                case NodeKind::file:
                    cr = r.img.create(parent, leaf, NodeKind::file, e.meta, excl, e.content);
                    break;
                default:
                    cr = r.img.create(parent, leaf, e.kind, e.meta, excl);
                    op = EventOp::make_node;
                    break;
            }
            auto& ev = r.push(op, dest, e.rel);
            ev.resolved_path = cr.resolved_path;
            ev.inode = cr.inode;
        } catch (const Error& err) {
            auto& ev = r.push(EventOp::error, dest, e.rel);
            ev.detail = err.what();
            r.out.terminated = CopyOutcome::Terminated::error_reported;
            break;
        }
    }
    r.finish();
    return r.out;
}

// ---------------------------------------------------------------------------
// cp* (expanded top-level entries): overwrites existing files in place,
// writing through symlinks and pipes; multiply-linked source files remove
// the destination first and later members hardlink to the leader's
// destination path; a directory colliding with a non-directory is denied.
// ---------------------------------------------------------------------------
inline CopyOutcome run_cp_star(const FsImage& base, const std::string& src_root,
                               const std::string& target_root) {
    detail::Runner r(base, target_root, nullptr);
    auto entries = detail::list_source(base, src_root);
    std::map<int, std::string> leader_dest;  // src inode -> first copied dest rel

    for (const auto& e : entries) {
        std::string dest = r.dest_of(e.rel);
        auto [parent, leaf] = r.split_leaf(dest);
        try {
            switch (e.kind) {
                case NodeKind::directory: {
                    auto existing = r.probe_existing(dest, e.rel);
                    if (existing) {
                        const FsNode& n = r.img.node(existing->second);
                        if (n.kind != NodeKind::directory)
                            throw Error(Errc::not_a_directory,
                                        "cannot overwrite non-directory " + existing->first +
                                            " with directory " + dest);
                        auto& ev = r.push(EventOp::merge_dir, dest, e.rel);
                        ev.resolved_path = existing->first;
                        ev.inode = existing->second;
                        ev.collided = FsImage::split(existing->first).back() != leaf;
                        r.img.set_meta(existing->first, e.meta);
                        auto& mev = r.push(EventOp::set_meta, dest, e.rel);
                        mev.resolved_path = existing->first;
                        mev.inode = existing->second;
                        mev.collided = ev.collided;
                    } else {
                        auto cr = r.img.mkdir(parent, leaf, e.meta);
                        auto& ev = r.push(EventOp::make_dir, dest, e.rel);
                        ev.resolved_path = cr.resolved_path;
                        ev.inode = cr.inode;
                    }
                    break;
                }
                case NodeKind::file: {
                    bool linked = e.nlink > 1;
                    if (linked) {
                        auto it = leader_dest.find(e.src_inode);
                        if (it != leader_dest.end()) {
                            // later member: hardlink to the leader's dest path
                            std::string oldpath = r.dest_of(it->second);
                            if (r.probe_existing(dest, e.rel)) {
                                auto ur = r.img.unlink(dest);
                                auto& uev = r.push(EventOp::unlink, dest, e.rel);
                                uev.resolved_path = ur.resolved_path;
                                uev.inode = ur.inode;
                                uev.collided = ur.collided;
                            }
                            auto lr = r.img.link(oldpath, parent, leaf);
                            auto& ev = r.push(EventOp::link_new, dest, e.rel);
                            ev.resolved_path = lr.resolved_path;
                            ev.inode = lr.inode;
                            ev.detail = oldpath;
                            break;
                        }
                        leader_dest[e.src_inode] = e.rel;
                        // leader of a link group: remove a colliding
                        // destination before creating, to keep the link
                        // topology it is about to build
                        if (r.probe_existing(dest, e.rel)) {
                            auto ur = r.img.unlink(dest);
                            auto& uev = r.push(EventOp::unlink, dest, e.rel);
                            uev.resolved_path = ur.resolved_path;
                            uev.inode = ur.inode;
                            uev.collided = ur.collided;
                        }
                        auto cr =
                            r.img.create(parent, leaf, NodeKind::file, e.meta, {}, e.content);
                        auto& ev = r.push(EventOp::copy_file, dest, e.rel);
                        ev.resolved_path = cr.resolved_path;
                        ev.inode = cr.inode;
                        break;
                    }
                    // plain file: open for write through whatever the name
                    // resolves to
                    auto existing = r.probe_existing(dest, e.rel);
                    auto cr = r.img.create(parent, leaf, NodeKind::file, e.meta, {}, e.content);
                    if (cr.through_symlink) {
                        r.img.set_meta(cr.referent, e.meta);
                        auto& ev = r.push(EventOp::write_through, dest, e.rel);
                        ev.resolved_path = cr.referent;
                        ev.inode = cr.inode;
                        ev.prior_inode = existing ? existing->second : -1;
                        ev.collided = cr.collided;
                        ev.detail = cr.referent;
                    } else if (existing) {
                        const FsNode& n = r.img.node(cr.inode);
                        if (n.kind == NodeKind::pipe || n.kind == NodeKind::device) {
                            auto& ev = r.push(EventOp::write_through, dest, e.rel);
                            ev.resolved_path = cr.resolved_path;
                            ev.inode = cr.inode;
                            ev.collided = cr.collided;
                            ev.detail = "wrote into " + std::string(kind_name(n.kind));
                        } else {
                            r.img.set_meta(cr.resolved_path, e.meta);
                            auto& ev = r.push(EventOp::overwrite, dest, e.rel);
                            ev.resolved_path = cr.resolved_path;
                            ev.inode = cr.inode;
                            ev.collided = cr.collided;
                        }
                    } else {
                        r.img.set_meta(cr.resolved_path, e.meta);
                        auto& ev = r.push(EventOp::copy_file, dest, e.rel);
                        ev.resolved_path = cr.resolved_path;
                        ev.inode = cr.inode;
                    }
                    break;
                }
                case NodeKind::symlink: {
                    if (r.probe_existing(dest, e.rel)) {
                        auto ur = r.img.unlink(dest);
                        auto& uev = r.push(EventOp::unlink, dest, e.rel);
                        uev.resolved_path = ur.resolved_path;
                        uev.inode = ur.inode;
                        uev.collided = ur.collided;
                    }
                    auto cr = r.img.symlink(e.content, parent, leaf, e.meta);
                    auto& ev = r.push(EventOp::make_symlink, dest, e.rel);
                    ev.resolved_path = cr.resolved_path;
                    ev.inode = cr.inode;
                    break;
                }
                default: {  // pipe or device
                    if (r.probe_existing(dest, e.rel)) {
                        auto ur = r.img.unlink(dest);
                        auto& uev = r.push(EventOp::unlink, dest, e.rel);
                        uev.resolved_path = ur.resolved_path;
                        uev.inode = ur.inode;
                        uev.collided = ur.collided;
                    }
                    auto cr = r.img.create(parent, leaf, e.kind, e.meta);
                    auto& ev = r.push(EventOp::make_node, dest, e.rel);
                    ev.resolved_path = cr.resolved_path;
                    ev.inode = cr.inode;
                    break;
                }
            }
        } catch (const Error& err) {
            auto& ev = r.push(EventOp::error, dest, e.rel);
            ev.detail = err.what();
            r.out.terminated = CopyOutcome::Terminated::error_reported;
            break;
        }
    }
    r.finish();
    return r.out;
}

// ---------------------------------------------------------------------------
// rsync -aH: directories are assumed to map one-to-one onto the destination
// (an existing fold-equal symlink is taken for the directory, so children
// are created through it); plain files replace the node behind an existing
// entry while the entry keeps its raw name; the hardlink transfer sequence
// for the two-pair fixture follows the documented four steps.
// ---------------------------------------------------------------------------
inline CopyOutcome run_rsync(const FsImage& base, const std::string& src_root,
                             const std::string& target_root) {
    detail::Runner r(base, target_root, nullptr);
    auto entries = detail::list_source(base, src_root);
    auto groups = detail::hardlink_groups(entries);

    std::set<size_t> handled;
    struct Step {
        enum { transfer, link } what;
        size_t idx;
        size_t leader_idx;
    };
    std::vector<Step> hardlink_plan;
    if (groups.size() == 2) {
        std::vector<std::vector<size_t>> g;
        for (auto& [ino, members] : groups)
            if (members.size() == 2) g.push_back(members);
        if (g.size() == 2) {
            // order the groups by first listing appearance
            if (g[1][0] < g[0][0]) std::swap(g[0], g[1]);
            // transfer the second member of the later group, then the first
            // member of the earlier one; link the remaining two through the
            // names just written
            hardlink_plan.push_back({Step::transfer, g[1][1], g[1][1]});
            hardlink_plan.push_back({Step::transfer, g[0][0], g[0][0]});
            hardlink_plan.push_back({Step::link, g[1][0], g[1][1]});
            hardlink_plan.push_back({Step::link, g[0][1], g[0][0]});
            for (const auto& s : hardlink_plan) handled.insert(s.idx);
        }
    }

    std::map<int, std::string> leader_dest;

    auto escapes_target = [&](const std::string& path) {
        return !(path.size() > r.target.size() &&
                 path.compare(0, r.target.size(), r.target) == 0 &&
                 path[r.target.size()] == '/');
    };

    auto transfer_file = [&](const detail::SourceEntry& e) {
        std::string dest = r.dest_of(e.rel);
        auto [parent, leaf] = r.split_leaf(dest);
        auto existing = r.probe_existing(dest, e.rel);
        if (!existing) {
            auto cr = r.img.create(parent, leaf, NodeKind::file, e.meta, {}, e.content);
            if (cr.through_symlink || escapes_target(cr.resolved_path)) {
                // a symlink in the destination chain routed the write
                // elsewhere
                auto& ev = r.push(EventOp::write_through, dest, e.rel);
                ev.resolved_path = cr.through_symlink ? cr.referent : cr.resolved_path;
                ev.inode = cr.inode;
                ev.collided = cr.collided;
                ev.detail = ev.resolved_path;
                return;
            }
            r.img.set_meta(cr.resolved_path, e.meta);
            auto& ev = r.push(EventOp::copy_file, dest, e.rel);
            ev.resolved_path = cr.resolved_path;
            ev.inode = cr.inode;
            return;
        }
        const FsNode& n = r.img.node(existing->second);
        bool collided = FsImage::split(existing->first).back() != leaf;
        if (n.kind == NodeKind::pipe || n.kind == NodeKind::device) {
            auto cr = r.img.create(parent, leaf, NodeKind::file, e.meta, {}, e.content);
            auto& ev = r.push(EventOp::write_through, dest, e.rel);
            ev.resolved_path = cr.resolved_path;
            ev.inode = cr.inode;
            ev.collided = collided;
            ev.detail = "wrote into " + std::string(kind_name(n.kind));
            return;
        }
        // replace the node, keep the entry's raw name (temp file renamed
        // onto the resolved entry)
        std::string entry_path = existing->first;
        auto ur = r.img.unlink(entry_path);
        Metadata m = e.meta;
        auto cr = r.img.create(r.split_leaf(entry_path).first, ur.entry_raw, NodeKind::file, m,
                               {}, e.content);
        auto& ev = r.push(EventOp::overwrite, dest, e.rel);
        ev.resolved_path = cr.resolved_path;
        ev.inode = cr.inode;
        ev.prior_inode = ur.inode;
        ev.collided = collided;
        ev.detail = "replaced node behind existing entry";
    };

    // pass 1: the generator walk creates directories, symlinks and special
    // nodes in listing order; file data transfers run afterwards
    for (size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (e.kind == NodeKind::file) continue;
        std::string dest = r.dest_of(e.rel);
        auto [parent, leaf] = r.split_leaf(dest);
        auto existing = r.probe_existing(dest, e.rel);
        if (e.kind == NodeKind::directory) {
            if (existing) {
                const FsNode& n = r.img.node(existing->second);
                bool collided = FsImage::split(existing->first).back() != leaf;
                if (n.kind == NodeKind::directory) {
                    auto& ev = r.push(EventOp::merge_dir, dest, e.rel);
                    ev.resolved_path = existing->first;
                    ev.inode = existing->second;
                    ev.collided = collided;
                    r.img.set_meta(existing->first, e.meta);
                    auto& mev = r.push(EventOp::set_meta, dest, e.rel);
                    mev.resolved_path = existing->first;
                    mev.inode = existing->second;
                    mev.collided = collided;
                } else if (n.kind == NodeKind::symlink) {
                    // assumed to be the directory already; children will
                    // resolve through it
                    auto& ev = r.push(EventOp::merge_dir, dest, e.rel);
                    ev.resolved_path = existing->first;
                    ev.inode = existing->second;
                    ev.collided = collided;
                    ev.detail = "existing symlink assumed to be this directory";
                } else {
                    auto& ev = r.push(EventOp::error, dest, e.rel);
                    ev.detail = "cannot replace non-directory with directory";
                    r.out.terminated = CopyOutcome::Terminated::error_reported;
                    r.finish();
                    return r.out;
                }
            } else {
                auto cr = r.img.mkdir(parent, leaf, e.meta);
                auto& ev = r.push(EventOp::make_dir, dest, e.rel);
                ev.resolved_path = cr.resolved_path;
                ev.inode = cr.inode;
            }
            continue;
        }
        if (e.kind == NodeKind::symlink) {
            if (existing) {
                auto ur = r.img.unlink(existing->first);
                auto cr = r.img.symlink(e.content, r.split_leaf(existing->first).first,
                                        ur.entry_raw, e.meta);
                auto& ev = r.push(EventOp::overwrite, dest, e.rel);
                ev.resolved_path = cr.resolved_path;
                ev.inode = cr.inode;
                ev.prior_inode = ur.inode;
                ev.collided = FsImage::split(existing->first).back() != leaf;
            } else {
                auto cr = r.img.symlink(e.content, parent, leaf, e.meta);
                auto& ev = r.push(EventOp::make_symlink, dest, e.rel);
                ev.resolved_path = cr.resolved_path;
                ev.inode = cr.inode;
            }
            continue;
        }
        // pipe or device
        if (existing) {
            auto ur = r.img.unlink(existing->first);
            auto cr = r.img.create(r.split_leaf(existing->first).first, ur.entry_raw, e.kind,
                                   e.meta);
            auto& ev = r.push(EventOp::overwrite, dest, e.rel);
            ev.resolved_path = cr.resolved_path;
            ev.inode = cr.inode;
            ev.prior_inode = ur.inode;
            ev.collided = FsImage::split(existing->first).back() != leaf;
        } else {
            auto cr = r.img.create(parent, leaf, e.kind, e.meta);
            auto& ev = r.push(EventOp::make_node, dest, e.rel);
            ev.resolved_path = cr.resolved_path;
            ev.inode = cr.inode;
        }
    }

    // a failed link (identical raw name already present) retries after
    // unlinking the destination, the way -H recovers
    auto robust_link = [&](const std::string& oldpath, const std::string& dest,
                           const std::string& src_rel) {
        auto [parent, leaf] = r.split_leaf(dest);
        try {
            auto lr = r.img.link(oldpath, parent, leaf);
            auto& ev = r.push(EventOp::link_new, dest, src_rel);
            ev.resolved_path = lr.resolved_path;
            ev.inode = lr.inode;
            ev.prior_inode = lr.prior_inode;
            ev.collided = lr.collided;
            ev.detail = oldpath;
        } catch (const Error&) {
            auto ur = r.img.unlink(dest);
            auto& uev = r.push(EventOp::unlink, dest, src_rel);
            uev.resolved_path = ur.resolved_path;
            uev.inode = ur.inode;
            uev.collided = ur.collided;
            auto lr = r.img.link(oldpath, parent, leaf);
            auto& ev = r.push(EventOp::link_new, dest, src_rel);
            ev.resolved_path = lr.resolved_path;
            ev.inode = lr.inode;
            ev.prior_inode = lr.prior_inode;
            ev.collided = lr.collided;
            ev.detail = oldpath;
        }
    };

    // pass 2: hardlink plan, if the fixture shape matched
    for (const Step& s : hardlink_plan) {
        const auto& e = entries[s.idx];
        std::string dest = r.dest_of(e.rel);
        if (s.what == Step::transfer) {
            transfer_file(e);
            leader_dest[e.src_inode] = e.rel;
        } else {
            robust_link(r.dest_of(entries[s.leader_idx].rel), dest, e.rel);
        }
    }

    // pass 3: regular file transfers in listing order
    for (size_t i = 0; i < entries.size(); ++i) {
        if (handled.count(i)) continue;
        const auto& e = entries[i];
        if (e.kind != NodeKind::file) continue;
        std::string dest = r.dest_of(e.rel);
        if (e.nlink > 1) {
            auto it = leader_dest.find(e.src_inode);
            if (it != leader_dest.end()) {
                robust_link(r.dest_of(it->second), dest, e.rel);
                continue;
            }
            leader_dest[e.src_inode] = e.rel;
        }
        transfer_file(e);
    }
    r.finish();
    return r.out;
}

// ---------------------------------------------------------------------------
// dropbox-like sync: treats every target as case-insensitive and renames the
// later of two colliding names by appending " (Case Conflicts)". Pipes,
// devices and hardlinks do not transfer.
// ---------------------------------------------------------------------------
inline CopyOutcome run_dropbox(const FsImage& base, const std::string& src_root,
                               const std::string& target_root, const FoldProfile& view_profile) {
    detail::Runner r(base, target_root, nullptr);
    auto entries = detail::list_source(base, src_root);
    // source rel prefix -> renamed destination rel prefix
    std::map<std::string, std::string> renames;

    auto dest_rel_of = [&](const std::string& rel) {
        // apply the longest renamed prefix
        std::string best_from, best_to;
        for (const auto& [from, to] : renames) {
            if (rel == from || rel.rfind(from + "/", 0) == 0) {
                if (from.size() > best_from.size()) {
                    best_from = from;
                    best_to = to;
                }
            }
        }
        if (best_from.empty()) return rel;
        return best_to + rel.substr(best_from.size());
    };

    for (const auto& e : entries) {
        if (e.kind == NodeKind::pipe || e.kind == NodeKind::device ||
            (e.kind == NodeKind::file && e.nlink > 1)) {
            auto& ev = r.push(EventOp::skip_unsupported, r.dest_of(e.rel), e.rel);
            ev.detail = e.kind == NodeKind::file ? "hardlink" : kind_name(e.kind);
            continue;
        }
        std::string rel = dest_rel_of(e.rel);
        std::string dest = r.dest_of(rel);
        auto [parent, leaf] = r.split_leaf(dest);

        // proactive conflict check against its own case-insensitive view
        bool conflict = false;
        std::string existing_raw;
        if (r.img.exists(parent)) {
            for (const std::string& name : r.img.readdir(parent)) {
                if (name != leaf && names_collide(name, leaf, view_profile)) {
                    conflict = true;
                    existing_raw = name;
                    break;
                }
                if (name == leaf && e.kind != NodeKind::directory) {
                    conflict = false;  // exact name: plain sync overwrite
                }
            }
        }
        if (conflict) {
            std::string renamed = leaf + " (Case Conflicts)";
            renames[e.rel] = rel.substr(0, rel.size() - leaf.size()) + renamed;
            auto& ev = r.push(EventOp::rename_conflict, FsImage::join(parent, renamed), e.rel);
            ev.detail = "collides with " + existing_raw;
            leaf = renamed;
            dest = FsImage::join(parent, renamed);
        }
        switch (e.kind) {
            case NodeKind::directory: {
                if (!r.img.exists(dest)) {
                    auto cr = r.img.mkdir(parent, leaf, e.meta);
                    auto& ev = r.push(EventOp::make_dir, dest, e.rel);
                    ev.resolved_path = cr.resolved_path;
                    ev.inode = cr.inode;
                }
                break;
            }
            case NodeKind::symlink: {
                auto cr = r.img.symlink(e.content, parent, leaf, e.meta);
                auto& ev = r.push(EventOp::make_symlink, dest, e.rel);
                ev.resolved_path = cr.resolved_path;
                ev.inode = cr.inode;
                break;
            }
            default: {
                auto cr = r.img.create(parent, leaf, NodeKind::file, e.meta, {}, e.content);
                r.img.set_meta(cr.resolved_path, e.meta);
                auto& ev = r.push(EventOp::copy_file, dest, e.rel);
                ev.resolved_path = cr.resolved_path;
                ev.inode = cr.inode;
                break;
            }
        }
    }
    r.finish();
    return r.out;
}

inline CopyOutcome run_model(const UtilityModel& model, const FsImage& base,
                             const std::string& src_root, const std::string& target_root,
                             const std::vector<PromptAnswer>* prompt_script = nullptr) {
    const FoldProfile& ascii = profile_by_name("ascii");
    switch (model.id) {
        case UtilityId::tar: return run_tar(base, src_root, target_root);
        case UtilityId::zip:
            return run_zip(base, src_root, target_root, prompt_script, ascii, model.step_limit);
        case UtilityId::cp: return run_cp(base, src_root, target_root);
        case UtilityId::cp_star: return run_cp_star(base, src_root, target_root);
        case UtilityId::rsync: return run_rsync(base, src_root, target_root);
        case UtilityId::dropbox: return run_dropbox(base, src_root, target_root, ascii);
    }
    throw Error(Errc::bad_input, "unknown utility model");
}

// ---------------------------------------------------------------------------
// Scenario replays: the documented incidents executed step by step, with
// their end states checked.
// ---------------------------------------------------------------------------
enum class Scenario { git_cve, rsync_traversal, httpd_migration, dpkg_db };

inline const char* scenario_token(Scenario s) {
    switch (s) {
        case Scenario::git_cve: return "git_cve";
        case Scenario::rsync_traversal: return "rsync_traversal";
        case Scenario::httpd_migration: return "httpd_migration";
        case Scenario::dpkg_db: return "dpkg_db";
    }
    return "?";
}

inline std::optional<Scenario> scenario_from_token(std::string_view t) {
    if (t == "git_cve") return Scenario::git_cve;
    if (t == "rsync_traversal") return Scenario::rsync_traversal;
    if (t == "httpd_migration") return Scenario::httpd_migration;
    if (t == "dpkg_db") return Scenario::dpkg_db;
    return std::nullopt;
}

struct ScenarioResult {
    CopyOutcome outcome;
    struct Check {
        std::string claim;
        bool holds = false;
    };
    std::vector<Check> checks;

    bool ok() const {
        for (const auto& c : checks)
            if (!c.holds) return false;
        return true;
    }
};

namespace detail {

inline FsImage scenario_environment() {
    FsImage img("00:39");
    Metadata dir_meta;
    dir_meta.mode = 0755;
    img.mkdir("/", "src", dir_meta, FoldSpec::sensitive);
    img.mkdir("/", "dst", dir_meta, FoldSpec::folded, "ascii");
    Metadata tmp_meta;
    tmp_meta.mode = 01777;
    img.mkdir("/", "tmp", tmp_meta, FoldSpec::sensitive);
    return img;
}

}  // namespace detail

inline ScenarioResult run_scenario(Scenario which) {
    ScenarioResult result;
    switch (which) {
        case Scenario::git_cve: {
            // An out-of-order checkout on a case-insensitive clone: the
            // colliding symlink replaces the directory, and the deferred
            // script lands inside the hook directory.
            FsImage img("00:39");
            Metadata dm;
            dm.mode = 0755;
            img.mkdir("/", "repo", dm, FoldSpec::folded, "ascii");
            img.mkdir("/repo", ".git", dm);
            img.mkdir("/repo/.git", "hooks", dm);
            Metadata fm;
            fm.mode = 0644;
            // 1. create the tracked files; the script download is deferred
            img.mkdir("/repo", "A", dm);
            img.create("/repo/A", "file1", NodeKind::file, fm, {}, "one");
            img.create("/repo/A", "file2", NodeKind::file, fm, {}, "two");
            // 2. the entry 'a' collides with 'A', so 'A' is removed first
            img.unlink("/repo/A/file1");
            img.unlink("/repo/A/file2");
            img.unlink("/repo/A");
            img.symlink(".git/hooks", "/repo", "a");
            // 3. the deferred write resolves 'A' through the symlink
            Metadata xm;
            xm.mode = 0755;
            std::string payload = "#!/bin/sh\necho owned\n";
            auto cr = img.create("/repo/A", "post-checkout", NodeKind::file, xm, {}, payload);
            result.outcome.final_image = img;
            auto hook = img.lookup("/repo/.git/hooks/post-checkout");
            result.checks.push_back({"hook script exists under .git/hooks", hook.has_value()});
            result.checks.push_back(
                {"hook script carries the adversary payload",
                 hook && img.node(*hook).content == payload});
            result.checks.push_back(
                {"hook script is executable", hook && (img.node(*hook).meta.mode & 0111) != 0});
            result.checks.push_back(
                {"the deferred write resolved through the colliding entry",
                 cr.resolved_path == "/repo/.git/hooks/post-checkout"});
            return result;
        }
        case Scenario::rsync_traversal: {
            FsImage img = detail::scenario_environment();
            casegen::materialize(casegen::fixtures::rsync_traversal(), img, "/src");
            result.outcome = run_rsync(img, "/src", "/dst");
            const FsImage& fin = result.outcome.final_image;
            auto leaked = fin.lookup("/tmp/confidential");
            result.checks.push_back(
                {"a node was created at the symlink referent /tmp/confidential",
                 leaked.has_value()});
            result.checks.push_back(
                {"the leaked node carries the confidential payload",
                 leaked && fin.node(*leaked).content == "confidential payload"});
            result.checks.push_back(
                {"the destination keeps the symlink, not a directory",
                 fin.lookup("/dst/TOPDIR/secret").has_value() &&
                     fin.node(*fin.lookup("/dst/TOPDIR/secret")).kind == NodeKind::symlink});
            return result;
        }
        case Scenario::httpd_migration: {
            FsImage img = detail::scenario_environment();
            casegen::materialize(casegen::fixtures::httpd_adversary(), img, "/src");
            result.outcome = run_tar(img, "/src", "/dst");
            const FsImage& fin = result.outcome.final_image;
            auto hidden = fin.lookup("/dst/www/hidden");
            auto htaccess = fin.lookup("/dst/www/protected/.htaccess");
            result.checks.push_back(
                {"hidden/ mode raised to 755", hidden && fin.node(*hidden).meta.mode == 0755});
            result.checks.push_back(
                {"protected/.htaccess emptied",
                 htaccess && fin.node(*htaccess).content.empty()});
            result.checks.push_back(
                {"secret.txt still present behind the weakened directory",
                 fin.exists("/dst/www/hidden/secret.txt")});
            return result;
        }
        case Scenario::dpkg_db: {
            // The install database compares names bytewise while the file
            // system resolves fold-equal, so a package shipping Makefile
            // replaces an installed makefile unchecked.
            FsImage img("00:39");
            Metadata dm;
            dm.mode = 0755;
            img.mkdir("/", "fs", dm, FoldSpec::folded, "ascii");
            img.mkdir("/fs", "usr", dm);
            img.mkdir("/fs/usr", "share", dm);
            img.mkdir("/fs/usr/share", "pkg", dm);
            Metadata fm;
            fm.mode = 0644;
            std::set<std::string> db;
            img.create("/fs/usr/share/pkg", "makefile", NodeKind::file, fm, {},
                       "original recipe");
            db.insert("usr/share/pkg/makefile");

            std::string incoming = "usr/share/pkg/Makefile";
            bool db_blocked = db.count(incoming) != 0;  // bytewise comparison
            OpResult cr;
            if (!db_blocked) {
                cr = img.create("/fs/usr/share/pkg", "Makefile", NodeKind::file, fm, {},
                                "evil recipe");
                db.insert(incoming);
            }
            result.outcome.final_image = img;
            CopyEvent ev;
            ev.op = EventOp::overwrite;
            ev.dest_path = "/fs/usr/share/pkg/Makefile";
            ev.resolved_path = cr.resolved_path;
            ev.inode = cr.inode;
            ev.collided = cr.collided;
            result.outcome.events.push_back(ev);
            result.checks.push_back({"database check passed (bytewise miss)", !db_blocked});
            result.checks.push_back(
                {"installed makefile silently replaced",
                 img.read("/fs/usr/share/pkg/makefile") == "evil recipe"});
            result.checks.push_back(
                {"file system holds one entry while the database tracks two names",
                 img.readdir("/fs/usr/share/pkg").size() == 1 && db.size() == 2});
            return result;
        }
    }
    throw Error(Errc::bad_input, "unknown scenario");
}

// Trace records derived from a model run, in the normalized tracer format.
inline std::vector<tracer::TraceRecord> trace_of(const CopyOutcome& outcome,
                                                 const std::string& program,
                                                 const std::string& device = "00:39") {
    std::vector<tracer::TraceRecord> out;
    long seq = 1;
    auto rec = [&](tracer::OpClass oc, const std::string& syscall, const std::string& path,
                   long inode) {
        tracer::TraceRecord r;
        r.seq = seq++;
        r.op_class = oc;
        r.syscall = syscall;
        r.program = program;
        r.pid = 1000;
        r.device = device;
        r.inode = inode;
        r.path = path;
        out.push_back(std::move(r));
    };
    for (const CopyEvent& e : outcome.events) {
        switch (e.op) {
            case EventOp::probe:
                rec(tracer::OpClass::use, "newfstatat", e.dest_path, e.inode);
                break;
            case EventOp::copy_file:
            case EventOp::degrade_hardlink:
                rec(tracer::OpClass::create, "openat", e.dest_path, e.inode);
                break;
            case EventOp::make_dir:
                rec(tracer::OpClass::create, "mkdir", e.dest_path, e.inode);
                break;
            case EventOp::make_symlink:
                rec(tracer::OpClass::create, "symlink", e.dest_path, e.inode);
                break;
            case EventOp::make_node:
                rec(tracer::OpClass::create, "mknod", e.dest_path, e.inode);
                break;
            case EventOp::link_new:
                rec(tracer::OpClass::use, "link", e.detail, e.inode);
                rec(tracer::OpClass::create, "link", e.dest_path, e.inode);
                break;
            case EventOp::merge_dir:
                rec(tracer::OpClass::use, "mkdir", e.dest_path, e.inode);
                break;
            case EventOp::overwrite:
                rec(tracer::OpClass::use, "openat", e.dest_path,
                    e.prior_inode >= 0 ? e.prior_inode : e.inode);
                break;
            case EventOp::write_through:
                rec(tracer::OpClass::use, "openat", e.dest_path,
                    e.prior_inode >= 0 ? e.prior_inode : e.inode);
                break;
            case EventOp::unlink:
                rec(tracer::OpClass::del, "unlink", e.dest_path, e.inode);
                break;
            case EventOp::set_meta:
                if (e.collided) rec(tracer::OpClass::use, "chmod", e.dest_path, e.inode);
                break;
            case EventOp::rename_conflict:
                rec(tracer::OpClass::create, "openat", e.dest_path, e.inode);
                break;
            case EventOp::skip_unsupported:
            case EventOp::prompt:
            case EventOp::error:
            case EventOp::loop_detected:
                break;
        }
    }
    return out;
}

}  // namespace collide::refutils
