#pragma once

// Classifies the observed effects of a copy run into the response-code
// vocabulary used throughout: a cell is a SET of codes.
//
//   ×  delete & recreate     +  overwrite / merge      C  corrupt non-colliding
//   ≠  metadata mismatch     T  symlink traversal      R  rename
//   A  ask the user          E  deny with error        ∞  crash or hang
//   −  unsupported type
//
// Every emitted code carries at least one evidence item. Timestamps are
// excluded from mismatch detection unless strict_times is set.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "collide/diff.hpp"
#include "collide/error.hpp"
#include "collide/fold.hpp"
#include "collide/refutils.hpp"
#include "collide/vfs.hpp"

namespace collide::harness {

inline constexpr const char* kDeleteRecreate = "×";  // ×
inline constexpr const char* kOverwrite = "+";
inline constexpr const char* kCorrupt = "C";
inline constexpr const char* kMetadataMismatch = "≠";  // ≠
inline constexpr const char* kFollowSymlink = "T";
inline constexpr const char* kRename = "R";
inline constexpr const char* kAskUser = "A";
inline constexpr const char* kDeny = "E";
inline constexpr const char* kCrash = "∞";  // ∞
inline constexpr const char* kUnsupported = "−";  // −

struct Classification {
    std::set<std::string> codes;
    struct Evidence {
        std::string code;
        std::string detail;
    };
    std::vector<Evidence> evidence;
    std::vector<std::string> notes;

    bool has(const std::string& code) const { return codes.count(code) != 0; }

    void emit(const std::string& code, const std::string& detail) {
        codes.insert(code);
        evidence.push_back({code, detail});
    }
};

struct ClassifyOptions {
    bool strict_times = false;
};

namespace detail {

using refutils::CopyEvent;
using refutils::CopyOutcome;
using refutils::EventOp;

struct CollisionRecord {
    std::string folded_entry_path;  // folded path of the contested entry
    std::string dir_path;           // raw path of the directory holding it
    std::string target_raw;
    std::string source_raw;
    int original_inode = -1;
    std::string detail;
};

inline std::string parent_of(const std::string& path) {
    auto parts = FsImage::split(path);
    std::string parent = "/";
    for (size_t i = 0; i + 1 < parts.size(); ++i) parent = FsImage::join(parent, parts[i]);
    return parent;
}

inline std::string leaf_of(const std::string& path) { return FsImage::split(path).back(); }

inline std::string folded_path(const std::string& path, const FoldProfile& profile) {
    std::string out = "/";
    for (const auto& comp : FsImage::split(path))
        out = FsImage::join(out, fold_name(comp, profile).bytes);
    return out;
}

inline bool under_root(const std::string& path, const std::string& root) {
    if (root == "/" || root.empty()) return true;
    return path.size() > root.size() && path.compare(0, root.size(), root) == 0 &&
           path[root.size()] == '/';
}

}  // namespace detail

// before/after are the images around the run; src_root identifies the intended
// provenance of data and metadata; target_root is the comparison root.
inline Classification classify(const FsImage& before, const FsImage& after,
                               const std::string& src_root, const std::string& target_root,
                               const refutils::CopyOutcome& outcome,
                               const ClassifyOptions& opts = {}) {
    using refutils::CopyOutcome;
    using refutils::EventOp;
    Classification result;

    // Terminal outcomes preempt effect analysis: the run never completed.
    if (outcome.terminated == CopyOutcome::Terminated::error_reported) {
        const auto* e = outcome.find(EventOp::error);
        result.emit(kDeny, e ? e->detail : "operation denied");
        return result;
    }
    if (outcome.terminated == CopyOutcome::Terminated::user_prompt) {
        const auto* e = outcome.find(EventOp::prompt);
        result.emit(kAskUser, e ? e->detail : "user interaction required");
        return result;
    }
    if (outcome.terminated == CopyOutcome::Terminated::step_limit_hit) {
        const auto* e = outcome.find(EventOp::loop_detected);
        result.emit(kCrash, e ? e->detail : "step limit hit");
        return result;
    }

    // Fold profile of the destination: what the target root's directory uses.
    std::string profile_id = "ascii";
    if (auto root_ino = after.lookup(target_root)) {
        const FsNode& n = after.node(*root_ino);
        if (n.kind == NodeKind::directory && n.dir.fold_flag) profile_id = n.dir.profile_id;
    }
    const FoldProfile& profile = profile_by_name(profile_id);

    for (const auto& e : outcome.events) {
        if (e.op == EventOp::skip_unsupported || e.op == EventOp::degrade_hardlink)
            result.emit(kUnsupported, e.src_path + ": " + e.detail);
        if (e.op == EventOp::rename_conflict)
            result.emit(kRename, e.src_path + " stored as " + e.dest_path);
        if (e.op == EventOp::prompt) result.emit(kAskUser, e.detail);
    }

    // Collisions this run exercised, keyed by the contested entry.
    std::map<std::string, detail::CollisionRecord> collisions;
    for (const auto& e : outcome.events) {
        if (!e.collided) continue;
        if (e.op != EventOp::overwrite && e.op != EventOp::write_through &&
            e.op != EventOp::merge_dir && e.op != EventOp::unlink && e.op != EventOp::link_new)
            continue;
        detail::CollisionRecord rec;
        std::string entry_path = e.resolved_path.empty() ? e.dest_path : e.resolved_path;
        if (e.op == EventOp::write_through) {
            // the contested entry is the one the destination name resolved
            // to, not the referent the bytes landed on
            std::string raw;
            if (after.lookup(e.dest_path, &raw)) entry_path = raw;
            else entry_path = e.dest_path;
        }
        rec.dir_path = detail::parent_of(entry_path);
        rec.target_raw = detail::leaf_of(entry_path);
        rec.source_raw = detail::leaf_of(e.dest_path);
        rec.original_inode = e.prior_inode >= 0 ? e.prior_inode : e.inode;
        rec.folded_entry_path =
            detail::folded_path(FsImage::join(rec.dir_path, rec.target_raw), profile);
        rec.detail = e.detail;
        auto it = collisions.find(rec.folded_entry_path);
        if (it == collisions.end()) collisions[rec.folded_entry_path] = rec;
    }

    // Write-through effects: + always, T when the write landed outside the
    // destination tree.
    for (const auto& e : outcome.events) {
        if (e.op != EventOp::write_through) continue;
        result.emit(kOverwrite, "write to " + e.dest_path + " landed on " + e.resolved_path);
        if (!detail::under_root(e.resolved_path, target_root))
            result.emit(kFollowSymlink,
                        e.dest_path + " traversed a symlink to " + e.resolved_path);
    }

    std::set<int> original_inodes;
    for (const auto& [key, rec] : collisions) original_inodes.insert(rec.original_inode);

    // Resolve each collision against the final image.
    for (const auto& [key, rec] : collisions) {
        std::string resolved;
        auto final_ino = after.lookup(FsImage::join(rec.dir_path, rec.source_raw), &resolved);
        bool any_code_before = false;
        size_t evidence_mark = result.evidence.size();

        if (!final_ino) {
            // contested name vanished entirely; nothing in the matrix does
            // this, so surface it rather than guess
            throw Error(Errc::ambiguous_evidence,
                        "no entry survives for contested name " + rec.source_raw + " in " +
                            rec.dir_path);
        }
        const FsNode& final_node = after.node(*final_ino);
        std::string final_raw = detail::leaf_of(resolved);

        // Source resource facts for mixture checks.
        std::string src_path = FsImage::join(src_root, rec.source_raw);
        auto src_ino = before.lookup(src_path);

        if (final_node.kind == NodeKind::directory) {
            // Directory outcome: merge semantics. The destination directory
            // now holds the source resource's children.
            bool merged = false;
            for (const auto& e : outcome.events) {
                if ((e.op == EventOp::merge_dir && e.collided &&
                     detail::folded_path(e.resolved_path, profile) == rec.folded_entry_path) ||
                    (e.op == EventOp::make_dir &&
                     detail::folded_path(e.resolved_path, profile) == rec.folded_entry_path)) {
                    merged = true;
                    break;
                }
            }
            if (merged) {
                result.emit(kOverwrite, "directory contents merged under " + resolved);
                any_code_before = true;
            }
            if (final_raw == rec.target_raw && final_raw != rec.source_raw) {
                // stale name: decide whether metadata was overwritten with the
                // source directory's
                if (src_ino) {
                    const FsNode& src_node = before.node(*src_ino);
                    const Metadata& fm = final_node.meta;
                    bool meta_from_source = fm.mode == src_node.meta.mode &&
                                            fm.uid == src_node.meta.uid &&
                                            fm.gid == src_node.meta.gid;
                    // what the target resource was created with
                    bool meta_differs_from_target = true;
                    for (const auto& e : outcome.events) {
                        if (e.op == EventOp::make_dir && e.inode == rec.original_inode) {
                            auto tsrc = before.lookup(FsImage::join(src_root, e.src_path));
                            if (tsrc)
                                meta_differs_from_target =
                                    before.node(*tsrc).meta.mode != fm.mode;
                        }
                    }
                    if (meta_from_source && meta_differs_from_target) {
                        result.emit(kMetadataMismatch,
                                    "directory " + resolved + " kept the name of " +
                                        rec.target_raw + " but took mode " +
                                        std::to_string(fm.mode) + " from " + rec.source_raw);
                        any_code_before = true;
                    }
                }
            }
            if (!any_code_before && result.evidence.size() == evidence_mark)
                throw Error(Errc::ambiguous_evidence,
                            "directory collision with no recognizable outcome at " + resolved);
            continue;
        }

        // Non-directory outcome.
        bool emitted = false;
        if (final_raw == rec.source_raw && final_raw != rec.target_raw) {
            result.emit(kDeleteRecreate, rec.target_raw + " deleted; " + rec.source_raw +
                                             " recreated in " + rec.dir_path);
            emitted = true;
        }
        if (final_raw == rec.target_raw) {
            bool stores = final_node.kind == NodeKind::file ||
                          final_node.kind == NodeKind::symlink;
            std::string src_content;
            bool have_src = false;
            if (src_ino) {
                const FsNode& sn = before.node(*src_ino);
                src_content = sn.content;
                have_src = true;
            }
            if (stores && have_src && final_node.content == src_content) {
                result.emit(kOverwrite, resolved + " now carries the content of " +
                                            rec.source_raw);
                result.emit(kMetadataMismatch, resolved + " keeps the target name " +
                                                   rec.target_raw + " with data from " +
                                                   rec.source_raw);
                emitted = true;
            }
            // timestamps are excluded from mismatch detection by default
            if (opts.strict_times && src_ino &&
                final_node.meta.mtime != before.node(*src_ino).meta.mtime) {
                result.emit(kMetadataMismatch,
                            resolved + " timestamp differs from " + rec.source_raw);
                emitted = true;
            }
        }
        // write-through collisions were already credited with + (and maybe T)
        for (const auto& e : outcome.events) {
            if (e.op == EventOp::write_through && e.collided) {
                if (detail::folded_path(e.dest_path, profile) == rec.folded_entry_path)
                    emitted = true;
            }
        }
        // a fold-equal symlink taken for the directory: the damage shows up
        // as writes through it
        if (!emitted && final_node.kind == NodeKind::symlink) {
            for (const auto& e : outcome.events) {
                if (e.op == EventOp::merge_dir && e.collided &&
                    detail::folded_path(e.resolved_path, profile) == rec.folded_entry_path) {
                    bool wrote_through = false;
                    for (const auto& w : outcome.events)
                        if (w.op == EventOp::write_through) wrote_through = true;
                    if (!wrote_through)
                        result.emit(kOverwrite,
                                    resolved + " assumed to be a directory; nothing written");
                    emitted = true;
                    break;
                }
            }
        }
        if (!emitted)
            throw Error(Errc::ambiguous_evidence,
                        "collision on " + rec.source_raw + " matched no outcome rule");
    }

    // Corruption: a non-colliding destination path whose final content does
    // not match the source resource it was replicated from, unless it shares
    // the directly-overwritten node.
    std::map<std::string, const detail::CopyEvent*> provenance;
    for (const auto& e : outcome.events) {
        switch (e.op) {
            case EventOp::copy_file:
            case EventOp::make_symlink:
            case EventOp::make_node:
            case EventOp::link_new:
            case EventOp::overwrite:
            case EventOp::degrade_hardlink:
            case EventOp::rename_conflict:
                if (!e.resolved_path.empty()) provenance[e.resolved_path] = &e;
                break;
            default:
                break;
        }
    }
    for (const auto& [path, ev] : provenance) {
        if (!detail::under_root(path, target_root)) continue;
        std::string fp = detail::folded_path(path, profile);
        if (collisions.count(fp)) continue;  // the contested entry itself
        auto fin = after.lookup(path);
        if (!fin) continue;
        const FsNode& fn = after.node(*fin);
        if (fn.kind == NodeKind::directory) continue;
        if (original_inodes.count(fn.inode)) continue;
        auto src = before.lookup(FsImage::join(src_root, ev->src_path));
        if (!src) continue;
        const FsNode& sn = before.node(*src);
        if (fn.content != sn.content) {
            result.emit(kCorrupt, path + " should carry the data of " + ev->src_path +
                                      " but does not");
        }
    }

    if (result.codes.empty()) result.notes.push_back("no collision exercised");
    return result;
}

// ---------------------------------------------------------------------------
// Emulation driver: builds the standard environment, materializes a case,
// runs the model and classifies the result.
//
//   /src  case-sensitive source tree      /dst  fold-flagged target
//   /tmp  directory-symlink referent      /ref/file  file-symlink referent
// ---------------------------------------------------------------------------
struct EmulationRun {
    FsImage before{"00:39"};
    refutils::CopyOutcome outcome;
    Classification classification;
};

inline FsImage standard_environment(const std::string& profile_id = "ascii") {
    FsImage img("00:39");
    Metadata dir_meta;
    dir_meta.mode = 0755;
    img.mkdir("/", "src", dir_meta, FoldSpec::sensitive);
    img.mkdir("/", "dst", dir_meta, FoldSpec::folded, profile_id);
    Metadata tmp_meta;
    tmp_meta.mode = 01777;
    img.mkdir("/", "tmp", tmp_meta, FoldSpec::sensitive);
    img.mkdir("/", "ref", dir_meta, FoldSpec::sensitive);
    Metadata fm;
    fm.mode = 0644;
    img.create("/ref", "file", NodeKind::file, fm, {}, "referent-data");
    return img;
}

inline EmulationRun run_emulation(refutils::UtilityId utility, const casegen::TestCase& tc,
                                  const std::vector<refutils::PromptAnswer>* script = nullptr,
                                  const std::string& profile_id = "ascii",
                                  const ClassifyOptions& opts = {}) {
    EmulationRun run;
    run.before = standard_environment(profile_id);
    casegen::materialize(tc, run.before, "/src");
    run.outcome = refutils::run_model(refutils::model_for(utility), run.before, "/src", "/dst",
                                      script);
    run.classification =
        classify(run.before, run.outcome.final_image, "/src", "/dst", run.outcome, opts);
    return run;
}

}  // namespace collide::harness
