#pragma once

// Generates the matrix of collision-provoking source trees: the seven
// target/source type pairs from the utility-response table, both build
// orderings, at depth one (colliding leaf names) and depth two (colliding
// directory names with same-named children inside). Each case can be
// materialized onto a vfs image or onto a real, case-sensitive directory.

#include <fcntl.h>
#include <sys/stat.h>
#include <sys/sysmacros.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "collide/error.hpp"
#include "collide/vfs.hpp"

namespace collide::casegen {

enum class ResourceKind { file, directory, symlink_to_file, symlink_to_dir, hardlink, pipe, device };

inline const char* kind_token(ResourceKind k) {
    switch (k) {
        case ResourceKind::file: return "file";
        case ResourceKind::directory: return "dir";
        case ResourceKind::symlink_to_file: return "symlinkfile";
        case ResourceKind::symlink_to_dir: return "symlinkdir";
        case ResourceKind::hardlink: return "hardlink";
        case ResourceKind::pipe: return "pipe";
        case ResourceKind::device: return "device";
    }
    return "?";
}

enum class StepKind { file, directory, symlink, hardlink, pipe, device };

struct BuildStep {
    std::string path;  // relative to the materialization destination
    StepKind kind = StepKind::file;
    unsigned mode = 0644;
    std::string content;  // file bytes | symlink target | hardlink referent
};

enum class Order { target_first, source_first };

struct TestCase {
    std::string id;
    ResourceKind target_kind = ResourceKind::file;
    ResourceKind source_kind = ResourceKind::file;
    Order order = Order::target_first;
    int depth = 1;
    std::vector<BuildStep> tree;
    std::string target_name;  // raw colliding name belonging to the target resource
    std::string source_name;  // raw colliding name belonging to the source resource
    bool control = false;     // de-collided twin for non-interference checks
};

// Referent paths used by symlink-bearing rows. They live outside the copy
// destination so traversal effects are observable.
inline constexpr const char* kFileReferent = "/ref/file";
inline constexpr const char* kDirReferent = "/tmp";

namespace detail {

// Step lists for one resource of the given kind, rooted at `prefix` with the
// colliding component `name`. `tag` distinguishes target from source so
// contents and modes differ between the two resources of a pair.
inline std::vector<BuildStep> resource_steps(ResourceKind kind, const std::string& prefix,
                                             const std::string& name, bool is_target) {
    std::string base = prefix.empty() ? name : prefix + "/" + name;
    std::string data = is_target ? "target-data" : "source-data";
    unsigned fmode = is_target ? 0600 : 0640;
    switch (kind) {
        case ResourceKind::file:
            return {{base, StepKind::file, fmode, data}};
        case ResourceKind::symlink_to_file:
            return {{base, StepKind::symlink, 0777, kFileReferent}};
        case ResourceKind::symlink_to_dir:
            return {{base, StepKind::symlink, 0777, kDirReferent}};
        case ResourceKind::pipe:
            return {{base, StepKind::pipe, 0666, ""}};
        case ResourceKind::device:
            return {{base, StepKind::device, 0666, ""}};
        case ResourceKind::directory: {
            unsigned dmode = is_target ? 0700 : 0755;
            std::vector<BuildStep> steps = {{base, StepKind::directory, dmode, ""}};
            if (is_target) {
                steps.push_back({base + "/subdir", StepKind::directory, 0700, ""});
                steps.push_back({base + "/file1", StepKind::file, 0600, "keep"});
                steps.push_back({base + "/file2", StepKind::file, 0600, "target-file2"});
            } else {
                // distinct child name: merge effects come from the directory
                // pair itself, same-named child fights are scenario material
                steps.push_back({base + "/file3", StepKind::file, 0644, "source-file3"});
            }
            return steps;
        }
        case ResourceKind::hardlink:
            // handled by hardlink_pair_steps; a lone entry is a plain file
            return {{base, StepKind::file, fmode, data}};
    }
    return {};
}

}  // namespace detail

inline std::vector<std::pair<ResourceKind, ResourceKind>> table_rows() {
    return {
        {ResourceKind::file, ResourceKind::file},
        {ResourceKind::symlink_to_file, ResourceKind::file},
        {ResourceKind::pipe, ResourceKind::file},
        {ResourceKind::hardlink, ResourceKind::file},
        {ResourceKind::hardlink, ResourceKind::hardlink},
        {ResourceKind::directory, ResourceKind::directory},
        {ResourceKind::symlink_to_dir, ResourceKind::directory},
    };
}

inline TestCase make_case(ResourceKind target, ResourceKind source, Order order, int depth) {
    TestCase tc;
    tc.target_kind = target;
    tc.source_kind = source;
    tc.order = order;
    tc.depth = depth;
    tc.id = std::string(kind_token(target)) + "-" + kind_token(source) + "-d" +
            std::to_string(depth) + "-" + (order == Order::target_first ? "tf" : "sf");

    bool dir_pair = target == ResourceKind::directory || source == ResourceKind::directory ||
                    target == ResourceKind::symlink_to_dir;
    bool hardlink_pair = target == ResourceKind::hardlink && source == ResourceKind::hardlink;

    std::string first_name, second_name;
    if (hardlink_pair) {
        first_name = "zzz";
        second_name = "ZZZ";
    } else if (depth == 1 && dir_pair) {
        first_name = "dir";
        second_name = "DIR";
    } else {
        first_name = "foo";
        second_name = "FOO";
    }

    std::string prefix_first, prefix_second;
    std::string leaf_first = first_name, leaf_second = second_name;
    if (depth == 2) {
        // Collide the directory names; the row's resources share a leaf name.
        prefix_first = "dir";
        prefix_second = "DIR";
        leaf_first = leaf_second = hardlink_pair ? "zzz" : "foo";
        tc.target_name = order == Order::target_first ? "dir" : "DIR";
        tc.source_name = order == Order::target_first ? "DIR" : "dir";
    } else {
        tc.target_name = order == Order::target_first ? first_name : second_name;
        tc.source_name = order == Order::target_first ? second_name : first_name;
    }

    bool target_in_first = order == Order::target_first;
    ResourceKind first_kind = target_in_first ? target : source;
    ResourceKind second_kind = target_in_first ? source : target;
    bool first_is_target = target_in_first;

    auto add_prefix_dir = [&tc](const std::string& p) {
        if (!p.empty()) tc.tree.push_back({p, StepKind::directory, 0755, ""});
    };

    if (hardlink_pair) {
        // Leader files first, then the trailing links: the link creations are
        // where colliding extraction goes wrong.
        add_prefix_dir(prefix_first);
        std::string base_first =
            prefix_first.empty() ? leaf_first : prefix_first + "/" + leaf_first;
        tc.tree.push_back({base_first, StepKind::file, 0644, first_is_target ? "foo" : "bar"});
        add_prefix_dir(prefix_second);
        std::string base_second =
            prefix_second.empty() ? leaf_second : prefix_second + "/" + leaf_second;
        tc.tree.push_back({base_second, StepKind::file, 0644, first_is_target ? "bar" : "foo"});
        std::string link_first = prefix_first.empty() ? "" : prefix_first + "/";
        std::string link_second = prefix_second.empty() ? "" : prefix_second + "/";
        tc.tree.push_back({link_first + (first_is_target ? "hfoo" : "hbar"), StepKind::hardlink,
                           0644, base_first});
        tc.tree.push_back({link_second + (first_is_target ? "hbar" : "hfoo"), StepKind::hardlink,
                           0644, base_second});
        return tc;
    }

    add_prefix_dir(prefix_first);
    for (auto& s : detail::resource_steps(first_kind, prefix_first, leaf_first, first_is_target))
        tc.tree.push_back(std::move(s));
    add_prefix_dir(prefix_second);
    for (auto& s :
         detail::resource_steps(second_kind, prefix_second, leaf_second, !first_is_target))
        tc.tree.push_back(std::move(s));

    // The hardlink target resource needs its second name to make it a
    // hardlink rather than a plain file.
    if (target == ResourceKind::hardlink && source != ResourceKind::hardlink) {
        std::string prefix = target_in_first ? prefix_first : prefix_second;
        std::string leaf = target_in_first ? leaf_first : leaf_second;
        std::string base = prefix.empty() ? leaf : prefix + "/" + leaf;
        std::string link = (prefix.empty() ? std::string() : prefix + "/") + "hfoo";
        // Insert the link right after its referent so the collision still
        // happens on the later resource.
        for (size_t i = 0; i < tc.tree.size(); ++i) {
            if (tc.tree[i].path == base) {
                tc.tree.insert(tc.tree.begin() + i + 1,
                               {link, StepKind::hardlink, 0644, base});
                break;
            }
        }
    }
    return tc;
}

inline std::vector<TestCase> generate_matrix() {
    std::vector<TestCase> out;
    for (const auto& [target, source] : table_rows())
        for (Order order : {Order::target_first, Order::source_first})
            for (int depth : {1, 2}) out.push_back(make_case(target, source, order, depth));
    return out;
}

inline std::optional<TestCase> find_case(const std::string& id) {
    for (TestCase& tc : generate_matrix())
        if (tc.id == id) return tc;
    return std::nullopt;
}

// De-collided twin: the source's colliding component is renamed to a unique
// non-colliding name. Used as the no-collision control in every suite.
inline TestCase control_variant(const TestCase& tc) {
    TestCase ctl = tc;
    ctl.id += "-ctl";
    ctl.control = true;
    std::string from = tc.source_name;
    std::string to = tc.source_name + "_nc";
    auto rewrite = [&](std::string& path) {
        std::string out;
        size_t start = 0;
        while (start <= path.size()) {
            size_t slash = path.find('/', start);
            std::string comp = path.substr(start, slash == std::string::npos ? std::string::npos
                                                                             : slash - start);
            if (!out.empty() || start > 0) out += '/';
            out += comp == from ? to : comp;
            if (slash == std::string::npos) break;
            start = slash + 1;
        }
        path = out;
    };
    for (BuildStep& s : ctl.tree) {
        rewrite(s.path);
        if (s.kind == StepKind::hardlink) rewrite(s.content);
    }
    ctl.source_name = to;
    return ctl;
}

// Scenario fixture trees, taken from the documented incidents.
namespace fixtures {

// Case-sensitive source whose directory pair routes a deep file through a
// symlink when synced to a case-insensitive target.
inline TestCase rsync_traversal() {
    TestCase tc;
    tc.id = "scenario-rsync-traversal";
    tc.target_kind = ResourceKind::symlink_to_dir;
    tc.source_kind = ResourceKind::directory;
    tc.depth = 2;
    tc.target_name = "topdir";
    tc.source_name = "TOPDIR";
    tc.tree = {
        {"topdir", StepKind::directory, 0755, ""},
        {"topdir/secret", StepKind::symlink, 0777, "/tmp"},
        {"TOPDIR", StepKind::directory, 0755, ""},
        {"TOPDIR/secret", StepKind::directory, 0755, ""},
        {"TOPDIR/secret/confidential", StepKind::file, 0600, "confidential payload"},
    };
    return tc;
}

// The web root as deployed on the case-sensitive origin.
inline TestCase httpd_clean() {
    TestCase tc;
    tc.id = "scenario-httpd-clean";
    tc.tree = {
        {"www", StepKind::directory, 0755, ""},
        {"www/hidden", StepKind::directory, 0700, ""},
        {"www/hidden/secret.txt", StepKind::file, 0600, "top secret"},
        {"www/protected", StepKind::directory, 0750, ""},
        {"www/protected/.htaccess", StepKind::file, 0640, "require valid-user\n"},
        {"www/protected/user-file1.txt", StepKind::file, 0640, "user data"},
        {"www/index.html", StepKind::file, 0644, "<html/>"},
    };
    return tc;
}

// The same web root after the adversary adds the two uppercase twins.
inline TestCase httpd_adversary() {
    TestCase tc;
    tc.id = "scenario-httpd-adversary";
    tc.target_name = "hidden";
    tc.source_name = "HIDDEN";
    tc.tree = {
        {"www", StepKind::directory, 0755, ""},
        {"www/hidden", StepKind::directory, 0700, ""},
        {"www/hidden/secret.txt", StepKind::file, 0600, "top secret"},
        {"www/HIDDEN", StepKind::directory, 0755, ""},
        {"www/protected", StepKind::directory, 0750, ""},
        {"www/protected/.htaccess", StepKind::file, 0640, "require valid-user\n"},
        {"www/protected/user-file1.txt", StepKind::file, 0640, "user data"},
        {"www/PROTECTED", StepKind::directory, 0755, ""},
        {"www/PROTECTED/.htaccess", StepKind::file, 0644, ""},
        {"www/index.html", StepKind::file, 0644, "<html/>"},
    };
    return tc;
}

}  // namespace fixtures

struct BuildReport {
    struct Item {
        std::string path;
        std::string kind;
        long inode = -1;
    };
    std::vector<Item> created;
    std::vector<std::string> warnings;
};

// Materializes a case tree into an (empty) directory of a vfs image.
inline BuildReport materialize(const TestCase& tc, FsImage& img, const std::string& dest) {
    if (!img.exists(dest)) throw Error(Errc::parent_missing, dest);
    if (!img.readdir(dest).empty()) throw Error(Errc::dest_not_empty, dest);
    BuildReport report;
    for (const BuildStep& s : tc.tree) {
        auto parts = FsImage::split(s.path);
        std::string parent = dest;
        for (size_t i = 0; i + 1 < parts.size(); ++i) parent = FsImage::join(parent, parts[i]);
        const std::string& leaf = parts.back();
        Metadata meta;
        meta.mode = s.mode;
        OpResult r;
        switch (s.kind) {
            case StepKind::file:
                r = img.create(parent, leaf, NodeKind::file, meta, {}, s.content);
                break;
            case StepKind::directory:
                r = img.mkdir(parent, leaf, meta);
                break;
            case StepKind::symlink:
                r = img.symlink(s.content, parent, leaf);
                break;
            case StepKind::hardlink:
                r = img.link(FsImage::join(dest, s.content), parent, leaf);
                break;
            case StepKind::pipe:
                r = img.create(parent, leaf, NodeKind::pipe, meta);
                break;
            case StepKind::device:
                r = img.create(parent, leaf, NodeKind::device, meta);
                break;
        }
        report.created.push_back({FsImage::join(dest, s.path),
                                  s.kind == StepKind::hardlink ? "hardlink"
                                                               : kind_name(img.node(r.inode).kind),
                                  r.inode});
    }
    return report;
}

// Probe for case-insensitive hosts: create one spelling, stat another.
inline bool host_is_case_insensitive(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::path probe = dir / "cOLLIDE.probe";
    fs::path other = dir / "Collide.probe";
    {
        std::ofstream out(probe);
        if (!out) throw Error(Errc::bad_input, "cannot write probe in " + dir.string());
    }
    bool insensitive = fs::exists(other);
    fs::remove(probe);
    return insensitive;
}

// Materializes onto a real directory, which must be empty and case-sensitive.
// The tree is built in a temporary subtree and promoted on success, so a
// failed build leaves the destination restorable to empty. Device nodes
// degrade to a warning when privileges are lacking.
inline BuildReport materialize_host(const TestCase& tc, const std::filesystem::path& dest) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dest)) throw Error(Errc::parent_missing, dest.string());
    if (!fs::is_empty(dest)) throw Error(Errc::dest_not_empty, dest.string());
    if (host_is_case_insensitive(dest))
        throw Error(Errc::host_is_case_insensitive, dest.string());

    fs::path tmp = dest / (".collide-build." + std::to_string(::getpid()));
    fs::create_directory(tmp);
    BuildReport report;
    try {
        for (const BuildStep& s : tc.tree) {
            fs::path p = tmp / s.path;
            switch (s.kind) {
                case StepKind::file: {
                    std::ofstream out(p, std::ios::binary);
                    if (!out) throw Error(Errc::bad_input, "cannot create " + p.string());
                    out << s.content;
                    out.close();
                    ::chmod(p.c_str(), s.mode);
                    break;
                }
                case StepKind::directory:
                    fs::create_directory(p);
                    ::chmod(p.c_str(), s.mode);
                    break;
                case StepKind::symlink:
                    fs::create_symlink(s.content, p);
                    break;
                case StepKind::hardlink:
                    fs::create_hard_link(tmp / s.content, p);
                    break;
                case StepKind::pipe:
                    if (::mkfifo(p.c_str(), s.mode) != 0)
                        throw Error(Errc::bad_input, "mkfifo failed for " + p.string());
                    break;
                case StepKind::device:
                    if (::mknod(p.c_str(), S_IFCHR | s.mode, ::makedev(1, 3)) != 0) {
                        report.warnings.push_back("device node skipped (insufficient privilege): " +
                                                  s.path);
                        continue;
                    }
                    break;
            }
            report.created.push_back({(dest / s.path).string(), "", -1});
        }
        for (const auto& entry : fs::directory_iterator(tmp))
            fs::rename(entry.path(), dest / entry.path().filename());
        fs::remove_all(tmp);
    } catch (...) {
        fs::remove_all(tmp);
        throw;
    }
    return report;
}

}  // namespace collide::casegen
