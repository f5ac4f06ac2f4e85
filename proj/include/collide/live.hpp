#pragma once

// Live mode: run a real installed utility against a user-provided
// case-insensitive mount, snapshot the host trees into images, classify from
// the snapshots, and report (never assert) disagreement with the emulation
// expectation. One live run at a time per mount, via a lock file.

#include <fcntl.h>
#include <signal.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <sys/sysmacros.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "collide/casegen.hpp"
#include "collide/error.hpp"
#include "collide/harness.hpp"
#include "collide/vfs.hpp"

namespace collide::live {

namespace fs = std::filesystem;

inline bool probe_case_insensitive(const fs::path& dir) {
    fs::path probe = dir / "cOLLIDE.probe";
    fs::path other = dir / "Collide.probe";
    std::error_code ec;
    {
        std::ofstream out(probe);
        if (!out) throw Error(Errc::bad_input, "cannot write probe file in " + dir.string());
    }
    bool insensitive = fs::exists(other, ec);
    fs::remove(probe, ec);
    return insensitive;
}

inline bool utility_available(const std::string& name) {
    const char* path_env = ::getenv("PATH");
    std::string paths = path_env ? path_env : "/usr/bin:/bin";
    size_t start = 0;
    while (start <= paths.size()) {
        size_t colon = paths.find(':', start);
        std::string dir = paths.substr(start, colon == std::string::npos ? std::string::npos
                                                                         : colon - start);
        if (!dir.empty() && ::access((dir + "/" + name).c_str(), X_OK) == 0) return true;
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    return false;
}

// Walks a host tree into an image. Inode numbers are used only for same-node
// identity within the snapshot; atimes are ignored.
inline FsImage snapshot_host_tree(const fs::path& root) {
    struct stat rs {};
    if (::lstat(root.c_str(), &rs) != 0)
        throw Error(Errc::parent_missing, root.string());
    char dev[32];
    std::snprintf(dev, sizeof dev, "%02x:%02x", major(rs.st_dev), minor(rs.st_dev));
    FsImage img(dev);
    std::map<ino_t, std::string> seen_inode;

    auto walk = [&](auto&& self, const fs::path& host_dir, const std::string& img_dir) -> void {
        std::vector<fs::directory_entry> children;
        for (const auto& de : fs::directory_iterator(host_dir)) children.push_back(de);
        std::sort(children.begin(), children.end(),
                  [](const auto& a, const auto& b) { return a.path() < b.path(); });
        for (const auto& de : children) {
            struct stat st {};
            if (::lstat(de.path().c_str(), &st) != 0) continue;
            std::string name = de.path().filename().string();
            Metadata meta;
            meta.mode = st.st_mode & 07777;
            meta.uid = static_cast<int>(st.st_uid);
            meta.gid = static_cast<int>(st.st_gid);
            meta.mtime = static_cast<std::int64_t>(st.st_mtime);
            if (S_ISDIR(st.st_mode)) {
                img.mkdir(img_dir, name, meta, FoldSpec::sensitive);
                self(self, de.path(), FsImage::join(img_dir, name));
            } else if (S_ISLNK(st.st_mode)) {
                img.symlink(fs::read_symlink(de.path()).string(), img_dir, name, meta);
            } else if (S_ISREG(st.st_mode)) {
                if (st.st_nlink > 1) {
                    auto it = seen_inode.find(st.st_ino);
                    if (it != seen_inode.end()) {
                        img.link(it->second, img_dir, name);
                        continue;
                    }
                    seen_inode[st.st_ino] = FsImage::join(img_dir, name);
                }
                std::ifstream in(de.path(), std::ios::binary);
                std::string content((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
                img.create(img_dir, name, NodeKind::file, meta, {}, content);
            } else if (S_ISFIFO(st.st_mode)) {
                img.create(img_dir, name, NodeKind::pipe, meta);
            } else if (S_ISBLK(st.st_mode) || S_ISCHR(st.st_mode)) {
                img.create(img_dir, name, NodeKind::device, meta);
            }
        }
    };
    walk(walk, root, "/");
    return img;
}

struct ExecResult {
    int exit_code = -1;
    bool timed_out = false;
    std::string output;
};

// fork/exec with a wall-clock bound and optional scripted stdin.
inline ExecResult run_command(const std::vector<std::string>& argv, const std::string& cwd,
                              const std::string& stdin_data, int timeout_seconds) {
    int out_pipe[2], in_pipe[2];
    if (::pipe(out_pipe) != 0 || ::pipe(in_pipe) != 0)
        throw Error(Errc::bad_input, "pipe failed");
    pid_t pid = ::fork();
    if (pid < 0) throw Error(Errc::bad_input, "fork failed");
    if (pid == 0) {
        ::dup2(in_pipe[0], 0);
        ::dup2(out_pipe[1], 1);
        ::dup2(out_pipe[1], 2);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) ::_exit(127);
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    if (!stdin_data.empty()) {
        ssize_t n = ::write(in_pipe[1], stdin_data.data(), stdin_data.size());
        (void)n;
    }
    ::close(in_pipe[1]);

    ExecResult res;
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(timeout_seconds);
    int flags = ::fcntl(out_pipe[0], F_GETFL);
    ::fcntl(out_pipe[0], F_SETFL, flags | O_NONBLOCK);
    int status = 0;
    bool exited = false;
    while (std::chrono::steady_clock::now() < deadline) {
        char buf[4096];
        ssize_t n;
        while ((n = ::read(out_pipe[0], buf, sizeof buf)) > 0) res.output.append(buf, n);
        pid_t w = ::waitpid(pid, &status, WNOHANG);
        if (w == pid) {
            exited = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    if (!exited) {
        ::kill(pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        res.timed_out = true;
    }
    char buf[4096];
    ssize_t n;
    while ((n = ::read(out_pipe[0], buf, sizeof buf)) > 0) res.output.append(buf, n);
    ::close(out_pipe[0]);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

struct LiveOptions {
    int timeout_seconds = 30;
    std::string answers = "y\n";  // fed to an interactive prompt
};

struct LiveResult {
    harness::Classification classification;
    std::set<std::string> expected_codes;  // from the emulation run
    std::vector<std::string> discrepancies;
    std::string invocation;
    std::string output;
    bool prompted = false;
};

namespace detail {

// Snapshot-only classification: with the test case known, the colliding
// names locate every effect without an event stream.
inline harness::Classification classify_snapshots(const casegen::TestCase& tc,
                                                  const FsImage& src, const FsImage& before,
                                                  const FsImage& after, bool timed_out,
                                                  bool prompted, int exit_code) {
    using namespace harness;
    Classification c;
    if (timed_out) {
        c.emit(kCrash, "wall-clock timeout");
        return c;
    }
    auto before_facts = path_facts(before, "/");
    auto after_facts = path_facts(after, "/");
    if (prompted) c.emit(kAskUser, "utility asked for a resolution");

    // locate the contested entry by fold key
    const FoldProfile& ascii = profile_by_name("ascii");
    std::string target_key = fold_name(tc.target_name, ascii).bytes;
    std::map<std::string, PathFacts> contested_after;
    for (const auto& [path, facts] : after_facts) {
        auto parts = FsImage::split(path);
        if (!parts.empty() && fold_name(parts.back(), ascii).bytes == target_key)
            contested_after[path] = facts;
    }
    bool target_raw_alive = false, source_raw_alive = false;
    for (const auto& [path, facts] : contested_after) {
        std::string leaf = FsImage::split(path).back();
        if (leaf == tc.target_name) target_raw_alive = true;
        if (leaf == tc.source_name) source_raw_alive = true;
    }
    auto src_facts = path_facts(src, "/");
    auto src_content_of = [&](const std::string& name) -> std::optional<std::string> {
        for (const auto& [path, facts] : src_facts)
            if (FsImage::split(path).back() == name && facts.kind == NodeKind::file)
                return facts.content;
        return std::nullopt;
    };

    if (exit_code != 0 && !prompted && after_facts == before_facts) {
        c.emit(kDeny, "non-zero exit with the target unchanged");
        return c;
    }
    if (source_raw_alive && !target_raw_alive)
        c.emit(kDeleteRecreate, tc.target_name + " gone, " + tc.source_name + " present");
    if (target_raw_alive && !source_raw_alive) {
        auto want = src_content_of(tc.source_name);
        for (const auto& [path, facts] : contested_after) {
            if (FsImage::split(path).back() != tc.target_name) continue;
            if (facts.kind == NodeKind::directory) {
                c.emit(kOverwrite, "directories merged under " + path);
                c.emit(kMetadataMismatch, path + " metadata taken from " + tc.source_name);
            } else if (want && facts.content == *want) {
                c.emit(kOverwrite, path + " carries the content of " + tc.source_name);
                c.emit(kMetadataMismatch,
                       path + " keeps the stale name with data from " + tc.source_name);
            }
        }
    }
    for (const auto& [path, facts] : after_facts) {
        if (before_facts.count(path)) continue;
        std::string leaf = FsImage::split(path).back();
        if (leaf.find("Case Conflict") != std::string::npos ||
            leaf.find(" (1)") != std::string::npos)
            c.emit(kRename, "conflict copy at " + path);
    }
    if (c.codes.empty() && exit_code != 0) c.emit(kDeny, "non-zero exit");
    if (c.codes.empty()) c.notes.push_back("no collision effect recognized from snapshots");
    return c;
}

}  // namespace detail

// Executes the documented invocation of a real utility on the mount and
// classifies the host-tree snapshots. Results are reported alongside the
// emulation expectation; disagreements become discrepancy records.
inline LiveResult run_live(const std::string& utility, const casegen::TestCase& tc,
                           const fs::path& mount, const LiveOptions& opts = {}) {
    if (!fs::is_directory(mount))
        throw Error(Errc::mount_not_case_insensitive, mount.string() + " is not a directory");
    if (!probe_case_insensitive(mount))
        throw Error(Errc::mount_not_case_insensitive, mount.string());

    std::string bin = utility == "cp*" ? "cp" : utility;
    if (utility == "dropbox" || !utility_available(bin))
        throw Error(Errc::utility_missing, utility);

    // exclusive use of the mount
    fs::path lock_path = mount / ".collide.lock";
    int lock_fd = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
    if (lock_fd < 0 || ::flock(lock_fd, LOCK_EX) != 0)
        throw Error(Errc::bad_input, "cannot lock " + lock_path.string());

    LiveResult result;
    fs::path work = mount / ("collide-live-" + std::to_string(::getpid()));
    fs::path scratch = fs::temp_directory_path() / ("collide-src-" + std::to_string(::getpid()));
    try {
        fs::create_directory(work);
        fs::create_directory(scratch);
        fs::path srcdir = scratch / "src";
        fs::path dstdir = work / "dst";
        fs::create_directory(srcdir);
        fs::create_directory(dstdir);
        casegen::materialize_host(tc, srcdir);

        FsImage src_img = snapshot_host_tree(srcdir);
        FsImage before = snapshot_host_tree(dstdir);

        ExecResult er;
        if (utility == "tar") {
            result.invocation = "tar -cf - -C src . | tar -xf - -C dst";
            er = run_command({"sh", "-c", "tar -cf archive.tar -C src . && tar -xf archive.tar -C dst"},
                             scratch.string(), "", opts.timeout_seconds);
            // extraction target lives on the mount
            er = run_command({"sh", "-c", "tar -xf " + (scratch / "archive.tar").string() +
                                              " -C " + dstdir.string()},
                             scratch.string(), "", opts.timeout_seconds);
        } else if (utility == "zip") {
            result.invocation = "zip -r --symlinks + unzip";
            run_command({"sh", "-c", "cd " + srcdir.string() + " && zip -qr --symlinks " +
                                         (scratch / "a.zip").string() + " ."},
                        scratch.string(), "", opts.timeout_seconds);
            er = run_command({"sh", "-c", "cd " + dstdir.string() + " && unzip " +
                                              (scratch / "a.zip").string()},
                             scratch.string(), opts.answers, opts.timeout_seconds);
            result.prompted = er.output.find("replace") != std::string::npos;
        } else if (utility == "cp") {
            result.invocation = "cp -a src/ dst/";
            er = run_command({"sh", "-c", "cp -a " + srcdir.string() + "/. " + dstdir.string()},
                             scratch.string(), "", opts.timeout_seconds);
        } else if (utility == "cp*") {
            result.invocation = "cp -a src/* dst/";
            er = run_command({"sh", "-c", "cp -a " + srcdir.string() + "/* " + dstdir.string()},
                             scratch.string(), "", opts.timeout_seconds);
        } else if (utility == "rsync") {
            result.invocation = "rsync -aH src/ dst/";
            er = run_command({"rsync", "-aH", srcdir.string() + "/", dstdir.string() + "/"},
                             scratch.string(), "", opts.timeout_seconds);
        } else {
            throw Error(Errc::utility_missing, utility);
        }
        result.output = er.output;

        FsImage after = snapshot_host_tree(dstdir);
        result.classification = detail::classify_snapshots(tc, src_img, before, after,
                                                           er.timed_out, result.prompted,
                                                           er.exit_code);
        if (er.timed_out)
            result.discrepancies.push_back("utility timed out after " +
                                           std::to_string(opts.timeout_seconds) + "s");

        // emulation expectation for the same case
        if (auto uid = refutils::utility_from_token(utility)) {
            auto emu = harness::run_emulation(*uid, tc);
            result.expected_codes = emu.classification.codes;
            if (result.expected_codes != result.classification.codes) {
                std::string d = "live codes differ from emulation for " + tc.id + " under " +
                                utility + " (utility versions drift; reported, not asserted)";
                result.discrepancies.push_back(d);
            }
        }
        fs::remove_all(work);
        fs::remove_all(scratch);
    } catch (...) {
        std::error_code ec;
        fs::remove_all(work, ec);
        fs::remove_all(scratch, ec);
        ::flock(lock_fd, LOCK_UN);
        ::close(lock_fd);
        throw;
    }
    ::flock(lock_fd, LOCK_UN);
    ::close(lock_fd);
    return result;
}

}  // namespace collide::live
