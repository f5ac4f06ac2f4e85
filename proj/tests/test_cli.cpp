#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "collide/cli.hpp"

using namespace collide;
using nlohmann::json;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

CliResult run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int rc = cli::run_cli(std::move(args), out, err);
    return {rc, out.str(), err.str()};
}

std::string utf8_of(std::initializer_list<char32_t> cps) {
    std::string s;
    for (char32_t c : cps) utf8::append(s, c);
    return s;
}

}  // namespace

TEST_CASE("fold decides collisions and sets the findings exit code") {
    auto r = run({"fold", "--profile", "full-fold", "flo" + utf8_of({0x00DF}), "FLOSS"});
    CHECK(r.exit_code == cli::kExitFindings);
    CHECK(r.out == "collide\n");

    r = run({"fold", "--profile", "simple-fold", "flo" + utf8_of({0x00DF}), "FLOSS"});
    CHECK(r.exit_code == cli::kExitClean);
    CHECK(r.out == "distinct\n");

    r = run({"fold", "--profile", "ascii", "name"});
    CHECK(r.exit_code == cli::kExitClean);
    CHECK(r.out == "name\n");
}

TEST_CASE("scan --list reports collisions with exit code 3") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("cli-scan-" + std::to_string(::getpid()));
    fs::create_directory(dir);
    {
        std::ofstream f(dir / "list.txt");
        f << "foo\tfile\nFOO\tfile\n";
    }
    auto r = run({"scan", "--list", (dir / "list.txt").string(), "--profile", "ascii"});
    CHECK(r.exit_code == cli::kExitFindings);
    CHECK(r.out.find("file-file") != std::string::npos);

    {
        std::ofstream f(dir / "clean.txt");
        f << "foo\nbar\n";
    }
    r = run({"scan", "--list", (dir / "clean.txt").string()});
    CHECK(r.exit_code == cli::kExitClean);
    fs::remove_all(dir);
}

TEST_CASE("scan --baseline merges existing target names below the input") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("cli-base-" + std::to_string(::getpid()));
    fs::create_directory(dir);
    {
        std::ofstream f(dir / "incoming.txt");
        f << "FOO\tfile\n";
    }
    {
        std::ofstream f(dir / "existing.txt");
        f << "foo\tfile\n";
    }
    auto r = run({"scan", "--list", (dir / "incoming.txt").string(), "--baseline",
                  (dir / "existing.txt").string(), "--json"});
    CHECK(r.exit_code == cli::kExitFindings);
    json j = json::parse(r.out);
    REQUIRE(j["groups"].size() == 1);
    CHECK(j["groups"][0]["predicted_survivor"] == "/FOO");
    fs::remove_all(dir);
}

TEST_CASE("classify emits the documented codes as JSON") {
    auto r = run({"classify", "--utility", "tar", "--case", "file-file-d1-tf", "--json"});
    CHECK(r.exit_code == cli::kExitFindings);
    json j = json::parse(r.out);
    CHECK(j["codes"] == json::array({"×"}));
    CHECK(j["mode"] == "emulation");
    CHECK(j["config"]["unicode_version"] == tables::kUnicodeVersion);
}

TEST_CASE("JSON reports round-trip through the parser") {
    for (auto args : {std::vector<std::string>{"classify", "--utility", "rsync", "--case",
                                               "hardlink-hardlink-d1-tf", "--json"},
                      std::vector<std::string>{"classify", "--utility", "dropbox", "--case",
                                               "dir-dir-d1-tf", "--json"}}) {
        auto r = run(args);
        json parsed = json::parse(r.out);
        std::string emitted = parsed.dump(2) + "\n";
        CHECK(emitted == r.out);
        CHECK(json::parse(emitted) == parsed);
    }
}

TEST_CASE("trace subcommand renders violations in both formats") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("cli-trace-" + std::to_string(::getpid()));
    fs::create_directory(dir);
    {
        std::ofstream f(dir / "t.tsv");
        f << "10957\tcreate\topenat\tcp\t100\t00:39\t2389\t/mnt/folding/dst/root\t-\tsuccess\n"
          << "10960\tuse\topenat\tcp\t100\t00:39\t2389\t/mnt/folding/dst/ROOT\t-\tsuccess\n";
    }
    auto text = run({"trace", "--in", (dir / "t.tsv").string(), "--profile", "ascii", "--text"});
    CHECK(text.exit_code == cli::kExitFindings);
    CHECK(text.out.find("USE [msg=10960,'cp'.openat] 00:39|2389| /mnt/folding/dst/ROOT") !=
          std::string::npos);

    auto j = run({"trace", "--in", (dir / "t.tsv").string(), "--profile", "ascii", "--json"});
    json parsed = json::parse(j.out);
    REQUIRE(parsed["violations"].size() == 1);
    CHECK(parsed["violations"][0]["created_as"] == "/mnt/folding/dst/root");
    CHECK(parsed["unicode_version"] == tables::kUnicodeVersion);

    auto filtered = run({"trace", "--in", (dir / "t.tsv").string(), "--device-filter", "00:27"});
    CHECK(filtered.exit_code == cli::kExitClean);
    fs::remove_all(dir);
}

TEST_CASE("adapt-auditd converts record pairs to the normalized format") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("cli-audit-" + std::to_string(::getpid()));
    fs::create_directory(dir);
    {
        std::ofstream f(dir / "audit.log");
        f << "type=SYSCALL msg=audit(1620000000.123:10957): arch=c000003e syscall=257 "
             "success=yes exit=3 comm=\"cp\" pid=100\n"
          << "type=PATH msg=audit(1620000000.123:10957): item=1 name=\"/mnt/dst/root\" "
             "inode=2389 dev=00:39 nametype=CREATE\n";
    }
    auto r = run({"adapt-auditd", "--in", (dir / "audit.log").string()});
    CHECK(r.exit_code == cli::kExitClean);
    CHECK(r.out.find("create\topenat\tcp\t100\t00:39\t2389\t/mnt/dst/root") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("live mode without a mount reports the environment exit code") {
    auto saved = ::getenv("COLLIDE_MOUNT") ? std::string(::getenv("COLLIDE_MOUNT")) : "";
    ::unsetenv("COLLIDE_MOUNT");
    auto r = run({"classify", "--utility", "tar", "--case", "file-file-d1-tf", "--live"});
    CHECK(r.exit_code == cli::kExitEnvironment);
    if (!saved.empty()) ::setenv("COLLIDE_MOUNT", saved.c_str(), 1);
}

TEST_CASE("live mode refuses a case-sensitive mount") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("cli-mnt-" + std::to_string(::getpid()));
    fs::create_directory(dir);
    if (casegen::host_is_case_insensitive(dir)) {
        fs::remove_all(dir);
        SKIP("temp directory is case-insensitive");
    }
    auto r = run({"classify", "--utility", "tar", "--case", "file-file-d1-tf", "--live",
                  "--mount", dir.string()});
    CHECK(r.exit_code == cli::kExitEnvironment);
    CHECK(r.err.find("environment") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("config file sets defaults and flags override it") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("cli-cfg-" + std::to_string(::getpid()));
    fs::create_directory(dir);
    {
        std::ofstream f(dir / "collide.conf");
        f << "# defaults\nprofile=full-fold\nformat=json\n";
    }
    {
        std::ofstream f(dir / "list.txt");
        f << "flo" << utf8_of({0x00DF}) << "\tfile\nFLOSS\tfile\n";
    }
    auto r = run({"--config", (dir / "collide.conf").string(), "scan", "--list",
                  (dir / "list.txt").string()});
    CHECK(r.exit_code == cli::kExitFindings);
    json j = json::parse(r.out);
    CHECK(j["profile"] == "full-fold");
    CHECK(j["config"]["profile"] == "full-fold");

    // the command-line profile wins over the file
    auto r2 = run({"--config", (dir / "collide.conf").string(), "scan", "--list",
                   (dir / "list.txt").string(), "--profile", "ascii"});
    CHECK(r2.exit_code == cli::kExitClean);
    fs::remove_all(dir);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run({"scan"}).exit_code == cli::kExitUsage);
    CHECK(run({"classify", "--utility", "nope", "--case", "file-file-d1-tf"}).exit_code ==
          cli::kExitUsage);
    CHECK(run({"gen", "--id", "no-such-case", "--image", "/tmp/x"}).exit_code == cli::kExitUsage);
    CHECK(run({"bogus-subcommand"}).exit_code == cli::kExitUsage);
}

TEST_CASE("the help examples execute as documented") {
    namespace fs = std::filesystem;
    auto help = run({"--help"});
    REQUIRE(help.exit_code == cli::kExitClean);

    fs::path dir = fs::temp_directory_path() / ("cli-doc-" + std::to_string(::getpid()));
    fs::create_directory(dir);
    if (casegen::host_is_case_insensitive(dir)) {
        fs::remove_all(dir);
        SKIP("temp directory is case-insensitive");
    }
    fs::path saved_cwd = fs::current_path();
    fs::current_path(dir);

    int executed = 0;
    std::istringstream lines(help.out);
    std::string line;
    while (std::getline(lines, line)) {
        size_t pos = line.find("$ collide ");
        if (pos == std::string::npos) continue;
        std::string cmdline = line.substr(pos + 10);
        std::vector<std::string> args;
        std::istringstream words(cmdline);
        std::string w;
        while (words >> w) args.push_back(w);
        INFO("example: collide " << cmdline);
        auto r = run(args);
        CHECK((r.exit_code == cli::kExitClean || r.exit_code == cli::kExitFindings));
        ++executed;
    }
    CHECK(executed >= 5);

    fs::current_path(saved_cwd);
    fs::remove_all(dir);
}

TEST_CASE("gen --image writes a deterministic dump") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("cli-img-" + std::to_string(::getpid()));
    fs::create_directory(dir);
    auto a = run({"gen", "--id", "hardlink-hardlink-d1-tf", "--image", (dir / "a.dump").string()});
    auto b = run({"gen", "--id", "hardlink-hardlink-d1-tf", "--image", (dir / "b.dump").string()});
    CHECK(a.exit_code == cli::kExitClean);
    CHECK(b.exit_code == cli::kExitClean);
    std::ifstream fa(dir / "a.dump"), fb(dir / "b.dump");
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(sa.str().find("hfoo") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("model --scenario prints the narrative checks") {
    auto r = run({"model", "--scenario", "git_cve"});
    CHECK(r.exit_code == cli::kExitFindings);  // the reproduced attack is a finding
    CHECK(r.out.find("hook script exists") != std::string::npos);
    CHECK(r.out.find("FAIL") == std::string::npos);
}
