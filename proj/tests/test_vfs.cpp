#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "collide/diff.hpp"
#include "collide/vfs.hpp"

using namespace collide;

namespace {

Metadata mode_of(unsigned m) {
    Metadata md;
    md.mode = m;
    return md;
}

}  // namespace

TEST_CASE("fold-flagged directory resolves by canonical key, case preserved") {
    FsImage img;
    img.mkdir("/", "icase", mode_of(0755), FoldSpec::folded, "ascii");
    img.create("/icase", "Foo", NodeKind::file, mode_of(0644), {}, "x");

    CHECK(img.lookup("/icase/FOO").has_value());
    CHECK(img.lookup("/icase/foo").has_value());
    CHECK(*img.lookup("/icase/FOO") == *img.lookup("/icase/Foo"));
    CHECK(img.readdir("/icase") == std::vector<std::string>{"Foo"});

    img.mkdir("/", "plain", mode_of(0755));
    img.create("/plain", "Foo", NodeKind::file, mode_of(0644));
    CHECK_FALSE(img.lookup("/plain/FOO").has_value());
}

TEST_CASE("sensitive directories may nest inside fold-flagged ones") {
    FsImage img;
    img.mkdir("/", "icase", mode_of(0755), FoldSpec::folded, "ascii");
    img.mkdir("/icase", "inner", mode_of(0755), FoldSpec::sensitive);
    img.create("/icase/inner", "a", NodeKind::file, mode_of(0644));
    img.create("/icase/inner", "A", NodeKind::file, mode_of(0644));
    CHECK(img.readdir("/icase/INNER") == std::vector<std::string>{"a", "A"});
    img.check_invariants();
}

TEST_CASE("repo-style lookup routes a colliding component through the symlink") {
    FsImage img;
    img.mkdir("/", "repo", mode_of(0755), FoldSpec::folded, "ascii");
    img.mkdir("/repo", ".git", mode_of(0755));
    img.mkdir("/repo/.git", "hooks", mode_of(0755));
    int script =
        img.create("/repo/.git/hooks", "post-checkout", NodeKind::file, mode_of(0755), {}, "hi")
            .inode;
    img.symlink(".git/hooks", "/repo", "a");

    auto found = img.lookup("/repo/A/post-checkout");
    REQUIRE(found.has_value());
    CHECK(*found == script);
}

TEST_CASE("create honors exclusive and exclusive-name options") {
    FsImage img;
    img.mkdir("/", "d", mode_of(0755), FoldSpec::folded, "ascii");
    img.create("/d", "foo", NodeKind::file, mode_of(0644), {}, "data");

    SECTION("exclusive_name refuses a byte-differing colliding name") {
        CreateOptions opts;
        opts.exclusive_name = true;
        try {
            img.create("/d", "FOO", NodeKind::file, mode_of(0644), opts);
            FAIL("expected CollidesDifferingName");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::collides_differing_name);
        }
        // Identical raw name is an ordinary overwrite under exclusive_name.
        auto r = img.create("/d", "foo", NodeKind::file, mode_of(0644), opts, "new");
        CHECK(img.read("/d/foo") == "new");
        CHECK_FALSE(r.collided);
    }

    SECTION("exclusive refuses both spellings") {
        CreateOptions opts;
        opts.exclusive = true;
        CHECK_THROWS_AS(img.create("/d", "foo", NodeKind::file, mode_of(0644), opts), Error);
        CHECK_THROWS_AS(img.create("/d", "FOO", NodeKind::file, mode_of(0644), opts), Error);
    }

    SECTION("plain create opens the existing node and truncates") {
        int before = *img.lookup("/d/foo");
        auto r = img.create("/d", "FOO", NodeKind::file, mode_of(0644), {}, "");
        CHECK(r.inode == before);
        CHECK(r.collided);
        CHECK(r.entry_raw == "foo");
        CHECK(img.read("/d/foo").empty());
        CHECK(img.readdir("/d") == std::vector<std::string>{"foo"});
    }
}

TEST_CASE("create through a colliding symlink lands on the referent") {
    FsImage img;
    img.mkdir("/", "tmp", mode_of(01777));
    img.create("/tmp", "payload", NodeKind::file, mode_of(0644), {}, "bar");
    img.mkdir("/", "d", mode_of(0755), FoldSpec::folded, "ascii");
    img.symlink("/tmp/payload", "/d", "dat");

    auto r = img.create("/d", "DAT", NodeKind::file, mode_of(0600), {}, "pawn");
    CHECK(r.through_symlink);
    CHECK(r.collided);
    CHECK(r.referent == "/tmp/payload");
    CHECK(img.read("/tmp/payload") == "pawn");
    CHECK(img.node(*img.lookup("/d/dat")).kind == NodeKind::symlink);
}

TEST_CASE("dangling symlink referents are created on open") {
    FsImage img;
    img.mkdir("/", "tmp", mode_of(01777));
    img.mkdir("/", "d", mode_of(0755), FoldSpec::folded, "ascii");
    img.symlink("/tmp/ghost", "/d", "dat");
    img.create("/d", "DAT", NodeKind::file, mode_of(0600), {}, "pawn");
    CHECK(img.read("/tmp/ghost") == "pawn");
}

TEST_CASE("pipes capture bytes written through them") {
    FsImage img;
    img.mkdir("/", "d", mode_of(0755), FoldSpec::folded, "ascii");
    img.create("/d", "foo", NodeKind::pipe, mode_of(0666));
    auto r = img.create("/d", "FOO", NodeKind::file, mode_of(0600), {}, "secret");
    CHECK(r.collided);
    const FsNode& pipe_node = img.node(r.inode);
    CHECK(pipe_node.kind == NodeKind::pipe);
    CHECK(pipe_node.capture == "secret");
    CHECK(pipe_node.content.empty());
}

TEST_CASE("link onto a colliding name re-points the existing entry") {
    FsImage img;
    img.mkdir("/", "d", mode_of(0755), FoldSpec::folded, "ascii");
    int zzz = img.create("/d", "zzz", NodeKind::file, mode_of(0644), {}, "foo").inode;
    int hbar = img.create("/d", "hbar", NodeKind::file, mode_of(0644), {}, "bar").inode;

    auto r = img.link("/d/hbar", "/d", "ZZZ");
    CHECK(r.collided);
    CHECK(r.prior_inode == zzz);
    CHECK(r.inode == hbar);
    CHECK(r.entry_raw == "zzz");  // entry keeps its original raw name
    CHECK(img.read("/d/zzz") == "bar");
    CHECK(img.node(hbar).nlink == 2);
    CHECK_FALSE(img.has_node(zzz));  // last reference dropped
    img.check_invariants();
}

TEST_CASE("link with an identical raw name fails") {
    FsImage img;
    img.mkdir("/", "d", mode_of(0755), FoldSpec::folded, "ascii");
    img.create("/d", "a", NodeKind::file, mode_of(0644));
    img.create("/d", "b", NodeKind::file, mode_of(0644));
    CHECK_THROWS_AS(img.link("/d/a", "/d", "b"), Error);
}

TEST_CASE("unlink drops entries and garbage-collects at zero") {
    FsImage img;
    img.mkdir("/", "d", mode_of(0755));
    int f = img.create("/d", "f", NodeKind::file, mode_of(0644), {}, "x").inode;
    img.link("/d/f", "/d", "g");
    CHECK(img.node(f).nlink == 2);
    img.unlink("/d/f");
    CHECK(img.node(f).nlink == 1);
    CHECK(img.has_node(f));
    img.unlink("/d/g");
    CHECK_FALSE(img.has_node(f));
    img.check_invariants();
}

TEST_CASE("readdir preserves raw names in insertion order") {
    FsImage img;
    img.mkdir("/", "d", mode_of(0755), FoldSpec::folded, "ascii");
    img.create("/d", "a", NodeKind::file, mode_of(0644));
    img.create("/d", "B", NodeKind::file, mode_of(0644));
    img.create("/d", "c", NodeKind::file, mode_of(0644));
    CHECK(img.readdir("/d") == std::vector<std::string>{"a", "B", "c"});
}

TEST_CASE("symlink cycles exhaust the loop limit") {
    FsImage img;
    img.symlink("/b", "/", "a");
    img.symlink("/a", "/", "b");
    CHECK_THROWS_AS(img.lookup("/a/x"), Error);
    try {
        img.lookup("/a/x");
        FAIL("expected LoopLimitExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::loop_limit_exceeded);
    }
}

TEST_CASE("traversing a non-directory component raises NotADirectory") {
    FsImage img;
    img.create("/", "f", NodeKind::file, mode_of(0644));
    CHECK_THROWS_AS(img.lookup("/f/x"), Error);
}

TEST_CASE("missing components resolve to absent, not an error") {
    FsImage img;
    CHECK_FALSE(img.lookup("/nope").has_value());
    CHECK_FALSE(img.lookup("/nope/deeper").has_value());
}

TEST_CASE("fold flag requires an empty directory") {
    FsImage img;
    img.mkdir("/", "d", mode_of(0755));
    img.create("/d", "x", NodeKind::file, mode_of(0644));
    CHECK_THROWS_AS(img.set_fold_flag("/d", "ascii"), Error);
    img.mkdir("/", "e", mode_of(0755), FoldSpec::sensitive);
    img.set_fold_flag("/e", "ascii");
    img.create("/e", "Foo", NodeKind::file, mode_of(0644));
    CHECK(img.lookup("/e/foo").has_value());
}

TEST_CASE("unlinking a non-empty directory is refused") {
    FsImage img;
    img.mkdir("/", "d", mode_of(0755));
    img.create("/d", "x", NodeKind::file, mode_of(0644));
    CHECK_THROWS_AS(img.unlink("/d"), Error);
}

TEST_CASE("identical operation sequences produce identical dumps") {
    auto build = [] {
        FsImage img("00:39");
        img.mkdir("/", "d", mode_of(0755), FoldSpec::folded, "ascii");
        img.create("/d", "foo", NodeKind::file, mode_of(0600), {}, "data");
        img.symlink("/d/foo", "/d", "lnk");
        img.link("/d/foo", "/d", "hfoo");
        img.create("/d", "p", NodeKind::pipe, mode_of(0666));
        return img.dump();
    };
    std::string a = build();
    std::string b = build();
    CHECK(a == b);
    CHECK_FALSE(a.empty());
}

TEST_CASE("random operation sequences keep the structural invariants") {
    std::mt19937 rng(99);
    for (int round = 0; round < 50; ++round) {
        FsImage img;
        img.mkdir("/", "d", mode_of(0755), FoldSpec::folded, "ascii");
        std::vector<std::string> created;
        std::uniform_int_distribution<int> action(0, 3);
        std::uniform_int_distribution<int> name_pick(0, 7);
        static const char* names[] = {"a", "A", "bb", "BB", "c1", "C1", "dd", "DD"};
        for (int step = 0; step < 40; ++step) {
            std::string n = names[name_pick(rng)];
            try {
                switch (action(rng)) {
                    case 0:
                        img.create("/d", n, NodeKind::file, mode_of(0644), {}, "x");
                        created.push_back(n);
                        break;
                    case 1:
                        if (!created.empty())
                            img.link("/d/" + created[0], "/d", n);
                        break;
                    case 2:
                        img.unlink("/d/" + n);
                        break;
                    case 3:
                        img.create("/d", n, NodeKind::pipe, mode_of(0666));
                        break;
                }
            } catch (const Error&) {
                // collisions and missing names are expected; invariants must
                // survive regardless
            }
            img.check_invariants();
        }
    }
}

TEST_CASE("snapshot_diff: identical images yield an empty delta") {
    FsImage img;
    img.mkdir("/", "d", mode_of(0755));
    img.create("/d", "f", NodeKind::file, mode_of(0644), {}, "x");
    FsImage copy = img;
    CHECK(snapshot_diff(img, copy).empty());
}

TEST_CASE("snapshot_diff reports kind changes, metadata and content edits") {
    FsImage before;
    before.mkdir("/", "target", mode_of(0755));
    before.mkdir("/target", "dir", mode_of(0755));
    before.create("/target/dir", "foo", NodeKind::file, mode_of(0644), {}, "data");

    FsImage after = before;
    after.unlink("/target/dir/foo");
    after.create("/target/dir", "foo", NodeKind::pipe, mode_of(0666));
    after.set_mode("/target/dir", 0777);

    SnapshotDelta d = snapshot_diff(before, after, "/target");
    const PathChange* foo = d.find_changed("/target/dir/foo");
    REQUIRE(foo != nullptr);
    CHECK(foo->kind_changed);
    CHECK(foo->before.kind == NodeKind::file);
    CHECK(foo->after.kind == NodeKind::pipe);
    CHECK(foo->retargeted);
    const PathChange* dir = d.find_changed("/target/dir");
    REQUIRE(dir != nullptr);
    CHECK(dir->meta_changed);
}

TEST_CASE("snapshot_diff delta replays onto the before facts") {
    FsImage before;
    before.mkdir("/", "t", mode_of(0755));
    before.create("/t", "keep", NodeKind::file, mode_of(0644), {}, "k");
    before.create("/t", "gone", NodeKind::file, mode_of(0644), {}, "g");
    before.create("/t", "edit", NodeKind::file, mode_of(0644), {}, "old");

    FsImage after = before;
    after.unlink("/t/gone");
    after.write("/t/edit", "new");
    after.create("/t", "fresh", NodeKind::file, mode_of(0600), {}, "f");
    after.set_mode("/t/keep", 0400);

    SnapshotDelta d = snapshot_diff(before, after, "/t");
    auto facts = path_facts(before, "/t");
    for (const auto& [p, f] : d.added) facts[p] = f;
    for (const auto& [p, f] : d.removed) facts.erase(p);
    for (const auto& c : d.changed) facts[c.path] = c.after;

    auto want = path_facts(after, "/t");
    REQUIRE(facts.size() == want.size());
    for (const auto& [p, f] : want) {
        REQUIRE(facts.count(p));
        CHECK(facts[p].kind == f.kind);
        CHECK(facts[p].content == f.content);
        CHECK(facts[p].mode == f.mode);
    }
}

TEST_CASE("write follows final symlinks and reports the referent") {
    FsImage img;
    img.create("/", "real", NodeKind::file, mode_of(0644), {}, "1");
    img.symlink("/real", "/", "ln");
    auto r = img.write("/ln", "2");
    CHECK(r.through_symlink);
    CHECK(r.referent == "/real");
    CHECK(img.read("/real") == "2");
}
