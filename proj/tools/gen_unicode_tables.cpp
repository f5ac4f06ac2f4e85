// Build-time code generator: parses the pinned data files under data/ and
// emits the lookup tables consumed by collide/fold.hpp.
//
//   gen_unicode_tables <CaseFolding.txt> <NormalizationData.txt> <out.hpp>
//
// Turkic (T) fold entries are parsed but skipped; the built-in profiles are
// locale-free.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct FoldRow {
    uint32_t cp = 0;
    std::vector<uint32_t> map;
};

struct CccRow {
    uint32_t cp = 0;
    unsigned ccc = 0;
};

struct DecompRow {
    uint32_t cp = 0;
    uint32_t first = 0;
    uint32_t second = 0;
};

struct ComposeRow {
    uint32_t first = 0;
    uint32_t second = 0;
    uint32_t composed = 0;
};

std::vector<uint32_t> parse_hex_seq(const std::string& s) {
    std::vector<uint32_t> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(static_cast<uint32_t>(std::strtoul(tok.c_str(), nullptr, 16)));
    return out;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void die(const std::string& msg) {
    std::fprintf(stderr, "gen_unicode_tables: %s\n", msg.c_str());
    std::exit(1);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 4) die("usage: gen_unicode_tables <CaseFolding.txt> <NormalizationData.txt> <out.hpp>");

    std::string unicode_version;
    std::vector<FoldRow> simple, full;

    {
        std::ifstream in(argv[1]);
        if (!in) die(std::string("cannot open ") + argv[1]);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("# Unicode-Version:", 0) == 0) {
                unicode_version = trim(line.substr(18));
                continue;
            }
            if (line.empty() || line[0] == '#') continue;
            size_t s1 = line.find(';');
            size_t s2 = line.find(';', s1 + 1);
            size_t s3 = line.find(';', s2 + 1);
            if (s1 == std::string::npos || s2 == std::string::npos || s3 == std::string::npos)
                die("malformed fold line: " + line);
            uint32_t cp = static_cast<uint32_t>(std::strtoul(line.substr(0, s1).c_str(), nullptr, 16));
            std::string status = trim(line.substr(s1 + 1, s2 - s1 - 1));
            std::vector<uint32_t> map = parse_hex_seq(line.substr(s2 + 1, s3 - s2 - 1));
            if (map.empty() || map.size() > 3) die("bad mapping length: " + line);
            if (status == "C") {
                if (map.size() != 1) die("C entry must be 1:1: " + line);
                simple.push_back({cp, map});
                full.push_back({cp, map});
            } else if (status == "S") {
                if (map.size() != 1) die("S entry must be 1:1: " + line);
                simple.push_back({cp, map});
            } else if (status == "F") {
                full.push_back({cp, map});
            } else if (status == "T") {
                // Locale-sensitive; not used by the built-in profiles.
            } else {
                die("unknown status: " + line);
            }
        }
    }
    if (unicode_version.empty()) die("CaseFolding data lacks a Unicode-Version header");

    std::vector<CccRow> ccc;
    std::vector<DecompRow> decomp;
    std::vector<ComposeRow> compose;
    {
        std::ifstream in(argv[2]);
        if (!in) die(std::string("cannot open ") + argv[2]);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            size_t s1 = line.find(';');
            size_t s2 = line.find(';', s1 + 1);
            if (s1 == std::string::npos || s2 == std::string::npos) die("malformed record: " + line);
            std::string kind = line.substr(0, s1);
            std::string f1 = line.substr(s1 + 1, s2 - s1 - 1);
            std::string f2 = line.substr(s2 + 1);
            if (kind == "ccc") {
                ccc.push_back({static_cast<uint32_t>(std::strtoul(f1.c_str(), nullptr, 16)),
                               static_cast<unsigned>(std::strtoul(f2.c_str(), nullptr, 10))});
            } else if (kind == "decomp") {
                auto cps = parse_hex_seq(f2);
                if (cps.empty() || cps.size() > 2) die("bad decomp: " + line);
                decomp.push_back({static_cast<uint32_t>(std::strtoul(f1.c_str(), nullptr, 16)),
                                  cps[0], cps.size() == 2 ? cps[1] : 0});
            } else if (kind == "comp") {
                auto pair = parse_hex_seq(f1);
                if (pair.size() != 2) die("bad comp pair: " + line);
                compose.push_back({pair[0], pair[1],
                                   static_cast<uint32_t>(std::strtoul(f2.c_str(), nullptr, 16))});
            } else {
                die("unknown record kind: " + line);
            }
        }
    }

    auto by_cp = [](const auto& a, const auto& b) { return a.cp < b.cp; };
    std::sort(simple.begin(), simple.end(), by_cp);
    std::sort(full.begin(), full.end(), by_cp);
    std::sort(ccc.begin(), ccc.end(), by_cp);
    std::sort(decomp.begin(), decomp.end(), by_cp);
    std::sort(compose.begin(), compose.end(), [](const ComposeRow& a, const ComposeRow& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    });

    std::ofstream out(argv[3]);
    if (!out) die(std::string("cannot open ") + argv[3]);

    out << "// Generated by gen_unicode_tables from the pinned data files under data/.\n"
           "// Do not edit by hand.\n"
           "#pragma once\n\n"
           "#include <cstdint>\n\n"
           "namespace collide::tables {\n\n";
    out << "inline constexpr char kUnicodeVersion[] = \"" << unicode_version << "\";\n\n";

    out << "struct FoldRow {\n"
           "    char32_t cp;\n"
           "    char32_t map[3];\n"
           "    std::uint8_t len;\n"
           "};\n\n";

    auto emit_fold = [&out](const char* name, const std::vector<FoldRow>& rows) {
        out << "inline constexpr FoldRow " << name << "[] = {\n";
        for (const auto& r : rows) {
            out << "    {" << r.cp << ", {";
            for (size_t i = 0; i < 3; ++i) {
                out << (i < r.map.size() ? r.map[i] : 0u);
                if (i != 2) out << ", ";
            }
            out << "}, " << r.map.size() << "},\n";
        }
        out << "};\n\n";
    };
    emit_fold("kSimpleFold", simple);
    emit_fold("kFullFold", full);

    out << "struct CccRow {\n"
           "    char32_t cp;\n"
           "    std::uint8_t ccc;\n"
           "};\n\n"
           "inline constexpr CccRow kCombiningClass[] = {\n";
    for (const auto& r : ccc) out << "    {" << r.cp << ", " << r.ccc << "},\n";
    out << "};\n\n";

    out << "struct DecompRow {\n"
           "    char32_t cp;\n"
           "    char32_t first;\n"
           "    char32_t second;  // 0 for singleton decompositions\n"
           "};\n\n"
           "inline constexpr DecompRow kCanonicalDecomp[] = {\n";
    for (const auto& r : decomp)
        out << "    {" << r.cp << ", " << r.first << ", " << r.second << "},\n";
    out << "};\n\n";

    out << "struct ComposeRow {\n"
           "    char32_t first;\n"
           "    char32_t second;\n"
           "    char32_t composed;\n"
           "};\n\n"
           "inline constexpr ComposeRow kCanonicalCompose[] = {\n";
    for (const auto& r : compose)
        out << "    {" << r.first << ", " << r.second << ", " << r.composed << "},\n";
    out << "};\n\n";

    out << "}  // namespace collide::tables\n";
    return 0;
}
