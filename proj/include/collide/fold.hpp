#pragma once

// Case-fold profiles and canonical name keys. A profile reifies one file
// system flavor's notion of name equivalence:
//
//   sensitive    identity (classic POSIX)
//   ascii        A-Z only (ZFS-style casesensitivity=insensitive)
//   simple-fold  Unicode 1:1 simple folding (NTFS, APFS)
//   full-fold    Unicode full folding with 1:N expansions (ext4 +F)
//
// Tables are generated from the pinned data files under data/; the pinned
// Unicode version travels with every profile and report.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "collide/error.hpp"
#include "collide/unicode_tables.hpp"
#include "collide/utf8.hpp"

namespace collide {

enum class ProfileId { sensitive, ascii, simple_fold, full_fold };

namespace detail {

inline const tables::FoldRow* fold_lookup(std::span<const tables::FoldRow> table, char32_t cp) {
    auto it = std::lower_bound(table.begin(), table.end(), cp,
                               [](const tables::FoldRow& r, char32_t c) { return r.cp < c; });
    if (it == table.end() || it->cp != cp) return nullptr;
    return &*it;
}

inline std::uint8_t combining_class(char32_t cp) {
    std::span<const tables::CccRow> t(tables::kCombiningClass);
    auto it = std::lower_bound(t.begin(), t.end(), cp,
                               [](const tables::CccRow& r, char32_t c) { return r.cp < c; });
    if (it == t.end() || it->cp != cp) return 0;
    return it->ccc;
}

// Hangul syllable composition constants.
inline constexpr char32_t kHangulSBase = 0xAC00, kHangulLBase = 0x1100, kHangulVBase = 0x1161,
                          kHangulTBase = 0x11A7;
inline constexpr int kHangulVCount = 21, kHangulTCount = 28, kHangulNCount = 588,
                     kHangulSCount = 11172;

inline void canonical_decompose(char32_t cp, std::u32string& out) {
    if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
        char32_t s = cp - kHangulSBase;
        out.push_back(kHangulLBase + s / kHangulNCount);
        out.push_back(kHangulVBase + (s % kHangulNCount) / kHangulTCount);
        if (s % kHangulTCount) out.push_back(kHangulTBase + s % kHangulTCount);
        return;
    }
    std::span<const tables::DecompRow> t(tables::kCanonicalDecomp);
    auto it = std::lower_bound(t.begin(), t.end(), cp,
                               [](const tables::DecompRow& r, char32_t c) { return r.cp < c; });
    if (it == t.end() || it->cp != cp) {
        out.push_back(cp);
        return;
    }
    canonical_decompose(it->first, out);
    if (it->second) canonical_decompose(it->second, out);
}

inline char32_t compose_pair(char32_t a, char32_t b) {
    if (a >= kHangulLBase && a < kHangulLBase + 19 && b >= kHangulVBase &&
        b < kHangulVBase + kHangulVCount) {
        return kHangulSBase + ((a - kHangulLBase) * kHangulVCount + (b - kHangulVBase)) *
                                  kHangulTCount;
    }
    if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
        (a - kHangulSBase) % kHangulTCount == 0 && b > kHangulTBase &&
        b < kHangulTBase + kHangulTCount) {
        return a + (b - kHangulTBase);
    }
    std::span<const tables::ComposeRow> t(tables::kCanonicalCompose);
    auto it = std::lower_bound(t.begin(), t.end(), std::pair<char32_t, char32_t>{a, b},
                               [](const tables::ComposeRow& r, std::pair<char32_t, char32_t> k) {
                                   return r.first != k.first ? r.first < k.first
                                                             : r.second < k.second;
                               });
    if (it == t.end() || it->first != a || it->second != b) return 0;
    return it->composed;
}

// Canonical composition (NFC): decompose, reorder marks, then compose.
inline std::u32string normalize_nfc(std::u32string_view in) {
    std::u32string buf;
    buf.reserve(in.size());
    for (char32_t cp : in) canonical_decompose(cp, buf);

    // Canonical ordering: stable bubble of adjacent marks.
    for (size_t i = 1; i < buf.size(); ++i) {
        std::uint8_t cc = combining_class(buf[i]);
        if (cc == 0) continue;
        size_t j = i;
        while (j > 0 && combining_class(buf[j - 1]) > cc) {
            std::swap(buf[j - 1], buf[j]);
            --j;
        }
    }

    std::u32string out;
    out.reserve(buf.size());
    ptrdiff_t last_starter = -1;
    std::uint8_t prev_cc = 0;
    for (char32_t cp : buf) {
        std::uint8_t cc = combining_class(cp);
        if (last_starter >= 0) {
            bool blocked = out.size() > static_cast<size_t>(last_starter) + 1 && prev_cc >= cc &&
                           cc != 0;
            bool adjacent = out.size() == static_cast<size_t>(last_starter) + 1;
            if ((adjacent || (!blocked && cc != 0))) {
                if (char32_t composed = compose_pair(out[last_starter], cp)) {
                    out[last_starter] = composed;
                    continue;
                }
            }
        }
        out.push_back(cp);
        if (cc == 0) {
            last_starter = static_cast<ptrdiff_t>(out.size()) - 1;
            prev_cc = 0;
        } else {
            prev_cc = cc;
        }
    }
    return out;
}

}  // namespace detail

struct FoldProfile {
    ProfileId id = ProfileId::sensitive;
    std::string name = "sensitive";
    bool normalize = false;  // apply canonical composition before folding
    std::string unicode_version = tables::kUnicodeVersion;

    void fold_cp(char32_t cp, std::u32string& out) const {
        switch (id) {
            case ProfileId::sensitive:
                out.push_back(cp);
                return;
            case ProfileId::ascii:
                out.push_back(cp >= U'A' && cp <= U'Z' ? cp + 0x20 : cp);
                return;
            case ProfileId::simple_fold:
                if (const auto* r = detail::fold_lookup(tables::kSimpleFold, cp)) {
                    out.push_back(r->map[0]);
                } else {
                    out.push_back(cp);
                }
                return;
            case ProfileId::full_fold:
                if (const auto* r = detail::fold_lookup(tables::kFullFold, cp)) {
                    for (std::uint8_t i = 0; i < r->len; ++i) out.push_back(r->map[i]);
                } else {
                    out.push_back(cp);
                }
                return;
        }
    }
};

// Folded (and optionally normalized) name bytes. Two names collide under a
// profile iff their keys are byte-equal while the raw names are not.
struct CanonicalKey {
    std::string bytes;
    friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
};

inline CanonicalKey fold_name(std::string_view name, const FoldProfile& profile) {
    if (name.empty()) throw Error(Errc::invalid_name, "empty name");
    if (name.find('/') != std::string_view::npos)
        throw Error(Errc::invalid_name, "embedded path separator in '" + std::string(name) + "'");
    if (name.find('\0') != std::string_view::npos)
        throw Error(Errc::invalid_name, "embedded NUL");
    auto cps = utf8::decode(name);
    if (!cps) throw Error(Errc::invalid_name, "ill-formed UTF-8 in name");
    std::u32string in = profile.normalize ? detail::normalize_nfc(*cps) : std::move(*cps);
    std::u32string folded;
    folded.reserve(in.size());
    for (char32_t cp : in) profile.fold_cp(cp, folded);
    return CanonicalKey{utf8::encode(folded)};
}

inline bool names_collide(std::string_view a, std::string_view b, const FoldProfile& profile) {
    if (a == b) return false;
    return fold_name(a, profile) == fold_name(b, profile);
}

inline const std::vector<FoldProfile>& builtin_profiles() {
    static const std::vector<FoldProfile> profiles = {
        {ProfileId::sensitive, "sensitive"},
        {ProfileId::ascii, "ascii"},
        {ProfileId::simple_fold, "simple-fold"},
        {ProfileId::full_fold, "full-fold"},
    };
    return profiles;
}

inline const FoldProfile* find_profile(std::string_view name) {
    for (const auto& p : builtin_profiles())
        if (p.name == name) return &p;
    return nullptr;
}

inline const FoldProfile& profile_by_name(std::string_view name) {
    if (const FoldProfile* p = find_profile(name)) return *p;
    throw Error(Errc::bad_input, "unknown profile '" + std::string(name) +
                                     "' (expected sensitive|ascii|simple-fold|full-fold)");
}

// Raw table access, used by tests and reports.
inline std::optional<std::u32string> simple_fold_mapping(char32_t cp) {
    if (const auto* r = detail::fold_lookup(tables::kSimpleFold, cp))
        return std::u32string(r->map, r->map + r->len);
    return std::nullopt;
}

inline std::optional<std::u32string> full_fold_mapping(char32_t cp) {
    if (const auto* r = detail::fold_lookup(tables::kFullFold, cp))
        return std::u32string(r->map, r->map + r->len);
    return std::nullopt;
}

}  // namespace collide
