// Regenerates the pinned Unicode data files under data/ from the ICU library
// installed on the build host. Run manually when bumping the Unicode pin:
//
//   dump_unicode_data <out-casefolding.txt> <out-normalization.txt>
//
// The build itself never links ICU; it consumes the committed data files.

#include <unicode/uchar.h>
#include <unicode/unorm2.h>
#include <unicode/ustring.h>
#include <unicode/uversion.h>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

namespace {

std::string hex(UChar32 cp) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04X", static_cast<unsigned>(cp));
    return buf;
}

std::string hex_seq(const std::vector<UChar32>& cps) {
    std::string out;
    for (size_t i = 0; i < cps.size(); ++i) {
        if (i) out += ' ';
        out += hex(cps[i]);
    }
    return out;
}

std::vector<UChar32> utf16_to_cps(const UChar* s, int32_t len) {
    std::vector<UChar32> out;
    int32_t i = 0;
    while (i < len) {
        UChar32 c;
        U16_NEXT(s, i, len, c);
        out.push_back(c);
    }
    return out;
}

std::vector<UChar32> full_fold(UChar32 cp, uint32_t options) {
    UChar src[2];
    int32_t srclen = 0;
    UBool err16 = false;
    U16_APPEND(src, srclen, 2, cp, err16);
    if (err16) return {cp};
    UChar dst[16];
    UErrorCode status = U_ZERO_ERROR;
    int32_t n = u_strFoldCase(dst, 16, src, srclen, options, &status);
    if (U_FAILURE(status)) return {cp};
    return utf16_to_cps(dst, n);
}

bool is_hangul_syllable(UChar32 cp) { return cp >= 0xAC00 && cp <= 0xD7A3; }

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::fprintf(stderr, "usage: %s <CaseFolding.txt> <NormalizationData.txt>\n", argv[0]);
        return 2;
    }

    UVersionInfo uv;
    u_getUnicodeVersion(uv);
    char uver[16];
    std::snprintf(uver, sizeof uver, "%d.%d", uv[0], uv[1]);

    FILE* cf = std::fopen(argv[1], "w");
    FILE* nd = std::fopen(argv[2], "w");
    if (!cf || !nd) {
        std::perror("fopen");
        return 1;
    }

    std::fprintf(cf,
                 "# CaseFolding data, Unicode %s\n"
                 "# Dumped from ICU %s with dump_unicode_data; format follows the UCD\n"
                 "# CaseFolding.txt conventions: <code>; <status>; <mapping>;\n"
                 "# Status: C common, S simple-only, F full-only, T Turkic.\n"
                 "# Unicode-Version: %s\n",
                 uver, U_ICU_VERSION, uver);

    for (UChar32 cp = 0; cp <= 0x10FFFF; ++cp) {
        if (cp >= 0xD800 && cp <= 0xDFFF) continue;

        UChar32 simple = u_foldCase(cp, U_FOLD_CASE_DEFAULT);
        std::vector<UChar32> full = full_fold(cp, U_FOLD_CASE_DEFAULT);
        bool full_identity = full.size() == 1 && full[0] == cp;

        if (simple == cp && full_identity) {
            // No default mapping; may still have a Turkic override below.
        } else if (full.size() == 1) {
            if (full[0] != simple) {
                std::fprintf(stderr, "warning: %04X single full fold %04X != simple %04X\n",
                             cp, full[0], simple);
            }
            std::fprintf(cf, "%s; C; %s;\n", hex(cp).c_str(), hex(full[0]).c_str());
        } else {
            std::fprintf(cf, "%s; F; %s;\n", hex(cp).c_str(), hex_seq(full).c_str());
            if (simple != cp)
                std::fprintf(cf, "%s; S; %s;\n", hex(cp).c_str(), hex(simple).c_str());
        }

        UChar32 turkic = u_foldCase(cp, U_FOLD_CASE_EXCLUDE_SPECIAL_I);
        if (turkic != simple)
            std::fprintf(cf, "%s; T; %s;\n", hex(cp).c_str(), hex(turkic).c_str());
    }
    std::fclose(cf);

    UErrorCode status = U_ZERO_ERROR;
    const UNormalizer2* nfc = unorm2_getNFCInstance(&status);
    if (U_FAILURE(status)) {
        std::fprintf(stderr, "unorm2_getNFCInstance: %s\n", u_errorName(status));
        return 1;
    }

    std::fprintf(nd,
                 "# Canonical normalization data, Unicode %s\n"
                 "# Dumped from ICU %s with dump_unicode_data.\n"
                 "# Records: ccc;<code>;<class>  decomp;<code>;<a> [<b>]  comp;<a> <b>;<code>\n"
                 "# Hangul syllables (AC00..D7A3) are omitted; they compose algorithmically.\n"
                 "# Unicode-Version: %s\n",
                 uver, U_ICU_VERSION, uver);

    for (UChar32 cp = 0; cp <= 0x10FFFF; ++cp) {
        if (cp >= 0xD800 && cp <= 0xDFFF) continue;
        uint8_t ccc = u_getCombiningClass(cp);
        if (ccc != 0) std::fprintf(nd, "ccc;%s;%u\n", hex(cp).c_str(), ccc);
    }
    for (UChar32 cp = 0; cp <= 0x10FFFF; ++cp) {
        if (cp >= 0xD800 && cp <= 0xDFFF) continue;
        if (is_hangul_syllable(cp)) continue;
        UChar buf[32];
        status = U_ZERO_ERROR;
        int32_t n = unorm2_getRawDecomposition(nfc, cp, buf, 32, &status);
        if (U_FAILURE(status) || n <= 0) continue;
        std::vector<UChar32> dec = utf16_to_cps(buf, n);
        if (dec.size() > 2) {
            std::fprintf(stderr, "warning: %04X raw decomposition longer than 2\n", cp);
            continue;
        }
        std::fprintf(nd, "decomp;%s;%s\n", hex(cp).c_str(), hex_seq(dec).c_str());
        if (dec.size() == 2) {
            status = U_ZERO_ERROR;
            UChar32 re = unorm2_composePair(nfc, dec[0], dec[1]);
            if (re == cp)
                std::fprintf(nd, "comp;%s %s;%s\n", hex(dec[0]).c_str(), hex(dec[1]).c_str(),
                             hex(cp).c_str());
        }
    }
    std::fclose(nd);
    return 0;
}
