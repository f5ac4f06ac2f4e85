#pragma once

// Strict UTF-8 transcoding. Ill-formed sequences (overlongs, surrogates,
// truncation, out-of-range scalars) are rejected rather than replaced so that
// name folding stays deterministic.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace collide::utf8 {

inline std::optional<std::u32string> decode(std::string_view bytes) {
    std::u32string out;
    out.reserve(bytes.size());
    size_t i = 0;
    while (i < bytes.size()) {
        uint8_t b0 = static_cast<uint8_t>(bytes[i]);
        uint32_t cp = 0;
        size_t len = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            return std::nullopt;
        }
        if (i + len > bytes.size()) return std::nullopt;
        for (size_t k = 1; k < len; ++k) {
            uint8_t b = static_cast<uint8_t>(bytes[i + k]);
            if ((b & 0xC0) != 0x80) return std::nullopt;
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr uint32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (len > 1 && cp < kMinByLen[len]) return std::nullopt;  // overlong
        if (cp > 0x10FFFF) return std::nullopt;
        if (cp >= 0xD800 && cp <= 0xDFFF) return std::nullopt;  // surrogate
        out.push_back(static_cast<char32_t>(cp));
        i += len;
    }
    return out;
}

inline void append(std::string& out, char32_t cp) {
    uint32_t c = cp;
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

inline std::string encode(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append(out, cp);
    return out;
}

}  // namespace collide::utf8
