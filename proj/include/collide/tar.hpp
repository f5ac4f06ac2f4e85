#pragma once

// Minimal ustar/pax reader and writer. The reader maps member headers to
// path/kind pairs for collision scanning: pax extended headers (path,
// linkpath) and GNU long-name members are honored, data blocks are skipped.
// Unknown member types are reported per entry and the scan continues.

#include <cstdint>
#include <cstring>
#include <string>
#include <utility>
#include <string_view>
#include <vector>

#include "collide/error.hpp"

namespace collide::tar {

inline constexpr size_t kBlock = 512;

struct Member {
    std::string name;
    char typeflag = '0';
    unsigned mode = 0644;
    std::string linkname;
    std::uint64_t size = 0;
};

struct Issue {
    size_t member_index;
    std::string message;
};

struct Archive {
    std::vector<Member> members;
    std::vector<Issue> issues;
};

namespace detail {

inline std::uint64_t parse_numeric(const char* field, size_t len) {
    // GNU base-256 extension: high bit of the first byte set.
    if (len > 0 && (static_cast<unsigned char>(field[0]) & 0x80)) {
        std::uint64_t v = static_cast<unsigned char>(field[0]) & 0x7F;
        for (size_t i = 1; i < len; ++i)
            v = (v << 8) | static_cast<unsigned char>(field[i]);
        return v;
    }
    std::uint64_t v = 0;
    size_t i = 0;
    while (i < len && (field[i] == ' ' || field[i] == '\0')) ++i;
    for (; i < len && field[i] >= '0' && field[i] <= '7'; ++i)
        v = v * 8 + static_cast<std::uint64_t>(field[i] - '0');
    return v;
}

inline std::string parse_string(const char* field, size_t len) {
    size_t n = 0;
    while (n < len && field[n] != '\0') ++n;
    return std::string(field, n);
}

inline bool all_zero(const char* block) {
    for (size_t i = 0; i < kBlock; ++i)
        if (block[i] != '\0') return false;
    return true;
}

inline unsigned header_checksum(const char* block) {
    unsigned sum = 0;
    for (size_t i = 0; i < kBlock; ++i)
        sum += (i >= 148 && i < 156) ? ' ' : static_cast<unsigned char>(block[i]);
    return sum;
}

// pax extended header payload: sequence of "<len> <key>=<value>\n" records.
inline void parse_pax_records(std::string_view payload, std::string& path_override,
                              std::string& linkpath_override) {
    size_t pos = 0;
    while (pos < payload.size()) {
        size_t sp = payload.find(' ', pos);
        if (sp == std::string_view::npos) break;
        std::uint64_t len = 0;
        for (size_t i = pos; i < sp; ++i) {
            if (payload[i] < '0' || payload[i] > '9') return;
            len = len * 10 + static_cast<std::uint64_t>(payload[i] - '0');
        }
        if (len == 0 || pos + len > payload.size()) break;
        std::string_view record = payload.substr(sp + 1, pos + len - sp - 2);
        size_t eq = record.find('=');
        if (eq != std::string_view::npos) {
            std::string_view key = record.substr(0, eq);
            std::string_view value = record.substr(eq + 1);
            if (key == "path") path_override = std::string(value);
            else if (key == "linkpath") linkpath_override = std::string(value);
        }
        pos += len;
    }
}

}  // namespace detail

inline bool is_supported_typeflag(char t) {
    return t == '0' || t == '\0' || t == '1' || t == '2' || t == '3' || t == '4' || t == '5' ||
           t == '6' || t == '7';
}

inline Archive parse(std::string_view bytes) {
    Archive out;
    size_t off = 0;
    std::string pax_path, pax_link;  // pending overrides for the next member
    std::string gnu_longname, gnu_longlink;
    size_t index = 0;
    bool terminated = false;
    while (off + kBlock <= bytes.size()) {
        const char* block = bytes.data() + off;
        if (detail::all_zero(block)) {
            terminated = true;
            break;  // end-of-archive marker
        }
        unsigned stored = static_cast<unsigned>(detail::parse_numeric(block + 148, 8));
        if (detail::header_checksum(block) != stored)
            throw Error(Errc::truncated_archive,
                        "bad header checksum at offset " + std::to_string(off));
        Member m;
        m.typeflag = block[156];
        m.mode = static_cast<unsigned>(detail::parse_numeric(block + 100, 8)) & 07777;
        m.size = detail::parse_numeric(block + 124, 12);
        m.name = detail::parse_string(block, 100);
        m.linkname = detail::parse_string(block + 157, 100);
        std::string magic = detail::parse_string(block + 257, 6);
        if (magic.rfind("ustar", 0) == 0) {
            std::string prefix = detail::parse_string(block + 345, 155);
            if (!prefix.empty()) m.name = prefix + "/" + m.name;
        }
        size_t data_blocks = (m.size + kBlock - 1) / kBlock;
        size_t data_off = off + kBlock;
        if (data_off + data_blocks * kBlock > bytes.size() && m.size > 0)
            throw Error(Errc::truncated_archive,
                        "member data extends past end of archive: " + m.name);
        off = data_off + data_blocks * kBlock;

        if (m.typeflag == 'x' || m.typeflag == 'g') {
            std::string_view payload = bytes.substr(data_off, m.size);
            std::string p, l;
            detail::parse_pax_records(payload, p, l);
            if (m.typeflag == 'x') {
                if (!p.empty()) pax_path = p;
                if (!l.empty()) pax_link = l;
            }
            continue;
        }
        if (m.typeflag == 'L') {
            gnu_longname = std::string(bytes.substr(data_off, m.size));
            while (!gnu_longname.empty() && gnu_longname.back() == '\0') gnu_longname.pop_back();
            continue;
        }
        if (m.typeflag == 'K') {
            gnu_longlink = std::string(bytes.substr(data_off, m.size));
            while (!gnu_longlink.empty() && gnu_longlink.back() == '\0') gnu_longlink.pop_back();
            continue;
        }

        if (!pax_path.empty()) m.name = std::exchange(pax_path, std::string());
        if (!pax_link.empty()) m.linkname = std::exchange(pax_link, std::string());
        if (!gnu_longname.empty()) m.name = std::exchange(gnu_longname, std::string());
        if (!gnu_longlink.empty()) m.linkname = std::exchange(gnu_longlink, std::string());

        if (!is_supported_typeflag(m.typeflag)) {
            out.issues.push_back({index++, std::string("unsupported member type '") + m.typeflag +
                                               "' for " + m.name});
            continue;
        }
        out.members.push_back(std::move(m));
        ++index;
    }
    if (!terminated && off < bytes.size())
        throw Error(Errc::truncated_archive, "archive ends mid-header");
    return out;
}

// --- writer ---------------------------------------------------------------

inline void append_member(std::string& out, const std::string& name, char typeflag,
                          unsigned mode, std::string_view content = {},
                          const std::string& linkname = {}) {
    if (name.size() > 100) {
        // pax extended header carrying the long path
        std::string record_body = " path=" + name + "\n";
        size_t len = record_body.size();
        std::string record;
        for (size_t guess = len + 1; guess <= len + 20; ++guess) {
            std::string candidate = std::to_string(guess) + record_body;
            if (candidate.size() == guess) {
                record = candidate;
                break;
            }
        }
        append_member(out, "./PaxHeaders/" + name.substr(0, 80), 'x', 0644, record);
    }
    char block[kBlock];
    std::memset(block, 0, sizeof block);
    std::snprintf(block, 100, "%s", name.size() > 100 ? name.substr(0, 99).c_str() : name.c_str());
    std::snprintf(block + 100, 8, "%07o", mode & 07777);
    std::snprintf(block + 108, 8, "%07o", 0);
    std::snprintf(block + 116, 8, "%07o", 0);
    bool has_data = typeflag == '0' || typeflag == 'x' || typeflag == 'L' || typeflag == 'K';
    std::snprintf(block + 124, 12, "%011llo",
                  static_cast<unsigned long long>(has_data ? content.size() : 0));
    std::snprintf(block + 136, 12, "%011o", 0);
    block[156] = typeflag;
    if (!linkname.empty()) std::snprintf(block + 157, 100, "%s", linkname.c_str());
    std::memcpy(block + 257, "ustar", 6);
    std::memcpy(block + 263, "00", 2);
    std::memset(block + 148, ' ', 8);
    unsigned sum = 0;
    for (size_t i = 0; i < kBlock; ++i) sum += static_cast<unsigned char>(block[i]);
    std::snprintf(block + 148, 8, "%06o", sum);
    block[155] = ' ';
    out.append(block, kBlock);
    if (has_data && !content.empty()) {
        out.append(content.data(), content.size());
        size_t pad = (kBlock - content.size() % kBlock) % kBlock;
        out.append(pad, '\0');
    }
}

inline void finish(std::string& out) { out.append(2 * kBlock, '\0'); }

}  // namespace collide::tar
