#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "astkit/error.hpp"

namespace astkit::utf8 {

inline bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Length of the UTF-8 sequence introduced by lead byte `c`, 0 if `c` cannot
// start a sequence.
inline std::size_t sequence_length(unsigned char c) noexcept {
    if (c < 0x80) return 1;
    if ((c & 0xE0) == 0xC0) return 2;
    if ((c & 0xF0) == 0xE0) return 3;
    if ((c & 0xF8) == 0xF0) return 4;
    return 0;
}

// Decodes the code point starting at `pos`, advancing `pos` past it.
// Rejects overlong forms, surrogates and values above U+10FFFF.
inline char32_t decode_one(std::string_view s, std::size_t &pos) {
    const auto lead = static_cast<unsigned char>(s[pos]);
    const std::size_t len = sequence_length(lead);
    if (len == 0 || pos + len > s.size())
        throw Error("invalid UTF-8 at byte " + std::to_string(pos));
    char32_t cp = len == 1 ? lead : len == 2 ? (lead & 0x1F) : len == 3 ? (lead & 0x0F) : (lead & 0x07);
    for (std::size_t k = 1; k < len; ++k) {
        const auto cont = static_cast<unsigned char>(s[pos + k]);
        if ((cont & 0xC0) != 0x80) throw Error("invalid UTF-8 at byte " + std::to_string(pos + k));
        cp = (cp << 6) | (cont & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
        throw Error("invalid UTF-8 code point at byte " + std::to_string(pos));
    pos += len;
    return cp;
}

inline void append(std::string &out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::u32string decode(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t pos = 0; pos < s.size();) out.push_back(decode_one(s, pos));
    return out;
}

inline std::string encode(std::u32string_view cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) append(out, cp);
    return out;
}

// Splits `s` into one string per code point.
inline std::vector<std::string> characters(std::string_view s) {
    std::vector<std::string> out;
    for (std::size_t pos = 0; pos < s.size();) {
        const std::size_t begin = pos;
        decode_one(s, pos);
        out.emplace_back(s.substr(begin, pos - begin));
    }
    return out;
}

// Number of Unicode scalar values.
inline std::size_t length(std::string_view s) {
    std::size_t n = 0;
    for (std::size_t pos = 0; pos < s.size(); ++n) decode_one(s, pos);
    return n;
}

// Simple case folding for ASCII, Latin-1, Latin Extended-A, basic Greek and
// basic Cyrillic. Other scripts pass through unchanged.
inline char32_t to_lower(char32_t c) noexcept {
    if (c < 0x80) return (c >= 'A' && c <= 'Z') ? c + 0x20 : c;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
    if (c >= 0x100 && c <= 0x17F) {
        if (c == 0x130) return 'i';
        if (c == 0x178) return 0xFF;
        const bool even_upper = (c <= 0x137) || (c >= 0x14A && c <= 0x177);
        const bool odd_upper = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
        if (even_upper && c % 2 == 0) return c + 1;
        if (odd_upper && c % 2 == 1) return c + 1;
        return c;
    }
    if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
    if (c >= 0x410 && c <= 0x42F) return c + 0x20;
    if (c >= 0x400 && c <= 0x40F) return c + 0x50;
    return c;
}

inline std::string lowercase(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t pos = 0; pos < s.size();) append(out, to_lower(decode_one(s, pos)));
    return out;
}

// Splits on ASCII whitespace, dropping empty fields.
inline std::vector<std::string> split_whitespace(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        const std::size_t begin = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > begin) out.emplace_back(s.substr(begin, i - begin));
    }
    return out;
}

inline std::string join(const std::vector<std::string> &tokens, std::string_view sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += sep;
        out += tokens[i];
    }
    return out;
}

// Splits a document into lines on LF; a trailing CR is stripped and a final
// empty line after the last LF is not reported.
inline std::vector<std::string> lines(std::string_view doc) {
    std::vector<std::string> out;
    std::size_t begin = 0;
    while (begin < doc.size()) {
        std::size_t end = doc.find('\n', begin);
        if (end == std::string_view::npos) end = doc.size();
        std::string_view line = doc.substr(begin, end - begin);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        out.emplace_back(line);
        begin = end + 1;
    }
    return out;
}

} // namespace astkit::utf8
