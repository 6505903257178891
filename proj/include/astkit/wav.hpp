#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "astkit/error.hpp"

namespace astkit {

// Mono audio with samples on the int16 scale.
struct Audio {
    std::uint32_t sample_rate = 16000;
    std::vector<double> samples;
};

namespace detail {

inline std::uint32_t le_u32(std::string_view b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + i])) << (8 * i);
    return v;
}
inline std::uint16_t le_u16(std::string_view b, std::size_t off) {
    return static_cast<std::uint16_t>(static_cast<unsigned char>(b[off]) |
                                      (static_cast<unsigned char>(b[off + 1]) << 8));
}

} // namespace detail

// Reads a RIFF/WAVE file holding mono 16-bit PCM. Unknown chunks are skipped.
inline Audio read_wav(std::string_view bytes) {
    if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" || bytes.substr(8, 4) != "WAVE")
        throw Error("not a RIFF/WAVE file");
    Audio audio;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::string_view id = bytes.substr(pos, 4);
        const std::uint32_t size = detail::le_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size()) throw Error("truncated WAV chunk '" + std::string(id) + "'");
        if (id == "fmt ") {
            if (size < 16) throw Error("WAV fmt chunk too short");
            const auto format = detail::le_u16(bytes, body);
            const auto channels = detail::le_u16(bytes, body + 2);
            const auto bits = detail::le_u16(bytes, body + 14);
            if (format != 1 || channels != 1 || bits != 16)
                throw Error("only mono 16-bit PCM WAV is supported");
            audio.sample_rate = detail::le_u32(bytes, body + 4);
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw Error("WAV data chunk before fmt chunk");
            audio.samples.resize(size / 2);
            for (std::size_t i = 0; i < audio.samples.size(); ++i)
                audio.samples[i] = static_cast<std::int16_t>(detail::le_u16(bytes, body + 2 * i));
            return audio;
        }
        pos = body + size + (size & 1);
    }
    throw Error("WAV file has no data chunk");
}

// Writes mono 16-bit PCM; samples are rounded and clipped to the int16 range.
inline std::string write_wav(const Audio &audio) {
    std::string out;
    auto u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    };
    auto u16 = [&](std::uint16_t v) {
        out.push_back(static_cast<char>(v & 0xFF));
        out.push_back(static_cast<char>(v >> 8));
    };
    const auto data_size = static_cast<std::uint32_t>(audio.samples.size() * 2);
    out += "RIFF";
    u32(36 + data_size);
    out += "WAVEfmt ";
    u32(16);
    u16(1);
    u16(1);
    u32(audio.sample_rate);
    u32(audio.sample_rate * 2);
    u16(2);
    u16(16);
    out += "data";
    u32(data_size);
    for (double s : audio.samples) {
        const auto v = static_cast<std::int16_t>(std::clamp(std::lround(s), -32768L, 32767L));
        u16(static_cast<std::uint16_t>(v));
    }
    return out;
}

} // namespace astkit
