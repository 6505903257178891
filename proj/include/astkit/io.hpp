#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "astkit/error.hpp"
#include "astkit/utf8.hpp"

namespace astkit::io {

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path &path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write to '" + path.string() + "' failed");
}

inline std::vector<std::string> read_lines(const std::filesystem::path &path) {
    return utf8::lines(read_file(path));
}

// One line per element, each LF-terminated.
inline std::string join_lines(const std::vector<std::string> &lines) {
    std::string out;
    for (const auto &l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

inline void write_lines(const std::filesystem::path &path, const std::vector<std::string> &lines) {
    write_file(path, join_lines(lines));
}

} // namespace astkit::io
