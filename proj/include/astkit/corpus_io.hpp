#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "astkit/corpus.hpp"
#include "astkit/io.hpp"

namespace astkit {

// A corpus on disk is a set of line-aligned files sharing a prefix:
// <prefix>.src, <prefix>.tgt and optionally <prefix>.frames (one integer per
// line) and <prefix>.ids. Without an ids file entries are numbered 000001,
// 000002, ... The corpus name is the prefix's file name.
inline ParallelCorpus load_corpus(const std::filesystem::path &prefix) {
    const std::string base = prefix.string();
    const auto src = io::read_lines(base + ".src");
    const auto tgt = io::read_lines(base + ".tgt");
    if (src.size() != tgt.size())
        throw Error("'" + base + "': " + std::to_string(src.size()) + " source lines vs " +
                    std::to_string(tgt.size()) + " target lines");

    std::vector<std::string> ids;
    if (std::filesystem::exists(base + ".ids")) {
        ids = io::read_lines(base + ".ids");
        if (ids.size() != src.size()) throw Error("'" + base + ".ids' line count does not match");
    }
    std::vector<std::string> frames;
    if (std::filesystem::exists(base + ".frames")) {
        frames = io::read_lines(base + ".frames");
        if (frames.size() != src.size()) throw Error("'" + base + ".frames' line count does not match");
    }

    ParallelCorpus corpus;
    corpus.name = prefix.filename().string();
    corpus.entries.reserve(src.size());
    for (std::size_t i = 0; i < src.size(); ++i) {
        CorpusEntry e;
        if (ids.empty()) {
            char buf[24];
            std::snprintf(buf, sizeof buf, "%06zu", i + 1);
            e.segment_id = buf;
        } else {
            e.segment_id = ids[i];
        }
        e.source_text = src[i];
        e.target_text = tgt[i];
        if (!frames.empty()) {
            std::size_t n = 0;
            const auto &f = frames[i];
            auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), n);
            if (ec != std::errc() || ptr != f.data() + f.size())
                throw ParseError(i + 1, "'" + base + ".frames': not a frame count '" + f + "'");
            e.n_frames = n;
        }
        corpus.entries.push_back(std::move(e));
    }
    return corpus;
}

// Writes .src/.tgt/.ids always, and .frames when every entry carries one.
inline void save_corpus(const ParallelCorpus &corpus, const std::filesystem::path &prefix) {
    const std::string base = prefix.string();
    std::vector<std::string> src, tgt, ids, frames;
    bool all_frames = true;
    for (const auto &e : corpus.entries) {
        src.push_back(e.source_text);
        tgt.push_back(e.target_text);
        ids.push_back(e.segment_id);
        if (e.n_frames)
            frames.push_back(std::to_string(*e.n_frames));
        else
            all_frames = false;
    }
    io::write_lines(base + ".src", src);
    io::write_lines(base + ".tgt", tgt);
    io::write_lines(base + ".ids", ids);
    if (all_frames && !corpus.entries.empty()) io::write_lines(base + ".frames", frames);
}

} // namespace astkit
