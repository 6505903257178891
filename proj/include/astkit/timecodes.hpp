#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "astkit/error.hpp"
#include "astkit/utf8.hpp"

namespace astkit {

// Tolerated overlap between consecutive words of one recording, in seconds.
inline constexpr double kOverlapTolerance = 1e-3;

// One recognized word from a CTM file.
struct WordHypothesis {
    std::string recording_id;
    std::string channel;
    double start = 0.0;
    double duration = 0.0;
    std::string word;
    std::optional<double> confidence;

    double end() const noexcept { return start + duration; }

    bool operator==(const WordHypothesis &) const = default;
};

// A contiguous time span of a recording. `words` is empty for segments read
// back from a manifest.
struct Segment {
    std::string segment_id;
    std::string recording_id;
    double start = 0.0;
    double end = 0.0;
    std::vector<WordHypothesis> words;

    double duration() const noexcept { return end - start; }

    bool operator==(const Segment &) const = default;
};

namespace detail {

inline double parse_number(std::string_view field, std::size_t line, const char *what) {
    double value = 0.0;
    const char *first = field.data();
    const char *last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value))
        throw ParseError(line, std::string("non-numeric ") + what + " '" + std::string(field) + "'");
    return value;
}

// Shortest decimal form that parses back to the same double.
inline std::string shortest(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace detail

// Checks that `words` belong to one recording, are sorted by start time and
// do not overlap by more than `tolerance`. Throws Error otherwise.
inline void validate_recording_words(std::span<const WordHypothesis> words,
                                     double tolerance = kOverlapTolerance) {
    for (std::size_t i = 0; i < words.size(); ++i) {
        const auto &w = words[i];
        if (w.start < 0.0 || w.duration < 0.0)
            throw Error("word " + std::to_string(i) + " '" + w.word + "' has negative time");
        if (i == 0) continue;
        const auto &prev = words[i - 1];
        if (w.recording_id != prev.recording_id)
            throw Error("words from recordings '" + prev.recording_id + "' and '" + w.recording_id +
                        "' mixed in one stream");
        if (w.start < prev.start)
            throw Error("words not sorted by start time at index " + std::to_string(i));
        if (prev.end() > w.start + tolerance)
            throw Error("word '" + prev.word + "' overlaps '" + w.word + "' at index " + std::to_string(i));
    }
}

// Parses a CTM document: "recording channel start duration word [confidence]"
// per line. Blank lines and lines starting with ";;" are skipped. The result
// is ordered by (recording_id, start); input order breaks ties.
inline std::vector<WordHypothesis> parse_ctm(std::string_view text,
                                             double overlap_tolerance = kOverlapTolerance) {
    std::vector<WordHypothesis> words;
    std::vector<std::size_t> source_line;
    const auto doc_lines = utf8::lines(text);
    for (std::size_t ln = 0; ln < doc_lines.size(); ++ln) {
        const std::size_t line_no = ln + 1;
        const auto fields = utf8::split_whitespace(doc_lines[ln]);
        if (fields.empty() || fields[0].rfind(";;", 0) == 0) continue;
        if (fields.size() < 5 || fields.size() > 6)
            throw ParseError(line_no, "expected 5 or 6 fields, got " + std::to_string(fields.size()));
        WordHypothesis w;
        w.recording_id = fields[0];
        w.channel = fields[1];
        w.start = detail::parse_number(fields[2], line_no, "start time");
        w.duration = detail::parse_number(fields[3], line_no, "duration");
        w.word = fields[4];
        if (w.start < 0.0) throw ParseError(line_no, "negative start time");
        if (w.duration < 0.0) throw ParseError(line_no, "negative duration");
        if (fields.size() == 6) {
            const double c = detail::parse_number(fields[5], line_no, "confidence");
            if (c < 0.0 || c > 1.0) throw ParseError(line_no, "confidence outside [0,1]");
            w.confidence = c;
        }
        words.push_back(std::move(w));
        source_line.push_back(line_no);
    }

    std::vector<std::size_t> order(words.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (words[a].recording_id != words[b].recording_id)
            return words[a].recording_id < words[b].recording_id;
        return words[a].start < words[b].start;
    });

    std::vector<WordHypothesis> sorted;
    sorted.reserve(words.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto &w = words[order[k]];
        if (k > 0) {
            const auto &prev = words[order[k - 1]];
            if (prev.recording_id == w.recording_id && prev.end() > w.start + overlap_tolerance)
                throw ParseError(source_line[order[k]],
                                 "word '" + w.word + "' overlaps preceding word '" + prev.word + "'");
        }
        sorted.push_back(w);
    }
    return sorted;
}

// Lossless CTM serialization (shortest round-trip number formatting).
inline std::string write_ctm(std::span<const WordHypothesis> words) {
    std::string out;
    for (const auto &w : words) {
        out += w.recording_id + ' ' + w.channel + ' ' + detail::shortest(w.start) + ' ' +
               detail::shortest(w.duration) + ' ' + w.word;
        if (w.confidence) out += ' ' + detail::shortest(*w.confidence);
        out += '\n';
    }
    return out;
}

// One "segment_id recording_id start end" line per segment, two decimals.
// A segment shorter than the output resolution is written as 0.01 s long so
// the line still parses.
inline std::string write_segment_manifest(std::span<const Segment> segments) {
    std::string out;
    for (const auto &s : segments) {
        const long start_cs = std::lround(s.start * 100.0);
        const long end_cs = std::max(std::lround(s.end * 100.0), start_cs + 1);
        out += s.segment_id + ' ' + s.recording_id + ' ' + detail::fixed2(start_cs / 100.0) + ' ' +
               detail::fixed2(end_cs / 100.0) + '\n';
    }
    return out;
}

inline std::vector<Segment> parse_segment_manifest(std::string_view text) {
    std::vector<Segment> segments;
    const auto doc_lines = utf8::lines(text);
    for (std::size_t ln = 0; ln < doc_lines.size(); ++ln) {
        const auto fields = utf8::split_whitespace(doc_lines[ln]);
        if (fields.empty()) continue;
        if (fields.size() != 4)
            throw ParseError(ln + 1, "expected 4 fields, got " + std::to_string(fields.size()));
        Segment s;
        s.segment_id = fields[0];
        s.recording_id = fields[1];
        s.start = detail::parse_number(fields[2], ln + 1, "start time");
        s.end = detail::parse_number(fields[3], ln + 1, "end time");
        if (s.start < 0.0) throw ParseError(ln + 1, "negative start time");
        if (!(s.end > s.start)) throw ParseError(ln + 1, "segment end not after start");
        segments.push_back(std::move(s));
    }
    return segments;
}

} // namespace astkit
