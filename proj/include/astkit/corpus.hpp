#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "astkit/error.hpp"
#include "astkit/utf8.hpp"

namespace astkit {

struct CorpusEntry {
    std::string segment_id;
    std::string source_text;
    std::string target_text;
    std::optional<std::size_t> n_frames;

    bool operator==(const CorpusEntry &) const = default;
};

struct ParallelCorpus {
    std::string name;
    std::vector<CorpusEntry> entries;

    std::size_t size() const noexcept { return entries.size(); }
};

struct CorpusStats {
    std::size_t n_segments = 0;
    std::optional<double> hours;
    std::size_t src_words = 0;
    std::size_t tgt_words = 0;

    CorpusStats &operator+=(const CorpusStats &o) {
        n_segments += o.n_segments;
        src_words += o.src_words;
        tgt_words += o.tgt_words;
        if (hours || o.hours) hours = hours.value_or(0.0) + o.hours.value_or(0.0);
        return *this;
    }
    friend CorpusStats operator+(CorpusStats a, const CorpusStats &b) { return a += b; }
};

// ---------------------------------------------------------------------------
// Line preprocessing

struct PreprocessOptions {
    bool normalize_punct = true;
    bool tokenize = true;
    // ECMAScript patterns, matched case-insensitively and removed until none
    // is left.
    std::vector<std::string> strip_marks = {R"(\(\s*(laughter|applause)\s*\))"};
};

namespace detail {

struct Replacement {
    std::string_view from;
    std::string_view to;
};

// Typographic forms mapped to their ASCII counterparts.
inline constexpr Replacement kPunctuationTable[] = {
    {"“", "\""}, {"”", "\""}, {"„", "\""}, {"‟", "\""}, {"«", "\""},
    {"»", "\""}, {"″", "\""}, {"‘", "'"},  {"’", "'"},  {"‚", "'"},
    {"‛", "'"},  {"′", "'"},  {"´", "'"},  {"`", "'"},  {"–", "-"},
    {"—", " - "}, {"‒", "-"}, {"−", "-"},  {"‐", "-"},  {"‑", "-"},
    {"…", "..."}, {"\u00A0", " "}, {"\u2009", " "}, {"\u202F", " "}, {"\u3000", " "},
};

inline std::string normalize_punctuation(std::string_view line) {
    std::string out;
    out.reserve(line.size());
    for (std::size_t pos = 0; pos < line.size();) {
        bool hit = false;
        for (const auto &r : kPunctuationTable) {
            if (line.compare(pos, r.from.size(), r.from) == 0) {
                out += r.to;
                pos += r.from.size();
                hit = true;
                break;
            }
        }
        if (!hit) out += line[pos++];
    }
    return out;
}

inline bool is_ascii_punct(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return (u >= 0x21 && u <= 0x2F) || (u >= 0x3A && u <= 0x40) || (u >= 0x5B && u <= 0x60) ||
           (u >= 0x7B && u <= 0x7E);
}
inline bool is_ascii_digit(char c) noexcept { return c >= '0' && c <= '9'; }
// Letters and digits; any non-ASCII byte counts as a word character.
inline bool is_word_byte(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || is_ascii_digit(c) || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_letter_byte(char c) noexcept { return is_word_byte(c) && !is_ascii_digit(c); }

// Splits ASCII punctuation off words. Kept attached: '.' and ',' between
// digits (3.5, 1,000), an apostrophe between letters (don't, d'água) and a
// hyphen between word characters (well-known).
inline std::string tokenize_word(std::string_view w) {
    std::string out;
    auto emit_split = [&](char c) {
        if (!out.empty() && out.back() != ' ') out += ' ';
        out += c;
        out += ' ';
    };
    for (std::size_t i = 0; i < w.size(); ++i) {
        const char c = w[i];
        if (!is_ascii_punct(c)) {
            out += c;
            continue;
        }
        const char prev = i > 0 ? w[i - 1] : ' ';
        const char next = i + 1 < w.size() ? w[i + 1] : ' ';
        const bool keep = ((c == '.' || c == ',') && is_ascii_digit(prev) && is_ascii_digit(next)) ||
                          (c == '\'' && is_letter_byte(prev) && is_letter_byte(next)) ||
                          (c == '-' && is_word_byte(prev) && is_word_byte(next));
        if (keep)
            out += c;
        else
            emit_split(c);
    }
    return out;
}

inline std::string strip_marks(std::string line, const std::vector<std::regex> &marks) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto &re : marks) {
            std::string next = std::regex_replace(line, re, " ");
            if (next != line) {
                line = std::move(next);
                changed = true;
            }
        }
    }
    return line;
}

} // namespace detail

// Compiled form of PreprocessOptions; reuse one across many lines.
class Preprocessor {
  public:
    explicit Preprocessor(PreprocessOptions opts = {}) : opts_(std::move(opts)) {
        for (const auto &p : opts_.strip_marks) {
            try {
                marks_.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
            } catch (const std::regex_error &e) {
                throw Error("invalid mark pattern '" + p + "': " + e.what());
            }
        }
    }

    // Mark stripping, punctuation normalization, tokenization, whitespace
    // collapse, in that order. Idempotent.
    std::string operator()(std::string_view line) const {
        std::string s = detail::strip_marks(std::string(line), marks_);
        if (opts_.normalize_punct) s = detail::strip_marks(detail::normalize_punctuation(s), marks_);
        auto words = utf8::split_whitespace(s);
        if (opts_.tokenize) {
            std::string tokenized;
            for (const auto &w : words) {
                tokenized += detail::tokenize_word(w);
                tokenized += ' ';
            }
            words = utf8::split_whitespace(tokenized);
        }
        return utf8::join(words);
    }

  private:
    PreprocessOptions opts_;
    std::vector<std::regex> marks_;
};

inline std::string preprocess_line(std::string_view line, const PreprocessOptions &opts = {}) {
    return Preprocessor(opts)(line);
}

// ---------------------------------------------------------------------------
// Filtering

struct LengthLimits {
    std::size_t max_frames = 3000;
    std::size_t max_chars = 400;
};

enum class FilterDecision { keep, remove };

// Removes pairs strictly longer than either limit.
inline FilterDecision filter_pair(std::size_t n_frames, std::size_t n_target_chars, const LengthLimits &limits = {}) {
    return (n_frames > limits.max_frames || n_target_chars > limits.max_chars) ? FilterDecision::remove
                                                                               : FilterDecision::keep;
}

// Applies filter_pair to every entry; the character count is taken on the
// target text in Unicode scalar values and entries without a frame count
// are judged on characters alone.
inline std::pair<ParallelCorpus, ParallelCorpus> filter_corpus(const ParallelCorpus &corpus,
                                                               const LengthLimits &limits = {}) {
    ParallelCorpus kept{corpus.name, {}}, removed{corpus.name, {}};
    for (const auto &e : corpus.entries) {
        const auto d = filter_pair(e.n_frames.value_or(0), utf8::length(e.target_text), limits);
        (d == FilterDecision::keep ? kept : removed).entries.push_back(e);
    }
    return {std::move(kept), std::move(removed)};
}

// ---------------------------------------------------------------------------
// Dev sampling

// Uniform integer in [0, bound) from a 64-bit Mersenne Twister (mt19937_64,
// whose output sequence is fixed by the C++ standard) by rejection sampling,
// so results do not depend on the standard library's distributions.
inline std::uint64_t uniform_below(std::mt19937_64 &gen, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = gen();
    } while (x >= limit);
    return x % bound;
}

// Samples `n` entries without replacement (partial Fisher-Yates over entry
// indices) into the dev set. Both halves keep the original entry order.
inline std::pair<ParallelCorpus, ParallelCorpus> split_dev(const ParallelCorpus &corpus, std::size_t n,
                                                           std::uint64_t seed) {
    if (n > corpus.size())
        throw Error("dev size " + std::to_string(n) + " exceeds corpus size " + std::to_string(corpus.size()));
    std::mt19937_64 gen(seed);
    std::vector<std::size_t> idx(corpus.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + uniform_below(gen, idx.size() - i);
        std::swap(idx[i], idx[j]);
    }
    std::vector<bool> in_dev(corpus.size(), false);
    for (std::size_t i = 0; i < n; ++i) in_dev[idx[i]] = true;

    ParallelCorpus train{corpus.name, {}}, dev{corpus.name + ".dev", {}};
    for (std::size_t i = 0; i < corpus.size(); ++i)
        (in_dev[i] ? dev : train).entries.push_back(corpus.entries[i]);
    return {std::move(train), std::move(dev)};
}

// ---------------------------------------------------------------------------
// Merging and statistics

// Concatenates corpora in order. If the ids are not already disjoint every
// id is prefixed with "<corpus name>/"; a collision that survives the prefix
// is an error.
inline ParallelCorpus merge_corpora(std::span<const ParallelCorpus> corpora) {
    ParallelCorpus merged;
    for (std::size_t c = 0; c < corpora.size(); ++c) merged.name += (c ? "+" : "") + corpora[c].name;

    auto collect = [&](bool prefixed) -> std::optional<std::vector<CorpusEntry>> {
        std::set<std::string> seen;
        std::vector<CorpusEntry> out;
        for (const auto &corpus : corpora) {
            for (const auto &e : corpus.entries) {
                CorpusEntry copy = e;
                if (prefixed) copy.segment_id = corpus.name + "/" + e.segment_id;
                if (!seen.insert(copy.segment_id).second) return std::nullopt;
                out.push_back(std::move(copy));
            }
        }
        return out;
    };

    if (auto plain = collect(false)) {
        merged.entries = std::move(*plain);
    } else if (auto prefixed = collect(true)) {
        merged.entries = std::move(*prefixed);
    } else {
        throw Error("segment id collision persists after namespacing by corpus name");
    }
    return merged;
}

// Word counts are whitespace token counts; hours are only reported when
// per-entry durations (seconds) are supplied.
inline CorpusStats corpus_stats(const ParallelCorpus &corpus,
                                std::optional<std::span<const double>> durations = std::nullopt) {
    CorpusStats st;
    st.n_segments = corpus.size();
    for (const auto &e : corpus.entries) {
        st.src_words += utf8::split_whitespace(e.source_text).size();
        st.tgt_words += utf8::split_whitespace(e.target_text).size();
    }
    if (durations) {
        if (durations->size() != corpus.size()) throw Error("duration count does not match corpus size");
        double seconds = 0.0;
        for (double d : *durations) seconds += d;
        st.hours = seconds / 3600.0;
    }
    return st;
}

} // namespace astkit
