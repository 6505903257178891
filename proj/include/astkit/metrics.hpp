#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "astkit/error.hpp"
#include "astkit/parallel.hpp"
#include "astkit/utf8.hpp"

namespace astkit {

enum class BleuTokenization { punct_split_13a_style, whitespace_only };
enum class BleuSmoothing { none, add_epsilon };

struct BleuConfig {
    std::size_t max_ngram_order = 4;
    bool lowercase = false;
    BleuTokenization tokenization = BleuTokenization::punct_split_13a_style;
    BleuSmoothing smoothing = BleuSmoothing::none;
    // Numerator substituted for a zero match count under add_epsilon.
    double epsilon = 0.1;
};

struct BleuReport {
    double bleu = 0.0;
    std::vector<double> precisions; // fractions in [0, 1], one per order
    std::vector<std::size_t> matches;
    std::vector<std::size_t> totals;
    double brevity_penalty = 1.0;
    std::size_t hyp_length = 0;
    std::size_t ref_length = 0;
};

namespace detail {

inline void replace_all(std::string &s, std::string_view from, std::string_view to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
}

inline bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }

// ASCII symbols split off unconditionally: { | } ~ [ \ ] ^ _ ` space ! " # $
// % & ( ) * + : ; < = > ? @ /. Period, comma, dash and apostrophe are
// handled by the context rules.
inline bool is_13a_symbol(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return (u >= '{' && u <= '~') || (u >= '[' && u <= '`') || (u >= ' ' && u <= '&') ||
           (u >= '(' && u <= '+') || (u >= ':' && u <= '@') || u == '/';
}

} // namespace detail

// Scorer-side tokenization. The 13a-style scheme mirrors the mteval-v13a
// rules: symbols are always split, '.' and ',' are split unless they sit
// next to a digit on the relevant side, and '-' is split after a digit.
inline std::vector<std::string> bleu_tokenize(std::string_view text, const BleuConfig &cfg = {}) {
    std::string line = cfg.lowercase ? utf8::lowercase(text) : std::string(text);
    if (cfg.tokenization == BleuTokenization::whitespace_only) return utf8::split_whitespace(line);

    detail::replace_all(line, "<skipped>", "");
    detail::replace_all(line, "-\n", "");
    detail::replace_all(line, "\n", " ");
    if (line.find('&') != std::string::npos) {
        detail::replace_all(line, "&quot;", "\"");
        detail::replace_all(line, "&amp;", "&");
        detail::replace_all(line, "&lt;", "<");
        detail::replace_all(line, "&gt;", ">");
    }

    std::string a = " ";
    for (char c : line) {
        if (detail::is_13a_symbol(c)) {
            a += ' ';
            a += c;
            a += ' ';
        } else {
            a += c;
        }
    }
    a += ' ';

    // ([^0-9])([.,]) -> "\1 \2 "
    std::string b;
    for (std::size_t i = 0; i < a.size();) {
        if (i + 1 < a.size() && !detail::is_digit(a[i]) && (a[i + 1] == '.' || a[i + 1] == ',')) {
            b += a[i];
            b += ' ';
            b += a[i + 1];
            b += ' ';
            i += 2;
        } else {
            b += a[i++];
        }
    }
    // ([.,])([^0-9]) -> " \1 \2"
    std::string c;
    for (std::size_t i = 0; i < b.size();) {
        if (i + 1 < b.size() && (b[i] == '.' || b[i] == ',') && !detail::is_digit(b[i + 1])) {
            c += ' ';
            c += b[i];
            c += ' ';
            c += b[i + 1];
            i += 2;
        } else {
            c += b[i++];
        }
    }
    // ([0-9])(-) -> "\1 \2 "
    std::string d;
    for (std::size_t i = 0; i < c.size();) {
        if (i + 1 < c.size() && detail::is_digit(c[i]) && c[i + 1] == '-') {
            d += c[i];
            d += " - ";
            i += 2;
        } else {
            d += c[i++];
        }
    }
    return utf8::split_whitespace(d);
}

namespace detail {

struct NgramStats {
    std::vector<std::size_t> matches;
    std::vector<std::size_t> totals;
    std::size_t hyp_length = 0;
    std::size_t ref_length = 0;

    explicit NgramStats(std::size_t order = 0) : matches(order, 0), totals(order, 0) {}

    NgramStats &operator+=(const NgramStats &o) {
        for (std::size_t n = 0; n < matches.size(); ++n) {
            matches[n] += o.matches[n];
            totals[n] += o.totals[n];
        }
        hyp_length += o.hyp_length;
        ref_length += o.ref_length;
        return *this;
    }
};

inline std::map<std::vector<std::string>, std::size_t> count_ngrams(const std::vector<std::string> &tokens,
                                                                    std::size_t n) {
    std::map<std::vector<std::string>, std::size_t> counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i)
        ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
    return counts;
}

inline NgramStats sentence_stats(std::string_view hyp, std::string_view ref, const BleuConfig &cfg) {
    const auto h = bleu_tokenize(hyp, cfg);
    const auto r = bleu_tokenize(ref, cfg);
    NgramStats st(cfg.max_ngram_order);
    st.hyp_length = h.size();
    st.ref_length = r.size();
    for (std::size_t n = 1; n <= cfg.max_ngram_order; ++n) {
        const auto hc = count_ngrams(h, n);
        const auto rc = count_ngrams(r, n);
        for (const auto &[gram, count] : hc) {
            st.totals[n - 1] += count;
            if (auto it = rc.find(gram); it != rc.end()) st.matches[n - 1] += std::min(count, it->second);
        }
    }
    return st;
}

} // namespace detail

// Corpus-level BLEU with clipped n-gram counts and a brevity penalty, one
// reference per hypothesis. Sentence statistics are gathered on up to `jobs`
// threads and summed in corpus order.
inline BleuReport corpus_bleu(std::span<const std::string> hyps, std::span<const std::string> refs,
                              const BleuConfig &cfg = {}, std::size_t jobs = 1) {
    if (cfg.max_ngram_order < 1) throw Error("max n-gram order must be at least 1");
    if (hyps.size() != refs.size())
        throw Error("hypothesis/reference count mismatch: " + std::to_string(hyps.size()) + " vs " +
                    std::to_string(refs.size()));
    if (hyps.empty()) throw Error("empty corpus");

    const auto per_sentence =
        parallel_map(jobs, hyps.size(), [&](std::size_t i) { return detail::sentence_stats(hyps[i], refs[i], cfg); });
    detail::NgramStats total(cfg.max_ngram_order);
    for (const auto &s : per_sentence) total += s;

    BleuReport rep;
    rep.matches = total.matches;
    rep.totals = total.totals;
    rep.hyp_length = total.hyp_length;
    rep.ref_length = total.ref_length;

    double log_sum = 0.0;
    bool zero = false;
    for (std::size_t n = 0; n < cfg.max_ngram_order; ++n) {
        double p = 0.0;
        if (total.totals[n] > 0) {
            double num = static_cast<double>(total.matches[n]);
            if (num == 0.0 && cfg.smoothing == BleuSmoothing::add_epsilon) num = cfg.epsilon;
            p = num / static_cast<double>(total.totals[n]);
        }
        rep.precisions.push_back(p);
        if (p == 0.0)
            zero = true;
        else
            log_sum += std::log(p);
    }

    if (rep.hyp_length == 0)
        rep.brevity_penalty = 0.0;
    else if (rep.hyp_length < rep.ref_length)
        rep.brevity_penalty =
            std::exp(1.0 - static_cast<double>(rep.ref_length) / static_cast<double>(rep.hyp_length));
    else
        rep.brevity_penalty = 1.0;

    rep.bleu = zero ? 0.0
                    : 100.0 * rep.brevity_penalty * std::exp(log_sum / static_cast<double>(cfg.max_ngram_order));
    return rep;
}

// Multi-line "key value" report.
inline std::string format_report(const BleuReport &r) {
    char buf[128];
    std::string out;
    std::snprintf(buf, sizeof buf, "bleu %.6f\n", r.bleu);
    out += buf;
    for (std::size_t n = 0; n < r.precisions.size(); ++n) {
        std::snprintf(buf, sizeof buf, "precision_%zu %.6f\n", n + 1, r.precisions[n]);
        out += buf;
        std::snprintf(buf, sizeof buf, "matches_%zu %zu\ntotal_%zu %zu\n", n + 1, r.matches[n], n + 1, r.totals[n]);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "brevity_penalty %.6f\nhyp_length %zu\nref_length %zu\n", r.brevity_penalty,
                  r.hyp_length, r.ref_length);
    out += buf;
    return out;
}

// Single-line summary: "BLEU = 49.59 82.8/58.3/47.4/40.0 (BP = 0.902 ratio = 0.906 hyp_len = 29 ref_len = 32)".
inline std::string format_summary(const BleuReport &r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "BLEU = %.2f ", r.bleu);
    std::string out = buf;
    for (std::size_t n = 0; n < r.precisions.size(); ++n) {
        std::snprintf(buf, sizeof buf, "%s%.1f", n ? "/" : "", 100.0 * r.precisions[n]);
        out += buf;
    }
    const double ratio = r.ref_length ? static_cast<double>(r.hyp_length) / static_cast<double>(r.ref_length) : 0.0;
    std::snprintf(buf, sizeof buf, " (BP = %.3f ratio = %.3f ", r.brevity_penalty, ratio);
    out += buf;
    out += "hyp_len = " + std::to_string(r.hyp_length) + " ref_len = " + std::to_string(r.ref_length) + ")";
    return out;
}

} // namespace astkit
