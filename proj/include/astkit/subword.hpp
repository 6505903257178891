#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "astkit/error.hpp"
#include "astkit/utf8.hpp"

namespace astkit {

inline constexpr std::string_view kEndOfWord = "</w>";
inline constexpr std::string_view kSpaceSymbol = "▁"; // ▁

using SymbolPair = std::pair<std::string, std::string>;

// Ordered merge list plus the symbol inventory it was trained on. The
// end-of-word marker is its own symbol during training, so merges such as
// ("b", "</w>") can be learned like any other pair.
struct BpeModel {
    std::vector<SymbolPair> merges;
    std::set<std::string> vocab;
    std::string end_of_word_marker{kEndOfWord};
};

namespace detail {

inline void reject_reserved(std::string_view text, std::string_view marker) {
    if (!marker.empty() && text.find(marker) != std::string_view::npos)
        throw Error("input contains reserved symbol '" + std::string(marker) + "'");
    if (text.find(kSpaceSymbol) != std::string_view::npos)
        throw Error("input contains reserved symbol '" + std::string(kSpaceSymbol) + "'");
}

// Words are separated by single U+0020 characters. Runs of spaces produce
// empty words, which keeps encoding lossless; all other characters
// (including tabs) belong to words.
inline std::vector<std::string_view> split_words(std::string_view line) {
    std::vector<std::string_view> out;
    if (line.empty()) return out;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= line.size(); ++i)
        if (i == line.size() || line[i] == ' ') {
            out.push_back(line.substr(begin, i - begin));
            begin = i + 1;
        }
    return out;
}

inline std::vector<std::string> initial_symbols(std::string_view word, std::string_view marker) {
    auto symbols = utf8::characters(word);
    symbols.emplace_back(marker);
    return symbols;
}

} // namespace detail

// Greedy BPE training over the space-separated words of every line of every
// corpus (joint training counts over the union). Each step merges the
// most frequent adjacent pair, ties broken by the lexicographically smallest
// pair. Stops early once no adjacent pair is left.
inline BpeModel bpe_train(std::span<const std::vector<std::string>> corpora, std::size_t num_merges,
                          std::string_view marker = kEndOfWord) {
    if (marker.empty()) throw Error("end-of-word marker is empty");
    std::map<std::string, std::size_t> word_freq;
    bool any_line = false;
    for (const auto &corpus : corpora) {
        for (const auto &line : corpus) {
            any_line = true;
            detail::reject_reserved(line, marker);
            for (auto w : detail::split_words(line))
                if (!w.empty()) ++word_freq[std::string(w)];
        }
    }
    if (!any_line || word_freq.empty()) throw Error("empty training corpus");

    BpeModel model;
    model.end_of_word_marker = std::string(marker);

    std::vector<std::vector<std::string>> words;
    std::vector<std::size_t> freqs;
    for (const auto &[w, f] : word_freq) {
        words.push_back(detail::initial_symbols(w, marker));
        freqs.push_back(f);
        for (const auto &s : words.back()) model.vocab.insert(s);
    }

    // Pair frequencies plus an ordered index (-freq, pair) for O(log) argmax.
    std::map<SymbolPair, std::size_t> pair_freq;
    std::map<SymbolPair, std::set<std::size_t>> where;
    std::set<std::pair<std::ptrdiff_t, SymbolPair>> ranked;

    auto adjust = [&](const SymbolPair &p, std::ptrdiff_t delta, std::size_t word) {
        auto &f = pair_freq[p];
        if (f > 0) ranked.erase({-static_cast<std::ptrdiff_t>(f), p});
        f = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(f) + delta);
        if (f > 0)
            ranked.insert({-static_cast<std::ptrdiff_t>(f), p});
        else
            pair_freq.erase(p);
        if (delta > 0) where[p].insert(word);
    };

    for (std::size_t w = 0; w < words.size(); ++w)
        for (std::size_t i = 0; i + 1 < words[w].size(); ++i)
            adjust({words[w][i], words[w][i + 1]}, static_cast<std::ptrdiff_t>(freqs[w]), w);

    while (model.merges.size() < num_merges && !ranked.empty()) {
        const SymbolPair best = ranked.begin()->second;
        const std::string merged = best.first + best.second;
        model.merges.push_back(best);
        model.vocab.insert(merged);

        const auto touched = where[best];
        for (std::size_t w : touched) {
            auto &sym = words[w];
            const auto f = static_cast<std::ptrdiff_t>(freqs[w]);
            bool present = false;
            for (std::size_t i = 0; i + 1 < sym.size(); ++i)
                if (sym[i] == best.first && sym[i + 1] == best.second) present = true;
            if (!present) continue;
            for (std::size_t i = 0; i + 1 < sym.size(); ++i) adjust({sym[i], sym[i + 1]}, -f, w);
            std::vector<std::string> next;
            next.reserve(sym.size());
            for (std::size_t i = 0; i < sym.size();) {
                if (i + 1 < sym.size() && sym[i] == best.first && sym[i + 1] == best.second) {
                    next.push_back(merged);
                    i += 2;
                } else {
                    next.push_back(sym[i++]);
                }
            }
            sym = std::move(next);
            for (std::size_t i = 0; i + 1 < sym.size(); ++i) adjust({sym[i], sym[i + 1]}, f, w);
        }
    }
    return model;
}

inline BpeModel bpe_train(const std::vector<std::string> &corpus, std::size_t num_merges,
                          std::string_view marker = kEndOfWord) {
    return bpe_train(std::span<const std::vector<std::string>>(&corpus, 1), num_merges, marker);
}

// Number of distinct initial symbols (characters plus the end-of-word marker).
inline std::size_t symbol_inventory_size(std::span<const std::vector<std::string>> corpora,
                                         std::string_view marker = kEndOfWord) {
    std::set<std::string> symbols;
    symbols.emplace(marker);
    for (const auto &corpus : corpora)
        for (const auto &line : corpus)
            for (const auto &ch : utf8::characters(line))
                if (ch != " ") symbols.insert(ch);
    return symbols.size();
}

// Maps a target vocabulary size to a merge count: size minus the symbol
// inventory, floored at zero.
inline std::size_t merges_for_vocab_size(std::span<const std::vector<std::string>> corpora, std::size_t vocab_size,
                                         std::string_view marker = kEndOfWord) {
    const std::size_t inventory = symbol_inventory_size(corpora, marker);
    return vocab_size > inventory ? vocab_size - inventory : 0;
}

// Applies merges to one line. Within each word the applicable merge with the
// lowest rank is applied everywhere it occurs, repeatedly. A trailing
// stand-alone marker is folded into the preceding token, so "ab" under an
// empty model encodes as {"a", "b</w>"}. An empty word (from a leading,
// trailing or repeated space) encodes as a bare marker.
class BpeEncoder {
  public:
    explicit BpeEncoder(const BpeModel &model) : marker_(model.end_of_word_marker) {
        for (std::size_t r = 0; r < model.merges.size(); ++r)
            ranks_.try_emplace(model.merges[r], r);
    }

    std::vector<std::string> encode(std::string_view line) const {
        detail::reject_reserved(line, marker_);
        std::vector<std::string> out;
        for (const auto word : detail::split_words(line)) {
            auto sym = detail::initial_symbols(word, marker_);
            while (sym.size() > 1) {
                std::size_t best_rank = static_cast<std::size_t>(-1);
                for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
                    auto it = ranks_.find(SymbolPair(sym[i], sym[i + 1]));
                    if (it != ranks_.end() && it->second < best_rank) best_rank = it->second;
                }
                if (best_rank == static_cast<std::size_t>(-1)) break;
                std::vector<std::string> next;
                for (std::size_t i = 0; i < sym.size();) {
                    if (i + 1 < sym.size()) {
                        auto it = ranks_.find(SymbolPair(sym[i], sym[i + 1]));
                        if (it != ranks_.end() && it->second == best_rank) {
                            next.push_back(sym[i] + sym[i + 1]);
                            i += 2;
                            continue;
                        }
                    }
                    next.push_back(sym[i++]);
                }
                sym = std::move(next);
            }
            if (sym.size() > 1 && sym.back() == marker_) {
                sym[sym.size() - 2] += marker_;
                sym.pop_back();
            }
            for (auto &s : sym) out.push_back(std::move(s));
        }
        return out;
    }

  private:
    std::string marker_;
    struct PairHash {
        std::size_t operator()(const SymbolPair &p) const noexcept {
            const std::size_t h = std::hash<std::string>{}(p.first);
            return h ^ (std::hash<std::string>{}(p.second) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
        }
    };
    std::unordered_map<SymbolPair, std::size_t, PairHash> ranks_;
};

inline std::vector<std::string> bpe_encode(const BpeModel &model, std::string_view line) {
    return BpeEncoder(model).encode(line);
}

// Concatenates tokens, turning end-of-word markers into spaces, and drops the
// single trailing space left by the last word. Exact inverse of encoding.
inline std::string bpe_decode(std::span<const std::string> tokens, std::string_view marker = kEndOfWord) {
    std::string joined;
    for (const auto &t : tokens) joined += t;
    std::string out;
    for (std::size_t pos = 0; pos < joined.size();) {
        if (joined.compare(pos, marker.size(), marker) == 0) {
            out += ' ';
            pos += marker.size();
        } else {
            out += joined[pos++];
        }
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

inline std::vector<std::string> char_encode(std::string_view line) {
    if (line.find(kSpaceSymbol) != std::string_view::npos)
        throw Error("input contains reserved symbol '" + std::string(kSpaceSymbol) + "'");
    auto out = utf8::characters(line);
    for (auto &c : out)
        if (c == " ") c = kSpaceSymbol;
    return out;
}

inline std::string char_decode(std::span<const std::string> tokens) {
    std::string out;
    for (const auto &t : tokens) out += (t == kSpaceSymbol) ? std::string(" ") : t;
    return out;
}

// Model file: "#bpe <marker>" header, then one "left right" merge per line.
inline std::string write_bpe_model(const BpeModel &model) {
    std::string out = "#bpe " + model.end_of_word_marker + "\n";
    for (const auto &[l, r] : model.merges) out += l + ' ' + r + '\n';
    return out;
}

// The vocabulary of a loaded model is rebuilt from the merge list (both
// halves and the merged output of every pair, plus the marker).
inline BpeModel read_bpe_model(std::string_view text) {
    const auto doc = utf8::lines(text);
    if (doc.empty()) throw ParseError(1, "missing '#bpe' header");
    auto fields = [](std::string_view line) {
        std::vector<std::string> f;
        for (auto w : detail::split_words(line))
            if (!w.empty()) f.emplace_back(w);
        return f;
    };
    const auto header = fields(doc[0]);
    if (header.size() != 2 || header[0] != "#bpe") throw ParseError(1, "expected '#bpe <marker>' header");
    BpeModel model;
    model.end_of_word_marker = header[1];
    model.vocab.insert(model.end_of_word_marker);
    for (std::size_t i = 1; i < doc.size(); ++i) {
        const auto f = fields(doc[i]);
        if (f.empty()) continue;
        if (f.size() != 2) throw ParseError(i + 1, "expected a merge pair");
        model.merges.emplace_back(f[0], f[1]);
        model.vocab.insert(f[0]);
        model.vocab.insert(f[1]);
        model.vocab.insert(f[0] + f[1]);
    }
    return model;
}

} // namespace astkit
