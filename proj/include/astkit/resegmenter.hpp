#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "astkit/error.hpp"
#include "astkit/utf8.hpp"

namespace astkit {

using Tokens = std::vector<std::string>;

// Cut positions into a hypothesis token stream. Reference segment k receives
// hyp[boundaries[k-1], boundaries[k]), with implicit 0 and |hyp| at the ends.
struct AlignedSegmentation {
    std::vector<std::size_t> boundaries;
    std::size_t total_cost = 0;

    bool operator==(const AlignedSegmentation &) const = default;
};

// Word-level Levenshtein distance with unit costs.
template <typename T>
std::size_t edit_distance(std::span<const T> a, std::span<const T> b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

inline std::size_t edit_distance(const Tokens &a, const Tokens &b) {
    return edit_distance(std::span<const std::string>(a), std::span<const std::string>(b));
}

namespace detail {

// cost[j] = min_i (start[i] + ED(hyp[i, j), ref)), for all j, in
// O(|hyp| * |ref|). Row r of the Levenshtein table is kept per hyp column;
// seeding row 0 with a running minimum folds the choice of start position
// into the ordinary recurrence.
template <typename T>
std::vector<std::size_t> relax_segment(std::span<const T> hyp, std::span<const T> ref,
                                       const std::vector<std::size_t> &start) {
    const std::size_t n = hyp.size();
    std::vector<std::size_t> row(n + 1);
    row[0] = start[0];
    for (std::size_t j = 1; j <= n; ++j) row[j] = std::min(start[j], row[j - 1] + 1);
    for (std::size_t r = 1; r <= ref.size(); ++r) {
        std::size_t diag = row[0];
        row[0] = diag + 1;
        for (std::size_t j = 1; j <= n; ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (hyp[j - 1] == ref[r - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row;
}

// ED(hyp[from, j), ref) for every j >= from; entries before `from` are unused.
template <typename T>
std::vector<std::size_t> distances_from(std::span<const T> hyp, std::span<const T> ref, std::size_t from) {
    constexpr std::size_t kUnreachable = static_cast<std::size_t>(-1) / 4;
    std::vector<std::size_t> start(hyp.size() + 1, kUnreachable);
    start[from] = 0;
    return relax_segment(hyp, ref, start);
}

} // namespace detail

// Splits `hyp` into |refs| consecutive (possibly empty) pieces minimizing the
// summed edit distance against the reference segments. Among optimal cut
// vectors the lexicographically smallest is returned.
//
// A suffix table best[k][j] (cheapest alignment of refs k.. onto hyp[j, n))
// is built right to left over the reversed sequences; the cuts are then
// chosen left to right, each time taking the smallest position that still
// completes an optimal alignment.
template <typename T>
AlignedSegmentation resegment(std::span<const T> hyp, std::span<const std::vector<T>> refs) {
    if (refs.empty()) throw Error("reference segmentation is empty");
    const std::size_t n = hyp.size();
    const std::size_t k_refs = refs.size();
    constexpr std::size_t kUnreachable = static_cast<std::size_t>(-1) / 4;

    std::vector<T> rev_hyp(hyp.rbegin(), hyp.rend());
    // best[k][j] for k in [0, k_refs]; best[k_refs][j] = 0 iff j == n.
    std::vector<std::vector<std::size_t>> best(k_refs + 1);
    {
        // In reversed coordinates position p corresponds to original n - p.
        std::vector<std::size_t> tail(n + 1, kUnreachable);
        tail[0] = 0;
        best[k_refs].assign(n + 1, kUnreachable);
        best[k_refs][n] = 0;
        for (std::size_t k = k_refs; k-- > 0;) {
            const auto &ref = refs[k];
            std::vector<T> rev_ref(ref.rbegin(), ref.rend());
            tail = detail::relax_segment(std::span<const T>(rev_hyp), std::span<const T>(rev_ref), tail);
            best[k].resize(n + 1);
            for (std::size_t j = 0; j <= n; ++j) best[k][j] = tail[n - j];
        }
    }

    AlignedSegmentation out;
    out.total_cost = best[0][0];
    std::size_t pos = 0;
    std::size_t spent = 0;
    for (std::size_t k = 0; k + 1 < k_refs; ++k) {
        const auto seg = detail::distances_from(hyp, std::span<const T>(refs[k]), pos);
        std::size_t cut = pos;
        while (seg[cut] + best[k + 1][cut] + spent != out.total_cost) ++cut;
        spent += seg[cut];
        out.boundaries.push_back(cut);
        pos = cut;
    }
    return out;
}

inline AlignedSegmentation resegment(const Tokens &hyp, const std::vector<Tokens> &refs) {
    return resegment(std::span<const std::string>(hyp), std::span<const Tokens>(refs));
}

// Exhaustive search over every non-decreasing cut vector, in lexicographic
// order. Only meant for small instances; larger ones are refused.
inline constexpr std::size_t kBruteForceMaxHyp = 14;
inline constexpr std::size_t kBruteForceMaxRefs = 4;

template <typename T>
AlignedSegmentation brute_force_resegment(std::span<const T> hyp, std::span<const std::vector<T>> refs) {
    if (refs.empty()) throw Error("reference segmentation is empty");
    if (hyp.size() > kBruteForceMaxHyp || refs.size() > kBruteForceMaxRefs)
        throw Error("instance too large for exhaustive resegmentation");
    const std::size_t cuts = refs.size() - 1;
    std::vector<std::size_t> b(cuts, 0);
    AlignedSegmentation best;
    bool have = false;
    while (true) {
        std::size_t cost = 0, from = 0;
        for (std::size_t k = 0; k < refs.size(); ++k) {
            const std::size_t to = k < cuts ? b[k] : hyp.size();
            cost += edit_distance(hyp.subspan(from, to - from), std::span<const T>(refs[k]));
            from = to;
        }
        if (!have || cost < best.total_cost) {
            best.boundaries = b;
            best.total_cost = cost;
            have = true;
        }
        // Next non-decreasing vector in lexicographic order.
        std::size_t k = cuts;
        while (k > 0 && b[k - 1] == hyp.size()) --k;
        if (k == 0) break;
        ++b[k - 1];
        for (std::size_t m = k; m < cuts; ++m) b[m] = b[k - 1];
    }
    return best;
}

inline AlignedSegmentation brute_force_resegment(const Tokens &hyp, const std::vector<Tokens> &refs) {
    return brute_force_resegment(std::span<const std::string>(hyp), std::span<const Tokens>(refs));
}

// Materializes the pieces of `hyp` assigned to each reference segment.
template <typename T>
std::vector<std::vector<T>> apply_boundaries(std::span<const T> hyp, const AlignedSegmentation &seg) {
    std::vector<std::vector<T>> out;
    std::size_t from = 0;
    for (std::size_t k = 0; k <= seg.boundaries.size(); ++k) {
        const std::size_t to = k < seg.boundaries.size() ? seg.boundaries[k] : hyp.size();
        out.emplace_back(hyp.begin() + from, hyp.begin() + to);
        from = to;
    }
    return out;
}

struct ResegmentOptions {
    bool lowercase = false;
};

// Document-level entry point: whitespace-tokenizes the hypothesis document
// and each reference line, aligns (optionally case-insensitively) and returns
// the original hypothesis tokens re-cut into one line per reference segment.
inline std::vector<std::string> resegment_document(std::string_view hyp_text,
                                                   const std::vector<std::string> &ref_lines,
                                                   const ResegmentOptions &opts = {},
                                                   AlignedSegmentation *alignment = nullptr) {
    const Tokens hyp = utf8::split_whitespace(hyp_text);
    auto fold = [&](const Tokens &t) {
        if (!opts.lowercase) return t;
        Tokens out;
        out.reserve(t.size());
        for (const auto &w : t) out.push_back(utf8::lowercase(w));
        return out;
    };
    std::vector<Tokens> refs;
    refs.reserve(ref_lines.size());
    for (const auto &line : ref_lines) refs.push_back(fold(utf8::split_whitespace(line)));
    const Tokens key = fold(hyp);
    const auto seg = resegment(key, refs);
    if (alignment) *alignment = seg;
    std::vector<std::string> out;
    for (const auto &piece : apply_boundaries(std::span<const std::string>(hyp), seg))
        out.push_back(utf8::join(piece));
    return out;
}

} // namespace astkit
