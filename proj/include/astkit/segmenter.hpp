#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "astkit/error.hpp"
#include "astkit/parallel.hpp"
#include "astkit/timecodes.hpp"

namespace astkit {

enum class BoundaryPlacement { midpoint_of_gap, end_of_last_word };

// Adaptive silence-threshold segmentation parameters. A gap longer than
// `base_silence_threshold` closes the current segment; once the segment holds
// more than `long_segment_word_count` words the threshold drops to
// `reduced_silence_threshold`.
struct SegmentationConfig {
    double base_silence_threshold = 0.65;
    std::size_t long_segment_word_count = 40;
    double reduced_silence_threshold = 0.15;
    BoundaryPlacement boundary_placement = BoundaryPlacement::midpoint_of_gap;

    void validate() const {
        if (!(reduced_silence_threshold > 0.0))
            throw Error("reduced silence threshold must be positive");
        if (reduced_silence_threshold > base_silence_threshold)
            throw Error("reduced silence threshold exceeds base threshold");
        if (long_segment_word_count < 1) throw Error("long segment word count must be at least 1");
    }
};

struct DurationStats {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;
    std::size_t count = 0;
};

inline std::string segment_id(const std::string &recording_id, std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%05zu", index);
    return recording_id + "_" + buf;
}

// Segments the word stream of a single recording. Every word lands in
// exactly one segment; no segment is empty.
inline std::vector<Segment> segment_by_silence(std::span<const WordHypothesis> words,
                                               const SegmentationConfig &cfg = {}) {
    cfg.validate();
    validate_recording_words(words);
    std::vector<Segment> segments;
    if (words.empty()) return segments;

    const bool midpoint = cfg.boundary_placement == BoundaryPlacement::midpoint_of_gap;
    Segment current;
    current.recording_id = words.front().recording_id;
    current.start = words.front().start;

    auto close = [&](double end) {
        current.segment_id = segment_id(current.recording_id, segments.size());
        current.end = end;
        segments.push_back(std::move(current));
        current = Segment{};
        current.recording_id = words.front().recording_id;
    };

    for (std::size_t i = 0; i < words.size(); ++i) {
        current.words.push_back(words[i]);
        if (i + 1 == words.size()) break;
        const double gap = words[i + 1].start - words[i].end();
        const double threshold = current.words.size() > cfg.long_segment_word_count
                                     ? cfg.reduced_silence_threshold
                                     : cfg.base_silence_threshold;
        if (gap > threshold) {
            const double cut = midpoint ? 0.5 * (words[i].end() + words[i + 1].start) : words[i].end();
            close(cut);
            current.start = midpoint ? cut : words[i + 1].start;
        }
    }
    close(words.back().end());

    // Zero-length segments (a lone zero-duration word) are widened to the
    // manifest resolution.
    for (auto &s : segments)
        if (!(s.end > s.start)) s.end = s.start + 0.01;
    return segments;
}

// Groups a sorted multi-recording stream (as returned by parse_ctm) into
// per-recording slices.
inline std::vector<std::span<const WordHypothesis>> split_by_recording(std::span<const WordHypothesis> words) {
    std::vector<std::span<const WordHypothesis>> out;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= words.size(); ++i) {
        if (i == words.size() || words[i].recording_id != words[begin].recording_id) {
            if (i > begin) out.push_back(words.subspan(begin, i - begin));
            begin = i;
        }
    }
    return out;
}

// Segments every recording in `words`, recordings in parallel. The output is
// in recording order regardless of `jobs`.
inline std::vector<Segment> segment_recordings(std::span<const WordHypothesis> words,
                                               const SegmentationConfig &cfg = {}, std::size_t jobs = 1) {
    const auto recordings = split_by_recording(words);
    auto per_recording = parallel_map(jobs, recordings.size(),
                                      [&](std::size_t r) { return segment_by_silence(recordings[r], cfg); });
    std::vector<Segment> out;
    for (auto &segs : per_recording)
        for (auto &s : segs) out.push_back(std::move(s));
    return out;
}

inline std::vector<double> durations(std::span<const Segment> segments) {
    std::vector<double> out;
    out.reserve(segments.size());
    for (const auto &s : segments) out.push_back(s.duration());
    return out;
}

// Min/max/mean and population standard deviation of segment durations.
inline DurationStats duration_stats(std::span<const double> values) {
    if (values.empty()) throw Error("no segments");
    DurationStats st;
    st.count = values.size();
    st.min = *std::min_element(values.begin(), values.end());
    st.max = *std::max_element(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    st.mean = sum / static_cast<double>(st.count);
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.std_dev = std::sqrt(ss / static_cast<double>(st.count));
    // Rounding can push the mean a few ulps outside [min, max] for constant data.
    st.mean = std::clamp(st.mean, st.min, st.max);
    return st;
}

inline DurationStats duration_stats(std::span<const Segment> segments) {
    const auto d = durations(segments);
    return duration_stats(std::span<const double>(d));
}

// 1-D Wasserstein-1 distance between two empirical distributions, computed
// as the integral of |F(x) - G(x)| over the merged support.
inline double wasserstein_distance(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double prev = std::min(x.front(), y.front());
    double total = 0.0;
    while (i < x.size() || j < y.size()) {
        const double next = (j == y.size() || (i < x.size() && x[i] <= y[j])) ? x[i] : y[j];
        total += std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny) * (next - prev);
        while (i < x.size() && x[i] == next) ++i;
        while (j < y.size() && y[j] == next) ++j;
        prev = next;
    }
    return total;
}

struct ThresholdPair {
    double base = 0.65;
    double reduced = 0.15;
};

struct TuningResult {
    SegmentationConfig config;
    double distance = std::numeric_limits<double>::infinity();
    std::vector<double> distances; // one per grid point, in grid order
};

// Segments `words` (any number of recordings) under every (base, reduced)
// pair and keeps the one whose duration distribution is closest to
// `target_durations`. The first minimal pair in grid order wins ties.
inline TuningResult tune_thresholds(std::span<const double> target_durations,
                                    std::span<const WordHypothesis> words, std::span<const ThresholdPair> grid,
                                    const SegmentationConfig &base_cfg = {}, std::size_t jobs = 1) {
    if (grid.empty()) throw Error("threshold grid is empty");
    if (target_durations.empty()) throw Error("target duration list is empty");
    std::vector<SegmentationConfig> configs;
    for (const auto &p : grid) {
        if (p.reduced > p.base) throw Error("grid pair has reduced threshold above base threshold");
        SegmentationConfig c = base_cfg;
        c.base_silence_threshold = p.base;
        c.reduced_silence_threshold = p.reduced;
        c.validate();
        configs.push_back(c);
    }
    TuningResult result;
    result.distances = parallel_map(jobs, configs.size(), [&](std::size_t g) {
        const auto segs = segment_recordings(words, configs[g]);
        if (segs.empty()) return std::numeric_limits<double>::infinity();
        const auto d = durations(segs);
        return wasserstein_distance(d, target_durations);
    });
    result.config = configs.front();
    for (std::size_t g = 0; g < configs.size(); ++g) {
        if (result.distances[g] < result.distance) {
            result.distance = result.distances[g];
            result.config = configs[g];
        }
    }
    return result;
}

} // namespace astkit
