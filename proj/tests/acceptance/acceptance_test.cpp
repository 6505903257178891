// Acceptance suite: one PASS/FAIL line per criterion. Exit status is non-zero
// if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "astkit/astkit.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace astkit;

namespace {

using Clock = std::chrono::steady_clock;
using Lines = std::vector<std::string>;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed checks for one criterion.
struct Check {
    std::vector<std::string> failures;
    void expect(bool ok, const std::string &what) {
        if (!ok && failures.size() < 5) failures.push_back(what);
        if (!ok) ++failed;
    }
    std::size_t failed = 0;
};

int report(int id, const std::string &title, const Check &c, const std::string &detail) {
    std::printf("criterion %d: %s  %s (%s)\n", id, c.failed == 0 ? "PASS" : "FAIL", title.c_str(), detail.c_str());
    for (const auto &f : c.failures) std::printf("    failed: %s\n", f.c_str());
    std::fflush(stdout);
    return c.failed == 0 ? 0 : 1;
}

Tokens random_tokens(std::mt19937_64 &gen, std::size_t max_len, int alphabet) {
    Tokens t(gen() % (max_len + 1));
    for (auto &w : t) w = std::string(1, static_cast<char>('a' + gen() % alphabet));
    return t;
}

int resegmentation_optimality() {
    Check c;
    std::mt19937_64 gen(500);
    const auto t0 = Clock::now();
    std::size_t agree = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int alphabet = 1 + static_cast<int>(gen() % 3);
        const auto hyp = random_tokens(gen, 12, alphabet);
        std::vector<Tokens> refs(1 + gen() % 4);
        for (auto &r : refs) r = random_tokens(gen, 5, alphabet);
        const auto fast = resegment(hyp, refs);
        const auto slow = brute_force_resegment(hyp, refs);
        const bool same = fast.total_cost == slow.total_cost;
        agree += same;
        c.expect(same, "instance " + std::to_string(trial) + ": dp " + std::to_string(fast.total_cost) +
                           " vs exhaustive " + std::to_string(slow.total_cost));
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 10.0, "runtime " + std::to_string(secs) + " s");
    char detail[96];
    std::snprintf(detail, sizeof detail, "%zu/500 costs agree, %.2f s", agree, secs);
    return report(1, "resegmentation DP matches exhaustive search", c, detail);
}

int bleu_correctness() {
    Check c;
    const Lines refs = {"The cat sat on a mat.", "It's raining again!", "We saw 3.5 million people over there.",
                        "Hello, world!", "the quick brown fox jumps over the lazy dog"};
    const Lines hyps = {"The cat sat on the mat.", "It is raining, again!", "We saw 3.5 million people there",
                        "Hello world", "The quick brown fox jumps over the dog"};
    c.expect(corpus_bleu(refs, refs).bleu == 100.0, "identity corpus is not exactly 100");

    const auto clip = corpus_bleu(Lines{"the the the the"}, Lines{"the cat"});
    c.expect(clip.precisions[0] == 0.25, "clipped unigram precision");
    c.expect(clip.bleu == 0.0, "unsmoothed score with zero bigram matches");

    // Oracle computed independently beforehand.
    const auto rep = corpus_bleu(hyps, refs);
    c.expect(std::abs(rep.bleu - 49.58984136710435) <= 1e-6, "5-sentence BLEU " + std::to_string(rep.bleu));
    c.expect(rep.matches == std::vector<std::size_t>{24, 14, 9, 6}, "n-gram matches");
    c.expect(rep.totals == std::vector<std::size_t>{29, 24, 19, 15}, "n-gram totals");
    char detail[96];
    std::snprintf(detail, sizeof detail, "oracle 49.589841, got %.6f", rep.bleu);
    return report(2, "corpus BLEU", c, detail);
}

int segmenter_conformance() {
    Check c;
    using astkit::testing::words_with_gaps;

    // Hand-traced fixtures. Words span [0.5, 0.8], [0.9, 1.2], then +0.3 s each.
    c.expect(segment_by_silence(words_with_gaps({0.10, 0.60, 0.20})).size() == 1, "no split below 0.65 s");
    const auto split = segment_by_silence(words_with_gaps({0.10, 0.70, 0.20}));
    c.expect(split.size() == 2 && split[0].words.size() == 2 && std::abs(split[0].end - 1.55) < 1e-9,
             "split on a 0.70 s gap at its midpoint");
    const auto reduced = segment_by_silence(words_with_gaps(std::vector<double>(49, 0.20)));
    c.expect(reduced.size() == 2 && reduced[0].words.size() == 41, "reduced threshold after 40 words");
    c.expect(segment_by_silence(words_with_gaps(std::vector<double>(40, 0.20))).size() == 1,
             "40 words stay on the base threshold");

    // Properties on random streams.
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        std::mt19937_64 gen(seed + 77);
        const auto words = astkit::testing::random_stream(seed, 1 + gen() % 150, "r");
        SegmentationConfig cfg;
        cfg.base_silence_threshold = 0.2 + 0.01 * static_cast<double>(gen() % 80);
        cfg.reduced_silence_threshold = cfg.base_silence_threshold * (0.1 + 0.09 * static_cast<double>(gen() % 10));
        cfg.long_segment_word_count = 1 + gen() % 50;
        const auto segs = segment_by_silence(words, cfg);
        const std::string at = "stream " + std::to_string(seed);

        std::vector<WordHypothesis> flat;
        for (const auto &s : segs) flat.insert(flat.end(), s.words.begin(), s.words.end());
        c.expect(flat == words, at + ": words not conserved");

        for (const auto &s : segs)
            for (std::size_t i = 0; i + 1 < s.words.size(); ++i) {
                const double active = i + 1 > cfg.long_segment_word_count ? cfg.reduced_silence_threshold
                                                                          : cfg.base_silence_threshold;
                c.expect(s.words[i + 1].start - s.words[i].end() <= active, at + ": internal gap over threshold");
            }

        SegmentationConfig lower = cfg;
        lower.base_silence_threshold = std::max(cfg.reduced_silence_threshold, cfg.base_silence_threshold - 0.1);
        c.expect(segment_by_silence(words, lower).size() >= segs.size(), at + ": not monotone in the threshold");
    }

    // Tuning equals exhaustive evaluation of a 3-point grid.
    std::vector<WordHypothesis> words;
    for (int r = 0; r < 4; ++r) {
        auto w = astkit::testing::random_stream(900 + r, 300, "rec" + std::to_string(r));
        words.insert(words.end(), w.begin(), w.end());
    }
    SegmentationConfig truth;
    truth.base_silence_threshold = 0.8;
    truth.reduced_silence_threshold = 0.2;
    const auto target = durations(segment_recordings(words, truth));
    const std::vector<ThresholdPair> grid = {{0.5, 0.15}, {0.8, 0.2}, {1.2, 0.3}};
    const auto tuned = tune_thresholds(target, words, grid);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        SegmentationConfig cfg;
        cfg.base_silence_threshold = grid[g].base;
        cfg.reduced_silence_threshold = grid[g].reduced;
        const double d = wasserstein_distance(durations(segment_recordings(words, cfg)), target);
        c.expect(d == tuned.distances[g], "grid point " + std::to_string(g) + " distance differs");
        if (d < best_d) {
            best_d = d;
            best = g;
        }
    }
    c.expect(tuned.config.base_silence_threshold == grid[best].base &&
                 tuned.config.reduced_silence_threshold == grid[best].reduced,
             "tuned pair differs from exhaustive argmin");
    return report(3, "silence segmenter", c, "4 fixtures, 1000 random streams, 3-point grid");
}

// Corpus whose entries split `words` as evenly as possible.
ParallelCorpus sized_corpus(const std::string &name, std::size_t n, std::size_t src_words, std::size_t tgt_words) {
    auto text = [](std::size_t k) {
        std::string s;
        for (std::size_t i = 0; i < k; ++i) s += i ? " w" : "w";
        return s;
    };
    ParallelCorpus c{name, {}};
    c.entries.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        c.entries.push_back({std::to_string(i), text(src_words / n + (i < src_words % n)),
                             text(tgt_words / n + (i < tgt_words % n)), {}});
    return c;
}

int corpus_arithmetic() {
    Check c;
    const std::vector<ParallelCorpus> parts = {sized_corpus("mustc", 206155, 3'900'000, 3'700'000),
                                               sized_corpus("how2", 184624, 3'300'000, 3'100'000)};
    const std::vector<double> hours = {376.8, 297.6};
    std::vector<double> merged_durations;
    CorpusStats sum;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const std::vector<double> d(parts[k].size(), hours[k] * 3600.0 / static_cast<double>(parts[k].size()));
        sum += corpus_stats(parts[k], d);
        merged_durations.insert(merged_durations.end(), d.begin(), d.end());
    }
    const auto merged = merge_corpora(parts);
    const auto st = corpus_stats(merged, merged_durations);
    auto tenths = [](double x) { return std::llround(x * 10.0); };
    c.expect(st.n_segments == 390779, "merged segments " + std::to_string(st.n_segments));
    c.expect(tenths(static_cast<double>(st.src_words) / 1e6) == 72, "merged source words");
    c.expect(tenths(static_cast<double>(st.tgt_words) / 1e6) == 68, "merged target words");
    c.expect(tenths(*st.hours) == 6744, "merged hours");
    c.expect(st.src_words == sum.src_words && st.tgt_words == sum.tgt_words && st.n_segments == sum.n_segments,
             "stats not additive");

    c.expect(filter_pair(3000, 400) == FilterDecision::keep, "3000 frames / 400 chars must be kept");
    c.expect(filter_pair(3001, 400) == FilterDecision::remove, "3001 frames must be removed");
    c.expect(filter_pair(3000, 401) == FilterDecision::remove, "401 chars must be removed");

    const auto [train, dev] = split_dev(parts[0], 2000, 2019);
    const auto [train2, dev2] = split_dev(parts[0], 2000, 2019);
    c.expect(train.size() == 204155 && dev.size() == 2000, "split sizes");
    c.expect(dev.entries == dev2.entries && train.entries == train2.entries, "split not deterministic");
    char detail[128];
    std::snprintf(detail, sizeof detail, "%zu segments, %.1fM/%.1fM words, %.1f h", st.n_segments,
                  static_cast<double>(st.src_words) / 1e6, static_cast<double>(st.tgt_words) / 1e6, *st.hours);
    return report(4, "corpus arithmetic", c, detail);
}

int subword() {
    Check c;
    std::mt19937_64 gen(5);
    Lines training;
    for (int i = 0; i < 300; ++i) training.push_back(astkit::testing::random_utf8(gen, 40));
    const auto model = bpe_train(training, 500);
    const BpeEncoder enc(model);
    std::size_t ok = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string s;
        do {
            s = astkit::testing::random_utf8(gen, 40);
        } while (s.find(kEndOfWord) != std::string::npos);
        const bool bpe_ok = bpe_decode(enc.encode(s)) == s;
        const bool char_ok = char_decode(char_encode(s)) == s;
        ok += bpe_ok && char_ok;
        c.expect(bpe_ok, "bpe round trip, string " + std::to_string(i));
        c.expect(char_ok, "char round trip, string " + std::to_string(i));
    }
    const auto toy = bpe_train(Lines{"ab ab", "abc"}, 1);
    c.expect(!toy.merges.empty() && toy.merges[0] == SymbolPair("a", "b"), "first toy merge");
    c.expect(bpe_train(training, 500).merges == model.merges, "training not deterministic");
    return report(5, "subword units", c, std::to_string(ok) + "/1000 strings round-trip");
}

int features() {
    Check c;
    std::mt19937_64 gen(6);
    const double rates[] = {8000, 11025, 16000, 22050, 44100, 48000};
    for (int trial = 0; trial < 100; ++trial) {
        const double rate = rates[gen() % 6];
        const std::size_t n = gen() % 20000;
        const auto w = static_cast<std::size_t>(std::lround(0.025 * rate));
        const auto s = static_cast<std::size_t>(std::lround(0.010 * rate));
        const std::size_t expect = n < w ? 0 : 1 + (n - w) / s;
        c.expect(frame_signal(std::vector<double>(n, 0.5), rate).rows() == expect,
                 "frame count N=" + std::to_string(n) + " rate=" + std::to_string(rate));
    }

    for (double f : {0.9, 1.0, 1.1})
        for (std::size_t n : {0u, 1u, 399u, 16000u, 44100u}) {
            const auto out = speed_perturb(std::vector<double>(n, 1.0), f);
            const double ideal = static_cast<double>(n) / f;
            c.expect(std::abs(static_cast<double>(out.size()) - ideal) <= 1.0, "speed length law");
        }

    std::normal_distribution<double> nd(4.0, 3.0);
    std::vector<FeatureMatrix> mats;
    for (int k = 0; k < 5; ++k) {
        FeatureMatrix m(100 + k * 17, 83);
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t col = 0; col < m.cols(); ++col) m(r, col) = nd(gen) * (1.0 + col);
        mats.push_back(m);
    }
    const auto stats = compute_cmvn(mats);
    std::vector<double> sum(83, 0.0), sq(83, 0.0);
    for (const auto &m : mats) {
        const auto z = apply_cmvn(stats, m);
        for (std::size_t r = 0; r < z.rows(); ++r)
            for (std::size_t col = 0; col < z.cols(); ++col) {
                sum[col] += z(r, col);
                sq[col] += z(r, col) * z(r, col);
            }
    }
    double worst_mu = 0.0, worst_var = 0.0;
    const auto n = static_cast<double>(stats.frame_count);
    for (std::size_t col = 0; col < 83; ++col) {
        const double mu = sum[col] / n;
        worst_mu = std::max(worst_mu, std::abs(mu));
        worst_var = std::max(worst_var, std::abs(sq[col] / n - mu * mu - 1.0));
    }
    c.expect(worst_mu < 1e-6, "CMVN mean");
    c.expect(worst_var < 1e-4, "CMVN variance");

    std::vector<double> tone(16000);
    for (std::size_t i = 0; i < tone.size(); ++i)
        tone[i] = 8000.0 * std::sin(2.0 * std::numbers::pi * 440.0 * static_cast<double>(i) / 16000.0);
    const auto fb = compute_fbank(tone, 16000.0);
    // Analytic centres: 80 points equally spaced in mel between 20 Hz and 8 kHz.
    const double lo = hz_to_mel(20.0), hi = hz_to_mel(8000.0);
    std::size_t nearest = 0;
    for (std::size_t m = 1; m < 80; ++m) {
        const double cm = mel_to_hz(lo + (hi - lo) * static_cast<double>(m + 1) / 81.0);
        const double cb = mel_to_hz(lo + (hi - lo) * static_cast<double>(nearest + 1) / 81.0);
        if (std::abs(cm - 440.0) < std::abs(cb - 440.0)) nearest = m;
    }
    for (std::size_t r = 0; r < fb.rows(); ++r) {
        const auto row = fb.row(r);
        const auto arg = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
        c.expect(arg == nearest, "440 Hz argmax in frame " + std::to_string(r));
    }
    char detail[128];
    std::snprintf(detail, sizeof detail, "max |mu| %.1e, max |var-1| %.1e, 440 Hz -> filter %zu", worst_mu, worst_var,
                  nearest);
    return report(6, "acoustic features", c, detail);
}

int run_cli(const std::string &args) {
    const int status = std::system((std::string(ASTKIT_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// prep -> segment -> resegment -> score inside `dir`; returns every file
// produced, keyed by name.
std::map<std::string, std::string> pipeline(const fs::path &dir, int jobs, Check &c) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string data = ASTKIT_DATA_DIR;
    const std::string j = "--jobs " + std::to_string(jobs) + " ";
    auto p = [&](const char *name) { return (dir / name).string(); };
    const std::vector<std::string> steps = {
        j + "prep --input " + data + "/eval.en.raw -o " + p("ref.txt"),
        j + "segment --ctm " + data + "/eval.ctm -o " + p("eval.segments") + " --text " + p("hyp.txt"),
        j + "resegment --hyp " + p("hyp.txt") + " --ref-segmented " + p("ref.txt") + " --lowercase -o " +
            p("hyp.reseg.txt"),
        j + "score --hyp " + p("hyp.reseg.txt") + " --ref " + p("ref.txt") + " --lowercase --report -o " +
            p("bleu.txt"),
    };
    for (const auto &s : steps) c.expect(run_cli(s) == 0, "command failed: " + s);
    std::map<std::string, std::string> out;
    for (const auto &e : fs::directory_iterator(dir)) out[e.path().filename().string()] = io::read_file(e.path());
    return out;
}

bool is_manifest(const std::string &name) { return name.ends_with(".manifest.json"); }

int end_to_end(Clock::time_point suite_start) {
    Check c;
    const fs::path dir = fs::temp_directory_path() / "astkit_acceptance";
    const auto first = pipeline(dir, 1, c);
    const auto second = pipeline(dir, 1, c);
    const auto parallel = pipeline(dir, 4, c);
    fs::remove_all(dir);

    c.expect(first.size() == 9, std::to_string(first.size()) + " files produced, expected 9");
    c.expect(first == second, "two identical runs differ");
    std::size_t compared = 0;
    for (const auto &[name, bytes] : first) {
        if (is_manifest(name)) continue;
        ++compared;
        const auto it = parallel.find(name);
        c.expect(it != parallel.end() && it->second == bytes, name + " differs between --jobs 1 and --jobs 4");
    }
    const auto bleu = first.count("bleu.txt") ? first.at("bleu.txt") : std::string();
    c.expect(bleu.rfind("BLEU = ", 0) == 0, "score output");
    const double secs = seconds_since(suite_start);
    c.expect(secs < 60.0, "suite runtime " + std::to_string(secs) + " s");
    char detail[160];
    std::snprintf(detail, sizeof detail, "%zu outputs identical across runs and job counts; %s; suite %.2f s", compared,
                  bleu.substr(0, bleu.find(' ', 12)).c_str(), secs);
    return report(7, "end-to-end determinism", c, detail);
}

} // namespace

int main() {
    const auto start = Clock::now();
    int failed = 0;
    const std::vector<std::function<int()>> criteria = {resegmentation_optimality, bleu_correctness,
                                                        segmenter_conformance,     corpus_arithmetic,
                                                        subword,                   features};
    for (const auto &run : criteria) {
        try {
            failed += run();
        } catch (const std::exception &e) {
            std::printf("    error: %s\n", e.what());
            ++failed;
        }
    }
    try {
        failed += end_to_end(start);
    } catch (const std::exception &e) {
        std::printf("criterion 7: FAIL  end-to-end determinism (error: %s)\n", e.what());
        ++failed;
    }
    std::printf("%d of 7 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
