// astkit command-line driver. One subcommand per pipeline stage; every run
// writes a JSON manifest with the resolved configuration and input hashes.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "astkit/astkit.hpp"

namespace fs = std::filesystem;
using namespace astkit;

namespace {

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 computation failed");
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

struct Globals {
    std::uint64_t seed = 2019;
    std::size_t jobs = 1;
    std::string manifest;
};

// Collects input hashes and output paths for the run manifest.
class RunRecord {
  public:
    std::string read(const std::string &path) {
        auto bytes = io::read_file(path);
        inputs_[path] = sha256_hex(bytes);
        return bytes;
    }
    std::vector<std::string> read_lines(const std::string &path) { return utf8::lines(read(path)); }

    ParallelCorpus read_corpus(const std::string &prefix) {
        for (const char *ext : {".src", ".tgt", ".ids", ".frames"})
            if (fs::exists(prefix + ext)) read(prefix + ext);
        return load_corpus(prefix);
    }

    void write(const std::string &path, std::string_view bytes) {
        io::write_file(path, bytes);
        outputs_.push_back(path);
    }
    void write_corpus(const ParallelCorpus &c, const std::string &prefix) {
        save_corpus(c, prefix);
        for (const char *ext : {".src", ".tgt", ".ids", ".frames"})
            if (fs::exists(prefix + ext)) outputs_.push_back(prefix + ext);
    }

    nlohmann::json to_json(const std::string &command, const std::string &config) const {
        nlohmann::json j;
        j["command"] = command;
        j["config"] = config;
        j["inputs"] = inputs_;
        j["outputs"] = outputs_;
        return j;
    }

  private:
    std::map<std::string, std::string> inputs_;
    std::vector<std::string> outputs_;
};

std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::vector<Segment> segment_file(RunRecord &rec, const std::string &ctm, const SegmentationConfig &cfg,
                                  std::size_t jobs) {
    const auto words = parse_ctm(rec.read(ctm));
    return segment_recordings(words, cfg, jobs);
}

std::string segment_text(const std::vector<Segment> &segs) {
    std::string out;
    for (const auto &s : segs) {
        for (std::size_t i = 0; i < s.words.size(); ++i) {
            if (i) out += ' ';
            out += s.words[i].word;
        }
        out += '\n';
    }
    return out;
}

std::string stats_line(const std::string &label, const DurationStats &st) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-16s %8zu %8.2f %8.2f %8.2f %8.2f\n", label.c_str(), st.count, st.min, st.max,
                  st.mean, st.std_dev);
    return buf;
}

std::string stats_header() {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-16s %8s %8s %8s %8s %8s\n", "set", "segments", "min", "max", "mean", "std");
    return buf;
}

std::string corpus_row(const std::string &label, const CorpusStats &st) {
    char buf[256];
    const std::string hours = st.hours ? fmt("%.1f", *st.hours) : "-";
    std::snprintf(buf, sizeof buf, "%-20s %10zu %8s %12zu %12zu\n", label.c_str(), st.n_segments, hours.c_str(),
                  st.src_words, st.tgt_words);
    return buf;
}

std::string corpus_kv(const std::string &label, const CorpusStats &st) {
    std::string out = label + ".segments " + std::to_string(st.n_segments) + "\n";
    if (st.hours) out += label + ".hours " + fmt("%.6f", *st.hours) + "\n";
    out += label + ".src_words " + std::to_string(st.src_words) + "\n";
    out += label + ".tgt_words " + std::to_string(st.tgt_words) + "\n";
    return out;
}

std::optional<std::vector<double>> frame_durations(const ParallelCorpus &c) {
    std::vector<double> d;
    for (const auto &e : c.entries) {
        if (!e.n_frames) return std::nullopt;
        d.push_back(static_cast<double>(*e.n_frames) * kDefaultFrameShift);
    }
    return d;
}

std::string speed_tag(double f) {
    if (f == 1.0) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "-sp%g", f);
    return buf;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"astkit: speech translation data pipeline"};
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "Configuration file (TOML; one section per subcommand)");
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "Seed for every randomized step")->capture_default_str();
    app.add_option("--jobs", g.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--manifest", g.manifest, "Run manifest path (default: derived from the output)");

    const std::map<std::string, BoundaryPlacement> placements = {
        {"midpoint", BoundaryPlacement::midpoint_of_gap}, {"word-end", BoundaryPlacement::end_of_last_word}};

    // segment
    auto *seg = app.add_subcommand("segment", "Split CTM word streams into segments at silences");
    std::string seg_ctm, seg_out, seg_text;
    SegmentationConfig seg_cfg;
    seg->add_option("--ctm", seg_ctm, "Word-level CTM input")->required()->check(CLI::ExistingFile);
    seg->add_option("-o,--output", seg_out, "Segment manifest output")->required();
    seg->add_option("--text", seg_text, "Also write each segment's words, one line per segment");
    seg->add_option("--base", seg_cfg.base_silence_threshold, "Silence threshold in seconds")->capture_default_str();
    seg->add_option("--reduced", seg_cfg.reduced_silence_threshold, "Threshold once a segment is long")
        ->capture_default_str();
    seg->add_option("--max-words", seg_cfg.long_segment_word_count, "Word count that triggers the reduced threshold")
        ->capture_default_str();
    seg->add_option("--boundary", seg_cfg.boundary_placement, "Boundary placement: midpoint or word-end")
        ->transform(CLI::CheckedTransformer(placements))
        ->default_str("midpoint");
    bool seg_stats = false;
    seg->add_flag("--stats", seg_stats, "Print segment duration statistics");

    // tune
    auto *tune = app.add_subcommand("tune", "Grid-search thresholds to match a target duration distribution");
    std::string tune_ctm, tune_target;
    std::vector<double> tune_base = {0.3, 0.5, 0.65, 0.8, 1.0}, tune_reduced = {0.1, 0.15, 0.2, 0.3};
    SegmentationConfig tune_cfg;
    tune->add_option("--ctm", tune_ctm, "Word-level CTM input")->required()->check(CLI::ExistingFile);
    tune->add_option("--target", tune_target, "Segment manifest whose durations are the target")
        ->required()
        ->check(CLI::ExistingFile);
    tune->add_option("--base-grid", tune_base, "Base thresholds to try")->delimiter(',')->capture_default_str();
    tune->add_option("--reduced-grid", tune_reduced, "Reduced thresholds to try")
        ->delimiter(',')
        ->capture_default_str();
    tune->add_option("--max-words", tune_cfg.long_segment_word_count)->capture_default_str();
    tune->add_option("--boundary", tune_cfg.boundary_placement)
        ->transform(CLI::CheckedTransformer(placements))
        ->default_str("midpoint");

    // resegment
    auto *reseg = app.add_subcommand("resegment", "Re-cut an unsegmented hypothesis to match reference segments");
    std::string reseg_hyp, reseg_ref, reseg_out;
    bool reseg_lower = false;
    reseg->add_option("--hyp", reseg_hyp, "Hypothesis text (all lines form one stream)")
        ->required()
        ->check(CLI::ExistingFile);
    reseg->add_option("--ref-segmented", reseg_ref, "Reference, one segment per line")
        ->required()
        ->check(CLI::ExistingFile);
    reseg->add_option("-o,--output", reseg_out, "Resegmented hypothesis output")->required();
    reseg->add_flag("--lowercase", reseg_lower, "Align case-insensitively");

    // score
    auto *score = app.add_subcommand("score", "Corpus-level BLEU");
    std::string score_hyp, score_ref, score_out;
    BleuConfig bleu_cfg;
    bool score_report = false;
    score->add_option("--hyp", score_hyp)->required()->check(CLI::ExistingFile);
    score->add_option("--ref", score_ref)->required()->check(CLI::ExistingFile);
    score->add_option("-o,--output", score_out, "Also write the report here");
    score->add_flag("--lowercase", bleu_cfg.lowercase, "Case-insensitive scoring");
    score->add_option("--tokenize", bleu_cfg.tokenization)
        ->transform(CLI::CheckedTransformer(std::map<std::string, BleuTokenization>{
            {"13a", BleuTokenization::punct_split_13a_style}, {"none", BleuTokenization::whitespace_only}}))
        ->default_str("13a");
    score->add_option("--smooth", bleu_cfg.smoothing)
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, BleuSmoothing>{{"none", BleuSmoothing::none}, {"epsilon", BleuSmoothing::add_epsilon}}))
        ->default_str("none");
    score->add_option("--epsilon", bleu_cfg.epsilon)->capture_default_str();
    score->add_option("--max-order", bleu_cfg.max_ngram_order)->capture_default_str()->check(CLI::PositiveNumber);
    score->add_flag("--report", score_report, "Print per-order counts after the summary line");

    // bpe-train
    auto *bpe_tr = app.add_subcommand("bpe-train", "Learn BPE merges jointly over one or more text files");
    std::vector<std::string> bpe_inputs;
    std::string bpe_model_out, bpe_marker{kEndOfWord};
    std::size_t bpe_merges = 0, bpe_vocab = 0;
    bpe_tr->add_option("--input", bpe_inputs, "Training text files")->required()->check(CLI::ExistingFile);
    bpe_tr->add_option("-o,--output", bpe_model_out, "Model file")->required();
    auto *merges_opt = bpe_tr->add_option("--merges", bpe_merges, "Number of merges");
    auto *vocab_opt = bpe_tr->add_option("--vocab-size", bpe_vocab, "Target vocabulary size");
    merges_opt->excludes(vocab_opt);
    bpe_tr->add_option("--marker", bpe_marker, "End-of-word marker")->capture_default_str();

    // bpe-apply
    auto *bpe_ap = app.add_subcommand("bpe-apply", "Segment text into BPE or character tokens, or undo it");
    std::string bpe_model_in, bpe_in, bpe_out;
    bool bpe_char = false, bpe_decode_mode = false;
    bpe_ap->add_option("--model", bpe_model_in, "BPE model file")->check(CLI::ExistingFile);
    bpe_ap->add_flag("--char", bpe_char, "Character tokens instead of BPE");
    bpe_ap->add_flag("--decode", bpe_decode_mode, "Join tokens back into text");
    bpe_ap->add_option("--input", bpe_in)->required()->check(CLI::ExistingFile);
    bpe_ap->add_option("-o,--output", bpe_out)->required();

    // prep
    auto *prep = app.add_subcommand("prep", "Normalize and tokenize text; optionally filter a corpus by length");
    std::string prep_in, prep_out, prep_corpus, prep_corpus_out;
    PreprocessOptions prep_opts;
    bool prep_no_norm = false, prep_no_tok = false, prep_filter = false;
    LengthLimits limits;
    prep->add_option("--input", prep_in, "Text file, one sentence per line")->check(CLI::ExistingFile);
    prep->add_option("-o,--output", prep_out, "Output for --input");
    prep->add_option("--corpus", prep_corpus, "Corpus prefix (.src/.tgt[/.ids/.frames])");
    prep->add_option("--corpus-out", prep_corpus_out, "Output corpus prefix for --corpus");
    prep->add_flag("--no-normalize", prep_no_norm, "Skip punctuation normalization");
    prep->add_flag("--no-tokenize", prep_no_tok, "Skip tokenization");
    prep->add_option("--strip-mark", prep_opts.strip_marks, "Regex for event marks to delete (case-insensitive)")
        ->capture_default_str();
    prep->add_flag("--filter", prep_filter, "Drop corpus entries exceeding the length limits");
    prep->add_option("--max-frames", limits.max_frames)->capture_default_str();
    prep->add_option("--max-chars", limits.max_chars)->capture_default_str();

    // split
    auto *split = app.add_subcommand("split", "Sample a dev set out of a corpus");
    std::string split_corpus, split_train, split_dev_out;
    std::size_t split_n = 0;
    split->add_option("--corpus", split_corpus)->required();
    split->add_option("-n,--size", split_n, "Dev set size")->required();
    split->add_option("--train-out", split_train)->required();
    split->add_option("--dev-out", split_dev_out)->required();

    // merge
    auto *merge = app.add_subcommand("merge", "Concatenate corpora");
    std::vector<std::string> merge_inputs;
    std::string merge_out;
    merge->add_option("--corpus", merge_inputs, "Corpus prefixes")->required();
    merge->add_option("-o,--output", merge_out, "Output corpus prefix")->required();

    // stats
    auto *stats = app.add_subcommand("stats", "Corpus and segment statistics");
    std::vector<std::string> stats_corpora, stats_segments;
    stats->add_option("--corpus", stats_corpora, "Corpus prefixes");
    stats->add_option("--segments", stats_segments, "Segment manifests")->check(CLI::ExistingFile);

    // features
    auto *feats = app.add_subcommand("features", "Log-mel filter-bank features from WAV files");
    std::vector<std::string> feat_wavs;
    std::string feat_dir, feat_format = "feat", feat_cmvn = "global", feat_cmvn_stats, feat_aux_dir;
    std::vector<double> feat_speeds = {1.0};
    FrameOptions frame_opts;
    MelOptions mel_opts;
    feats->add_option("--wav", feat_wavs, "Mono 16-bit PCM WAV files")->required()->check(CLI::ExistingFile);
    feats->add_option("--out-dir", feat_dir)->required();
    feats->add_option("--speed", feat_speeds, "Speed perturbation factors")->delimiter(',')->capture_default_str();
    feats->add_option("--cmvn", feat_cmvn, "none, global or utterance")
        ->check(CLI::IsMember({"none", "global", "utterance"}))
        ->capture_default_str();
    feats->add_option("--cmvn-stats", feat_cmvn_stats,
                      "Global stats file: read if it exists, otherwise computed and written");
    feats->add_option("--aux-dir", feat_aux_dir, "Directory of <name>.feat matrices to append (e.g. pitch)");
    feats->add_option("--format", feat_format)->check(CLI::IsMember({"feat", "csv"}))->capture_default_str();
    feats->add_option("--n-mels", mel_opts.n_mels)->capture_default_str();
    feats->add_option("--window", frame_opts.window)->capture_default_str();
    feats->add_option("--shift", frame_opts.shift)->capture_default_str();
    feats->add_option("--preemphasis", frame_opts.preemphasis)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    auto *sub = app.get_subcommands().front();
    RunRecord rec;
    std::string default_manifest;
    auto usage = [&](const std::string &msg) {
        std::cerr << sub->get_name() << ": " << msg << "\n" << sub->help();
        return 2;
    };

    try {
        const std::string name = sub->get_name();
        if (sub == seg) {
            const auto segs = segment_file(rec, seg_ctm, seg_cfg, g.jobs);
            rec.write(seg_out, write_segment_manifest(segs));
            if (!seg_text.empty()) rec.write(seg_text, segment_text(segs));
            if (seg_stats && !segs.empty()) std::cout << stats_header() << stats_line(fs::path(seg_ctm).filename().string(), duration_stats(segs));
            default_manifest = seg_out;
        } else if (sub == tune) {
            const auto target = durations(parse_segment_manifest(rec.read(tune_target)));
            const auto words = parse_ctm(rec.read(tune_ctm));
            std::vector<ThresholdPair> grid;
            for (double b : tune_base)
                for (double r : tune_reduced)
                    if (r <= b) grid.push_back({b, r});
            const auto res = tune_thresholds(target, words, grid, tune_cfg, g.jobs);
            for (std::size_t i = 0; i < grid.size(); ++i)
                std::cout << "grid base " << fmt("%.3f", grid[i].base) << " reduced " << fmt("%.3f", grid[i].reduced)
                          << " distance " << fmt("%.6f", res.distances[i]) << "\n";
            std::cout << "best base " << fmt("%.3f", res.config.base_silence_threshold) << " reduced "
                      << fmt("%.3f", res.config.reduced_silence_threshold) << " distance "
                      << fmt("%.6f", res.distance) << "\n";
        } else if (sub == reseg) {
            const auto hyp = rec.read(reseg_hyp);
            const auto refs = rec.read_lines(reseg_ref);
            if (refs.empty()) throw Error("reference file has no segments");
            AlignedSegmentation al;
            const auto lines = resegment_document(hyp, refs, {.lowercase = reseg_lower}, &al);
            rec.write(reseg_out, io::join_lines(lines));
            std::cerr << "resegment: " << refs.size() << " segments, edit cost " << al.total_cost << "\n";
            default_manifest = reseg_out;
        } else if (sub == score) {
            const auto hyps = rec.read_lines(score_hyp);
            const auto refs = rec.read_lines(score_ref);
            const auto rep = corpus_bleu(hyps, refs, bleu_cfg, g.jobs);
            std::string text = format_summary(rep) + "\n";
            if (score_report) text += format_report(rep);
            std::cout << text;
            if (!score_out.empty()) {
                rec.write(score_out, text);
                default_manifest = score_out;
            }
        } else if (sub == bpe_tr) {
            std::vector<std::vector<std::string>> corpora;
            for (const auto &f : bpe_inputs) corpora.push_back(rec.read_lines(f));
            std::size_t merges = bpe_merges;
            if (vocab_opt->count()) merges = merges_for_vocab_size(corpora, bpe_vocab, bpe_marker);
            else if (!merges_opt->count()) return usage("one of --merges or --vocab-size is required");
            const auto model = bpe_train(corpora, merges, bpe_marker);
            rec.write(bpe_model_out, write_bpe_model(model));
            std::cerr << "bpe-train: " << model.merges.size() << " merges, vocabulary " << model.vocab.size() << "\n";
            default_manifest = bpe_model_out;
        } else if (sub == bpe_ap) {
            if (bpe_char == !bpe_model_in.empty()) return usage("give exactly one of --model or --char");
            std::optional<BpeModel> model;
            if (!bpe_char) model = read_bpe_model(rec.read(bpe_model_in));
            const auto lines = rec.read_lines(bpe_in);
            const std::optional<BpeEncoder> enc = model ? std::optional<BpeEncoder>(BpeEncoder(*model)) : std::nullopt;
            const auto out = parallel_map(g.jobs, lines.size(), [&](std::size_t i) {
                if (bpe_decode_mode) {
                    std::vector<std::string> toks;
                    for (auto t : detail::split_words(lines[i]))
                        if (!t.empty()) toks.emplace_back(t);
                    return bpe_char ? char_decode(toks) : bpe_decode(toks, model->end_of_word_marker);
                }
                return utf8::join(bpe_char ? char_encode(lines[i]) : enc->encode(lines[i]));
            });
            rec.write(bpe_out, io::join_lines(out));
            default_manifest = bpe_out;
        } else if (sub == prep) {
            prep_opts.normalize_punct = !prep_no_norm;
            prep_opts.tokenize = !prep_no_tok;
            const Preprocessor pre(prep_opts);
            auto run = [&](const std::vector<std::string> &lines) {
                return parallel_map(g.jobs, lines.size(), [&](std::size_t i) { return pre(lines[i]); });
            };
            if (!prep_in.empty()) {
                if (prep_out.empty()) return usage("--input needs -o");
                rec.write(prep_out, io::join_lines(run(rec.read_lines(prep_in))));
                default_manifest = prep_out;
            } else if (!prep_corpus.empty()) {
                if (prep_corpus_out.empty()) return usage("--corpus needs --corpus-out");
                auto corpus = rec.read_corpus(prep_corpus);
                std::vector<std::string> src, tgt;
                for (const auto &e : corpus.entries) {
                    src.push_back(e.source_text);
                    tgt.push_back(e.target_text);
                }
                src = run(src);
                tgt = run(tgt);
                for (std::size_t i = 0; i < corpus.size(); ++i) {
                    corpus.entries[i].source_text = src[i];
                    corpus.entries[i].target_text = tgt[i];
                }
                if (prep_filter) {
                    auto [kept, removed] = filter_corpus(corpus, limits);
                    std::cerr << "prep: kept " << kept.size() << ", removed " << removed.size() << "\n";
                    corpus = std::move(kept);
                }
                rec.write_corpus(corpus, prep_corpus_out);
                default_manifest = prep_corpus_out;
            } else {
                return usage("give --input or --corpus");
            }
        } else if (sub == split) {
            const auto corpus = rec.read_corpus(split_corpus);
            const auto [train, dev] = split_dev(corpus, split_n, g.seed);
            rec.write_corpus(train, split_train);
            rec.write_corpus(dev, split_dev_out);
            default_manifest = split_train;
        } else if (sub == merge) {
            std::vector<ParallelCorpus> corpora;
            for (const auto &p : merge_inputs) corpora.push_back(rec.read_corpus(p));
            rec.write_corpus(merge_corpora(corpora), merge_out);
            default_manifest = merge_out;
        } else if (sub == stats) {
            if (stats_corpora.empty() && stats_segments.empty()) return usage("give --corpus or --segments");
            std::string table, kv;
            if (!stats_corpora.empty()) {
                char head[256];
                std::snprintf(head, sizeof head, "%-20s %10s %8s %12s %12s\n", "corpus", "segments", "hours",
                              "src_words", "tgt_words");
                table += head;
                CorpusStats total;
                bool all_hours = true;
                for (const auto &p : stats_corpora) {
                    const auto c = rec.read_corpus(p);
                    const auto d = frame_durations(c);
                    const auto st = d ? corpus_stats(c, *d) : corpus_stats(c);
                    all_hours = all_hours && st.hours.has_value();
                    total += st;
                    table += corpus_row(c.name, st);
                    kv += corpus_kv(c.name, st);
                }
                if (!all_hours) total.hours.reset();
                if (stats_corpora.size() > 1) {
                    table += corpus_row("total", total);
                    kv += corpus_kv("total", total);
                }
            }
            if (!stats_segments.empty()) {
                table += stats_header();
                for (const auto &p : stats_segments) {
                    const auto segs = parse_segment_manifest(rec.read(p));
                    if (segs.empty()) throw Error("'" + p + "' has no segments");
                    const auto st = duration_stats(segs);
                    table += stats_line(fs::path(p).filename().string(), st);
                    kv += p + ".count " + std::to_string(st.count) + "\n" + p + ".min " + fmt("%.6f", st.min) + "\n" +
                          p + ".max " + fmt("%.6f", st.max) + "\n" + p + ".mean " + fmt("%.6f", st.mean) + "\n" +
                          p + ".std " + fmt("%.6f", st.std_dev) + "\n";
                }
            }
            std::cout << table << "\n" << kv;
        } else if (sub == feats) {
            fs::create_directories(feat_dir);
            struct Job {
                std::size_t audio;
                std::string stem;
                double factor;
            };
            std::vector<Audio> audio;
            std::vector<Job> jobs;
            for (std::size_t i = 0; i < feat_wavs.size(); ++i) {
                audio.push_back(read_wav(rec.read(feat_wavs[i])));
                for (double f : feat_speeds) jobs.push_back({i, fs::path(feat_wavs[i]).stem().string() + speed_tag(f), f});
            }

            std::vector<FeatureMatrix> aux(jobs.size());
            if (!feat_aux_dir.empty())
                for (std::size_t j = 0; j < jobs.size(); ++j)
                    aux[j] = read_feature_file(rec.read((fs::path(feat_aux_dir) / (jobs[j].stem + ".feat")).string()),
                                               frame_opts.shift);

            auto mats = parallel_map(g.jobs, jobs.size(), [&](std::size_t j) {
                const auto &a = audio[jobs[j].audio];
                const auto samples = speed_perturb(a.samples, jobs[j].factor);
                auto m = compute_fbank(samples, a.sample_rate, frame_opts, mel_opts);
                if (!feat_aux_dir.empty()) m = concat_aux(m, aux[j]);
                return m;
            });

            if (feat_cmvn == "global") {
                CmvnStats st;
                if (!feat_cmvn_stats.empty() && fs::exists(feat_cmvn_stats)) {
                    st = read_cmvn_stats(rec.read(feat_cmvn_stats));
                } else {
                    st = compute_cmvn(mats);
                    if (!feat_cmvn_stats.empty()) rec.write(feat_cmvn_stats, write_cmvn_stats(st));
                }
                for (auto &m : mats) m = apply_cmvn(st, m);
            } else if (feat_cmvn == "utterance") {
                for (auto &m : mats) {
                    if (m.rows() < 2) continue;
                    const std::vector<FeatureMatrix> one = {m};
                    m = apply_cmvn(compute_cmvn(one), m);
                }
            }
            for (std::size_t j = 0; j < jobs.size(); ++j) {
                const auto path = (fs::path(feat_dir) / (jobs[j].stem + "." + feat_format)).string();
                rec.write(path, feat_format == "csv" ? write_feature_csv(mats[j]) : write_feature_file(mats[j]));
                std::cout << jobs[j].stem << " " << mats[j].rows() << " " << mats[j].cols() << "\n";
            }
            default_manifest = (fs::path(feat_dir) / "features").string();
        }

        std::string config = "seed=" + std::to_string(g.seed) + "\njobs=" + std::to_string(g.jobs) + "\n[" + name +
                             "]\n" + sub->config_to_str(true, false);
        const auto manifest = rec.to_json(name, config).dump(2) + "\n";
        if (!g.manifest.empty())
            io::write_file(g.manifest, manifest);
        else if (!default_manifest.empty())
            io::write_file(default_manifest + ".manifest.json", manifest);
        else
            std::cerr << manifest;
        return 0;
    } catch (const std::exception &e) {
        std::cerr << "astkit " << sub->get_name() << ": error: " << e.what() << "\n";
        return 1;
    }
}
