#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>

#include <json.hpp>

#include "astkit/astkit.hpp"

namespace fs = std::filesystem;
using namespace astkit;

namespace {

const std::string kCli = ASTKIT_CLI;
const std::string kData = ASTKIT_DATA_DIR;

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("astkit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string &name) const { return (dir_ / name).string(); }

    int run(const std::string &args, const std::string &stdout_file = "") const {
        const std::string redirect = stdout_file.empty() ? " >/dev/null" : " >" + path(stdout_file);
        const int status = std::system((kCli + " " + args + redirect + " 2>" + path("stderr.txt")).c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string &name) const { return io::read_file(path(name)); }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("no-such-command"), 2);
    EXPECT_EQ(run("segment -o " + path("x")), 2);
    EXPECT_EQ(run("score --hyp missing.txt --ref missing.txt"), 2);
    EXPECT_EQ(run("--help"), 0);

    io::write_file(path("bad.ctm"), "r 1 0.0 0.5 a\nr 1 0.2 0.5 b\n");
    EXPECT_EQ(run("segment --ctm " + path("bad.ctm") + " -o " + path("x")), 1);
    EXPECT_NE(read("stderr.txt").find("line 2"), std::string::npos);

    io::write_file(path("h.txt"), "a\n");
    io::write_file(path("r.txt"), "a\nb\n");
    EXPECT_EQ(run("score --hyp " + path("h.txt") + " --ref " + path("r.txt")), 1);
}

TEST_F(Cli, SegmentDefaultsAndManifest) {
    ASSERT_EQ(run("segment --ctm " + kData + "/eval.ctm -o " + path("a.seg") + " --text " + path("a.txt")), 0);
    const auto segs = parse_segment_manifest(read("a.seg"));
    EXPECT_FALSE(segs.empty());
    EXPECT_EQ(utf8::lines(read("a.txt")).size(), segs.size());

    const auto manifest = nlohmann::json::parse(read("a.seg.manifest.json"));
    EXPECT_EQ(manifest["command"], "segment");
    const std::string config = manifest["config"];
    EXPECT_NE(config.find("base=0.65"), std::string::npos);
    EXPECT_NE(config.find("reduced=0.15"), std::string::npos);
    EXPECT_NE(config.find("max-words=40"), std::string::npos);
    EXPECT_EQ(manifest["inputs"].size(), 1u);
    EXPECT_EQ(manifest["inputs"].begin().value().get<std::string>().size(), 64u);

    // Library and CLI agree.
    const auto words = parse_ctm(io::read_file(kData + "/eval.ctm"));
    EXPECT_EQ(read("a.seg"), write_segment_manifest(segment_recordings(words, {})));
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
    io::write_file(path("c.toml"), "seed = 11\n[segment]\nbase = 0.3\nmax-words = 20\n");
    ASSERT_EQ(run("--config " + path("c.toml") + " segment --ctm " + kData + "/eval.ctm -o " + path("a.seg") +
                  " --max-words 25"),
              0);
    const std::string config = nlohmann::json::parse(read("a.seg.manifest.json"))["config"];
    EXPECT_NE(config.find("seed=11"), std::string::npos);
    EXPECT_NE(config.find("base=0.3"), std::string::npos);
    EXPECT_NE(config.find("max-words=25"), std::string::npos);

    SegmentationConfig cfg;
    cfg.base_silence_threshold = 0.3;
    cfg.long_segment_word_count = 25;
    const auto words = parse_ctm(io::read_file(kData + "/eval.ctm"));
    EXPECT_EQ(read("a.seg"), write_segment_manifest(segment_recordings(words, cfg)));

    io::write_file(path("bad.toml"), "[segment]\nbase = 0.3\nbogus = 1\n");
    EXPECT_EQ(run("--config " + path("bad.toml") + " segment --ctm " + kData + "/eval.ctm -o " + path("b.seg")), 2);
}

TEST_F(Cli, ScoreIdentityIsHundred) {
    ASSERT_EQ(run("prep --input " + kData + "/eval.en.raw -o " + path("ref.txt")), 0);
    ASSERT_EQ(run("score --hyp " + path("ref.txt") + " --ref " + path("ref.txt") + " --lowercase", "out.txt"), 0);
    EXPECT_EQ(read("out.txt").rfind("BLEU = 100.00 ", 0), 0u);
}

TEST_F(Cli, CorpusCommands) {
    ASSERT_EQ(run("merge --corpus " + kData + "/talks --corpus " + kData + "/howto -o " + path("m")), 0);
    EXPECT_EQ(load_corpus(path("m")).size(), 105u);

    ASSERT_EQ(run("split --seed 3 --corpus " + path("m") + " -n 20 --train-out " + path("tr") + " --dev-out " +
                  path("dev")),
              0);
    EXPECT_EQ(load_corpus(path("tr")).size(), 85u);
    EXPECT_EQ(load_corpus(path("dev")).size(), 20u);
    EXPECT_EQ(run("split --corpus " + path("m") + " -n 200 --train-out " + path("a") + " --dev-out " + path("b")), 1);

    ASSERT_EQ(run("prep --corpus " + path("m") + " --corpus-out " + path("p") + " --filter"), 0);
    const auto kept = load_corpus(path("p"));
    EXPECT_LT(kept.size(), 105u);
    for (const auto &e : kept.entries) EXPECT_EQ(filter_pair(*e.n_frames, utf8::length(e.target_text)), FilterDecision::keep);

    ASSERT_EQ(run("stats --corpus " + path("m"), "stats.txt"), 0);
    EXPECT_NE(read("stats.txt").find("m.segments 105\n"), std::string::npos);
}

TEST_F(Cli, BpeRoundTrip) {
    ASSERT_EQ(run("prep --input " + kData + "/eval.pt.raw -o " + path("pt.txt")), 0);
    ASSERT_EQ(run("bpe-train --input " + path("pt.txt") + " --merges 50 -o " + path("bpe.model")), 0);
    EXPECT_EQ(read_bpe_model(read("bpe.model")).merges.size(), 50u);
    ASSERT_EQ(run("bpe-apply --model " + path("bpe.model") + " --input " + path("pt.txt") + " -o " + path("pt.bpe")), 0);
    ASSERT_EQ(run("bpe-apply --model " + path("bpe.model") + " --decode --input " + path("pt.bpe") + " -o " +
                  path("pt.dec")),
              0);
    EXPECT_EQ(read("pt.dec"), read("pt.txt"));
    EXPECT_EQ(run("bpe-train --input " + path("pt.txt") + " --merges 5 --vocab-size 9 -o " + path("x")), 2);
    EXPECT_EQ(run("bpe-apply --input " + path("pt.txt") + " -o " + path("x")), 2);
}

TEST_F(Cli, FeaturesWithSpeedPerturbationAndAux) {
    Audio a;
    for (int i = 0; i < 16000; ++i)
        a.samples.push_back(std::round(8000.0 * std::sin(2.0 * std::numbers::pi * 440.0 * i / 16000.0)));
    io::write_file(path("tone.wav"), write_wav(a));
    ASSERT_EQ(run("features --wav " + path("tone.wav") + " --out-dir " + path("f") + " --speed 0.9,1.0,1.1 --cmvn-stats " +
                  path("cmvn.txt")),
              0);
    EXPECT_EQ(read_feature_file(read("f/tone.feat")).rows(), 98u);
    EXPECT_EQ(read_feature_file(read("f/tone-sp0.9.feat")).rows(), num_frames(17778, 16000));
    EXPECT_EQ(read_feature_file(read("f/tone-sp1.1.feat")).cols(), 80u);
    EXPECT_TRUE(fs::exists(path("cmvn.txt")));

    fs::create_directories(path("pitch"));
    io::write_file(path("pitch/tone.feat"), write_feature_file(FeatureMatrix(98, 3)));
    ASSERT_EQ(run("features --wav " + path("tone.wav") + " --out-dir " + path("g") + " --aux-dir " + path("pitch") +
                  " --cmvn utterance"),
              0);
    EXPECT_EQ(read_feature_file(read("g/tone.feat")).cols(), 83u);

    io::write_file(path("pitch/tone.feat"), write_feature_file(FeatureMatrix(97, 3)));
    EXPECT_EQ(run("features --wav " + path("tone.wav") + " --out-dir " + path("h") + " --aux-dir " + path("pitch")), 1);
}
