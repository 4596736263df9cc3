// Copyright 2026 The vadfuse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "nlohmann/json.hpp"
#include "support/synth.h"
#include "vadfuse/audio.h"
#include "vadfuse/commands.h"
#include "vadfuse/config.h"
#include "vadfuse/detector.h"
#include "vadfuse/feature_io.h"

using namespace vadfuse;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &name)
      : path(fs::temp_directory_path() / ("vadfuse_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result vadfuse_run(std::vector<std::string> args) {
  args.insert(args.begin(), "vadfuse");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

int run_binary(const std::string &args) {
  const std::string cmd = std::string(VADFUSE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const fs::path &p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

// Two labelled 10 s utterances plus two noise files.
struct Workspace {
  TempDir dir{"cli"};
  fs::path clean_manifest, noise_dir;

  Workspace() {
    const fs::path clean = dir.path / "clean";
    noise_dir = dir.path / "noise";
    fs::create_directories(clean);
    fs::create_directories(noise_dir);
    std::vector<ManifestRecord> recs;
    for (int i = 0; i < 2; ++i) {
      const auto sp = synth::speech(10.0, 100 + i);
      const std::string stem = "utt" + std::to_string(i);
      write_wav(clean / (stem + ".wav"), sp.signal);
      write_label_file(clean / (stem + ".lab"), sp.segments);
      recs.push_back({stem + ".wav", stem + ".lab", "clean"});
    }
    clean_manifest = clean / "manifest.tsv";
    write_manifest(clean_manifest, recs);
    write_wav(noise_dir / "white.wav", synth::noise(synth::NoiseKind::kWhite, 16000 * 30, 1));
    write_wav(noise_dir / "babble.wav", synth::noise(synth::NoiseKind::kBabble, 16000 * 30, 2));
  }
};

std::vector<LabeledUtterance> synthetic_features(std::size_t n_utts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LabeledUtterance> out;
  for (std::size_t u = 0; u < n_utts; ++u) {
    LabeledUtterance lu;
    const std::size_t n = 300;
    lu.labels.labels.resize(n);
    for (std::size_t t = 0; t < n; ++t) lu.labels.labels[t] = (t / 50) % 2;
    for (Stream s : {Stream::kMfcc, Stream::kSadjadi, Stream::kNew}) {
      FeatureTrack tr(n, stream_dim(s), 0.010, std::string(stream_tag(s)));
      for (std::size_t t = 0; t < n; ++t)
        for (std::size_t d = 0; d < tr.dim; ++d)
          tr.at(t, d) = synth::gaussian(rng) + (lu.labels.labels[t] ? 1.0 : -1.0);
      lu.features[s] = std::move(tr);
    }
    lu.condition = "c" + std::to_string(u % 2);
    out.push_back(std::move(lu));
  }
  return out;
}

}  // namespace

TEST_CASE("system training and scoring") {
  const auto data = synthetic_features(6, 1);
  SystemSpec spec;
  spec.train.epochs = 5;
  spec.train.seed = 9;
  SystemTrainReport report;
  const VadSystem dec = train_system(data, spec, &report);
  REQUIRE(dec.nets.size() == 3);
  CHECK(dec.nets[0].streams == std::vector<std::string>{"MFCC"});
  CHECK(dec.nets[0].in_dim == 39);
  CHECK(dec.nets[1].in_dim == 3 * stream_dim(Stream::kSadjadi));
  CHECK(report.histories.size() == 3);
  CHECK(report.dev_frames == 90);  // ceil(0.05 * 300) = 15 frames from each of 6 files
  CHECK(report.train_frames == 1710);
  CHECK(train_system(data, spec) == dec);

  const auto post = system_posteriors(dec, data[0].features);
  CHECK(post.size() == 300);
  for (double p : post.p) CHECK((p > 0.0 && p < 1.0));
  // Separable features: the detector should mostly agree with the labels.
  std::size_t agree = 0;
  for (std::size_t t = 0; t < 300; ++t) agree += (post.p[t] >= 0.5) == (data[0].labels.labels[t] == 1);
  CHECK(agree > 240);

  spec.mode = FusionMode::kFeature;
  const VadSystem feat = train_system(data, spec);
  REQUIRE(feat.nets.size() == 1);
  CHECK(feat.nets[0].in_dim == 3 * (13 + stream_dim(Stream::kSadjadi) + stream_dim(Stream::kNew)));
  CHECK(required_streams(feat) == spec.streams);

  // Smoothing order: a single network is never fused.
  VadSystem single = dec;
  single.nets.resize(1);
  single.smooth_before_fusion = true;
  const auto a = system_posteriors(single, data[1].features);
  single.smooth_before_fusion = false;
  CHECK(system_posteriors(single, data[1].features).p == a.p);
  auto raw = network_posteriors(dec, data[1].features);
  VadSystem before = dec;
  before.smooth_before_fusion = true;
  std::vector<PosteriorTrack> smoothed;
  for (const auto &t : raw) smoothed.push_back(smooth_posteriors(t));
  CHECK(system_posteriors(before, data[1].features).p == fuse_posteriors(smoothed).p);
  CHECK(system_posteriors(dec, data[1].features).p == smooth_posteriors(fuse_posteriors(raw)).p);

  auto broken = data;
  broken[2].labels.labels.pop_back();
  bool threw = false;
  try {
    train_system(broken, spec);
  } catch (const Error &e) {
    threw = e.code() == ErrorCode::kLengthMismatch;
  }
  CHECK(threw);
}

TEST_CASE("cli help and config") {
  const auto help = vadfuse_run({"--help"});
  CHECK(help.code == 0);
  for (const char *key :
       {"--frame.length_ms", "--frame.hop_ms", "--frame.nfft", "--features.streams", "--features.lp_order",
        "--features.mel_bands", "--features.plp_order", "--features.cgd_rho", "--pipeline.median_width",
        "--pipeline.delta_context", "--model.hidden", "--model.epochs", "--model.batch_size",
        "--model.learning_rate", "--model.momentum", "--model.patience", "--model.dev_fraction",
        "--fusion.mode", "--fusion.rule", "--fusion.smooth_before_fusion", "--decision.theta",
        "--decision.close_ms", "--decision.extend_ms", "--eval.mi_bins", "--eval.collar_s", "--eval.eer",
        "--eval.objective", "--corpus.snr_db", "--corpus.pad_s", "--run.seed", "--run.jobs"}) {
    CAPTURE(key);
    CHECK(help.out.find(key) != std::string::npos);
  }
  CHECK(help.out.find("MFCC,SADJADI,NEW") != std::string::npos);
  CHECK(help.out.find("600") != std::string::npos);

  TempDir dir("config");
  const fs::path cfg = dir.path / "run.toml";
  std::ofstream(cfg) << "[model]\nhidden = 16\nepochs = 7\n[fusion]\nrule = \"arithmetic\"\n[run]\nseed = 42\n";
  const RunConfig c = cli::parse_run_config({"vadfuse", "--config", cfg.string(), "--model.epochs", "9"});
  CHECK(c.hidden == 16);
  CHECK(c.epochs == 9);  // flags win
  CHECK(c.rule == "arithmetic");
  REQUIRE(c.seed.has_value());
  CHECK(*c.seed == 42);

  const RunConfig d = cli::parse_run_config({"vadfuse"});
  CHECK(d.hidden == 32);
  CHECK(d.median_width == 11);
  CHECK(d.delta_context == 10);
  CHECK(d.close_ms == 600.0);
  CHECK(d.extend_ms == 200.0);
  CHECK(d.snr_db == std::vector<double>{0.0, 10.0});
  CHECK_FALSE(d.seed.has_value());

  std::ofstream(dir.path / "bad.toml") << "[model]\nhiden = 16\n";
  const auto bad = vadfuse_run({"--config", (dir.path / "bad.toml").string(), "mi", "x.tsv"});
  CHECK(bad.code == cli::kExitUsage);
  CHECK(bad.err.find("hiden") != std::string::npos);

  CHECK(vadfuse_run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(vadfuse_run({"extract", "--bogus", "a.wav", "--out", "x"}).code == cli::kExitUsage);
  CHECK(vadfuse_run({"--fusion", "late", "extract", "a.wav", "--out", "x"}).code == cli::kExitUsage);
  CHECK(cli::exit_code_for(ErrorKind::kIo) == 2);
  CHECK(cli::exit_code_for(ErrorKind::kFormat) == 3);
  CHECK(cli::exit_code_for(ErrorKind::kData) == 3);
  CHECK(cli::exit_code_for(ErrorKind::kNumeric) == 4);
}

TEST_CASE("cli end to end") {
  Workspace ws;
  const fs::path root = ws.dir.path;

  SUBCASE("corpus") {
    CHECK(vadfuse_run({"corpus", ws.clean_manifest.string(), "--noise-dir", ws.noise_dir.string(),
                       "--out", (root / "c0").string()})
              .code == cli::kExitUsage);  // seed is mandatory
    for (const char *d : {"c1", "c2"})
      REQUIRE(vadfuse_run({"corpus", ws.clean_manifest.string(), "--noise-dir", ws.noise_dir.string(),
                           "--out", (root / d).string(), "--seed", "5"})
                  .code == 0);
    CHECK(count_lines(root / "c1" / "manifest.tsv") == 4);
    CHECK(slurp(root / "c1" / "manifest.tsv") == slurp(root / "c2" / "manifest.tsv"));
    const auto recs = read_manifest(root / "c1" / "manifest.tsv");
    for (const auto &r : recs) {
      CHECK(slurp(r.wav) == slurp(root / "c2" / r.wav.filename()));
      const Signal s = read_wav(r.wav);
      CHECK(s.duration_s() == doctest::Approx(14.0).epsilon(1e-3));  // 10 s plus 2 s each side
      CHECK((r.condition.find("_0dB") != std::string::npos || r.condition.find("_10dB") != std::string::npos));
    }
    // Labels are shifted by the padding.
    const auto clean_segs = read_label_file(ws.clean_manifest.parent_path() / "utt0.lab");
    const auto mixed_segs = read_label_file(recs[0].label);
    REQUIRE(clean_segs.size() == mixed_segs.size());
    CHECK(mixed_segs[0].start_s == doctest::Approx(clean_segs[0].start_s + 2.0).epsilon(1e-3));
  }

  SUBCASE("extract") {
    const fs::path wav = ws.clean_manifest.parent_path() / "utt0.wav";
    REQUIRE(vadfuse_run({"extract", wav.string(), "--streams", "MFCC,SRC", "--out", (root / "f").string()})
                .code == 0);
    for (const char *tag : {"MFCC", "SRC"}) {
      const auto t = read_feature_file(root / "f" / (std::string("utt0.") + tag + ".vadf"));
      CHECK(t.n_frames >= 999);
      CHECK(t.n_frames <= 1001);
    }
    CHECK(std::distance(fs::directory_iterator(root / "f"), fs::directory_iterator{}) == 2);
  }

  SUBCASE("train, predict, eval, tune, mi") {
    const std::string m = ws.clean_manifest.string();
    const std::vector<std::string> quick = {"--model.epochs", "3", "--seed", "11"};
    auto with = [&](std::vector<std::string> a) {
      a.insert(a.end(), quick.begin(), quick.end());
      return vadfuse_run(a);
    };
    REQUIRE(with({"train", m, "--out", (root / "model").string()}).code == 0);
    REQUIRE(fs::exists(root / "model" / "model.vadm"));
    const auto js = nlohmann::json::parse(slurp(root / "model" / "model.json"));
    CHECK(js["nets"].size() == 3);
    CHECK(js["fusion_mode"] == "decision");

    const fs::path model = root / "model" / "model.vadm";
    const fs::path wav = ws.clean_manifest.parent_path() / "utt1.wav";
    REQUIRE(vadfuse_run({"predict", model.string(), wav.string(), "--out", (root / "pred").string()}).code == 0);
    CHECK(std::distance(fs::directory_iterator(root / "pred"), fs::directory_iterator{}) == 2);
    CHECK(count_lines(root / "pred" / "utt1.posterior.csv") == 1001);
    CHECK(slurp(root / "pred" / "utt1.posterior.csv").rfind("frame_index,posterior\n", 0) == 0);
    REQUIRE(fs::exists(root / "pred" / "utt1.lab"));

    // Same inputs, same seed: byte-identical model; --jobs does not change outputs.
    REQUIRE(with({"train", m, "--out", (root / "model2").string(), "--jobs", "2"}).code == 0);
    CHECK(slurp(model) == slurp(root / "model2" / "model.vadm"));

    // Hypothesis equal to the reference.
    fs::create_directories(root / "hyp");
    for (const char *s : {"utt0", "utt1"})
      fs::copy_file(ws.clean_manifest.parent_path() / (std::string(s) + ".lab"), root / "hyp" / (std::string(s) + ".lab"));
    const auto ev = vadfuse_run({"eval", m, "--hyp", (root / "hyp").string()});
    REQUIRE(ev.code == 0);
    const auto rep = nlohmann::json::parse(ev.out);
    CHECK(rep["overall"]["f1"].get<double>() == 1.0);
    CHECK(rep["per_condition"].contains("clean"));
    CHECK(rep["collar_s"].get<double>() == 0.2);

    const auto evm = vadfuse_run({"eval", m, "--model", model.string(), "--out", (root / "ev").string()});
    REQUIRE(evm.code == 0);
    const auto rep2 = nlohmann::json::parse(slurp(root / "ev" / "report.json"));
    CHECK(rep2["overall"]["eer"].is_number());
    CHECK(rep2["theta"].get<double>() == 0.5);

    const auto tu = vadfuse_run({"tune", model.string(), m, "--out", (root / "tuned").string()});
    REQUIRE(tu.code == 0);
    CHECK(tu.out.rfind("theta ", 0) == 0);
    const double theta = std::stod(tu.out.substr(6));
    CHECK(load_system(root / "tuned" / "model.vadm").theta == theta);

    const auto mi = vadfuse_run({"mi", m, "--streams", "MFCC,NEW"});
    REQUIRE(mi.code == 0);
    CHECK(mi.out.rfind("feature,scope,nmi\n", 0) == 0);
    CHECK(mi.out.find("MFCC,all,") != std::string::npos);
    // One MFCC group plus one group per NEW column, four rows each.
    std::size_t rows = 0;
    for (char ch : mi.out) rows += ch == '\n';
    CHECK(rows == 1 + 4 * (1 + stream_dim(Stream::kNew)));
  }

  SUBCASE("exit codes of the binary") {
    CHECK(run_binary("--help") == 0);
    CHECK(run_binary("") == cli::kExitUsage);
    CHECK(run_binary("nosuchcommand") == cli::kExitUsage);
    CHECK(run_binary("extract /nonexistent/a.wav --out " + (root / "x").string()) == cli::kExitIo);
    std::ofstream(root / "junk.wav") << "definitely not a wav file";
    CHECK(run_binary("extract " + (root / "junk.wav").string() + " --out " + (root / "x").string()) ==
          cli::kExitData);
    std::ofstream(root / "junk.vadm") << "VADM but broken";
    CHECK(run_binary("predict " + (root / "junk.vadm").string() + " a.wav --out " + (root / "x").string()) ==
          cli::kExitData);
    CHECK(run_binary("train " + ws.clean_manifest.string() + " --out " + (root / "x").string()) ==
          cli::kExitUsage);  // no seed
  }
}
