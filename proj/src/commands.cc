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

#include "vadfuse/commands.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "vadfuse/audio.h"
#include "vadfuse/detector.h"
#include "vadfuse/evaluation.h"
#include "vadfuse/extract.h"
#include "vadfuse/feature_io.h"
#include "vadfuse/model_io.h"

namespace vadfuse::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Invocation {
  RunConfig config;
  std::string config_path;
  std::string out;
  std::string noise_dir;
  std::string model;
  std::string hyp;
  std::string manifest;
  std::vector<std::string> inputs;
  CLI::Option *theta_option = nullptr;
  std::ostream *stdout_stream = &std::cout;
};

// ---------------------------------------------------------------------------
// Option binding

void bind_config(CLI::App &app, Invocation &inv) {
  RunConfig &c = inv.config;
  auto *g = app.add_option_group("Config keys", "[section] key = value in the --config file; flags win");
  g->add_option("--frame.length_ms", c.frame_ms, "analysis frame length")->capture_default_str();
  g->add_option("--frame.hop_ms", c.hop_ms, "frame hop")->capture_default_str();
  g->add_option("--frame.nfft", c.nfft, "FFT size")->capture_default_str();
  g->add_option("--streams,--features.streams", c.streams,
                "comma-separated streams: MFCC PLP CGD SRC SADJADI NEW")
      ->capture_default_str();
  g->add_option("--features.lp_order", c.lp_order, "LP order of the source analysis")
      ->capture_default_str();
  g->add_option("--features.mel_bands", c.mel_bands, "mel filters")->capture_default_str();
  g->add_option("--features.plp_order", c.plp_order, "PLP model order")->capture_default_str();
  g->add_option("--features.cgd_rho", c.cgd_rho, "CGD evaluation radius")->capture_default_str();
  g->add_option("--pipeline.median_width", c.median_width, "median filter width (frames)")
      ->capture_default_str();
  g->add_option("--pipeline.delta_context", c.delta_context, "delta context N (frames)")
      ->capture_default_str();
  g->add_option("--model.hidden", c.hidden, "hidden units")->capture_default_str();
  g->add_option("--model.epochs", c.epochs, "maximum epochs")->capture_default_str();
  g->add_option("--model.batch_size", c.batch_size, "mini-batch size")->capture_default_str();
  g->add_option("--model.learning_rate", c.learning_rate, "SGD step")->capture_default_str();
  g->add_option("--model.momentum", c.momentum, "SGD momentum")->capture_default_str();
  g->add_option("--model.patience", c.patience, "early-stopping patience (epochs)")
      ->capture_default_str();
  g->add_option("--model.dev_fraction", c.dev_fraction, "share of each file held out for early stopping")
      ->capture_default_str();
  g->add_option("--fusion,--fusion.mode", c.fusion, "feature or decision")->capture_default_str();
  g->add_option("--rule,--fusion.rule", c.rule, "geometric or arithmetic")->capture_default_str();
  g->add_option("--fusion.smooth_before_fusion", c.smooth_before_fusion,
                "median smooth each network before merging")
      ->capture_default_str();
  inv.theta_option =
      g->add_option("--theta,--decision.theta", c.theta, "decision threshold (default: the model's)")
          ->capture_default_str();
  g->add_option("--decision.close_ms", c.close_ms, "hangover gap closing")->capture_default_str();
  g->add_option("--decision.extend_ms", c.extend_ms, "hangover run extension")->capture_default_str();
  g->add_option("--eval.mi_bins", c.mi_bins, "histogram bins for NMI")->capture_default_str();
  g->add_option("--eval.collar_s", c.collar_s, "segment boundary collar")->capture_default_str();
  g->add_option("--eval.eer", c.eer, "pooled or per-condition")->capture_default_str();
  g->add_option("--eval.objective", c.objective, "threshold tuning objective: f1 or eer")
      ->capture_default_str();
  g->add_option("--corpus.snr_db", c.snr_db, "mixing SNRs")->capture_default_str();
  g->add_option("--corpus.pad_s", c.pad_s, "noise padding on each side")->capture_default_str();
  g->add_option_function<std::uint64_t>(
      "--seed,--run.seed", [&c](const std::uint64_t &v) { c.seed = v; },
      "random seed (required by corpus and train)");
  g->add_option("--jobs,--run.jobs", c.jobs, "files processed in parallel")->capture_default_str();
}

std::optional<std::string> find_config_path(const std::vector<std::string> &args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

// Config file entries become "--key=value" arguments placed before the
// user's, skipping keys the user also passed.
std::vector<std::string> config_arguments(CLI::App &app, const std::vector<std::string> &args) {
  const auto path = find_config_path(args);
  if (!path) return {};
  std::ifstream in(*path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + *path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error &e) {
    throw Error(ErrorKind::kUsage, "config " + *path + ": " + e.what());
  }

  std::set<const CLI::Option *> given;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i].rfind("--", 0) != 0) continue;
    const std::string name = args[i].substr(0, args[i].find('='));
    if (const CLI::Option *op = app.get_option_no_throw(name)) given.insert(op);
  }

  std::vector<std::string> out;
  for (const CLI::ConfigItem &item : items) {
    if (item.name == "++" || item.name == "--") continue;
    const std::string key = item.fullname();
    const CLI::Option *op = app.get_option_no_throw("--" + key);
    if (op == nullptr || key == "config" || key == "help")
      throw Error(ErrorKind::kUsage, "config " + *path + ": unknown key '" + key + "'");
    if (given.count(op)) continue;
    for (const std::string &v : item.inputs) out.push_back("--" + key + "=" + v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Helpers

std::shared_ptr<spdlog::logger> make_logger(std::ostream &err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("vadfuse", sink);
  logger->set_pattern("[%H:%M:%S.%e] [%l] %v");
  const char *env = std::getenv("VADFUSE_LOG");
  const std::string level = env ? env : "info";
  if (level == "error")
    logger->set_level(spdlog::level::err);
  else if (level == "debug")
    logger->set_level(spdlog::level::debug);
  else
    logger->set_level(spdlog::level::info);
  return logger;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <class F>
void parallel_for(std::size_t n, int jobs, F &&fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto &t : pool) t.join();
  for (auto &e : errors)
    if (e) std::rethrow_exception(e);
}

bool looks_like_manifest(const fs::path &p) {
  const std::string ext = p.extension().string();
  return ext == ".tsv" || ext == ".txt" || ext == ".lst";
}

std::vector<ManifestRecord> collect_records(const std::vector<std::string> &inputs) {
  std::vector<ManifestRecord> records;
  for (const std::string &in : inputs) {
    if (looks_like_manifest(in)) {
      auto m = read_manifest(in);
      records.insert(records.end(), m.begin(), m.end());
    } else {
      records.push_back({in, {}, ""});
    }
  }
  if (records.empty()) throw Error(ErrorKind::kUsage, "no input files");
  return records;
}

void ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

LabelTrack reference_labels(const ManifestRecord &r, std::size_t n_frames, double hop_s) {
  if (r.label.empty())
    throw Error(ErrorKind::kData, ErrorCode::kDegenerateLabels,
                "no label file for " + r.wav.string());
  return labels_from_segments(read_label_file(r.label), n_frames, hop_s);
}

struct Loaded {
  StreamTracks features;
  std::optional<LabelTrack> labels;
};

std::vector<Loaded> load_all(const std::vector<ManifestRecord> &records,
                             const std::vector<Stream> &streams, const RunConfig &config,
                             bool need_labels, spdlog::logger &log) {
  const FeatureConfig fc = feature_config(config);
  std::vector<Loaded> out(records.size());
  parallel_for(records.size(), config.jobs, [&](std::size_t i) {
    const Signal signal = read_wav(records[i].wav);
    out[i].features = extract_streams(signal, streams, fc);
    const std::size_t n = out[i].features.begin()->second.n_frames;
    if (need_labels) out[i].labels = reference_labels(records[i], n, fc.hop_s);
  });
  log.info("extracted {} stream(s) from {} file(s)", streams.size(), records.size());
  return out;
}

std::string posterior_csv(const PosteriorTrack &p) {
  std::string s = "frame_index,posterior\n";
  for (std::size_t t = 0; t < p.size(); ++t) s += std::to_string(t) + "," + format_double(p.p[t]) + "\n";
  return s;
}

PosteriorTrack read_posterior_csv(const fs::path &path, double hop_s) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("frame_index,posterior", 0) != 0)
    throw Error(ErrorKind::kFormat, ErrorCode::kMalformedHeader,
                "malformed posterior file " + path.string() + ": header");
  PosteriorTrack p;
  p.hop_s = hop_s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double v = 0.0;
    const char *begin = line.data() + (comma == std::string::npos ? 0 : comma + 1);
    auto res = std::from_chars(begin, line.data() + line.size(), v);
    if (comma == std::string::npos || res.ec != std::errc() || !std::isfinite(v))
      throw Error(ErrorKind::kFormat, ErrorCode::kMalformedHeader,
                  "malformed posterior file " + path.string() + ": line " + line);
    p.p.push_back(v);
  }
  return p;
}

void save_system_files(const fs::path &dir, const VadSystem &system) {
  ensure_dir(dir);
  save_system(dir / "model.vadm", system);
  write_text(dir / "model.json", system_to_json(system) + "\n");
}

std::string snr_label(double snr) {
  if (snr == std::floor(snr)) return std::to_string(static_cast<long long>(snr));
  return format_double(snr);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_corpus(const Invocation &inv, spdlog::logger &log) {
  const RunConfig &c = inv.config;
  const std::uint64_t seed = require_seed(c, "corpus");
  const auto records = read_manifest(inv.manifest);
  std::vector<fs::path> noises;
  std::error_code ec;
  for (fs::directory_iterator it(inv.noise_dir, ec), end; !ec && it != end; it.increment(ec))
    if (it->path().extension() == ".wav") noises.push_back(it->path());
  if (ec) throw Error(ErrorKind::kIo, "cannot list " + inv.noise_dir + ": " + ec.message());
  if (noises.empty()) throw Error(ErrorKind::kIo, "no .wav files in " + inv.noise_dir);
  std::sort(noises.begin(), noises.end());
  std::vector<Signal> noise_signals;
  for (const auto &p : noises) noise_signals.push_back(read_wav(p));

  const fs::path out_dir = inv.out;
  ensure_dir(out_dir);
  const double hop_s = c.hop_ms / 1000.0;
  const std::size_t n_snr = c.snr_db.size();
  std::vector<ManifestRecord> produced(records.size() * n_snr);

  parallel_for(records.size(), c.jobs, [&](std::size_t i) {
    const ManifestRecord &rec = records[i];
    const Signal clean = read_wav(rec.wav);
    const SegmentList clean_segments =
        rec.label.empty()
            ? segments_from_labels(energy_endpoint_labels(clean, c.frame_ms / 1000.0, hop_s))
            : read_label_file(rec.label);
    for (std::size_t j = 0; j < n_snr; ++j) {
      std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (i * n_snr + j + 1)));
      const std::size_t k = rng() % noises.size();
      const Signal &noise = noise_signals[k];
      if (noise.sample_rate_hz != clean.sample_rate_hz)
        throw Error(ErrorKind::kFormat, ErrorCode::kUnsupportedFormat,
                    "unsupported format: sample_rate=" + std::to_string(noise.sample_rate_hz) +
                        " in " + noises[k].string() + " (speech is " +
                        std::to_string(clean.sample_rate_hz) + ")");
      const MixResult mix = mix_at_snr(clean, noise, c.snr_db[j], rng());
      if (mix.clipped > 0)
        log.warn("{}: {} sample(s) clipped at {} dB", rec.wav.string(), mix.clipped, c.snr_db[j]);
      Signal scaled = noise;
      for (double &v : scaled.samples) v *= mix.gain;
      const PaddedSignal padded = pad_with_noise(mix.mixed, scaled, c.pad_s, rng());
      SegmentList segs = clean_segments;
      for (Segment &s : segs) {
        s.start_s += padded.offset_s;
        s.end_s += padded.offset_s;
      }
      const std::string noise_name = noises[k].stem().string();
      const std::string stem = rec.wav.stem().string() + "_" + noise_name + "_snr" + snr_label(c.snr_db[j]);
      write_wav(out_dir / (stem + ".wav"), padded.signal);
      write_label_file(out_dir / (stem + ".lab"), segs);
      std::string condition = noise_name + "_" + snr_label(c.snr_db[j]) + "dB";
      produced[i * n_snr + j] = {stem + ".wav", stem + ".lab", condition};
    }
  });
  write_manifest(out_dir / "manifest.tsv", produced);
  log.info("wrote {} mixed file(s) to {}", produced.size(), out_dir.string());
  return kExitOk;
}

int cmd_extract(const Invocation &inv, spdlog::logger &log) {
  const RunConfig &c = inv.config;
  const auto records = collect_records(inv.inputs);
  const auto streams = parse_stream_list(c.streams);
  const FeatureConfig fc = feature_config(c);
  const fs::path out_dir = inv.out;
  ensure_dir(out_dir);
  parallel_for(records.size(), c.jobs, [&](std::size_t i) {
    const Signal signal = read_wav(records[i].wav);
    const auto tracks = extract_streams(signal, streams, fc);
    const std::string stem = records[i].wav.stem().string();
    for (const auto &[stream, track] : tracks)
      write_feature_file(out_dir / (stem + "." + std::string(stream_tag(stream)) + ".vadf"), track);
  });
  log.info("wrote features for {} file(s) to {}", records.size(), out_dir.string());
  return kExitOk;
}

int cmd_train(const Invocation &inv, spdlog::logger &log) {
  const RunConfig &c = inv.config;
  const SystemSpec spec = system_spec(c);
  const auto records = read_manifest(inv.manifest);
  auto loaded = load_all(records, spec.streams, c, true, log);
  std::vector<LabeledUtterance> data(loaded.size());
  for (std::size_t i = 0; i < loaded.size(); ++i)
    data[i] = {std::move(loaded[i].features), std::move(*loaded[i].labels), records[i].condition};
  loaded.clear();

  SystemTrainReport report;
  const VadSystem system = train_system(data, spec, &report);
  for (std::size_t k = 0; k < report.histories.size(); ++k) {
    const TrainHistory &h = report.histories[k];
    std::string tags;
    for (const std::string &t : system.nets[k].streams) tags += (tags.empty() ? "" : "+") + t;
    log.info("network {} ({}): best epoch {} of {}, dev loss {}", k, tags, h.best_epoch,
             h.dev_loss.size(),
             h.best_epoch > 0 ? h.dev_loss[static_cast<std::size_t>(h.best_epoch - 1)] : 0.0);
  }
  log.info("train frames {}, dev frames {}", report.train_frames, report.dev_frames);
  save_system_files(inv.out, system);
  return kExitOk;
}

double effective_theta(const Invocation &inv, const VadSystem &system) {
  return inv.theta_option && inv.theta_option->count() > 0 ? inv.config.theta : system.theta;
}

int cmd_predict(const Invocation &inv, spdlog::logger &log) {
  const RunConfig &c = inv.config;
  const VadSystem system = load_system(inv.model);
  const auto records = collect_records(inv.inputs);
  const auto streams = required_streams(system);
  const FeatureConfig fc = feature_config(c);
  DecisionOptions decision = decision_options(c);
  decision.theta = effective_theta(inv, system);
  const fs::path out_dir = inv.out;
  ensure_dir(out_dir);
  parallel_for(records.size(), c.jobs, [&](std::size_t i) {
    const Signal signal = read_wav(records[i].wav);
    const auto tracks = extract_streams(signal, streams, fc);
    const PosteriorTrack post =
        system_posteriors(system, tracks, pipeline_options(c), c.median_width);
    const std::string stem = records[i].wav.stem().string();
    write_text(out_dir / (stem + ".posterior.csv"), posterior_csv(post));
    write_label_file(out_dir / (stem + ".lab"), segments_from_labels(decide(post, decision)));
  });
  log.info("predicted {} file(s) at theta {}", records.size(), decision.theta);
  return kExitOk;
}

struct EvalUtterance {
  std::string condition;
  SegmentList hyp;
  SegmentList ref;
  std::optional<PosteriorTrack> posteriors;
  std::optional<LabelTrack> labels;
};

json metrics_json(const std::vector<const EvalUtterance *> &group, const RunConfig &c,
                  std::optional<double> eer_override) {
  std::size_t n_ref = 0, n_hyp = 0, matched = 0;
  std::vector<double> p;
  std::vector<std::uint8_t> l;
  bool have_posteriors = true;
  for (const EvalUtterance *u : group) {
    const F1Result r = f1_utterance(u->hyp, u->ref, c.collar_s);
    n_ref += r.n_ref;
    n_hyp += r.n_hyp;
    matched += r.matched;
    if (u->posteriors) {
      p.insert(p.end(), u->posteriors->p.begin(), u->posteriors->p.end());
      l.insert(l.end(), u->labels->labels.begin(), u->labels->labels.end());
    } else {
      have_posteriors = false;
    }
  }
  const F1Result f1 = f1_from_counts(n_ref, n_hyp, matched);
  json j;
  if (eer_override) {
    j["eer"] = *eer_override;
  } else if (have_posteriors) {
    try {
      j["eer"] = eer(roc(p, l));
    } catch (const Error &) {
      j["eer"] = nullptr;  // single-class condition
    }
  } else {
    j["eer"] = nullptr;
  }
  j["f1"] = f1.f1;
  j["precision"] = f1.precision;
  j["recall"] = f1.recall;
  j["segments_ref"] = n_ref;
  j["segments_hyp"] = n_hyp;
  j["segments_matched"] = matched;
  j["frames"] = p.size();
  return j;
}

int cmd_eval(const Invocation &inv, spdlog::logger &log) {
  const RunConfig &c = inv.config;
  if (inv.model.empty() == inv.hyp.empty())
    throw Error(ErrorKind::kUsage, "eval: give exactly one of --model or --hyp");
  const auto records = read_manifest(inv.manifest);
  const double hop_s = c.hop_ms / 1000.0;
  std::vector<EvalUtterance> utts(records.size());
  double theta = c.theta;

  if (!inv.model.empty()) {
    const VadSystem system = load_system(inv.model);
    theta = effective_theta(inv, system);
    DecisionOptions decision = decision_options(c);
    decision.theta = theta;
    const auto streams = required_streams(system);
    const FeatureConfig fc = feature_config(c);
    parallel_for(records.size(), c.jobs, [&](std::size_t i) {
      const Signal signal = read_wav(records[i].wav);
      const auto tracks = extract_streams(signal, streams, fc);
      PosteriorTrack post = system_posteriors(system, tracks, pipeline_options(c), c.median_width);
      EvalUtterance &u = utts[i];
      u.condition = records[i].condition;
      u.labels = reference_labels(records[i], post.size(), hop_s);
      u.ref = segments_from_labels(*u.labels);
      u.hyp = segments_from_labels(decide(post, decision));
      u.posteriors = std::move(post);
    });
  } else {
    for (std::size_t i = 0; i < records.size(); ++i) {
      EvalUtterance &u = utts[i];
      u.condition = records[i].condition;
      if (records[i].label.empty())
        throw Error(ErrorKind::kData, ErrorCode::kDegenerateLabels,
                    "no label file for " + records[i].wav.string());
      u.ref = read_label_file(records[i].label);
      const std::string stem = records[i].wav.stem().string();
      u.hyp = read_label_file(fs::path(inv.hyp) / (stem + ".lab"));
      const fs::path post_path = fs::path(inv.hyp) / (stem + ".posterior.csv");
      if (fs::exists(post_path)) {
        u.posteriors = read_posterior_csv(post_path, hop_s);
        u.labels = labels_from_segments(u.ref, u.posteriors->size(), hop_s);
      }
    }
  }

  std::map<std::string, std::vector<const EvalUtterance *>> by_condition;
  std::vector<const EvalUtterance *> all;
  for (const auto &u : utts) {
    by_condition[u.condition].push_back(&u);
    all.push_back(&u);
  }
  json report;
  report["per_condition"] = json::object();
  double eer_sum = 0.0;
  std::size_t eer_n = 0;
  for (const auto &[cond, group] : by_condition) {
    json m = metrics_json(group, c, std::nullopt);
    if (m["eer"].is_number()) {
      eer_sum += m["eer"].get<double>();
      ++eer_n;
    }
    report["per_condition"][cond.empty() ? "-" : cond] = std::move(m);
  }
  std::optional<double> overall_eer;
  if (c.eer == "per-condition" && eer_n > 0) overall_eer = eer_sum / static_cast<double>(eer_n);
  report["overall"] = metrics_json(all, c, overall_eer);
  report["theta"] = theta;
  report["eer_mode"] = c.eer;
  report["collar_s"] = c.collar_s;

  const std::string text = report.dump(2) + "\n";
  if (inv.out.empty()) {
    *inv.stdout_stream << text;
  } else {
    ensure_dir(inv.out);
    write_text(fs::path(inv.out) / "report.json", text);
  }
  log.info("overall f1 {}", report["overall"]["f1"].get<double>());
  return kExitOk;
}

int cmd_mi(const Invocation &inv, spdlog::logger &log) {
  const RunConfig &c = inv.config;
  const auto records = read_manifest(inv.manifest);
  const auto streams = parse_stream_list(c.streams);
  auto loaded = load_all(records, streams, c, true, log);
  const PipelineOptions po = pipeline_options(c);

  // Static, delta and delta-delta of each stream, all files stacked.
  std::vector<FeatureTrack> per_stream;
  std::vector<FeatureGroup> groups;
  std::vector<std::uint8_t> labels;
  std::size_t offset = 0;
  for (Stream s : streams) {
    FeatureTrack stacked;
    for (const Loaded &u : loaded) {
      const FeatureTrack one[1] = {u.features.at(s)};
      const FeatureTrack x = assemble_raw(one, po);
      if (stacked.dim == 0) stacked = FeatureTrack(0, x.dim, x.hop_s, std::string(stream_tag(s)));
      stacked.values.insert(stacked.values.end(), x.values.begin(), x.values.end());
      stacked.n_frames += x.n_frames;
    }
    const std::size_t dim = stream_dim(s);
    if (dim == kFilterCoeffs && (s == Stream::kMfcc || s == Stream::kPlp || s == Stream::kCgd)) {
      groups.push_back({std::string(stream_tag(s)), offset, dim, dim});
    } else {
      const auto names = stream_column_names(s);
      for (std::size_t i = 0; i < dim; ++i) groups.push_back({names[i], offset + i, 1, dim});
    }
    offset += stacked.dim;
    per_stream.push_back(std::move(stacked));
  }
  for (const Loaded &u : loaded) labels.insert(labels.end(), u.labels->labels.begin(), u.labels->labels.end());
  loaded.clear();

  const FeatureTrack assembled = concat_tracks(per_stream);
  const MiReport report = nmi_grouped(assembled, groups, labels, c.mi_bins);
  std::string csv = "feature,scope,nmi\n";
  for (const MiEntry &e : report.entries) csv += e.feature + "," + e.scope + "," + format_double(e.nmi) + "\n";
  if (inv.out.empty()) {
    *inv.stdout_stream << csv;
  } else {
    ensure_dir(inv.out);
    write_text(fs::path(inv.out) / "mi.csv", csv);
  }
  log.info("NMI over {} frames, {} columns", labels.size(), assembled.dim);
  return kExitOk;
}

int cmd_tune(const Invocation &inv, spdlog::logger &log) {
  const RunConfig &c = inv.config;
  VadSystem system = load_system(inv.model);
  const auto records = read_manifest(inv.manifest);
  const auto streams = required_streams(system);
  const FeatureConfig fc = feature_config(c);
  std::vector<Utterance> dev(records.size());
  parallel_for(records.size(), c.jobs, [&](std::size_t i) {
    const Signal signal = read_wav(records[i].wav);
    const auto tracks = extract_streams(signal, streams, fc);
    dev[i].posteriors = system_posteriors(system, tracks, pipeline_options(c), c.median_width);
    dev[i].labels = reference_labels(records[i], dev[i].posteriors.size(), fc.hop_s);
  });
  system.theta = tune_threshold(dev, tune_objective(c), tune_options(c));
  save_system_files(inv.out, system);
  *inv.stdout_stream << "theta " << format_double(system.theta) << "\n";
  log.info("tuned theta {} ({} objective)", system.theta, c.objective);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// App assembly

struct AppState {
  std::unique_ptr<CLI::App> app;
  Invocation inv;
  std::map<std::string, int (*)(const Invocation &, spdlog::logger &)> commands;
};

std::unique_ptr<AppState> build_app() {
  auto st = std::make_unique<AppState>();
  st->app = std::make_unique<CLI::App>("Voice activity detection with source and filter features", "vadfuse");
  CLI::App &app = *st->app;
  Invocation &inv = st->inv;
  app.option_defaults()->always_capture_default();
  app.add_option("--config", inv.config_path, "TOML-style config file");
  bind_config(app, inv);

  auto add = [&](const char *name, const char *desc, auto fn) {
    CLI::App *sub = app.add_subcommand(name, desc);
    sub->fallthrough();
    st->commands[name] = fn;
    return sub;
  };
  auto *corpus = add("corpus", "mix clean speech with noise at each SNR", cmd_corpus);
  corpus->add_option("manifest", inv.manifest, "clean-speech manifest")->required();
  corpus->add_option("--noise-dir", inv.noise_dir, "directory of noise WAVs")->required();
  corpus->add_option("--out", inv.out, "output directory")->required();

  auto *extract = add("extract", "write per-stream feature matrices", cmd_extract);
  extract->add_option("inputs", inv.inputs, "WAV files or manifests")->required();
  extract->add_option("--out", inv.out, "output directory")->required();

  auto *train_cmd = add("train", "train a detector", cmd_train);
  train_cmd->add_option("manifest", inv.manifest, "labelled training manifest")->required();
  train_cmd->add_option("--out", inv.out, "output directory (model.vadm, model.json)")->required();

  auto *predict = add("predict", "posteriors and segments for each input", cmd_predict);
  predict->add_option("model", inv.model, "model.vadm")->required();
  predict->add_option("inputs", inv.inputs, "WAV files or manifests")->required();
  predict->add_option("--out", inv.out, "output directory")->required();

  auto *eval_cmd = add("eval", "EER and segment F1 against reference labels", cmd_eval);
  eval_cmd->add_option("manifest", inv.manifest, "labelled test manifest")->required();
  eval_cmd->add_option("--model", inv.model, "score a model");
  eval_cmd->add_option("--hyp", inv.hyp, "directory of <stem>.lab (and <stem>.posterior.csv)");
  eval_cmd->add_option("--out", inv.out, "directory for report.json (default: stdout)");

  auto *mi = add("mi", "normalized mutual information per feature", cmd_mi);
  mi->add_option("manifest", inv.manifest, "labelled manifest")->required();
  mi->add_option("--out", inv.out, "directory for mi.csv (default: stdout)");

  auto *tune = add("tune", "pick the decision threshold on dev data", cmd_tune);
  tune->add_option("model", inv.model, "model.vadm")->required();
  tune->add_option("manifest", inv.manifest, "labelled dev manifest")->required();
  tune->add_option("--out", inv.out, "output directory for the tuned model")->required();

  app.require_subcommand(0, 1);
  return st;
}

// Parses args (config file first, flags after). Returns false if help was
// printed.
bool parse(AppState &st, const std::vector<std::string> &args, std::ostream &out) {
  std::vector<std::string> full{args.empty() ? std::string("vadfuse") : args[0]};
  const auto from_config = config_arguments(*st.app, args);
  full.insert(full.end(), from_config.begin(), from_config.end());
  full.insert(full.end(), args.begin() + (args.empty() ? 0 : 1), args.end());
  std::vector<std::string> reversed(full.rbegin(), full.rend() - 1);
  try {
    st.app->parse(std::move(reversed));
  } catch (const CLI::CallForHelp &) {
    out << st.app->help();
    return false;
  } catch (const CLI::CallForAllHelp &) {
    out << st.app->help("", CLI::AppFormatMode::All);
    return false;
  } catch (const CLI::ParseError &e) {
    throw Error(ErrorKind::kUsage, e.what());
  }
  validate(st.inv.config);
  return true;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return kExitUsage;
    case ErrorKind::kIo: return kExitIo;
    case ErrorKind::kFormat:
    case ErrorKind::kData: return kExitData;
    case ErrorKind::kNumeric: return kExitNumeric;
  }
  return kExitData;
}

RunConfig parse_run_config(const std::vector<std::string> &args) {
  auto st = build_app();
  std::ostringstream sink;
  parse(*st, args, sink);
  return st->inv.config;
}

std::string help_text() { return build_app()->app->help(); }

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  auto logger = make_logger(err);
  try {
    auto st = build_app();
    st->inv.stdout_stream = &out;
    if (!parse(*st, args, out)) return kExitOk;
    const auto subs = st->app->get_subcommands();
    if (subs.empty()) {
      out << st->app->help();
      return kExitUsage;
    }
    const std::string name = subs.front()->get_name();
    logger->debug("running {}", name);
    return st->commands.at(name)(st->inv, *logger);
  } catch (const Error &e) {
    logger->error("{}", e.what());
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error &e) {
    logger->error("i/o: {}", e.what());
    return kExitIo;
  } catch (const std::exception &e) {
    logger->error("internal: {}", e.what());
    return kExitNumeric;
  }
}

}  // namespace vadfuse::cli
