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

// Audio I/O, label tracks and the multi-condition corpus recipe: noise mixing
// at a target SNR, noise padding around utterances, and energy-based
// endpoint labelling of clean speech.

#ifndef VADFUSE_AUDIO_H_
#define VADFUSE_AUDIO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace vadfuse {

struct Signal {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate_hz = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

// Per-frame binary speech labels (1 = speech).
struct LabelTrack {
  std::vector<std::uint8_t> labels;
  double hop_s = 0.010;

  std::size_t size() const { return labels.size(); }
};

struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const Segment &) const = default;
};

// Sorted, pairwise disjoint.
using SegmentList = std::vector<Segment>;

// 16-bit signed PCM, mono, 8 or 16 kHz. Throws Error(kFormat) naming the
// offending field otherwise.
Signal read_wav(const std::filesystem::path &path);
Signal parse_wav(const std::vector<std::uint8_t> &bytes);
void write_wav(const std::filesystem::path &path, const Signal &signal);
std::vector<std::uint8_t> encode_wav(const Signal &signal);

// Levels below the peak block energy that still count as active speech.
inline constexpr double kActiveThresholdDb = 30.0;

// RMS over 20 ms blocks whose energy lies within kActiveThresholdDb of the
// loudest block. Zero for digital silence.
double active_rms(const Signal &signal);
double rms(const std::vector<double> &samples);

struct MixResult {
  Signal mixed;
  double gain = 0.0;             // applied to the noise segment
  std::size_t noise_offset = 0;  // first noise sample used
  std::size_t clipped = 0;       // samples clipped to [-1, 1]
};

// speech + g * noise[offset, offset + len) with
// g = active_rms(speech) / (rms(noise segment) * 10^(snr_db / 20)).
MixResult mix_at_snr(const Signal &speech, const Signal &noise, double snr_db,
                     std::uint64_t seed);

// SNR of `mixed` relative to the clean `speech` it was built from, measured
// with the same active-speech rule as mix_at_snr.
double realized_snr_db(const Signal &speech, const Signal &mixed);

inline constexpr double kDefaultPadSeconds = 2.0;

struct PaddedSignal {
  Signal signal;
  double offset_s = 0.0;
};

// Prepends and appends pad_s of (already scaled) noise. The speech samples
// are copied bit-exactly into the middle.
PaddedSignal pad_with_noise(const Signal &speech, const Signal &noise,
                            double pad_s, std::uint64_t seed);

struct EndpointOptions {
  double threshold_db = kActiveThresholdDb;
  int median_width = 11;
  double gap_close_s = 0.200;
};

// Frames are centred at t * hop_s (see frame_signal). A frame is speech iff it
// has non-zero energy within threshold_db of the loudest frame; the result is
// median smoothed, interior gaps shorter than gap_close_s are filled, and
// frames at the peak energy are always speech.
LabelTrack energy_endpoint_labels(const Signal &clean, double frame_len_s,
                                  double hop_s, const EndpointOptions &opts = {});

SegmentList segments_from_labels(const LabelTrack &labels);
LabelTrack labels_from_segments(const SegmentList &segments, std::size_t n_frames,
                                double hop_s);

// Surrounds a label track with non-speech frames, e.g. after pad_with_noise.
LabelTrack pad_labels(const LabelTrack &labels, std::size_t before, std::size_t after);

// Label file: one "start_s<TAB>end_s" line per segment, 3 decimals.
void write_label_file(const std::filesystem::path &path, const SegmentList &segments);
SegmentList read_label_file(const std::filesystem::path &path);

struct ManifestRecord {
  std::filesystem::path wav;
  std::filesystem::path label;  // empty when the manifest holds "-"
  std::string condition;
};

// "wav_path<TAB>label_path<TAB>condition_tag" per line. Relative paths are
// resolved against the manifest's directory.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path &path);
void write_manifest(const std::filesystem::path &path,
                    const std::vector<ManifestRecord> &records);

}  // namespace vadfuse

#endif  // VADFUSE_AUDIO_H_
