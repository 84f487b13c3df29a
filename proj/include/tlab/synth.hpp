// Copyright 2026 The tlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Deterministic telephony-like synthetic corpus. Speech: each token emits a
// fixed unit-norm prototype (pairwise distinct, confined to the first F-1
// feature axes) for frames_per_token +- jitter frames under a per-speaker
// affine transform, plus white Gaussian noise. Non-speech gaps: a low
// amplitude "hum" along the remaining axis (exactly orthogonal to every
// token prototype) plus AR(1) correlated noise. Speaker turns of a few
// consecutive segments alternate within a recording.

#ifndef TLAB_SYNTH_HPP_
#define TLAB_SYNTH_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tlab/corpus_io.hpp"
#include "tlab/errors.hpp"
#include "tlab/rng.hpp"
#include "tlab/segmenter.hpp"
#include "tlab/vocab.hpp"

namespace tlab {

struct SynthConfig {
  std::uint64_t seed = 1234;
  int vocab_size = 12;       // V
  int feat_dim = 8;          // F
  double frame_rate = 20.0;  // frames per second
  int frames_per_token = 8;
  int frames_per_token_jitter = 2;
  double gap_min_s = 0.5;
  double gap_max_s = 4.0;
  int segment_len_tokens_min = 2;
  int segment_len_tokens_max = 8;
  int segments_per_recording = 40;
  int speakers_per_recording = 2;
  double noise_std = 0.3;
  int n_train_recordings = 12;
  int n_test_recordings = 12;

  // Speaker transform and gap process.
  double speaker_gain_min = 0.7;
  double speaker_gain_max = 1.3;
  double speaker_offset_std = 0.1;
  double gap_level = 0.05;       // hum amplitude; gaps are nearly silent
  double gap_ar = 0.9;           // AR(1) coefficient of the gap noise
  double gap_noise_std = 0.02;   // AR(1) innovation std
  int turn_len_min = 1;          // consecutive segments per speaker turn
  int turn_len_max = 6;
  // Annotated spans extend a little into the surrounding non-speech, the
  // way human segment boundaries do; raw training examples therefore carry
  // a minimum amount of gap audio.
  double pad_min_s = 0.15;
  double pad_max_s = 0.3;
  // Short mid-utterance pauses between words (same non-speech process as
  // the gaps), so non-speech audio occurs at arbitrary label positions.
  double intra_gap_prob = 0.15;
  double intra_gap_min_s = 0.1;
  double intra_gap_max_s = 0.3;

  void validate() const {
    if (vocab_size < 2) throw ConfigError("synth: vocab_size must be >= 2");
    if (feat_dim < 2 || frame_rate <= 0 || frames_per_token < 1 ||
        frames_per_token_jitter < 0 || frames_per_token_jitter >= frames_per_token ||
        gap_min_s <= 0 || gap_max_s < gap_min_s || segment_len_tokens_min < 1 ||
        segment_len_tokens_max < segment_len_tokens_min || segments_per_recording < 1 ||
        speakers_per_recording < 1 || noise_std < 0 || n_train_recordings < 0 ||
        n_test_recordings < 0 || turn_len_min < 1 || turn_len_max < turn_len_min ||
        pad_min_s < 0 || pad_max_s < pad_min_s || intra_gap_prob < 0 || intra_gap_prob > 1 ||
        intra_gap_min_s < 0 || intra_gap_max_s < intra_gap_min_s)
      throw ConfigError("synth: config values must be positive and ordered");
  }
};

struct SpeakerTransform {
  double gain = 1.0;
  Vector offset;
};

struct TokenSpan {
  int token = 0;
  long start_frame = 0;
  long n_frames = 0;
};

struct RecordingTruth {
  std::string id;
  long total_frames = 0;
  long gap_frames = 0;
  std::vector<TokenSpan> spans;
  std::vector<SpeakerTransform> speakers;
  std::vector<int> segment_speaker;  // speaker index per segment
};

struct CorpusTruth {
  Matrix prototypes;  // V x F, row k-1 for token k
  Vector hum;         // F
  std::vector<RecordingTruth> recordings;
};

struct CorpusPaths {
  std::string train_manifest;
  std::string test_manifest;
  std::string test_longform_manifest;
};

struct GeneratedCorpus {
  CorpusPaths paths;
  std::vector<SegmentAnnotation> train_rows;
  std::vector<SegmentAnnotation> test_rows;
  std::vector<SegmentAnnotation> test_longform_rows;
  CorpusTruth truth;
};

namespace detail {

inline Matrix make_prototypes(const SynthConfig& cfg, std::mt19937_64& rng) {
  // Unit vectors in the first F-1 axes so the hum axis stays orthogonal.
  const int sub = cfg.feat_dim - 1;
  Matrix protos(cfg.vocab_size, cfg.feat_dim);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int k = 0; k < cfg.vocab_size; ++k) {
    while (true) {
      Vector v(cfg.feat_dim, 0.0);
      double norm2 = 0.0;
      for (int d = 0; d < sub; ++d) {
        v[d] = gauss(rng);
        norm2 += v[d] * v[d];
      }
      if (norm2 < 1e-12) continue;
      const double inv = 1.0 / std::sqrt(norm2);
      for (int d = 0; d < sub; ++d) v[d] *= inv;
      bool distinct = true;
      for (int j = 0; j < k && distinct; ++j) {
        double dot = 0.0;
        for (int d = 0; d < sub; ++d) dot += v[d] * protos.at(j, d);
        if (dot > 0.98) distinct = false;
      }
      if (!distinct) continue;
      for (int d = 0; d < cfg.feat_dim; ++d) protos.at(k, d) = v[d];
      break;
    }
  }
  return protos;
}

struct RecordingBuild {
  Matrix features;
  std::vector<SegmentAnnotation> rows;
  RecordingTruth truth;
};

inline RecordingBuild generate_recording(const SynthConfig& cfg, const CorpusTruth& truth,
                                         const std::string& rec_id,
                                         std::uint64_t stream_index) {
  auto rng = make_rng(cfg.seed, stream_index);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> seg_len(cfg.segment_len_tokens_min,
                                             cfg.segment_len_tokens_max);
  std::uniform_int_distribution<int> token_dist(1, cfg.vocab_size);
  std::uniform_int_distribution<int> tok_frames(cfg.frames_per_token - cfg.frames_per_token_jitter,
                                                cfg.frames_per_token + cfg.frames_per_token_jitter);
  std::uniform_real_distribution<double> gap_dist(cfg.gap_min_s, cfg.gap_max_s);
  std::uniform_int_distribution<int> turn_dist(cfg.turn_len_min, cfg.turn_len_max);

  RecordingBuild out;
  out.truth.id = rec_id;
  for (int s = 0; s < cfg.speakers_per_recording; ++s) {
    SpeakerTransform tr;
    tr.gain = cfg.speaker_gain_min + (cfg.speaker_gain_max - cfg.speaker_gain_min) * unit(rng);
    tr.offset.resize(cfg.feat_dim);
    for (double& o : tr.offset) o = cfg.speaker_offset_std * gauss(rng);
    out.truth.speakers.push_back(std::move(tr));
  }

  // Plan segments first: tokens, per-token frame counts, speakers, gaps,
  // annotation padding into the adjacent gaps.
  struct SegPlan {
    std::vector<int> tokens;
    std::vector<int> frames;
    std::vector<long> pause_after;  // mid-utterance pause following token i
    int speaker = 0;
    long gap_before = 0;  // frames
    long pad_before = 0;
    long pad_after = 0;
  };
  std::uniform_real_distribution<double> pad_dist(cfg.pad_min_s, cfg.pad_max_s);
  std::uniform_real_distribution<double> intra_dist(cfg.intra_gap_min_s, cfg.intra_gap_max_s);
  std::vector<SegPlan> plan(cfg.segments_per_recording);
  int speaker = 0;
  int prev_token = 0;
  int turn_left = turn_dist(rng);
  for (auto& seg : plan) {
    if (turn_left == 0) {
      speaker = (speaker + 1) % cfg.speakers_per_recording;
      turn_left = turn_dist(rng);
    }
    --turn_left;
    seg.speaker = speaker;
    const int n_tokens = seg_len(rng);
    for (int i = 0; i < n_tokens; ++i) {
      // No immediate repetition, across segment boundaries included;
      // adjacent duplicate words would silently merge in any decode.
      int token = token_dist(rng);
      while (token == prev_token) token = token_dist(rng);
      prev_token = token;
      seg.tokens.push_back(token);
      seg.frames.push_back(tok_frames(rng));
      const bool pause = (i + 1 < n_tokens) && unit(rng) < cfg.intra_gap_prob;
      seg.pause_after.push_back(pause ? std::lround(intra_dist(rng) * cfg.frame_rate) : 0);
    }
    seg.gap_before = std::lround(gap_dist(rng) * cfg.frame_rate);
    seg.pad_before = std::lround(pad_dist(rng) * cfg.frame_rate);
    seg.pad_after = std::lround(pad_dist(rng) * cfg.frame_rate);
  }
  const long trailing_gap = std::lround(gap_dist(rng) * cfg.frame_rate);
  // Clamp pads to half the adjacent gap so neighboring annotations never
  // overlap.
  for (std::size_t s = 0; s < plan.size(); ++s) {
    plan[s].pad_before = std::min(plan[s].pad_before, plan[s].gap_before / 2);
    const long gap_after = (s + 1 < plan.size()) ? plan[s + 1].gap_before : trailing_gap;
    plan[s].pad_after = std::min(plan[s].pad_after, gap_after / 2);
  }

  long total_frames = 0;
  for (const auto& seg : plan) {
    total_frames += seg.gap_before;
    for (int f : seg.frames) total_frames += f;
    for (long p : seg.pause_after) total_frames += p;
  }
  total_frames += trailing_gap;

  out.features = Matrix(static_cast<int>(total_frames), cfg.feat_dim);
  out.truth.total_frames = total_frames;

  long cursor = 0;
  Vector gap_state(cfg.feat_dim, 0.0);
  auto emit_gap = [&](long n) {
    for (long i = 0; i < n; ++i) {
      double* row = out.features.row(static_cast<int>(cursor));
      for (int d = 0; d < cfg.feat_dim; ++d) {
        gap_state[d] = cfg.gap_ar * gap_state[d] + cfg.gap_noise_std * gauss(rng);
        row[d] = cfg.gap_level * truth.hum[d] + gap_state[d];
      }
      ++cursor;
    }
    out.truth.gap_frames += n;
  };

  for (std::size_t s = 0; s < plan.size(); ++s) {
    const SegPlan& seg = plan[s];
    emit_gap(seg.gap_before);
    const SpeakerTransform& tr = out.truth.speakers[seg.speaker];
    const long seg_start = cursor;
    std::vector<std::string> words;
    for (std::size_t i = 0; i < seg.tokens.size(); ++i) {
      const int token = seg.tokens[i];
      out.truth.spans.push_back(TokenSpan{token, cursor, seg.frames[i]});
      const double* proto = truth.prototypes.row(token - 1);
      for (int f = 0; f < seg.frames[i]; ++f) {
        double* row = out.features.row(static_cast<int>(cursor));
        for (int d = 0; d < cfg.feat_dim; ++d)
          row[d] = tr.gain * proto[d] + tr.offset[d] + cfg.noise_std * gauss(rng);
        ++cursor;
      }
      words.push_back(token_to_word(token));
      emit_gap(seg.pause_after[i]);
    }
    const long seg_end = cursor;
    out.truth.segment_speaker.push_back(seg.speaker);

    SegmentAnnotation a;
    a.recording_id = rec_id;
    a.speaker_id = rec_id + "_s" + std::to_string(seg.speaker);
    a.start_s = static_cast<double>(seg_start - seg.pad_before) / cfg.frame_rate;
    a.end_s = static_cast<double>(seg_end + seg.pad_after) / cfg.frame_rate;
    a.text = join_words(words);
    a.features_path = "features/" + rec_id + ".feat";
    out.rows.push_back(std::move(a));
  }
  emit_gap(trailing_gap);
  return out;
}

}  // namespace detail

// Generates the corpus under out_dir: train.jsonl, test.jsonl,
// test_longform.jsonl (one row per test recording, full span) and
// features/<recording>.feat. Deterministic given the seed; per-recording
// streams are independent.
inline GeneratedCorpus generate_corpus(const SynthConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "features", ec);
  if (ec) throw IoError("cannot create corpus directory " + out_dir + ": " + ec.message());

  GeneratedCorpus corpus;
  auto proto_rng = make_rng(cfg.seed, 0x70726f746fULL);  // prototype stream
  corpus.truth.prototypes = detail::make_prototypes(cfg, proto_rng);
  corpus.truth.hum.assign(cfg.feat_dim, 0.0);
  corpus.truth.hum[cfg.feat_dim - 1] = 1.0;

  auto build_split = [&](int count, const std::string& prefix, std::uint64_t stream_base,
                         std::vector<SegmentAnnotation>& rows) {
    for (int r = 0; r < count; ++r) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%s%04d", prefix.c_str(), r);
      const std::string rec_id(buf);
      detail::RecordingBuild rec =
          detail::generate_recording(cfg, corpus.truth, rec_id, stream_base + r);
      write_features((fs::path(out_dir) / "features" / (rec_id + ".feat")).string(),
                     rec.features);
      for (auto& row : rec.rows) rows.push_back(std::move(row));
      corpus.truth.recordings.push_back(std::move(rec.truth));
    }
  };
  build_split(cfg.n_train_recordings, "train", 1, corpus.train_rows);
  build_split(cfg.n_test_recordings, "test", 1000001, corpus.test_rows);

  for (const MergedUtterance& m : merge_whole_recordings(corpus.test_rows)) {
    SegmentAnnotation a = merged_to_annotation(m);
    a.speaker_id = "all";
    // Long-form rows span the whole recording, leading/trailing gaps included.
    a.start_s = 0.0;
    for (const RecordingTruth& rt : corpus.truth.recordings)
      if (rt.id == m.recording_id)
        a.end_s = static_cast<double>(rt.total_frames) / cfg.frame_rate;
    corpus.test_longform_rows.push_back(std::move(a));
  }

  corpus.paths.train_manifest = (fs::path(out_dir) / "train.jsonl").string();
  corpus.paths.test_manifest = (fs::path(out_dir) / "test.jsonl").string();
  corpus.paths.test_longform_manifest = (fs::path(out_dir) / "test_longform.jsonl").string();
  save_manifest(corpus.paths.train_manifest, corpus.train_rows);
  save_manifest(corpus.paths.test_manifest, corpus.test_rows);
  save_manifest(corpus.paths.test_longform_manifest, corpus.test_longform_rows);
  return corpus;
}

// Per-regime length statistics (mean +- std seconds) after merge_segments.
inline std::map<std::string, LengthStats> corpus_stats(
    const std::vector<SegmentAnnotation>& manifest) {
  std::map<std::string, LengthStats> stats;
  for (const std::string& name : regime_names())
    stats[name] = length_stats(merge_segments(manifest, SegRegime::from_name(name)));
  return stats;
}

}  // namespace tlab

#endif  // TLAB_SYNTH_HPP_
