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
// Builds training examples of controllable length from timestamped
// transcript segments: per recording, sort by start time and greedily
// accumulate consecutive segments while the group span stays within the
// regime target. Non-speech audio between merged segments is retained in
// the cut features.

#ifndef TLAB_SEGMENTER_HPP_
#define TLAB_SEGMENTER_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tlab/corpus_io.hpp"
#include "tlab/errors.hpp"
#include "tlab/model.hpp"
#include "tlab/vocab.hpp"

namespace tlab {

enum class RegimeName { kRaw, kShort, kMedium, kLong };

// Segmentation regime: the duration the merger aims for. Raw emits each
// segment alone. Targets are tuned so the synthetic corpus echoes the
// raw/short/medium/long length ordering.
struct SegRegime {
  RegimeName name = RegimeName::kRaw;
  double target_s = 0.0;  // unused for raw

  static SegRegime raw() { return {RegimeName::kRaw, 0.0}; }
  static SegRegime from_name(const std::string& name) {
    if (name == "raw") return {RegimeName::kRaw, 0.0};
    if (name == "short") return {RegimeName::kShort, 7.0};
    if (name == "medium") return {RegimeName::kMedium, 17.0};
    if (name == "long") return {RegimeName::kLong, 27.0};
    throw ConfigError("unknown segmentation regime '" + name + "'");
  }
  std::string to_string() const {
    switch (name) {
      case RegimeName::kRaw: return "raw";
      case RegimeName::kShort: return "short";
      case RegimeName::kMedium: return "medium";
      case RegimeName::kLong: return "long";
    }
    return "?";
  }
};

inline const std::vector<std::string>& regime_names() {
  static const std::vector<std::string> names = {"raw", "short", "medium", "long"};
  return names;
}

// A start-time-ordered group of segments from one recording.
struct MergedUtterance {
  std::string recording_id;
  double span_start_s = 0.0;
  double span_end_s = 0.0;
  std::vector<int> segment_indices;  // indices into the input annotation list
  std::string text;                  // member texts concatenated in start order
  std::set<std::string> speakers;
  std::string features_path;

  double duration_s() const { return span_end_s - span_start_s; }
};

// Greedy span-cap merge. Groups never cross recording boundaries and never
// reorder segments; a single segment longer than the target forms its own
// group. Timestamps are used only for grouping.
inline std::vector<MergedUtterance> merge_segments(
    const std::vector<SegmentAnnotation>& annotations, const SegRegime& regime) {
  // Recordings in order of first appearance.
  std::vector<std::string> recording_order;
  for (const auto& a : annotations)
    if (std::find(recording_order.begin(), recording_order.end(), a.recording_id) ==
        recording_order.end())
      recording_order.push_back(a.recording_id);

  std::vector<MergedUtterance> merged;
  for (const std::string& rec : recording_order) {
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(annotations.size()); ++i)
      if (annotations[i].recording_id == rec) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return annotations[a].start_s < annotations[b].start_s;
    });

    const double target = (regime.name == RegimeName::kRaw)
                              ? -1.0
                              : regime.target_s;
    MergedUtterance cur;
    auto close = [&]() {
      if (!cur.segment_indices.empty()) merged.push_back(std::move(cur));
      cur = MergedUtterance{};
    };
    for (int i : idx) {
      const SegmentAnnotation& a = annotations[i];
      if (!cur.segment_indices.empty()) {
        const double span_if_added = std::max(cur.span_end_s, a.end_s) - cur.span_start_s;
        const bool fits = target >= 0.0 && span_if_added <= target;
        if (!fits) close();
      }
      if (cur.segment_indices.empty()) {
        cur.recording_id = a.recording_id;
        cur.span_start_s = a.start_s;
        cur.span_end_s = a.end_s;
        cur.text = a.text;
        cur.features_path = a.features_path;
      } else {
        // Overlapping segments merge in start order; span is the union.
        cur.span_end_s = std::max(cur.span_end_s, a.end_s);
        cur.text += ' ';
        cur.text += a.text;
      }
      cur.segment_indices.push_back(i);
      cur.speakers.insert(a.speaker_id);
    }
    close();
  }
  return merged;
}

// Regime with an unbounded target: one group per recording (long-form rows).
inline std::vector<MergedUtterance> merge_whole_recordings(
    const std::vector<SegmentAnnotation>& annotations) {
  SegRegime all{RegimeName::kLong, std::numeric_limits<double>::infinity()};
  return merge_segments(annotations, all);
}

inline SegmentAnnotation merged_to_annotation(const MergedUtterance& m) {
  SegmentAnnotation a;
  a.recording_id = m.recording_id;
  std::string spk;
  for (const auto& s : m.speakers) {
    if (!spk.empty()) spk += '+';
    spk += s;
  }
  a.speaker_id = spk;
  a.start_s = m.span_start_s;
  a.end_s = m.span_end_s;
  a.text = m.text;
  a.features_path = m.features_path;
  return a;
}

// Cuts the contiguous feature slice [span_start, span_end) out of the
// recording stream, non-speech gaps included, and tokenizes the merged text.
inline TrainingExample cut_features(const Matrix& recording_features,
                                    const MergedUtterance& merged, double frame_rate) {
  const long start = std::lround(merged.span_start_s * frame_rate);
  const long count = std::lround((merged.span_end_s - merged.span_start_s) * frame_rate);
  if (start < 0 || start + count > recording_features.rows)
    throw RangeError("cut_features: span [" + std::to_string(merged.span_start_s) + ", " +
                     std::to_string(merged.span_end_s) + ")s is outside the recording (" +
                     std::to_string(recording_features.rows) + " frames at " +
                     std::to_string(frame_rate) + " fps)");
  TrainingExample ex;
  ex.features = Matrix(static_cast<int>(count), recording_features.cols);
  std::copy(recording_features.row(static_cast<int>(start)),
            recording_features.row(static_cast<int>(start)) + count * recording_features.cols,
            ex.features.data.begin());
  ex.targets = text_to_tokens(merged.text);
  ex.duration_s = merged.duration_s();
  ex.recording_id = merged.recording_id;
  ex.segment_indices = merged.segment_indices;
  return ex;
}

struct LengthStats {
  std::size_t count = 0;
  double mean_s = 0.0;
  double std_s = 0.0;
};

inline LengthStats length_stats(const std::vector<MergedUtterance>& merged) {
  LengthStats s;
  s.count = merged.size();
  if (merged.empty()) return s;
  double sum = 0.0;
  for (const auto& m : merged) sum += m.duration_s();
  s.mean_s = sum / static_cast<double>(merged.size());
  double var = 0.0;
  for (const auto& m : merged) {
    const double d = m.duration_s() - s.mean_s;
    var += d * d;
  }
  s.std_s = std::sqrt(var / static_cast<double>(merged.size()));
  return s;
}

}  // namespace tlab

#endif  // TLAB_SEGMENTER_HPP_
