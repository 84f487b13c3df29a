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

#include "tlab/segmenter.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "tlab/rng.hpp"

using namespace tlab;

namespace {

std::string temp_file(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

SegmentAnnotation seg(const std::string& rec, double start, double end,
                      const std::string& text, const std::string& spk = "s0") {
  SegmentAnnotation a;
  a.recording_id = rec;
  a.speaker_id = spk;
  a.start_s = start;
  a.end_s = end;
  a.text = text;
  return a;
}

TEST(Manifest, EmptyFileGivesEmptyList) {
  const std::string path = temp_file("tlab_manifest_empty.jsonl");
  std::ofstream(path).close();
  EXPECT_TRUE(load_manifest(path).empty());
  std::filesystem::remove(path);
}

TEST(Manifest, SingleValidLine) {
  const std::string path = temp_file("tlab_manifest_one.jsonl");
  std::ofstream(path) << R"({"recording_id":"r1","speaker_id":"s1","start_s":1.5,)"
                      << R"("end_s":3.25,"text":"w1 w2"})" << "\n";
  auto rows = load_manifest(path);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].recording_id, "r1");
  EXPECT_EQ(rows[0].speaker_id, "s1");
  EXPECT_DOUBLE_EQ(rows[0].start_s, 1.5);
  EXPECT_DOUBLE_EQ(rows[0].end_s, 3.25);
  EXPECT_EQ(rows[0].text, "w1 w2");
  std::filesystem::remove(path);
}

TEST(Manifest, EndBeforeStartNamesTheLine) {
  const std::string path = temp_file("tlab_manifest_bad.jsonl");
  std::ofstream(path) << R"({"recording_id":"r1","speaker_id":"s1","start_s":0.0,)"
                      << R"("end_s":1.0,"text":"w1"})" << "\n"
                      << R"({"recording_id":"r1","speaker_id":"s1","start_s":5.0,)"
                      << R"("end_s":4.0,"text":"w1"})" << "\n";
  try {
    load_manifest(path);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.line_number, 2);
  }
  std::filesystem::remove(path);
}

TEST(Manifest, MalformedLineIsParseErrorWithLineNumber) {
  const std::string path = temp_file("tlab_manifest_parse.jsonl");
  std::ofstream(path) << R"({"recording_id":"r1","speaker_id":"s1","start_s":0.0,)"
                      << R"("end_s":1.0,"text":"w1"})" << "\n"
                      << "not json\n";
  try {
    load_manifest(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line_number, 2);
  }
  std::filesystem::remove(path);
}

TEST(Manifest, UnknownKeysSurviveRewrite) {
  const std::string path = temp_file("tlab_manifest_extra.jsonl");
  std::ofstream(path) << R"({"recording_id":"r1","speaker_id":"s1","start_s":0.0,)"
                      << R"("end_s":1.0,"text":"w1","channel":7,"lang":"es"})" << "\n";
  auto rows = load_manifest(path);
  const std::string out = temp_file("tlab_manifest_extra_out.jsonl");
  save_manifest(out, rows);
  auto back = load_manifest(out);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].extra["channel"], 7);
  EXPECT_EQ(back[0].extra["lang"], "es");
  std::filesystem::remove(path);
  std::filesystem::remove(out);
}

TEST(MergeSegments, RawEmitsSingletons) {
  std::vector<SegmentAnnotation> rows = {seg("r1", 0, 2, "w1"), seg("r1", 3, 5, "w2"),
                                         seg("r2", 0, 1, "w3")};
  auto merged = merge_segments(rows, SegRegime::raw());
  ASSERT_EQ(merged.size(), 3u);
  for (std::size_t i = 0; i < merged.size(); ++i)
    EXPECT_EQ(merged[i].segment_indices.size(), 1u);
}

TEST(MergeSegments, GreedySpanCapExample) {
  std::vector<SegmentAnnotation> rows = {seg("r1", 0, 2, "w1"), seg("r1", 3, 5, "w2"),
                                         seg("r1", 7, 9, "w3"), seg("r1", 20, 22, "w4")};
  SegRegime regime{RegimeName::kMedium, 10.0};
  auto merged = merge_segments(rows, regime);
  ASSERT_EQ(merged.size(), 2u);
  EXPECT_EQ(merged[0].segment_indices, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(merged[0].text, "w1 w2 w3");
  EXPECT_DOUBLE_EQ(merged[0].span_start_s, 0.0);
  EXPECT_DOUBLE_EQ(merged[0].span_end_s, 9.0);
  EXPECT_EQ(merged[1].segment_indices, (std::vector<int>{3}));
}

TEST(MergeSegments, TextIgnoresGapLengths) {
  // Same texts, wildly different gaps: merged text is the same concatenation.
  std::vector<SegmentAnnotation> close_rows = {seg("r1", 0, 1, "w1"), seg("r1", 1.1, 2, "w2")};
  std::vector<SegmentAnnotation> far_rows = {seg("r1", 0, 1, "w1"), seg("r1", 6, 7, "w2")};
  SegRegime regime{RegimeName::kShort, 8.0};
  EXPECT_EQ(merge_segments(close_rows, regime)[0].text,
            merge_segments(far_rows, regime)[0].text);
}

TEST(MergeSegments, PartitionInvariant) {
  auto rng = make_rng(811);
  std::uniform_real_distribution<double> dur(0.5, 4.0), gap(0.1, 3.0);
  std::vector<SegmentAnnotation> rows;
  for (int rec = 0; rec < 3; ++rec) {
    double t = 0.0;
    for (int i = 0; i < 25; ++i) {
      const double d = dur(rng);
      rows.push_back(seg("rec" + std::to_string(rec), t, t + d, "w1 w2"));
      t += d + gap(rng);
    }
  }
  for (const std::string& name : regime_names()) {
    auto merged = merge_segments(rows, SegRegime::from_name(name));
    std::size_t covered = 0;
    std::vector<bool> seen(rows.size(), false);
    for (const auto& m : merged) {
      EXPECT_FALSE(m.segment_indices.empty());
      for (std::size_t k = 0; k + 1 < m.segment_indices.size(); ++k)
        EXPECT_LE(rows[m.segment_indices[k]].start_s, rows[m.segment_indices[k + 1]].start_s);
      for (int idx : m.segment_indices) {
        EXPECT_FALSE(seen[idx]);
        seen[idx] = true;
        EXPECT_EQ(rows[idx].recording_id, m.recording_id);
        ++covered;
      }
    }
    EXPECT_EQ(covered, rows.size());
  }
}

TEST(MergeSegments, MeanDurationsMonotoneAcrossRegimesOnHomogeneousCorpora) {
  for (std::uint64_t s : {1u, 2u, 3u}) {
    auto rng = make_rng(900 + s);
    std::uniform_real_distribution<double> dur(1.0, 3.0), gap(0.5, 4.0);
    std::vector<SegmentAnnotation> rows;
    for (int rec = 0; rec < 4; ++rec) {
      double t = 0.0;
      for (int i = 0; i < 40; ++i) {
        const double d = dur(rng);
        rows.push_back(seg("rec" + std::to_string(rec), t, t + d, "w1"));
        t += d + gap(rng);
      }
    }
    double prev = 0.0;
    for (const std::string& name : regime_names()) {
      const LengthStats st = length_stats(merge_segments(rows, SegRegime::from_name(name)));
      EXPECT_GE(st.mean_s, prev - 1e-12) << name;
      prev = st.mean_s;
    }
  }
}

TEST(MergeSegments, RawIdempotence) {
  std::vector<SegmentAnnotation> rows = {seg("r1", 0, 2, "w1"), seg("r1", 3, 5, "w2")};
  auto once = merge_segments(rows, SegRegime::raw());
  std::vector<SegmentAnnotation> as_rows;
  for (const auto& m : once) as_rows.push_back(merged_to_annotation(m));
  auto twice = merge_segments(as_rows, SegRegime::raw());
  ASSERT_EQ(once.size(), twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    EXPECT_DOUBLE_EQ(once[i].span_start_s, twice[i].span_start_s);
    EXPECT_DOUBLE_EQ(once[i].span_end_s, twice[i].span_end_s);
    EXPECT_EQ(once[i].text, twice[i].text);
  }
}

TEST(CutFeatures, SingleSegmentSliceIsExact) {
  Matrix rec(100, 2);
  for (int t = 0; t < 100; ++t)
    for (int d = 0; d < 2; ++d) rec.at(t, d) = t + 0.5 * d;
  MergedUtterance m;
  m.recording_id = "r1";
  m.span_start_s = 1.0;
  m.span_end_s = 2.0;
  m.text = "w1 w3";
  m.segment_indices = {0};
  TrainingExample ex = cut_features(rec, m, 20.0);
  ASSERT_EQ(ex.features.rows, 20);
  EXPECT_DOUBLE_EQ(ex.features.at(0, 0), 20.0);
  EXPECT_DOUBLE_EQ(ex.features.at(19, 1), 39.5);
  EXPECT_EQ(ex.targets, (std::vector<int>{1, 3}));
}

TEST(CutFeatures, GapFramesAreIncluded) {
  Matrix rec(200, 1);
  for (int t = 0; t < 200; ++t) rec.at(t, 0) = t;
  MergedUtterance m;
  m.span_start_s = 0.0;
  m.span_end_s = 9.0;  // covers segments 0-5 and 7-9 plus the 5-7 gap
  m.text = "w1 w2";
  TrainingExample ex = cut_features(rec, m, 20.0);
  EXPECT_EQ(ex.features.rows, 180);
  EXPECT_DOUBLE_EQ(ex.features.at(120, 0), 120.0);  // frame inside the gap
}

TEST(CutFeatures, SpanOutsideRecordingIsRangeError) {
  Matrix rec(10, 1);
  MergedUtterance m;
  m.span_start_s = 0.0;
  m.span_end_s = 2.0;
  m.text = "w1";
  EXPECT_THROW(cut_features(rec, m, 20.0), RangeError);
}

TEST(FeatureFile, RoundTrip) {
  const std::string path = temp_file("tlab_features_rt.feat");
  auto rng = make_rng(941);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(17, 5);
  for (double& x : m.data) x = static_cast<float>(g(rng));  // f32-exact values
  write_features(path, m);
  Matrix back = read_features(path);
  ASSERT_EQ(back.rows, m.rows);
  ASSERT_EQ(back.cols, m.cols);
  EXPECT_EQ(back.data, m.data);
  std::filesystem::remove(path);
}

TEST(FeatureFile, TruncationAndMagicErrors) {
  const std::string path = temp_file("tlab_features_bad.feat");
  Matrix m(4, 3);
  write_features(path, m);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 5);
  EXPECT_THROW(read_features(path), FormatError);
  std::ofstream(path, std::ios::binary | std::ios::trunc) << "XXXXGARBAGE";
  EXPECT_THROW(read_features(path), FormatError);
  std::filesystem::remove(path);
}

}  // namespace
