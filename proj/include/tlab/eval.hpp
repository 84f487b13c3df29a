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

#ifndef TLAB_EVAL_HPP_
#define TLAB_EVAL_HPP_

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tlab/corpus_io.hpp"
#include "tlab/decoder.hpp"
#include "tlab/edit_distance.hpp"
#include "tlab/errors.hpp"
#include "tlab/mwer.hpp"
#include "tlab/segmenter.hpp"
#include "tlab/vocab.hpp"

namespace tlab {

// Greedy is the bulk-evaluation default; beam decode sits behind a flag.
struct DecodeParams {
  bool use_beam = false;
  int beam = 8;
  int max_syms_per_frame = kDefaultMaxSymsPerFrame;
};

struct UtteranceResult {
  std::string recording_id;
  std::string speaker_id;
  WerBreakdown breakdown;
};

struct EvalReport {
  std::vector<UtteranceResult> rows;  // manifest order
  WerBreakdown aggregate;
  DecodeParams decode;

  double wer_percent() const { return aggregate.wer_percent(); }
  double deletion_share() const {
    const long total = aggregate.total();
    return total > 0 ? static_cast<double>(aggregate.deletions) / total : 0.0;
  }
};

using DecodeFn = std::function<std::vector<int>(const Matrix& features)>;

// Loads each referenced feature file once and serves [start_s, end_s) slices.
class FeatureStore {
 public:
  FeatureStore(std::string manifest_path, double frame_rate)
      : manifest_path_(std::move(manifest_path)), frame_rate_(frame_rate) {}

  Matrix slice(const SegmentAnnotation& row) {
    if (row.features_path.empty())
      throw IoError("manifest entry for " + row.recording_id + " has no features_path");
    const Matrix& rec = recording(row.features_path);
    // Concatenated entries carry their member spans; their features are the
    // member slices joined in order.
    if (row.extra.is_object() && row.extra.contains("concat_spans")) {
      const auto& spans = row.extra["concat_spans"];
      long total = 0;
      for (const auto& span : spans)
        total += std::lround((span.at(1).get<double>() - span.at(0).get<double>()) * frame_rate_);
      Matrix m(static_cast<int>(total), rec.cols);
      long at = 0;
      for (const auto& span : spans) {
        const long start = std::lround(span.at(0).get<double>() * frame_rate_);
        const long count =
            std::lround((span.at(1).get<double>() - span.at(0).get<double>()) * frame_rate_);
        if (start < 0 || start + count > rec.rows)
          throw RangeError("concat span for " + row.recording_id + " is outside the recording");
        std::copy(rec.row(static_cast<int>(start)),
                  rec.row(static_cast<int>(start)) + count * rec.cols,
                  m.data.begin() + at * rec.cols);
        at += count;
      }
      return m;
    }
    const long start = std::lround(row.start_s * frame_rate_);
    const long count = std::lround((row.end_s - row.start_s) * frame_rate_);
    if (start < 0 || start + count > rec.rows)
      throw RangeError("feature slice for " + row.recording_id + " is outside the recording");
    Matrix m(static_cast<int>(count), rec.cols);
    std::copy(rec.row(static_cast<int>(start)),
              rec.row(static_cast<int>(start)) + count * rec.cols, m.data.begin());
    return m;
  }

  const Matrix& recording(const std::string& features_path) {
    auto it = cache_.find(features_path);
    if (it != cache_.end()) return it->second;
    const std::string resolved = resolve_features_path(manifest_path_, features_path);
    try {
      return cache_.emplace(features_path, read_features(resolved)).first->second;
    } catch (const IoError&) {
      throw IoError("missing feature file '" + resolved + "' referenced by manifest entry");
    }
  }

  double frame_rate() const { return frame_rate_; }

 private:
  std::string manifest_path_;
  double frame_rate_;
  std::map<std::string, Matrix> cache_;
};

inline EvalReport evaluate_with(const DecodeFn& decode,
                                const std::vector<SegmentAnnotation>& rows,
                                FeatureStore& store) {
  EvalReport report;
  for (const SegmentAnnotation& row : rows) {
    const Matrix features = store.slice(row);
    const std::vector<int> hyp_tokens = decode(features);
    WerBreakdown b = word_edit_distance(tokens_to_words(hyp_tokens), split_words(row.text));
    report.aggregate += b;
    report.rows.push_back(UtteranceResult{row.recording_id, row.speaker_id, b});
  }
  return report;
}

inline EvalReport evaluate(const ModelParams& params, const std::string& manifest_path,
                           double frame_rate, const DecodeParams& decode = {}) {
  const std::vector<SegmentAnnotation> rows = load_manifest(manifest_path);
  FeatureStore store(manifest_path, frame_rate);
  DecodeFn fn;
  if (decode.use_beam) {
    fn = [&](const Matrix& f) {
      NBestList nbest = beam_search(params, f, decode.beam, decode.max_syms_per_frame);
      return nbest.hypotheses.empty() ? std::vector<int>{} : nbest.hypotheses.front().tokens;
    };
  } else {
    fn = [&](const Matrix& f) { return greedy_decode(params, f, decode.max_syms_per_frame).tokens; };
  }
  EvalReport report = evaluate_with(fn, rows, store);
  report.decode = decode;
  return report;
}

// Concatenation stress harness: per (recording, speaker) group, sorted by
// start time, chunks of n consecutive utterances become one entry whose text
// is the concatenation and whose features are the member slices joined in
// order (recorded in the entry's concat_spans key; the remainder chunk is
// kept). A covering slice would drag the other speaker's interleaved turns
// into the audio with no counterpart in the reference, so the utterances
// themselves are concatenated. n = nullopt concatenates each whole group.
inline std::vector<SegmentAnnotation> concat_groups(const std::vector<SegmentAnnotation>& rows,
                                                    std::optional<int> n) {
  if (n.has_value() && *n < 2)
    throw DomainError("concat_groups: n must be >= 2 (or 'all')");

  std::vector<std::pair<std::string, std::string>> group_order;
  std::map<std::pair<std::string, std::string>, std::vector<const SegmentAnnotation*>> groups;
  for (const SegmentAnnotation& r : rows) {
    auto key = std::make_pair(r.recording_id, r.speaker_id);
    if (groups.find(key) == groups.end()) group_order.push_back(key);
    groups[key].push_back(&r);
  }

  std::vector<SegmentAnnotation> out;
  for (const auto& key : group_order) {
    auto& members = groups[key];
    std::stable_sort(members.begin(), members.end(),
                     [](const SegmentAnnotation* a, const SegmentAnnotation* b) {
                       return a->start_s < b->start_s;
                     });
    const std::size_t chunk = n.has_value() ? static_cast<std::size_t>(*n) : members.size();
    for (std::size_t i = 0; i < members.size(); i += chunk) {
      const std::size_t end = std::min(i + chunk, members.size());
      SegmentAnnotation a;
      a.recording_id = key.first;
      a.speaker_id = key.second;
      a.start_s = members[i]->start_s;
      a.end_s = members[end - 1]->end_s;
      a.features_path = members[i]->features_path;
      std::string text;
      nlohmann::json spans = nlohmann::json::array();
      for (std::size_t j = i; j < end; ++j) {
        if (!text.empty()) text += ' ';
        text += members[j]->text;
        spans.push_back({members[j]->start_s, members[j]->end_s});
      }
      a.text = std::move(text);
      a.extra["concat_spans"] = std::move(spans);
      out.push_back(std::move(a));
    }
  }
  return out;
}

// Per-utterance detail CSV with a trailing AGGREGATE row.
inline void write_report_detail(const EvalReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open report for writing: " + path);
  out << "utt,recording_id,speaker_id,del,sub,ins,ref_words,wer\n";
  char buf[64];
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const UtteranceResult& r = report.rows[i];
    std::snprintf(buf, sizeof(buf), "%.6f", r.breakdown.wer_percent());
    out << i << ',' << r.recording_id << ',' << r.speaker_id << ',' << r.breakdown.deletions
        << ',' << r.breakdown.substitutions << ',' << r.breakdown.insertions << ','
        << r.breakdown.ref_words << ',' << buf << '\n';
  }
  const WerBreakdown& a = report.aggregate;
  std::snprintf(buf, sizeof(buf), "%.6f", a.wer_percent());
  out << "AGGREGATE,,," << a.deletions << ',' << a.substitutions << ',' << a.insertions << ','
      << a.ref_words << ',' << buf << '\n';
  if (!out) throw IoError("write failed for report: " + path);
}

struct ReportDetail {
  std::vector<WerBreakdown> rows;
  WerBreakdown aggregate;
};

inline ReportDetail parse_report_detail(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("detail CSV is empty", 1);
  ReportDetail detail;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 8) throw ParseError("detail row must have 8 fields", line_no);
    WerBreakdown b;
    try {
      b.deletions = std::stol(fields[3]);
      b.substitutions = std::stol(fields[4]);
      b.insertions = std::stol(fields[5]);
      b.ref_words = std::stol(fields[6]);
    } catch (const std::exception&) {
      throw ParseError("detail row has non-numeric counts", line_no);
    }
    if (fields[0] == "AGGREGATE")
      detail.aggregate = b;
    else
      detail.rows.push_back(b);
  }
  return detail;
}

// ---------------------------------------------------------------------------
// CSV reports: one row per (test set, regime, loss) cell.

struct ReportRow {
  std::string test_set;
  std::string regime;
  std::string loss;
  WerBreakdown counts;
};

inline void report_csv(const std::vector<ReportRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open report for writing: " + path);
  out << "test_set,regime,loss,wer,del,sub,ins,ref_words,del_share\n";
  char buf[64];
  for (const ReportRow& r : rows) {
    const long total = r.counts.total();
    const double share = total > 0 ? static_cast<double>(r.counts.deletions) / total : 0.0;
    std::snprintf(buf, sizeof(buf), "%.6f", r.counts.wer_percent());
    out << r.test_set << ',' << r.regime << ',' << r.loss << ',' << buf << ','
        << r.counts.deletions << ',' << r.counts.substitutions << ',' << r.counts.insertions
        << ',' << r.counts.ref_words << ',';
    std::snprintf(buf, sizeof(buf), "%.9f", share);
    out << buf << '\n';
  }
  if (!out) throw IoError("write failed for report: " + path);
}

inline std::vector<ReportRow> parse_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("report CSV is empty", 1);
  std::vector<ReportRow> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 9) throw ParseError("report row must have 9 fields", line_no);
    ReportRow r;
    r.test_set = fields[0];
    r.regime = fields[1];
    r.loss = fields[2];
    try {
      r.counts.deletions = std::stol(fields[4]);
      r.counts.substitutions = std::stol(fields[5]);
      r.counts.insertions = std::stol(fields[6]);
      r.counts.ref_words = std::stol(fields[7]);
    } catch (const std::exception&) {
      throw ParseError("report row has non-numeric counts", line_no);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace tlab

#endif  // TLAB_EVAL_HPP_
