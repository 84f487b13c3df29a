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
// Corpus file formats.
//   Manifest: UTF-8 JSONL; required keys recording_id, speaker_id, start_s,
//   end_s, text; optional features_path. Unknown keys are preserved on
//   rewrite.
//   Features: little-endian binary; magic "TLFT", u32 version=1,
//   u32 n_frames, u32 feat_dim, then n_frames*feat_dim f32 row-major.

#ifndef TLAB_CORPUS_IO_HPP_
#define TLAB_CORPUS_IO_HPP_

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tlab/errors.hpp"
#include "tlab/linalg.hpp"

namespace tlab {

struct SegmentAnnotation {
  std::string recording_id;
  std::string speaker_id;
  double start_s = 0.0;
  double end_s = 0.0;
  std::string text;
  std::string features_path;  // empty when absent
  nlohmann::json extra;       // unknown keys, preserved on rewrite

  double duration_s() const { return end_s - start_s; }
};

inline void validate_annotation(const SegmentAnnotation& a, long line = 0) {
  if (!(a.end_s > a.start_s))
    throw ValidationError("segment end_s " + std::to_string(a.end_s) +
                              " must be greater than start_s " + std::to_string(a.start_s),
                          line);
  if (a.text.empty()) throw ValidationError("segment text must be non-empty", line);
}

inline std::vector<SegmentAnnotation> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path);
  std::vector<SegmentAnnotation> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("manifest JSON parse failure: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("manifest line is not a JSON object", line_no);

    SegmentAnnotation a;
    try {
      a.recording_id = j.at("recording_id").get<std::string>();
      a.speaker_id = j.at("speaker_id").get<std::string>();
      a.start_s = j.at("start_s").get<double>();
      a.end_s = j.at("end_s").get<double>();
      a.text = j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("manifest record missing/bad required key: ") + e.what(),
                       line_no);
    }
    if (j.contains("features_path")) {
      if (!j["features_path"].is_string())
        throw ParseError("features_path must be a string", line_no);
      a.features_path = j["features_path"].get<std::string>();
    }
    for (auto& [key, value] : j.items()) {
      if (key == "recording_id" || key == "speaker_id" || key == "start_s" || key == "end_s" ||
          key == "text" || key == "features_path")
        continue;
      a.extra[key] = value;
    }
    validate_annotation(a, line_no);
    out.push_back(std::move(a));
  }
  return out;
}

inline void save_manifest(const std::string& path, const std::vector<SegmentAnnotation>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open manifest for writing: " + path);
  for (const SegmentAnnotation& a : rows) {
    nlohmann::json j;
    j["recording_id"] = a.recording_id;
    j["speaker_id"] = a.speaker_id;
    j["start_s"] = a.start_s;
    j["end_s"] = a.end_s;
    j["text"] = a.text;
    if (!a.features_path.empty()) j["features_path"] = a.features_path;
    if (a.extra.is_object())
      for (auto& [key, value] : a.extra.items()) j[key] = value;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed for manifest: " + path);
}

// Resolves a features_path relative to the manifest that referenced it.
inline std::string resolve_features_path(const std::string& manifest_path,
                                         const std::string& features_path) {
  namespace fs = std::filesystem;
  fs::path fp(features_path);
  if (fp.is_absolute()) return features_path;
  return (fs::path(manifest_path).parent_path() / fp).string();
}

inline constexpr char kFeatureMagic[4] = {'T', 'L', 'F', 'T'};
inline constexpr std::uint32_t kFeatureVersion = 1;

inline void write_features(const std::string& path, const Matrix& features) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open feature file for writing: " + path);
  out.write(kFeatureMagic, sizeof(kFeatureMagic));
  const std::uint32_t version = kFeatureVersion;
  const std::uint32_t n_frames = static_cast<std::uint32_t>(features.rows);
  const std::uint32_t feat_dim = static_cast<std::uint32_t>(features.cols);
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&n_frames), sizeof(n_frames));
  out.write(reinterpret_cast<const char*>(&feat_dim), sizeof(feat_dim));
  std::vector<float> buf(features.data.size());
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(features.data[i]);
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  out.flush();
  if (!out) throw IoError("write failed for feature file: " + path);
}

inline Matrix read_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open feature file: " + path);
  std::size_t offset = 0;
  auto read_bytes = [&](void* p, std::size_t n, const char* what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw FormatError(std::string("feature file truncated while reading ") + what, offset);
    offset += n;
  };
  char magic[4];
  read_bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kFeatureMagic, sizeof(magic)) != 0)
    throw FormatError("bad feature file magic", 0);
  std::uint32_t version, n_frames, feat_dim;
  read_bytes(&version, sizeof(version), "version");
  if (version != kFeatureVersion)
    throw VersionError("feature file version " + std::to_string(version) + ", expected " +
                       std::to_string(kFeatureVersion));
  read_bytes(&n_frames, sizeof(n_frames), "n_frames");
  read_bytes(&feat_dim, sizeof(feat_dim), "feat_dim");
  std::vector<float> buf(static_cast<std::size_t>(n_frames) * feat_dim);
  read_bytes(buf.data(), buf.size() * sizeof(float), "payload");
  Matrix m(static_cast<int>(n_frames), static_cast<int>(feat_dim));
  for (std::size_t i = 0; i < buf.size(); ++i) m.data[i] = static_cast<double>(buf[i]);
  return m;
}

}  // namespace tlab

#endif  // TLAB_CORPUS_IO_HPP_
