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
// Checkpoint file format, fixed layout, little-endian:
//   8-byte magic "TLABCKPT", u32 version,
//   then sections of (u32 name length, name bytes, u64 element count,
//   count f64 values). Section "dims" holds (F, D_e, D_p, D_j, V).
// Round trips are bit-exact.

#ifndef TLAB_CHECKPOINT_HPP_
#define TLAB_CHECKPOINT_HPP_

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "tlab/errors.hpp"
#include "tlab/model.hpp"

namespace tlab {

inline constexpr char kCheckpointMagic[8] = {'T', 'L', 'A', 'B', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelParams params;
  // Extra named sections (optimizer state and the like); preserved verbatim.
  std::map<std::string, std::vector<double>> extra;
};

namespace detail {

inline void write_bytes(std::ofstream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
inline void write_scalar(std::ofstream& out, T v) {
  write_bytes(out, &v, sizeof(T));  // little-endian host assumed; format is LE
}

inline void write_section(std::ofstream& out, const std::string& name,
                          const std::vector<double>& values) {
  write_scalar<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  write_bytes(out, name.data(), name.size());
  write_scalar<std::uint64_t>(out, static_cast<std::uint64_t>(values.size()));
  write_bytes(out, values.data(), values.size() * sizeof(double));
}

struct Reader {
  std::ifstream in;
  std::size_t offset = 0;

  void read_bytes(void* p, std::size_t n, const char* what) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw FormatError(std::string("checkpoint truncated while reading ") + what, offset);
    offset += n;
  }
  template <typename T>
  T read_scalar(const char* what) {
    T v;
    read_bytes(&v, sizeof(T), what);
    return v;
  }
  bool at_eof() {
    return in.peek() == std::char_traits<char>::eof();
  }
};

}  // namespace detail

inline void save_checkpoint(const ModelParams& params,
                            const std::map<std::string, std::vector<double>>& extra,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  detail::write_bytes(out, kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::write_scalar<std::uint32_t>(out, kCheckpointVersion);

  const ModelDims& d = params.dims;
  detail::write_section(out, "dims",
                        {static_cast<double>(d.feat_dim), static_cast<double>(d.enc_dim),
                         static_cast<double>(d.pred_dim), static_cast<double>(d.joint_dim),
                         static_cast<double>(d.vocab)});
  for (const TensorRef& t : param_tensors(const_cast<ModelParams&>(params)))
    detail::write_section(out, t.name, *t.data);
  for (const auto& [name, values] : extra) detail::write_section(out, name, values);
  out.flush();
  if (!out) throw IoError("write failed for checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  detail::Reader r;
  r.in.open(path, std::ios::binary);
  if (!r.in) throw IoError("cannot open checkpoint: " + path);

  char magic[8];
  r.read_bytes(magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw FormatError("bad checkpoint magic", 0);
  const auto version = r.read_scalar<std::uint32_t>("version");
  if (version != kCheckpointVersion)
    throw VersionError("checkpoint version " + std::to_string(version) + ", expected " +
                       std::to_string(kCheckpointVersion));

  std::map<std::string, std::vector<double>> sections;
  while (!r.at_eof()) {
    const auto name_len = r.read_scalar<std::uint32_t>("section name length");
    if (name_len == 0 || name_len > 4096)
      throw FormatError("implausible section name length", r.offset - sizeof(std::uint32_t));
    std::string name(name_len, '\0');
    r.read_bytes(name.data(), name_len, "section name");
    const auto count = r.read_scalar<std::uint64_t>("element count");
    std::vector<double> values(count);
    r.read_bytes(values.data(), count * sizeof(double), ("section " + name).c_str());
    if (!sections.emplace(std::move(name), std::move(values)).second)
      throw FormatError("duplicate checkpoint section", r.offset);
  }

  auto take = [&](const std::string& name) -> std::vector<double> {
    auto it = sections.find(name);
    if (it == sections.end())
      throw FormatError("missing checkpoint section '" + name + "'", r.offset);
    std::vector<double> v = std::move(it->second);
    sections.erase(it);
    return v;
  };

  const std::vector<double> dims_v = take("dims");
  if (dims_v.size() != 5) throw FormatError("dims section must hold 5 values", r.offset);
  ModelDims d;
  d.feat_dim = static_cast<int>(dims_v[0]);
  d.enc_dim = static_cast<int>(dims_v[1]);
  d.pred_dim = static_cast<int>(dims_v[2]);
  d.joint_dim = static_cast<int>(dims_v[3]);
  d.vocab = static_cast<int>(dims_v[4]);

  Checkpoint ck;
  ck.params = make_zero_params(d);
  for (TensorRef t : param_tensors(ck.params)) {
    std::vector<double> v = take(t.name);
    if (v.size() != t.data->size())
      throw FormatError("section '" + std::string(t.name) + "' has " +
                            std::to_string(v.size()) + " values, expected " +
                            std::to_string(t.data->size()),
                        r.offset);
    *t.data = std::move(v);
  }
  ck.extra = std::move(sections);
  return ck;
}

}  // namespace tlab

#endif  // TLAB_CHECKPOINT_HPP_
