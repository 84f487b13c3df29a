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

#ifndef TLAB_LINALG_HPP_
#define TLAB_LINALG_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "tlab/errors.hpp"

namespace tlab {

using Vector = std::vector<double>;

// Dense row-major matrix. Small enough that hand-rolled loops are fine here;
// everything downstream is double precision.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  std::span<const double> row_span(int r) const { return {row(r), static_cast<std::size_t>(cols)}; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// out = M * x
inline void mat_vec(const Matrix& m, std::span<const double> x, std::span<double> out) {
  if (static_cast<int>(x.size()) != m.cols || static_cast<int>(out.size()) != m.rows)
    throw DimensionError("mat_vec: shape mismatch");
  for (int r = 0; r < m.rows; ++r) {
    const double* mr = m.row(r);
    double s = 0.0;
    for (int c = 0; c < m.cols; ++c) s += mr[c] * x[c];
    out[r] = s;
  }
}

// out += M^T * y, accumulated row-wise so memory access stays contiguous.
inline void mat_tvec_add(const Matrix& m, std::span<const double> y, std::span<double> out) {
  if (static_cast<int>(y.size()) != m.rows || static_cast<int>(out.size()) != m.cols)
    throw DimensionError("mat_tvec_add: shape mismatch");
  for (int r = 0; r < m.rows; ++r) {
    const double* mr = m.row(r);
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (int c = 0; c < m.cols; ++c) out[c] += yr * mr[c];
  }
}

// M += a * u v^T
inline void outer_add(Matrix& m, std::span<const double> u, std::span<const double> v,
                      double a = 1.0) {
  if (static_cast<int>(u.size()) != m.rows || static_cast<int>(v.size()) != m.cols)
    throw DimensionError("outer_add: shape mismatch");
  for (int r = 0; r < m.rows; ++r) {
    double* mr = m.row(r);
    const double s = a * u[r];
    for (int c = 0; c < m.cols; ++c) mr[c] += s * v[c];
  }
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace tlab

#endif  // TLAB_LINALG_HPP_
