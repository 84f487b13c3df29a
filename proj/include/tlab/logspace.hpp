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

#ifndef TLAB_LOGSPACE_HPP_
#define TLAB_LOGSPACE_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace tlab {

// log(0) sentinel. All log-space code treats kLogZero as exact zero mass;
// it is never approximated by a large negative finite value.
constexpr double kLogZero = -std::numeric_limits<double>::infinity();

inline bool is_log_zero(double x) { return x == kLogZero; }

// log(exp(a) + exp(b)), safe for kLogZero on either side.
inline double log_sum_exp(double a, double b) {
  if (is_log_zero(a)) return b;
  if (is_log_zero(b)) return a;
  return std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = kLogZero;
  for (double x : xs) m = std::max(m, x);
  if (is_log_zero(m)) return kLogZero;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// exp with exact zero for the sentinel.
inline double exp_log(double x) { return is_log_zero(x) ? 0.0 : std::exp(x); }

}  // namespace tlab

#endif  // TLAB_LOGSPACE_HPP_
