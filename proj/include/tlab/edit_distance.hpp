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

#ifndef TLAB_EDIT_DISTANCE_HPP_
#define TLAB_EDIT_DISTANCE_HPP_

#include <cstddef>
#include <vector>

namespace tlab {

// Word-error counts from one minimum-edit alignment of hypothesis vs
// reference. A deletion is a reference word missing from the hypothesis;
// an insertion is a hypothesis word with no reference counterpart.
struct WerBreakdown {
  long deletions = 0;
  long substitutions = 0;
  long insertions = 0;
  long ref_words = 0;

  long total() const { return deletions + substitutions + insertions; }
  double wer_percent() const {
    return ref_words > 0 ? 100.0 * static_cast<double>(total()) / ref_words : 0.0;
  }
  WerBreakdown& operator+=(const WerBreakdown& o) {
    deletions += o.deletions;
    substitutions += o.substitutions;
    insertions += o.insertions;
    ref_words += o.ref_words;
    return *this;
  }
};

// Levenshtein DP with backtrace, unit costs. Among minimum-cost alignments
// the one with the most matches is canonical; given the sequence lengths and
// the total, the match count pins down every error count, so breakdowns are
// deterministic and swapping hyp/ref exactly swaps deletions and insertions.
// Residual backtrace ties resolve diagonal first, then deletion, then
// insertion; they cannot change the counts.
template <typename Seq>
WerBreakdown word_edit_distance(const Seq& hyp, const Seq& ref) {
  const std::size_t n = hyp.size();
  const std::size_t m = ref.size();

  std::vector<int> d((n + 1) * (m + 1), 0);
  std::vector<int> mt((n + 1) * (m + 1), 0);  // max matches at min cost
  auto cost = [&](std::size_t i, std::size_t j) -> int& { return d[i * (m + 1) + j]; };
  auto matches = [&](std::size_t i, std::size_t j) -> int& { return mt[i * (m + 1) + j]; };

  for (std::size_t i = 0; i <= n; ++i) cost(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) cost(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const bool eq = hyp[i - 1] == ref[j - 1];
      const int diag = cost(i - 1, j - 1) + (eq ? 0 : 1);
      const int del = cost(i, j - 1) + 1;  // skip a reference word
      const int ins = cost(i - 1, j) + 1;  // skip a hypothesis word
      const int best = std::min(diag, std::min(del, ins));
      cost(i, j) = best;
      int mm = -1;
      if (diag == best) mm = std::max(mm, matches(i - 1, j - 1) + (eq ? 1 : 0));
      if (del == best) mm = std::max(mm, matches(i, j - 1));
      if (ins == best) mm = std::max(mm, matches(i - 1, j));
      matches(i, j) = mm;
    }
  }

  WerBreakdown b;
  b.ref_words = static_cast<long>(m);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const int c = cost(i, j);
    const int mm = matches(i, j);
    const bool eq = i > 0 && j > 0 && hyp[i - 1] == ref[j - 1];
    if (i > 0 && j > 0 && c == cost(i - 1, j - 1) + (eq ? 0 : 1) &&
        mm == matches(i - 1, j - 1) + (eq ? 1 : 0)) {
      if (!eq) ++b.substitutions;
      --i;
      --j;
    } else if (j > 0 && c == cost(i, j - 1) + 1 && mm == matches(i, j - 1)) {
      ++b.deletions;
      --j;
    } else {
      ++b.insertions;
      --i;
    }
  }
  return b;
}

}  // namespace tlab

#endif  // TLAB_EDIT_DISTANCE_HPP_
