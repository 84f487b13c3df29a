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
// Frame-synchronous beam search with prefix merging: hypotheses that reach
// the same label sequence at the same frame have their scores combined by
// logsumexp, so a beam score is a lower bound of the full marginal
// probability (it sums the surviving paths only).

#ifndef TLAB_DECODER_HPP_
#define TLAB_DECODER_HPP_

#include <algorithm>
#include <map>
#include <vector>

#include "tlab/errors.hpp"
#include "tlab/logspace.hpp"
#include "tlab/model.hpp"

namespace tlab {

struct Hypothesis {
  std::vector<int> tokens;  // labels 1..V, no blank
  double log_prob = kLogZero;
};

// Descending log_prob; ties broken by shorter sequence, then lexicographic
// token order. Sequences are pairwise distinct.
struct NBestList {
  std::vector<Hypothesis> hypotheses;
  int beam_size = 0;
};

inline bool hyp_order_less(const std::vector<int>& a, double lp_a, const std::vector<int>& b,
                           double lp_b) {
  if (lp_a != lp_b) return lp_a > lp_b;
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

constexpr int kDefaultMaxSymsPerFrame = 5;

namespace detail {

struct BeamEntry {
  double lp = kLogZero;
  Vector pred_state;  // g for this label prefix
  Vector pred_proj;   // cached joint half for g
};

using BeamMap = std::map<std::vector<int>, BeamEntry>;

inline void merge_into(BeamMap& m, const std::vector<int>& tokens, double lp,
                       const BeamEntry* state_src) {
  auto it = m.find(tokens);
  if (it == m.end()) {
    BeamEntry e;
    e.lp = lp;
    if (state_src) {
      e.pred_state = state_src->pred_state;
      e.pred_proj = state_src->pred_proj;
    }
    m.emplace(tokens, std::move(e));
  } else {
    it->second.lp = log_sum_exp(it->second.lp, lp);
  }
}

inline void prune_to_beam(BeamMap& m, int beam) {
  if (static_cast<int>(m.size()) <= beam) return;
  std::vector<const std::vector<int>*> keys;
  keys.reserve(m.size());
  for (const auto& [k, v] : m) keys.push_back(&k);
  std::sort(keys.begin(), keys.end(), [&](const auto* a, const auto* b) {
    return hyp_order_less(*a, m.at(*a).lp, *b, m.at(*b).lp);
  });
  BeamMap kept;
  for (int i = 0; i < beam; ++i) kept.emplace(*keys[i], std::move(m.at(*keys[i])));
  m = std::move(kept);
}

inline double kth_best_lp(const BeamMap& m, int beam) {
  if (static_cast<int>(m.size()) < beam) return kLogZero;
  std::vector<double> lps;
  lps.reserve(m.size());
  for (const auto& [k, v] : m) lps.push_back(v.lp);
  std::nth_element(lps.begin(), lps.begin() + (beam - 1), lps.end(), std::greater<double>());
  return lps[beam - 1];
}

}  // namespace detail

inline NBestList beam_search(const ModelParams& params, const Matrix& features, int beam,
                             int max_syms_per_frame = kDefaultMaxSymsPerFrame) {
  if (features.rows < 1) throw DimensionError("beam_search: empty feature sequence");
  if (beam < 1) throw DomainError("beam_search: beam must be >= 1");

  const Matrix enc_h = encode(params, features);

  detail::BeamMap alive;
  {
    detail::BeamEntry root;
    root.lp = 0.0;
    root.pred_state = pred_start(params);
    root.pred_proj = joint_pred_proj(params, root.pred_state);
    alive.emplace(std::vector<int>{}, std::move(root));
  }

  for (int t = 0; t < features.rows; ++t) {
    const Vector enc_proj = joint_enc_proj(params, enc_h.row_span(t));
    detail::BeamMap next;
    detail::BeamMap cur = std::move(alive);
    for (int round = 0; round <= max_syms_per_frame; ++round) {
      detail::BeamMap expanded;
      for (auto& [tokens, entry] : cur) {
        const Vector lp = joint_log_probs(params, enc_proj, entry.pred_proj);
        detail::merge_into(next, tokens, entry.lp + lp[0], &entry);
        if (round == max_syms_per_frame) continue;
        for (int k = 1; k <= params.dims.vocab; ++k) {
          std::vector<int> ext = tokens;
          ext.push_back(k);
          auto it = expanded.find(ext);
          if (it == expanded.end()) {
            detail::BeamEntry e;
            e.lp = entry.lp + lp[k];
            e.pred_state = pred_step(params, entry.pred_state, k);
            e.pred_proj = joint_pred_proj(params, e.pred_state);
            expanded.emplace(std::move(ext), std::move(e));
          } else {
            it->second.lp = log_sum_exp(it->second.lp, entry.lp + lp[k]);
          }
        }
      }
      if (expanded.empty()) break;
      detail::prune_to_beam(expanded, beam);
      // Label emissions only lower a score; once the best expansion cannot
      // enter the beam of `next` any more, further rounds change nothing
      // that survives pruning.
      const double cutoff = detail::kth_best_lp(next, beam);
      double best = kLogZero;
      for (const auto& [k, v] : expanded) best = std::max(best, v.lp);
      if (!is_log_zero(cutoff) && best < cutoff) break;
      cur = std::move(expanded);
    }
    detail::prune_to_beam(next, beam);
    alive = std::move(next);
  }

  std::vector<std::pair<std::vector<int>, double>> out;
  out.reserve(alive.size());
  for (auto& [tokens, entry] : alive) out.emplace_back(tokens, entry.lp);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return hyp_order_less(a.first, a.second, b.first, b.second);
  });

  NBestList nbest;
  nbest.beam_size = beam;
  for (auto& [tokens, lp] : out) {
    if (static_cast<int>(nbest.hypotheses.size()) == beam) break;
    nbest.hypotheses.push_back(Hypothesis{std::move(tokens), lp});
  }
  return nbest;
}

// Frame-synchronous argmax decode; emits while the argmax is a label
// (capped per frame), otherwise advances to the next frame. The score is
// the log-probability of the single decoded path.
inline Hypothesis greedy_decode(const ModelParams& params, const Matrix& features,
                                int max_syms_per_frame = kDefaultMaxSymsPerFrame) {
  if (features.rows < 1) throw DimensionError("greedy_decode: empty feature sequence");
  const Matrix enc_h = encode(params, features);

  Hypothesis hyp;
  hyp.log_prob = 0.0;
  Vector g = pred_start(params);
  Vector g_proj = joint_pred_proj(params, g);
  for (int t = 0; t < features.rows; ++t) {
    const Vector enc_proj = joint_enc_proj(params, enc_h.row_span(t));
    for (int syms = 0;; ++syms) {
      const Vector lp = joint_log_probs(params, enc_proj, g_proj);
      int best = 0;
      for (int k = 1; k <= params.dims.vocab; ++k)
        if (lp[k] > lp[best]) best = k;
      if (best == 0 || syms == max_syms_per_frame) {
        hyp.log_prob += lp[0];  // blank advances time
        break;
      }
      hyp.tokens.push_back(best);
      hyp.log_prob += lp[best];
      g = pred_step(params, g, best);
      g_proj = joint_pred_proj(params, g);
    }
  }
  return hyp;
}

}  // namespace tlab

#endif  // TLAB_DECODER_HPP_
