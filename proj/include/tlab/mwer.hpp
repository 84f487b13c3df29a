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
// Expected word errors over the renormalized N-best distribution. The
// reported loss value is l_hat = sum_i P_i * l_i; the gradient with respect
// to hypothesis log-probabilities treats l_hat as a constant baseline,
// giving d/dlp_i = P_i * (l_i - l_hat). Subtracting the baseline changes
// no gradient (the P_i derivatives sum to zero) and centers per-hypothesis
// contributions: better-than-average hypotheses get boosted.

#ifndef TLAB_MWER_HPP_
#define TLAB_MWER_HPP_

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "tlab/decoder.hpp"
#include "tlab/edit_distance.hpp"
#include "tlab/errors.hpp"
#include "tlab/logspace.hpp"
#include "tlab/vocab.hpp"

namespace tlab {

struct MwerResult {
  double expected_errors = 0.0;           // l_hat
  std::vector<double> grad_wrt_log_probs;  // P_i * (l_i - l_hat)
  std::vector<double> renorm_probs;        // P_i, sums to 1
  std::vector<double> errors;              // l_i per (deduplicated) hypothesis
  std::vector<WerBreakdown> breakdowns;
  std::vector<Hypothesis> hypotheses;      // deduplicated, scores merged
};

// Core computation on (log-prob, error) pairs.
inline MwerResult mwer_from_scores(const std::vector<double>& log_probs,
                                   const std::vector<double>& errors) {
  if (log_probs.empty()) throw DomainError("mwer: empty N-best list");
  if (log_probs.size() != errors.size())
    throw DimensionError("mwer: log_probs and errors length mismatch");

  const std::size_t n = log_probs.size();
  MwerResult r;
  r.errors = errors;
  r.renorm_probs.resize(n);
  r.grad_wrt_log_probs.resize(n);

  double m = *std::max_element(log_probs.begin(), log_probs.end());
  double z = 0.0;
  for (double lp : log_probs) z += std::exp(lp - m);
  for (std::size_t i = 0; i < n; ++i) r.renorm_probs[i] = std::exp(log_probs[i] - m) / z;

  r.expected_errors = 0.0;
  for (std::size_t i = 0; i < n; ++i) r.expected_errors += r.renorm_probs[i] * errors[i];
  for (std::size_t i = 0; i < n; ++i)
    r.grad_wrt_log_probs[i] = r.renorm_probs[i] * (errors[i] - r.expected_errors);
  return r;
}

// Merges duplicate label sequences by logsumexp, scores each hypothesis
// against the reference words, and runs the core computation. The sum is
// over distinct hypotheses.
inline MwerResult mwer_loss(const NBestList& nbest, const std::vector<std::string>& ref_words) {
  if (nbest.hypotheses.empty()) throw DomainError("mwer_loss: empty N-best list");

  std::vector<Hypothesis> merged;
  for (const Hypothesis& h : nbest.hypotheses) {
    auto it = std::find_if(merged.begin(), merged.end(),
                           [&](const Hypothesis& m) { return m.tokens == h.tokens; });
    if (it == merged.end())
      merged.push_back(h);
    else
      it->log_prob = log_sum_exp(it->log_prob, h.log_prob);
  }

  std::vector<double> lps;
  std::vector<double> errs;
  std::vector<WerBreakdown> breakdowns;
  for (const Hypothesis& h : merged) {
    lps.push_back(h.log_prob);
    WerBreakdown b = word_edit_distance(tokens_to_words(h.tokens), ref_words);
    errs.push_back(static_cast<double>(b.total()));
    breakdowns.push_back(b);
  }

  MwerResult r = mwer_from_scores(lps, errs);
  r.breakdowns = std::move(breakdowns);
  r.hypotheses = std::move(merged);
  return r;
}

// Interpolation bookkeeping for L_mwer + lambda * L_ll. Downstream parameter
// gradients are assembled by the trainer as grad(mwer) + lambda * grad(ll);
// this record pairs the reported values.
struct InterpolatedLoss {
  double composite = 0.0;  // l_hat + lambda * log_loss
  double expected_errors = 0.0;
  double log_loss_value = 0.0;
  double lambda = 0.0;
};

inline InterpolatedLoss interpolated_loss_grad(const MwerResult& mwer, double log_loss_value,
                                               double lambda) {
  if (lambda < 0.0) throw DomainError("interpolated_loss_grad: lambda must be >= 0");
  InterpolatedLoss out;
  out.expected_errors = mwer.expected_errors;
  out.log_loss_value = log_loss_value;
  out.lambda = lambda;
  out.composite = mwer.expected_errors + lambda * log_loss_value;
  return out;
}

}  // namespace tlab

#endif  // TLAB_MWER_HPP_
