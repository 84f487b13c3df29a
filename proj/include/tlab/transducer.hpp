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
// Sequence-transducer log loss via forward-backward dynamic programming.
//
// Lattice topology (Graves-style): from node (t, u), blank (symbol 0)
// advances to (t+1, u) and label targets[u] advances to (t, u+1). The
// sequence terminates with one blank emitted from node (T-1, U). All
// arithmetic is in natural-log space; zero mass is the kLogZero sentinel.

#ifndef TLAB_TRANSDUCER_HPP_
#define TLAB_TRANSDUCER_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tlab/errors.hpp"
#include "tlab/linalg.hpp"
#include "tlab/logspace.hpp"

namespace tlab {

// Log-softmax-normalized output lattice of a transducer model.
// Indexed (t, u, k): frame t in 0..T-1, label position u in 0..U,
// symbol k in 0..V with k = 0 the blank.
struct LogitLattice {
  int frames = 0;      // T
  int label_len = 0;   // U
  int vocab = 0;       // V, excluding blank
  std::vector<double> log_probs;  // T * (U+1) * (V+1), row-major

  std::size_t index(int t, int u, int k) const {
    return (static_cast<std::size_t>(t) * (label_len + 1) + u) * (vocab + 1) + k;
  }
  double at(int t, int u, int k) const { return log_probs[index(t, u, k)]; }
  double* node(int t, int u) {
    return log_probs.data() + index(t, u, 0);
  }
  const double* node(int t, int u) const { return log_probs.data() + index(t, u, 0); }
};

struct AlphaBeta {
  Matrix alpha;         // (T, U+1) forward log-sums
  Matrix beta;          // (T, U+1) backward log-sums
  double log_seq_prob = kLogZero;
};

namespace detail {

inline void check_targets(const std::vector<int>& targets, int vocab) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 1 || targets[i] > vocab)
      throw DomainError("target token " + std::to_string(targets[i]) + " at position " +
                        std::to_string(i) + " outside 1.." + std::to_string(vocab));
  }
}

}  // namespace detail

// Applies log-softmax over the symbol axis and validates shapes. raw_logits
// is a flat (T, U+1, V+1) row-major tensor; the u axis must match
// |targets| + 1.
inline LogitLattice build_lattice(const std::vector<double>& raw_logits, int frames,
                                  int label_rows, int symbols,
                                  const std::vector<int>& targets) {
  if (frames < 1) throw DimensionError("build_lattice: frame count must be >= 1");
  if (symbols < 2) throw DimensionError("build_lattice: need blank plus at least one label");
  if (label_rows != static_cast<int>(targets.size()) + 1)
    throw DimensionError("build_lattice: u axis has length " + std::to_string(label_rows) +
                         ", expected |targets|+1 = " + std::to_string(targets.size() + 1));
  if (raw_logits.size() != static_cast<std::size_t>(frames) * label_rows * symbols)
    throw DimensionError("build_lattice: tensor size does not match (T, U+1, V+1)");

  LogitLattice lat;
  lat.frames = frames;
  lat.label_len = static_cast<int>(targets.size());
  lat.vocab = symbols - 1;
  lat.log_probs.resize(raw_logits.size());

  const int k_n = symbols;
  for (std::size_t base = 0; base < raw_logits.size(); base += k_n) {
    double m = raw_logits[base];
    for (int k = 1; k < k_n; ++k) m = std::max(m, raw_logits[base + k]);
    if (!std::isfinite(m))
      throw NumericError("build_lattice: non-finite raw logit");
    double s = 0.0;
    for (int k = 0; k < k_n; ++k) {
      double v = raw_logits[base + k];
      if (!std::isfinite(v)) throw NumericError("build_lattice: non-finite raw logit");
      s += std::exp(v - m);
    }
    const double lse = m + std::log(s);
    for (int k = 0; k < k_n; ++k) lat.log_probs[base + k] = raw_logits[base + k] - lse;
  }
  return lat;
}

// Forward-backward over the lattice. alpha(t,u) holds the log-probability of
// emitting targets[0..u) within frames 0..t (arriving at node (t,u) before
// any emission there); beta(t,u) holds the completion log-probability from
// (t,u) inclusive of its own emissions. log Pr(targets | lattice) =
// alpha(T-1, U) + log_prob(T-1, U, blank) = beta(0, 0).
inline AlphaBeta forward_backward(const LogitLattice& lat, const std::vector<int>& targets) {
  if (lat.frames < 1) throw DimensionError("forward_backward: T must be >= 1");
  if (static_cast<int>(targets.size()) != lat.label_len)
    throw DimensionError("forward_backward: targets do not match lattice label length");
  detail::check_targets(targets, lat.vocab);

  const int T = lat.frames;
  const int U = lat.label_len;

  AlphaBeta ab;
  ab.alpha = Matrix(T, U + 1);
  ab.beta = Matrix(T, U + 1);
  std::fill(ab.alpha.data.begin(), ab.alpha.data.end(), kLogZero);
  std::fill(ab.beta.data.begin(), ab.beta.data.end(), kLogZero);

  ab.alpha.at(0, 0) = 0.0;
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) continue;
      double from_blank = (t > 0) ? ab.alpha.at(t - 1, u) + lat.at(t - 1, u, 0) : kLogZero;
      double from_label =
          (u > 0) ? ab.alpha.at(t, u - 1) + lat.at(t, u - 1, targets[u - 1]) : kLogZero;
      ab.alpha.at(t, u) = log_sum_exp(from_blank, from_label);
    }
  }

  for (int t = T - 1; t >= 0; --t) {
    for (int u = U; u >= 0; --u) {
      double blank_term;
      if (t == T - 1) {
        blank_term = (u == U) ? lat.at(t, u, 0) : kLogZero;
      } else {
        blank_term = lat.at(t, u, 0) + ab.beta.at(t + 1, u);
      }
      double label_term =
          (u < U) ? lat.at(t, u, targets[u]) + ab.beta.at(t, u + 1) : kLogZero;
      ab.beta.at(t, u) = log_sum_exp(blank_term, label_term);
    }
  }

  ab.log_seq_prob = ab.alpha.at(T - 1, U) + lat.at(T - 1, U, 0);
  return ab;
}

// Negative log probability of the ground-truth sequence.
inline double log_loss(const LogitLattice& lat, const std::vector<int>& targets) {
  return -forward_backward(lat, targets).log_seq_prob;
}

// Gradient of log_loss with respect to the raw (pre-softmax) logits,
// assembled from node and edge occupancies:
//   d loss / d logit(t,u,k) = softmax(t,u,k) * occ(t,u) - gamma(t,u,k)
// where occ is the node posterior and gamma the posterior mass of the edge
// leaving (t,u) with symbol k. Rows sum to zero per node.
inline std::vector<double> log_loss_grad(const LogitLattice& lat,
                                         const std::vector<int>& targets,
                                         const AlphaBeta* precomputed = nullptr) {
  AlphaBeta local;
  const AlphaBeta& ab = precomputed ? *precomputed : (local = forward_backward(lat, targets));

  const int T = lat.frames;
  const int U = lat.label_len;
  const int K = lat.vocab + 1;
  const double log_z = ab.log_seq_prob;
  if (is_log_zero(log_z))
    throw NumericError("log_loss_grad: sequence has zero probability");

  std::vector<double> grad(lat.log_probs.size(), 0.0);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const double occ = exp_log(ab.alpha.at(t, u) + ab.beta.at(t, u) - log_z);
      const double* lp = lat.node(t, u);
      double* g = grad.data() + lat.index(t, u, 0);
      for (int k = 0; k < K; ++k) g[k] = occ * std::exp(lp[k]);

      // blank edge; at t = T-1 it only completes from (T-1, U)
      const double beta_next =
          (t == T - 1) ? (u == U ? 0.0 : kLogZero) : ab.beta.at(t + 1, u);
      g[0] -= exp_log(ab.alpha.at(t, u) + lp[0] + beta_next - log_z);

      // label edge
      if (u < U) {
        const int k = targets[u];
        g[k] -= exp_log(ab.alpha.at(t, u) + lp[k] + ab.beta.at(t, u + 1) - log_z);
      }
    }
  }
  return grad;
}

}  // namespace tlab

#endif  // TLAB_TRANSDUCER_HPP_
