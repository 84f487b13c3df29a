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
// A small explicitly-differentiated transducer: tanh-recurrent encoder,
// embedding + tanh-recurrent prediction network, and a concat/affine/tanh
// joint. Backpropagation is hand-derived; no autograd.

#ifndef TLAB_MODEL_HPP_
#define TLAB_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tlab/errors.hpp"
#include "tlab/linalg.hpp"
#include "tlab/rng.hpp"

namespace tlab {

struct ModelDims {
  int feat_dim = 8;    // F
  int enc_dim = 32;    // D_e
  int pred_dim = 32;   // D_p
  int joint_dim = 32;  // D_j
  int vocab = 12;      // V, excluding blank

  bool operator==(const ModelDims&) const = default;
};

// One (feature frames, target tokens) pair cut from a recording.
struct TrainingExample {
  Matrix features;           // T x F
  std::vector<int> targets;  // U values in 1..V
  double duration_s = 0.0;
  std::string recording_id;
  std::vector<int> segment_indices;
};

// Parameter groups. The "decoder" in the two-stage recipe is prediction +
// joint + output; the encoder group is everything prefixed enc_.
struct ModelParams {
  ModelDims dims;
  Matrix enc_wx;    // D_e x F
  Matrix enc_wh;    // D_e x D_e
  Vector enc_b;     // D_e
  Matrix pred_emb;  // (V+1) x D_p, row 0 is the start token
  Matrix pred_wx;   // D_p x D_p
  Matrix pred_wh;   // D_p x D_p
  Vector pred_b;    // D_p
  Matrix joint_w;   // D_j x (D_e + D_p)
  Vector joint_b;   // D_j
  Matrix out_w;     // (V+1) x D_j
  Vector out_b;     // V+1
};

struct TensorRef {
  const char* name;
  std::vector<double>* data;
  bool encoder_group;
};

inline std::vector<TensorRef> param_tensors(ModelParams& p) {
  return {
      {"enc_wx", &p.enc_wx.data, true},    {"enc_wh", &p.enc_wh.data, true},
      {"enc_b", &p.enc_b, true},           {"pred_emb", &p.pred_emb.data, false},
      {"pred_wx", &p.pred_wx.data, false}, {"pred_wh", &p.pred_wh.data, false},
      {"pred_b", &p.pred_b, false},        {"joint_w", &p.joint_w.data, false},
      {"joint_b", &p.joint_b, false},      {"out_w", &p.out_w.data, false},
      {"out_b", &p.out_b, false},
  };
}

inline std::size_t param_count(const ModelDims& d) {
  const std::size_t F = d.feat_dim, De = d.enc_dim, Dp = d.pred_dim, Dj = d.joint_dim,
                    K = d.vocab + 1;
  return De * F + De * De + De + K * Dp + Dp * Dp + Dp * Dp + Dp + Dj * (De + Dp) + Dj +
         K * Dj + K;
}

inline ModelParams make_zero_params(const ModelDims& d) {
  if (d.feat_dim < 1 || d.enc_dim < 1 || d.pred_dim < 1 || d.joint_dim < 1 || d.vocab < 1)
    throw DimensionError("model dims must all be positive");
  ModelParams p;
  p.dims = d;
  p.enc_wx = Matrix(d.enc_dim, d.feat_dim);
  p.enc_wh = Matrix(d.enc_dim, d.enc_dim);
  p.enc_b = Vector(d.enc_dim, 0.0);
  p.pred_emb = Matrix(d.vocab + 1, d.pred_dim);
  p.pred_wx = Matrix(d.pred_dim, d.pred_dim);
  p.pred_wh = Matrix(d.pred_dim, d.pred_dim);
  p.pred_b = Vector(d.pred_dim, 0.0);
  p.joint_w = Matrix(d.joint_dim, d.enc_dim + d.pred_dim);
  p.joint_b = Vector(d.joint_dim, 0.0);
  p.out_w = Matrix(d.vocab + 1, d.joint_dim);
  p.out_b = Vector(d.vocab + 1, 0.0);
  return p;
}

// Deterministic init: weight matrices uniform in [-s, s] with
// s = 1/sqrt(fan-in); biases start at zero.
inline ModelParams init_params(std::uint64_t seed, const ModelDims& d) {
  ModelParams p = make_zero_params(d);
  auto rng = make_rng(seed);
  auto fill = [&](Matrix& m) {
    const double s = 1.0 / std::sqrt(static_cast<double>(m.cols));
    std::uniform_real_distribution<double> dist(-s, s);
    for (double& w : m.data) w = dist(rng);
  };
  fill(p.enc_wx);
  fill(p.enc_wh);
  fill(p.pred_emb);
  fill(p.pred_wx);
  fill(p.pred_wh);
  fill(p.joint_w);
  fill(p.out_w);
  return p;
}

// ---------------------------------------------------------------------------
// Forward pieces. These are also the decoding surface: beam search advances
// prediction states one token at a time and scores (encoder frame,
// prediction state) pairs through the joint.

inline Matrix encode(const ModelParams& p, const Matrix& features) {
  if (features.cols != p.dims.feat_dim)
    throw DimensionError("encode: feature dim " + std::to_string(features.cols) +
                         " does not match model feat_dim " + std::to_string(p.dims.feat_dim));
  const int T = features.rows;
  const int De = p.dims.enc_dim;
  Matrix h(T, De);
  Vector pre(De);
  for (int t = 0; t < T; ++t) {
    mat_vec(p.enc_wx, features.row_span(t), pre);
    if (t > 0) {
      const double* prev = h.row(t - 1);
      for (int r = 0; r < De; ++r) {
        const double* wr = p.enc_wh.row(r);
        double s = pre[r];
        for (int c = 0; c < De; ++c) s += wr[c] * prev[c];
        pre[r] = s;
      }
    }
    double* ht = h.row(t);
    for (int r = 0; r < De; ++r) ht[r] = std::tanh(pre[r] + p.enc_b[r]);
  }
  return h;
}

// Prediction state after consuming the start token (u = 0).
inline Vector pred_start(const ModelParams& p) {
  const int Dp = p.dims.pred_dim;
  Vector g(Dp);
  Vector pre(Dp);
  mat_vec(p.pred_wx, p.pred_emb.row_span(0), pre);
  for (int r = 0; r < Dp; ++r) g[r] = std::tanh(pre[r] + p.pred_b[r]);
  return g;
}

inline Vector pred_step(const ModelParams& p, const Vector& g_prev, int token) {
  if (token < 1 || token > p.dims.vocab)
    throw DomainError("pred_step: token " + std::to_string(token) + " outside 1.." +
                      std::to_string(p.dims.vocab));
  const int Dp = p.dims.pred_dim;
  Vector g(Dp);
  Vector pre(Dp);
  mat_vec(p.pred_wx, p.pred_emb.row_span(token), pre);
  for (int r = 0; r < Dp; ++r) {
    const double* wr = p.pred_wh.row(r);
    double s = pre[r];
    for (int c = 0; c < Dp; ++c) s += wr[c] * g_prev[c];
    g[r] = std::tanh(s + p.pred_b[r]);
  }
  return g;
}

// Encoder-side half of the joint pre-activation, bias folded in.
inline Vector joint_enc_proj(const ModelParams& p, std::span<const double> h) {
  const int Dj = p.dims.joint_dim;
  const int De = p.dims.enc_dim;
  Vector a(Dj);
  for (int r = 0; r < Dj; ++r) {
    const double* wr = p.joint_w.row(r);
    double s = p.joint_b[r];
    for (int c = 0; c < De; ++c) s += wr[c] * h[c];
    a[r] = s;
  }
  return a;
}

// Prediction-side half of the joint pre-activation.
inline Vector joint_pred_proj(const ModelParams& p, std::span<const double> g) {
  const int Dj = p.dims.joint_dim;
  const int De = p.dims.enc_dim;
  const int Dp = p.dims.pred_dim;
  Vector b(Dj);
  for (int r = 0; r < Dj; ++r) {
    const double* wr = p.joint_w.row(r) + De;
    double s = 0.0;
    for (int c = 0; c < Dp; ++c) s += wr[c] * g[c];
    b[r] = s;
  }
  return b;
}

// Raw output logits for one lattice node given both joint halves.
inline void joint_logits(const ModelParams& p, std::span<const double> enc_proj,
                         std::span<const double> pred_proj, std::span<double> logits_out) {
  const int Dj = p.dims.joint_dim;
  const int K = p.dims.vocab + 1;
  Vector z(Dj);
  for (int r = 0; r < Dj; ++r) z[r] = std::tanh(enc_proj[r] + pred_proj[r]);
  for (int k = 0; k < K; ++k) {
    const double* wr = p.out_w.row(k);
    double s = p.out_b[k];
    for (int c = 0; c < Dj; ++c) s += wr[c] * z[c];
    logits_out[k] = s;
  }
}

// Log-softmax over joint_logits; the per-node decoding score.
inline Vector joint_log_probs(const ModelParams& p, std::span<const double> enc_proj,
                              std::span<const double> pred_proj) {
  const int K = p.dims.vocab + 1;
  Vector logits(K);
  joint_logits(p, enc_proj, pred_proj, logits);
  double m = logits[0];
  for (int k = 1; k < K; ++k) m = std::max(m, logits[k]);
  double s = 0.0;
  for (int k = 0; k < K; ++k) s += std::exp(logits[k] - m);
  const double lse = m + std::log(s);
  for (int k = 0; k < K; ++k) logits[k] -= lse;
  return logits;
}

// ---------------------------------------------------------------------------
// Full-lattice forward with cached activations for backprop.

struct ForwardCache {
  Matrix enc_h;                 // T x D_e
  Matrix pred_g;                // (U+1) x D_p, teacher-forced on targets
  std::vector<double> joint_z;  // T * (U+1) * D_j tanh outputs
};

struct LatticeForward {
  std::vector<double> raw_logits;  // T * (U+1) * (V+1)
  int frames = 0;
  int label_rows = 0;  // U + 1
  int symbols = 0;     // V + 1
  ForwardCache cache;
};

// Teacher-forced prediction states g_0..g_U for a target sequence.
inline Matrix pred_states(const ModelParams& p, const std::vector<int>& targets) {
  const int U = static_cast<int>(targets.size());
  Matrix g(U + 1, p.dims.pred_dim);
  Vector cur = pred_start(p);
  std::copy(cur.begin(), cur.end(), g.row(0));
  for (int u = 1; u <= U; ++u) {
    cur = pred_step(p, cur, targets[u - 1]);
    std::copy(cur.begin(), cur.end(), g.row(u));
  }
  return g;
}

inline LatticeForward forward_lattice(const ModelParams& p, const TrainingExample& ex) {
  if (ex.features.rows < 1) throw DimensionError("forward_lattice: empty feature sequence");
  const int T = ex.features.rows;
  const int U = static_cast<int>(ex.targets.size());
  const int Dj = p.dims.joint_dim;
  const int K = p.dims.vocab + 1;

  LatticeForward f;
  f.frames = T;
  f.label_rows = U + 1;
  f.symbols = K;
  f.cache.enc_h = encode(p, ex.features);
  f.cache.pred_g = pred_states(p, ex.targets);

  // Precompute both joint halves once per frame / label position.
  Matrix enc_proj(T, Dj);
  for (int t = 0; t < T; ++t) {
    Vector a = joint_enc_proj(p, f.cache.enc_h.row_span(t));
    std::copy(a.begin(), a.end(), enc_proj.row(t));
  }
  Matrix pred_proj(U + 1, Dj);
  for (int u = 0; u <= U; ++u) {
    Vector b = joint_pred_proj(p, f.cache.pred_g.row_span(u));
    std::copy(b.begin(), b.end(), pred_proj.row(u));
  }

  f.cache.joint_z.resize(static_cast<std::size_t>(T) * (U + 1) * Dj);
  f.raw_logits.resize(static_cast<std::size_t>(T) * (U + 1) * K);
  for (int t = 0; t < T; ++t) {
    const double* a = enc_proj.row(t);
    for (int u = 0; u <= U; ++u) {
      const double* b = pred_proj.row(u);
      double* z = f.cache.joint_z.data() + (static_cast<std::size_t>(t) * (U + 1) + u) * Dj;
      for (int r = 0; r < Dj; ++r) z[r] = std::tanh(a[r] + b[r]);
      double* logit = f.raw_logits.data() + (static_cast<std::size_t>(t) * (U + 1) + u) * K;
      for (int k = 0; k < K; ++k) {
        const double* wr = p.out_w.row(k);
        double s = p.out_b[k];
        for (int c = 0; c < Dj; ++c) s += wr[c] * z[c];
        logit[k] = s;
      }
    }
  }
  return f;
}

// Chain rule from d loss / d raw_logits back to every parameter group.
// dlogits has the lattice shape T * (U+1) * (V+1).
inline ModelParams backward_params(const ModelParams& p, const TrainingExample& ex,
                                   const LatticeForward& f, const std::vector<double>& dlogits) {
  const int T = f.frames;
  const int U = f.label_rows - 1;
  const int K = f.symbols;
  const int De = p.dims.enc_dim;
  const int Dp = p.dims.pred_dim;
  const int Dj = p.dims.joint_dim;
  if (dlogits.size() != f.raw_logits.size())
    throw DimensionError("backward_params: dlogits does not match lattice shape");
  if (static_cast<int>(ex.targets.size()) != U)
    throw DimensionError("backward_params: example does not match forward cache");

  ModelParams g = make_zero_params(p.dims);

  // Joint and output layers. dz sums factor by frame (S_t) and by label
  // position (R_u) because h_t does not depend on u and g_u not on t.
  Matrix S(T, Dj);
  Matrix R(U + 1, Dj);
  Vector dz(Dj);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const std::size_t node = static_cast<std::size_t>(t) * (U + 1) + u;
      const double* dl = dlogits.data() + node * K;
      const double* z = f.cache.joint_z.data() + node * Dj;
      bool all_zero = true;
      for (int k = 0; k < K; ++k)
        if (dl[k] != 0.0) {
          all_zero = false;
          break;
        }
      if (all_zero) continue;
      std::fill(dz.begin(), dz.end(), 0.0);
      for (int k = 0; k < K; ++k) {
        const double d = dl[k];
        if (d == 0.0) continue;
        g.out_b[k] += d;
        double* gw = g.out_w.row(k);
        const double* wr = p.out_w.row(k);
        for (int c = 0; c < Dj; ++c) {
          gw[c] += d * z[c];
          dz[c] += d * wr[c];
        }
      }
      double* st = S.row(t);
      double* ru = R.row(u);
      for (int c = 0; c < Dj; ++c) {
        const double v = dz[c] * (1.0 - z[c] * z[c]);
        st[c] += v;
        ru[c] += v;
      }
    }
  }

  Matrix dh(T, De);
  for (int t = 0; t < T; ++t) {
    const double* st = S.row(t);
    for (int r = 0; r < Dj; ++r) {
      if (st[r] == 0.0) continue;
      const double* wr = p.joint_w.row(r);
      g.joint_b[r] += st[r];
      double* gw = g.joint_w.row(r);
      const double* h = f.cache.enc_h.row(t);
      double* dht = dh.row(t);
      for (int c = 0; c < De; ++c) {
        gw[c] += st[r] * h[c];
        dht[c] += st[r] * wr[c];
      }
    }
  }
  Matrix dg(U + 1, Dp);
  for (int u = 0; u <= U; ++u) {
    const double* ru = R.row(u);
    for (int r = 0; r < Dj; ++r) {
      if (ru[r] == 0.0) continue;
      const double* wr = p.joint_w.row(r) + De;
      double* gw = g.joint_w.row(r) + De;
      const double* gu = f.cache.pred_g.row(u);
      double* dgu = dg.row(u);
      for (int c = 0; c < Dp; ++c) {
        gw[c] += ru[r] * gu[c];
        dgu[c] += ru[r] * wr[c];
      }
    }
  }

  // Encoder BPTT.
  Vector dpre(De, 0.0);
  Vector dnext(De, 0.0);
  for (int t = T - 1; t >= 0; --t) {
    const double* ht = f.cache.enc_h.row(t);
    double* dht = dh.row(t);
    if (t < T - 1) mat_tvec_add(p.enc_wh, dnext, std::span<double>(dht, De));
    for (int r = 0; r < De; ++r) dpre[r] = dht[r] * (1.0 - ht[r] * ht[r]);
    outer_add(g.enc_wx, dpre, ex.features.row_span(t));
    if (t > 0) outer_add(g.enc_wh, dpre, f.cache.enc_h.row_span(t - 1));
    axpy(1.0, dpre, g.enc_b);
    dnext = dpre;
  }

  // Prediction-network BPTT; token 0 is the start symbol.
  Vector dpre_p(Dp, 0.0);
  Vector dnext_p(Dp, 0.0);
  for (int u = U; u >= 0; --u) {
    const double* gu = f.cache.pred_g.row(u);
    double* dgu = dg.row(u);
    if (u < U) mat_tvec_add(p.pred_wh, dnext_p, std::span<double>(dgu, Dp));
    for (int r = 0; r < Dp; ++r) dpre_p[r] = dgu[r] * (1.0 - gu[r] * gu[r]);
    const int token = (u == 0) ? 0 : ex.targets[u - 1];
    outer_add(g.pred_wx, dpre_p, p.pred_emb.row_span(token));
    if (u > 0) outer_add(g.pred_wh, dpre_p, f.cache.pred_g.row_span(u - 1));
    axpy(1.0, dpre_p, g.pred_b);
    mat_tvec_add(p.pred_wx, dpre_p, std::span<double>(g.pred_emb.row(token), Dp));
    dnext_p = dpre_p;
  }

  return g;
}

}  // namespace tlab

#endif  // TLAB_MODEL_HPP_
