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
// Mini-batch training for log loss and MWER with Adam, segmentation-regime
// selection, and the two-stage recipe (log loss on long segments, then MWER
// fine-tuning on raw segments, full-model or decoder-only).
//
// The MWER path decodes Beam-N with the model's own prediction history,
// scores hypotheses against the reference, and assembles parameter
// gradients as sum_i dLmwer/dlp_i * dlp_i/dtheta, where each dlp_i/dtheta
// comes from an exact rescoring lattice that teacher-forces hypothesis i.

#ifndef TLAB_TRAINER_HPP_
#define TLAB_TRAINER_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "tlab/checkpoint.hpp"
#include "tlab/decoder.hpp"
#include "tlab/errors.hpp"
#include "tlab/eval.hpp"
#include "tlab/model.hpp"
#include "tlab/mwer.hpp"
#include "tlab/rng.hpp"
#include "tlab/segmenter.hpp"
#include "tlab/transducer.hpp"

namespace tlab {

// ---------------------------------------------------------------------------
// Adam

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  long step = 0;
  ModelParams m;
  ModelParams v;

  static AdamState zeros(const ModelDims& dims) {
    return AdamState{0, make_zero_params(dims), make_zero_params(dims)};
  }
};

enum class Freeze { kNone, kEncoder };

inline Freeze freeze_from_name(const std::string& name) {
  if (name == "none") return Freeze::kNone;
  if (name == "encoder") return Freeze::kEncoder;
  throw ConfigError("unknown freeze mode '" + name + "'");
}

// Standard Adam with bias correction. Frozen groups are left untouched,
// moments included. Returns false (and changes nothing) if any gradient
// entry is non-finite.
inline bool adam_step(AdamState& state, ModelParams& params, const ModelParams& grads,
                      const AdamHyper& hyper, Freeze freeze = Freeze::kNone) {
  ModelParams& g_mut = const_cast<ModelParams&>(grads);
  for (const TensorRef& t : param_tensors(g_mut))
    for (double v : *t.data)
      if (!std::isfinite(v)) return false;

  state.step += 1;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));

  auto p_refs = param_tensors(params);
  auto g_refs = param_tensors(g_mut);
  auto m_refs = param_tensors(state.m);
  auto v_refs = param_tensors(state.v);
  for (std::size_t i = 0; i < p_refs.size(); ++i) {
    if (freeze == Freeze::kEncoder && p_refs[i].encoder_group) continue;
    std::vector<double>& p = *p_refs[i].data;
    const std::vector<double>& g = *g_refs[i].data;
    std::vector<double>& m = *m_refs[i].data;
    std::vector<double>& v = *v_refs[i].data;
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = hyper.beta1 * m[j] + (1.0 - hyper.beta1) * g[j];
      v[j] = hyper.beta2 * v[j] + (1.0 - hyper.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      p[j] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Config

struct TrainConfig {
  std::string loss = "log";    // log | mwer
  std::string regime = "raw";  // raw | short | medium | long
  double lambda = 0.03;        // MWER interpolation; 0.003 full fine-tune, 0 decoder-only
  int beam_n = 4;
  int batch_size = 16;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int max_steps = 500;
  int eval_every = 0;  // 0: evaluate at the final step only
  std::string freeze = "none";
  std::uint64_t seed = 1;
  std::string init_checkpoint;
  bool exact_rescore = false;  // score MWER hypotheses by full marginalization
  int max_syms_per_frame = kDefaultMaxSymsPerFrame;
  double frame_rate = 20.0;
  int threads = 1;  // >1: data-parallel batch, deterministic fixed-order reduction

  void validate() const {
    if (loss != "log" && loss != "mwer") throw ConfigError("loss must be 'log' or 'mwer'");
    SegRegime::from_name(regime);
    freeze_from_name(freeze);
    if (lambda < 0) throw ConfigError("lambda must be >= 0");
    if (beam_n < 1) throw ConfigError("beam_n must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
    if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
    if (eval_every < 0) throw ConfigError("eval_every must be >= 0");
    if (max_syms_per_frame < 1) throw ConfigError("max_syms_per_frame must be >= 1");
    if (frame_rate <= 0) throw ConfigError("frame_rate must be > 0");
    if (threads < 1) throw ConfigError("threads must be >= 1");
  }
};

// Flat key=value text; '#' starts a comment line; unknown keys are rejected.
inline void apply_config_entry(TrainConfig& cfg, const std::string& key,
                               const std::string& value) {
  auto as_int = [&](const std::string& v) {
    try {
      std::size_t pos = 0;
      const long x = std::stol(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return static_cast<int>(x);
    } catch (const std::exception&) {
      throw ConfigError("bad integer for key '" + key + "': '" + v + "'");
    }
  };
  auto as_double = [&](const std::string& v) {
    try {
      std::size_t pos = 0;
      const double x = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("bad number for key '" + key + "': '" + v + "'");
    }
  };
  auto as_bool = [&](const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad boolean for key '" + key + "': '" + v + "'");
  };

  if (key == "loss") cfg.loss = value;
  else if (key == "regime") cfg.regime = value;
  else if (key == "lambda") cfg.lambda = as_double(value);
  else if (key == "beam_n") cfg.beam_n = as_int(value);
  else if (key == "batch_size") cfg.batch_size = as_int(value);
  else if (key == "learning_rate") cfg.learning_rate = as_double(value);
  else if (key == "adam_beta1") cfg.adam_beta1 = as_double(value);
  else if (key == "adam_beta2") cfg.adam_beta2 = as_double(value);
  else if (key == "adam_epsilon") cfg.adam_epsilon = as_double(value);
  else if (key == "max_steps") cfg.max_steps = as_int(value);
  else if (key == "eval_every") cfg.eval_every = as_int(value);
  else if (key == "freeze") cfg.freeze = value;
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "init_checkpoint") cfg.init_checkpoint = value;
  else if (key == "exact_rescore") cfg.exact_rescore = as_bool(value);
  else if (key == "max_syms_per_frame") cfg.max_syms_per_frame = as_int(value);
  else if (key == "frame_rate") cfg.frame_rate = as_double(value);
  else if (key == "threads") cfg.threads = as_int(value);
  else throw ConfigError("unknown config key '" + key + "'");
}

inline TrainConfig parse_train_config(std::istream& in) {
  TrainConfig cfg;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string s = line;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = s.find_last_not_of(" \t\r");
    s = s.substr(first, last - first + 1);
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + " is not key=value: '" + s +
                        "'");
    auto trim = [](std::string v) {
      const auto a = v.find_first_not_of(" \t");
      const auto b = v.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    apply_config_entry(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return cfg;
}

inline TrainConfig load_train_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  return parse_train_config(in);
}

// ---------------------------------------------------------------------------
// Metrics

struct StepRecord {
  int step = 0;
  double loss = 0.0;
  double wall_s = 0.0;
};

struct EvalRecord {
  int step = 0;
  std::string test_set;
  double wer = 0.0;
  long deletions = 0;
  long substitutions = 0;
  long insertions = 0;
  long ref_words = 0;
};

struct MetricsLog {
  std::vector<StepRecord> steps;
  std::vector<EvalRecord> evals;
  long skipped_examples = 0;  // MWER decode failures
  long skipped_updates = 0;   // non-finite batch gradients
};

// Wall-clock fields vary run to run; determinism is over everything else.
inline bool metrics_deterministic_equal(const MetricsLog& a, const MetricsLog& b) {
  if (a.steps.size() != b.steps.size() || a.evals.size() != b.evals.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i)
    if (a.steps[i].step != b.steps[i].step || a.steps[i].loss != b.steps[i].loss) return false;
  for (std::size_t i = 0; i < a.evals.size(); ++i) {
    const EvalRecord &x = a.evals[i], &y = b.evals[i];
    if (x.step != y.step || x.test_set != y.test_set || x.wer != y.wer ||
        x.deletions != y.deletions || x.substitutions != y.substitutions ||
        x.insertions != y.insertions || x.ref_words != y.ref_words)
      return false;
  }
  return a.skipped_examples == b.skipped_examples && a.skipped_updates == b.skipped_updates;
}

inline void write_metrics_csv(const MetricsLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open metrics CSV for writing: " + path);
  out << "kind,step,loss,wall_s,test_set,wer,del,sub,ins,ref_words\n";
  char buf[128];
  for (const StepRecord& s : log.steps) {
    std::snprintf(buf, sizeof(buf), "step,%d,%.9g,%.3f,,,,,,\n", s.step, s.loss, s.wall_s);
    out << buf;
  }
  for (const EvalRecord& e : log.evals) {
    std::snprintf(buf, sizeof(buf), "eval,%d,,,%s,%.6f,%ld,%ld,%ld,%ld\n", e.step,
                  e.test_set.c_str(), e.wer, e.deletions, e.substitutions, e.insertions,
                  e.ref_words);
    out << buf;
  }
  if (!out) throw IoError("write failed for metrics CSV: " + path);
}

// ---------------------------------------------------------------------------
// Example preparation

inline std::vector<TrainingExample> prepare_examples(const std::string& manifest_path,
                                                     const SegRegime& regime,
                                                     double frame_rate) {
  const std::vector<SegmentAnnotation> rows = load_manifest(manifest_path);
  const std::vector<MergedUtterance> merged = merge_segments(rows, regime);
  FeatureStore store(manifest_path, frame_rate);
  std::vector<TrainingExample> examples;
  examples.reserve(merged.size());
  for (const MergedUtterance& m : merged)
    examples.push_back(cut_features(store.recording(m.features_path), m, frame_rate));
  return examples;
}

// ---------------------------------------------------------------------------
// Per-example gradients

struct ExampleGrad {
  ModelParams grads;
  double loss_value = 0.0;
  bool ok = false;
};

inline ExampleGrad log_loss_example_grad(const ModelParams& params, const TrainingExample& ex) {
  ExampleGrad out;
  LatticeForward f = forward_lattice(params, ex);
  LogitLattice lat = build_lattice(f.raw_logits, f.frames, f.label_rows, f.symbols, ex.targets);
  AlphaBeta ab = forward_backward(lat, ex.targets);
  std::vector<double> dlogits = log_loss_grad(lat, ex.targets, &ab);
  out.grads = backward_params(params, ex, f, dlogits);
  out.loss_value = -ab.log_seq_prob;
  out.ok = true;
  return out;
}

inline ExampleGrad mwer_example_grad(const ModelParams& params, const TrainingExample& ex,
                                     int beam_n, double lambda, bool exact_rescore,
                                     int max_syms_per_frame) {
  ExampleGrad out;
  NBestList nbest = beam_search(params, ex.features, beam_n, max_syms_per_frame);
  if (nbest.hypotheses.empty()) return out;  // decode failure; caller skips and counts

  // Exact-rescoring lattices per hypothesis drive the parameter gradients
  // either way; the flag additionally replaces the beam scores used for the
  // renormalized probabilities.
  struct Rescored {
    TrainingExample ex;
    LatticeForward fwd;
    LogitLattice lat;
    AlphaBeta ab;
  };
  std::vector<Rescored> rescored;

  if (exact_rescore) {
    for (Hypothesis& h : nbest.hypotheses) {
      Rescored r;
      r.ex.features = ex.features;
      r.ex.targets = h.tokens;
      r.fwd = forward_lattice(params, r.ex);
      r.lat = build_lattice(r.fwd.raw_logits, r.fwd.frames, r.fwd.label_rows, r.fwd.symbols,
                            r.ex.targets);
      r.ab = forward_backward(r.lat, r.ex.targets);
      h.log_prob = r.ab.log_seq_prob;
      rescored.push_back(std::move(r));
    }
  }

  const MwerResult mwer = mwer_loss(nbest, tokens_to_words(ex.targets));

  out.grads = make_zero_params(params.dims);
  auto total_refs = param_tensors(out.grads);
  for (std::size_t i = 0; i < mwer.hypotheses.size(); ++i) {
    const double w = mwer.grad_wrt_log_probs[i];
    if (w == 0.0) continue;
    ModelParams hyp_grad;  // gradient of -log Pr(y_i | x)
    if (exact_rescore) {
      // Hypothesis order is preserved by mwer_loss when the beam already
      // deduplicated; look the lattice up by token sequence to stay safe.
      const Rescored* match = nullptr;
      for (const Rescored& r : rescored)
        if (r.ex.targets == mwer.hypotheses[i].tokens) {
          match = &r;
          break;
        }
      if (!match) throw NumericError("mwer: rescored hypothesis lookup failed");
      std::vector<double> dlogits = log_loss_grad(match->lat, match->ex.targets, &match->ab);
      hyp_grad = backward_params(params, match->ex, match->fwd, dlogits);
    } else {
      TrainingExample hyp_ex;
      hyp_ex.features = ex.features;
      hyp_ex.targets = mwer.hypotheses[i].tokens;
      LatticeForward f = forward_lattice(params, hyp_ex);
      LogitLattice lat =
          build_lattice(f.raw_logits, f.frames, f.label_rows, f.symbols, hyp_ex.targets);
      AlphaBeta ab = forward_backward(lat, hyp_ex.targets);
      std::vector<double> dlogits = log_loss_grad(lat, hyp_ex.targets, &ab);
      hyp_grad = backward_params(params, hyp_ex, f, dlogits);
    }
    auto hyp_refs = param_tensors(hyp_grad);
    for (std::size_t t = 0; t < total_refs.size(); ++t)
      axpy(-w, *hyp_refs[t].data, *total_refs[t].data);  // dlp/dtheta = -dloss/dtheta
  }

  double log_loss_value = 0.0;
  if (lambda > 0.0) {
    ExampleGrad ll = log_loss_example_grad(params, ex);
    log_loss_value = ll.loss_value;
    auto ll_refs = param_tensors(ll.grads);
    for (std::size_t t = 0; t < total_refs.size(); ++t)
      axpy(lambda, *ll_refs[t].data, *total_refs[t].data);
  }
  out.loss_value = interpolated_loss_grad(mwer, log_loss_value, lambda).composite;
  out.ok = true;
  return out;
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainResult {
  ModelParams final_params;
  ModelParams best_params;
  int best_step = 0;
  double best_wer = std::numeric_limits<double>::infinity();
  MetricsLog metrics;
  double wall_s = 0.0;
  int steps_run = 0;
};

namespace detail {

struct TestSet {
  std::string name;
  std::vector<SegmentAnnotation> rows;
  FeatureStore store;
};

inline std::vector<TestSet> open_test_sets(const std::vector<std::string>& manifests,
                                           double frame_rate) {
  std::vector<TestSet> sets;
  for (const std::string& path : manifests)
    sets.push_back(TestSet{std::filesystem::path(path).filename().string(),
                           load_manifest(path), FeatureStore(path, frame_rate)});
  return sets;
}

}  // namespace detail

inline TrainResult train(const TrainConfig& cfg, const std::string& train_manifest,
                         const std::vector<std::string>& test_manifests,
                         const std::string& out_dir = "") {
  cfg.validate();
  namespace fs = std::filesystem;
  if (!out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
  }

  ModelParams params = cfg.init_checkpoint.empty()
                           ? init_params(cfg.seed, ModelDims{})
                           : load_checkpoint(cfg.init_checkpoint).params;
  const Freeze freeze = freeze_from_name(cfg.freeze);

  std::vector<TrainingExample> examples =
      prepare_examples(train_manifest, SegRegime::from_name(cfg.regime), cfg.frame_rate);
  if (examples.empty()) throw ConfigError("training set is empty after segmentation");

  std::vector<detail::TestSet> test_sets = detail::open_test_sets(test_manifests, cfg.frame_rate);

  AdamState adam = AdamState::zeros(params.dims);
  const AdamHyper hyper{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon};

  TrainResult result;
  auto t0 = std::chrono::steady_clock::now();
  auto wall = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  auto rng = make_rng(cfg.seed, 0xba7c4ULL);  // batch-order stream
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;
  auto next_index = [&]() {
    if (cursor == order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    return order[cursor++];
  };

  auto compute_example = [&](const TrainingExample& ex) -> ExampleGrad {
    if (cfg.loss == "log") return log_loss_example_grad(params, ex);
    return mwer_example_grad(params, ex, cfg.beam_n, cfg.lambda, cfg.exact_rescore,
                             cfg.max_syms_per_frame);
  };

  auto run_eval = [&](int step) {
    for (std::size_t s = 0; s < test_sets.size(); ++s) {
      DecodeFn fn = [&](const Matrix& f) {
        return greedy_decode(params, f, cfg.max_syms_per_frame).tokens;
      };
      EvalReport rep = evaluate_with(fn, test_sets[s].rows, test_sets[s].store);
      result.metrics.evals.push_back(EvalRecord{step, test_sets[s].name, rep.wer_percent(),
                                                rep.aggregate.deletions,
                                                rep.aggregate.substitutions,
                                                rep.aggregate.insertions,
                                                rep.aggregate.ref_words});
      if (s == 0 && rep.wer_percent() < result.best_wer) {
        result.best_wer = rep.wer_percent();
        result.best_step = step;
        result.best_params = params;
      }
    }
    if (!out_dir.empty()) {
      char name[64];
      std::snprintf(name, sizeof(name), "step_%06d.ckpt", step);
      save_checkpoint(params, {}, (fs::path(out_dir) / name).string());
    }
  };

  for (int step = 1; step <= cfg.max_steps; ++step) {
    std::vector<const TrainingExample*> batch(cfg.batch_size);
    for (int b = 0; b < cfg.batch_size; ++b) batch[b] = &examples[next_index()];

    std::vector<ExampleGrad> grads(batch.size());
    if (cfg.threads <= 1) {
      for (std::size_t b = 0; b < batch.size(); ++b) grads[b] = compute_example(*batch[b]);
    } else {
      std::atomic<std::size_t> next{0};
      auto worker = [&]() {
        while (true) {
          const std::size_t b = next.fetch_add(1);
          if (b >= batch.size()) break;
          grads[b] = compute_example(*batch[b]);
        }
      };
      std::vector<std::thread> pool;
      const int n_threads = std::min<int>(cfg.threads, static_cast<int>(batch.size()));
      pool.reserve(n_threads);
      for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    // Fixed-order reduction keyed by batch index keeps the result identical
    // across thread counts.
    ModelParams batch_grad = make_zero_params(params.dims);
    auto total_refs = param_tensors(batch_grad);
    int n_ok = 0;
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < grads.size(); ++b) {
      if (!grads[b].ok) {
        result.metrics.skipped_examples += 1;
        continue;
      }
      ++n_ok;
      loss_sum += grads[b].loss_value;
      auto refs = param_tensors(grads[b].grads);
      for (std::size_t t = 0; t < total_refs.size(); ++t)
        axpy(1.0, *refs[t].data, *total_refs[t].data);
    }

    double batch_loss = std::numeric_limits<double>::quiet_NaN();
    if (n_ok > 0) {
      const double scale = 1.0 / n_ok;
      for (const TensorRef& t : total_refs)
        for (double& v : *t.data) v *= scale;
      batch_loss = loss_sum / n_ok;
      if (!adam_step(adam, params, batch_grad, hyper, freeze))
        result.metrics.skipped_updates += 1;
    } else {
      result.metrics.skipped_updates += 1;
    }
    result.metrics.steps.push_back(StepRecord{step, batch_loss, wall()});

    if ((cfg.eval_every > 0 && step % cfg.eval_every == 0) || step == cfg.max_steps)
      run_eval(step);
  }

  result.final_params = params;
  if (result.metrics.evals.empty() || !std::isfinite(result.best_wer)) {
    result.best_params = params;
    result.best_step = cfg.max_steps;
  }
  result.wall_s = wall();
  result.steps_run = cfg.max_steps;

  if (!out_dir.empty()) {
    save_checkpoint(result.final_params, {}, (fs::path(out_dir) / "final.ckpt").string());
    save_checkpoint(result.best_params, {}, (fs::path(out_dir) / "best.ckpt").string());
    write_metrics_csv(result.metrics, (fs::path(out_dir) / "metrics.csv").string());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Two-stage recipe: stage 1 log loss (typically on long segments), stage 2
// MWER fine-tuning (typically on raw segments) initialized from the stage-1
// best checkpoint. Stage 2 may freeze the encoder (decoder-only).

struct TwoStageResult {
  TrainResult stage1;
  TrainResult stage2;
};

inline TwoStageResult two_stage(TrainConfig stage1, TrainConfig stage2,
                                const std::string& train_manifest,
                                const std::vector<std::string>& test_manifests,
                                const std::string& out_dir) {
  if (stage1.loss != "log") throw ConfigError("two_stage: stage1 loss must be 'log'");
  if (stage2.loss != "mwer") throw ConfigError("two_stage: stage2 loss must be 'mwer'");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  TwoStageResult result;
  result.stage1 = train(stage1, train_manifest, test_manifests,
                        (fs::path(out_dir) / "stage1").string());
  const std::string stage1_ckpt = (fs::path(out_dir) / "stage1" / "best.ckpt").string();

  if (!stage2.init_checkpoint.empty()) {
    const Checkpoint user = load_checkpoint(stage2.init_checkpoint);
    if (!(user.params.dims == result.stage1.best_params.dims))
      throw ConfigError("two_stage: stage2 init_checkpoint dims are incompatible with stage 1");
  }
  stage2.init_checkpoint = stage1_ckpt;
  result.stage2 = train(stage2, train_manifest, test_manifests,
                        (fs::path(out_dir) / "stage2").string());
  return result;
}

}  // namespace tlab

#endif  // TLAB_TRAINER_HPP_
