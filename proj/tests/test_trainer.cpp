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

#include "tlab/trainer.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tlab/synth.hpp"

using namespace tlab;

namespace {

namespace fs = std::filesystem;

ModelDims tiny_dims() { return ModelDims{3, 4, 4, 4, 3}; }

// Tiny corpus shared by the training-loop tests.
struct CorpusFixture {
  std::string dir;
  GeneratedCorpus corpus;

  CorpusFixture() {
    dir = (fs::temp_directory_path() / "tlab_trainer_corpus").string();
    fs::remove_all(dir);
    SynthConfig cfg;
    cfg.seed = 99;
    cfg.n_train_recordings = 2;
    cfg.n_test_recordings = 1;
    cfg.segments_per_recording = 10;
    corpus = generate_corpus(cfg, dir);
  }
};

const CorpusFixture& fixture() {
  static CorpusFixture f;
  return f;
}

TEST(Adam, ZeroGradientsLeaveParamsUnchanged) {
  ModelParams p = init_params(61, tiny_dims());
  ModelParams before = p;
  AdamState st = AdamState::zeros(p.dims);
  ModelParams g = make_zero_params(p.dims);
  ASSERT_TRUE(adam_step(st, p, g, AdamHyper{}));
  auto ra = param_tensors(p), rb = param_tensors(before);
  for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_EQ(*ra[i].data, *rb[i].data);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, FirstStepIsBiasCorrectedUnitUpdate) {
  ModelParams p = make_zero_params(tiny_dims());
  AdamState st = AdamState::zeros(p.dims);
  ModelParams g = make_zero_params(p.dims);
  g.enc_b[0] = 1.0;
  AdamHyper hyper;
  hyper.learning_rate = 0.1;
  ASSERT_TRUE(adam_step(st, p, g, hyper));
  EXPECT_NEAR(p.enc_b[0], -0.1, 1e-6);
  EXPECT_DOUBLE_EQ(p.enc_b[1], 0.0);
  EXPECT_DOUBLE_EQ(p.pred_b[0], 0.0);
}

TEST(Adam, EncoderFreezeKeepsEncoderBitIdentical) {
  ModelParams p = init_params(62, tiny_dims());
  ModelParams before = p;
  AdamState st = AdamState::zeros(p.dims);
  ModelParams g = make_zero_params(p.dims);
  for (const TensorRef& t : param_tensors(g))
    for (double& v : *t.data) v = 0.5;
  for (int i = 0; i < 5; ++i) ASSERT_TRUE(adam_step(st, p, g, AdamHyper{}, Freeze::kEncoder));
  EXPECT_EQ(p.enc_wx.data, before.enc_wx.data);
  EXPECT_EQ(p.enc_wh.data, before.enc_wh.data);
  EXPECT_EQ(p.enc_b, before.enc_b);
  EXPECT_NE(p.joint_w.data, before.joint_w.data);
  EXPECT_NE(p.pred_wx.data, before.pred_wx.data);
}

TEST(Adam, NonFiniteGradientSkipsUpdate) {
  ModelParams p = init_params(63, tiny_dims());
  ModelParams before = p;
  AdamState st = AdamState::zeros(p.dims);
  ModelParams g = make_zero_params(p.dims);
  g.out_b[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_FALSE(adam_step(st, p, g, AdamHyper{}));
  EXPECT_EQ(st.step, 0);
  auto ra = param_tensors(p), rb = param_tensors(before);
  for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_EQ(*ra[i].data, *rb[i].data);
}

TEST(TrainConfig, ParseFlatKeyValue) {
  std::istringstream in(
      "loss = mwer\n"
      "# a comment\n"
      "regime=long\n"
      "lambda = 0.003\n"
      "beam_n=8\n"
      "batch_size = 4\n"
      "max_steps = 50\n"
      "freeze = encoder\n"
      "seed = 17\n"
      "exact_rescore = true\n");
  TrainConfig cfg = parse_train_config(in);
  EXPECT_EQ(cfg.loss, "mwer");
  EXPECT_EQ(cfg.regime, "long");
  EXPECT_DOUBLE_EQ(cfg.lambda, 0.003);
  EXPECT_EQ(cfg.beam_n, 8);
  EXPECT_EQ(cfg.batch_size, 4);
  EXPECT_EQ(cfg.max_steps, 50);
  EXPECT_EQ(cfg.freeze, "encoder");
  EXPECT_EQ(cfg.seed, 17u);
  EXPECT_TRUE(cfg.exact_rescore);
  cfg.validate();
}

TEST(TrainConfig, UnknownKeyRejected) {
  std::istringstream in("warmup_steps = 100\n");
  EXPECT_THROW(parse_train_config(in), ConfigError);
}

TEST(TrainConfig, BadValuesRejected) {
  {
    std::istringstream in("beam_n = four\n");
    EXPECT_THROW(parse_train_config(in), ConfigError);
  }
  {
    std::istringstream in("lambda = -1\n");
    TrainConfig cfg = parse_train_config(in);
    EXPECT_THROW(cfg.validate(), ConfigError);
  }
  {
    std::istringstream in("loss: log\n");
    EXPECT_THROW(parse_train_config(in), ConfigError);
  }
}

// Batch-of-one MWER parameter gradient against central finite differences
// of l_hat + lambda * L_ll with the N-best set held fixed.
TEST(MwerGradientAssembly, MatchesFiniteDifferences) {
  const ModelDims dims = tiny_dims();
  ModelParams p = init_params(71, dims);
  auto rng = make_rng(72);
  TrainingExample ex = tlab_test::random_example(rng, 5, dims.feat_dim, 2, dims.vocab);
  const int beam_n = 4;
  const double lambda = 0.03;

  ExampleGrad analytic = mwer_example_grad(p, ex, beam_n, lambda, /*exact_rescore=*/true,
                                           kDefaultMaxSymsPerFrame);
  ASSERT_TRUE(analytic.ok);

  // Freeze the hypothesis set at the unperturbed parameters.
  NBestList nbest = beam_search(p, ex.features, beam_n);
  std::vector<std::vector<int>> hyp_tokens;
  std::vector<double> errors;
  for (const Hypothesis& h : nbest.hypotheses) {
    hyp_tokens.push_back(h.tokens);
    errors.push_back(static_cast<double>(
        word_edit_distance(tokens_to_words(h.tokens), tokens_to_words(ex.targets)).total()));
  }

  auto exact_lp = [&](const std::vector<int>& tokens) {
    TrainingExample hx;
    hx.features = ex.features;
    hx.targets = tokens;
    LatticeForward f = forward_lattice(p, hx);
    LogitLattice lat = build_lattice(f.raw_logits, f.frames, f.label_rows, f.symbols, tokens);
    return forward_backward(lat, tokens).log_seq_prob;
  };
  auto objective = [&]() {
    std::vector<double> lps;
    for (const auto& tokens : hyp_tokens) lps.push_back(exact_lp(tokens));
    return mwer_from_scores(lps, errors).expected_errors - lambda * exact_lp(ex.targets);
  };

  auto p_refs = param_tensors(p);
  auto a_refs = param_tensors(analytic.grads);
  for (std::size_t t = 0; t < p_refs.size(); ++t) {
    tlab_test::GradCheck check;
    std::vector<double>& data = *p_refs[t].data;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double fd = tlab_test::central_diff(data, i, objective, 1e-6);
      check.add(fd, (*a_refs[t].data)[i]);
    }
    EXPECT_LE(check.relative(), 1e-4) << "group " << p_refs[t].name;
  }
}

TEST(Train, LossDropsOnTinyCorpus) {
  const CorpusFixture& f = fixture();
  TrainConfig cfg;
  cfg.loss = "log";
  cfg.regime = "raw";
  cfg.batch_size = 4;
  cfg.max_steps = 150;
  cfg.learning_rate = 3e-3;
  cfg.seed = 5;
  TrainResult r = train(cfg, f.corpus.paths.train_manifest, {});
  ASSERT_EQ(r.metrics.steps.size(), 150u);
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 10; ++i) {
    head += r.metrics.steps[i].loss;
    tail += r.metrics.steps[140 + i].loss;
  }
  EXPECT_LT(tail, 0.5 * head);
}

TEST(Train, DeterministicMetricsAcrossRunsAndThreadCounts) {
  const CorpusFixture& f = fixture();
  TrainConfig cfg;
  cfg.loss = "log";
  cfg.regime = "short";
  cfg.batch_size = 3;
  cfg.max_steps = 12;
  cfg.eval_every = 6;
  cfg.seed = 21;
  TrainResult a = train(cfg, f.corpus.paths.train_manifest, {f.corpus.paths.test_manifest});
  TrainResult b = train(cfg, f.corpus.paths.train_manifest, {f.corpus.paths.test_manifest});
  EXPECT_TRUE(metrics_deterministic_equal(a.metrics, b.metrics));

  TrainConfig cfg2 = cfg;
  cfg2.threads = 2;
  TrainResult c = train(cfg2, f.corpus.paths.train_manifest, {f.corpus.paths.test_manifest});
  EXPECT_TRUE(metrics_deterministic_equal(a.metrics, c.metrics));
  auto ra = param_tensors(a.final_params), rc = param_tensors(c.final_params);
  for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_EQ(*ra[i].data, *rc[i].data);
}

TEST(Train, EveryLossRegimeCellRuns) {
  const CorpusFixture& f = fixture();
  for (const std::string& loss : {"log", "mwer"}) {
    for (const std::string& regime : regime_names()) {
      TrainConfig cfg;
      cfg.loss = loss;
      cfg.regime = regime;
      cfg.batch_size = 2;
      cfg.max_steps = 2;
      cfg.beam_n = 2;
      cfg.seed = 3;
      TrainResult r = train(cfg, f.corpus.paths.train_manifest, {});
      EXPECT_EQ(r.metrics.steps.size(), 2u) << loss << "/" << regime;
      EXPECT_TRUE(std::isfinite(r.metrics.steps.back().loss));
    }
  }
}

TEST(Train, MwerSlowerPerStepThanLogLoss) {
  const CorpusFixture& f = fixture();
  TrainConfig log_cfg;
  log_cfg.loss = "log";
  log_cfg.regime = "raw";
  log_cfg.batch_size = 8;
  log_cfg.max_steps = 12;
  log_cfg.seed = 9;
  TrainConfig mwer_cfg = log_cfg;
  mwer_cfg.loss = "mwer";
  mwer_cfg.beam_n = 4;
  TrainResult lr = train(log_cfg, f.corpus.paths.train_manifest, {});
  TrainResult mr = train(mwer_cfg, f.corpus.paths.train_manifest, {});
  EXPECT_GT(mr.wall_s / mr.steps_run, lr.wall_s / lr.steps_run);
}

TEST(Train, MwerExpectedErrorsNonIncreasingFromConvergedModel) {
  const CorpusFixture& f = fixture();
  const std::string dir = (fs::temp_directory_path() / "tlab_trainer_mwer").string();
  fs::remove_all(dir);

  TrainConfig warm;
  warm.loss = "log";
  warm.regime = "raw";
  warm.batch_size = 4;
  warm.max_steps = 200;
  warm.learning_rate = 3e-3;
  warm.seed = 31;
  TrainResult stage1 = train(warm, f.corpus.paths.train_manifest, {}, dir);

  TrainConfig mwer_cfg;
  mwer_cfg.loss = "mwer";
  mwer_cfg.regime = "raw";
  mwer_cfg.lambda = 0.0;
  mwer_cfg.batch_size = 4;
  mwer_cfg.max_steps = 50;
  mwer_cfg.learning_rate = 3e-4;
  mwer_cfg.seed = 32;
  mwer_cfg.init_checkpoint = dir + "/final.ckpt";
  TrainResult r = train(mwer_cfg, f.corpus.paths.train_manifest, {});

  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 10; ++i) {
    head += r.metrics.steps[i].loss;
    tail += r.metrics.steps[40 + i].loss;
  }
  EXPECT_LE(tail, head + 1e-9);
  fs::remove_all(dir);
}

TEST(Train, EmptyTrainingSetIsConfigError) {
  const std::string path = (fs::temp_directory_path() / "tlab_empty_manifest.jsonl").string();
  std::ofstream(path).close();
  TrainConfig cfg;
  cfg.max_steps = 1;
  EXPECT_THROW(train(cfg, path, {}), ConfigError);
  fs::remove(path);
}

TEST(TwoStage, ValidatesStageLosses) {
  TrainConfig s1, s2;
  s1.loss = "mwer";
  s2.loss = "mwer";
  EXPECT_THROW(two_stage(s1, s2, "unused", {}, "/tmp/tlab_two_stage_invalid"), ConfigError);
  s1.loss = "log";
  s2.loss = "log";
  EXPECT_THROW(two_stage(s1, s2, "unused", {}, "/tmp/tlab_two_stage_invalid"), ConfigError);
}

TEST(TwoStage, DecoderOnlyKeepsEncoderBitIdentical) {
  const CorpusFixture& f = fixture();
  const std::string dir = (fs::temp_directory_path() / "tlab_two_stage").string();
  fs::remove_all(dir);

  TrainConfig s1;
  s1.loss = "log";
  s1.regime = "short";
  s1.batch_size = 4;
  s1.max_steps = 60;
  s1.learning_rate = 3e-3;
  s1.seed = 41;

  TrainConfig s2;
  s2.loss = "mwer";
  s2.regime = "raw";
  s2.lambda = 0.0;
  s2.freeze = "encoder";
  s2.batch_size = 4;
  s2.max_steps = 10;
  s2.beam_n = 2;
  s2.seed = 42;

  TwoStageResult r =
      two_stage(s1, s2, f.corpus.paths.train_manifest, {f.corpus.paths.test_manifest}, dir);
  EXPECT_EQ(r.stage2.final_params.enc_wx.data, r.stage1.best_params.enc_wx.data);
  EXPECT_EQ(r.stage2.final_params.enc_wh.data, r.stage1.best_params.enc_wh.data);
  EXPECT_EQ(r.stage2.final_params.enc_b, r.stage1.best_params.enc_b);
  EXPECT_EQ(r.stage1.steps_run, 60);
  EXPECT_EQ(r.stage2.steps_run, 10);
  EXPECT_GT(r.stage1.wall_s, 0.0);
  fs::remove_all(dir);
}

TEST(MetricsCsv, WritesHeaderAndRows) {
  MetricsLog log;
  log.steps.push_back(StepRecord{1, 2.5, 0.01});
  log.evals.push_back(EvalRecord{1, "test.jsonl", 50.0, 1, 2, 3, 12});
  const std::string path = (fs::temp_directory_path() / "tlab_metrics.csv").string();
  write_metrics_csv(log, path);
  std::ifstream in(path);
  std::string header, row1, row2;
  std::getline(in, header);
  std::getline(in, row1);
  std::getline(in, row2);
  EXPECT_EQ(header, "kind,step,loss,wall_s,test_set,wer,del,sub,ins,ref_words");
  EXPECT_EQ(row1.rfind("step,1,2.5,", 0), 0u);
  EXPECT_EQ(row2.rfind("eval,1,,,test.jsonl,50.000000,1,2,3,12", 0), 0u);
  fs::remove(path);
}

}  // namespace
