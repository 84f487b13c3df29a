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
// tlab: corpus synthesis, segmentation, training, decoding, evaluation,
// the concatenation stress harness, and the loss x regime experiment grid.
// Exit codes: 0 success, 1 validation/config error, 2 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tlab/tlab.hpp"

namespace fs = std::filesystem;
using namespace tlab;

namespace {

// Config-file keys double as CLI flags; a flag set on the command line
// overrides the file.
struct ConfigFlags {
  std::map<std::string, std::string> values;

  void add_to(CLI::App* cmd) {
    static const char* keys[] = {"loss",          "regime",        "lambda",
                                 "beam_n",        "batch_size",    "learning_rate",
                                 "adam_beta1",    "adam_beta2",    "adam_epsilon",
                                 "max_steps",     "eval_every",    "freeze",
                                 "seed",          "init_checkpoint", "exact_rescore",
                                 "max_syms_per_frame", "frame_rate", "threads"};
    for (const char* key : keys)
      cmd->add_option("--" + std::string(key), values[key],
                      "override config key '" + std::string(key) + "'");
  }

  TrainConfig resolve(const std::string& config_path) const {
    TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_train_config(config_path);
    for (const auto& [key, value] : values)
      if (!value.empty()) apply_config_entry(cfg, key, value);
    cfg.validate();
    return cfg;
  }
};

void print_eval_line(const std::string& tag, const EvalReport& rep) {
  std::printf("%-24s WER %6.2f%%  del %ld  sub %ld  ins %ld  ref %ld\n", tag.c_str(),
              rep.wer_percent(), rep.aggregate.deletions, rep.aggregate.substitutions,
              rep.aggregate.insertions, rep.aggregate.ref_words);
}

int run_synth(const std::string& out_dir, SynthConfig cfg) {
  GeneratedCorpus corpus = generate_corpus(cfg, out_dir);
  std::printf("wrote %s (%zu rows), %s (%zu rows), %s (%zu rows)\n",
              corpus.paths.train_manifest.c_str(), corpus.train_rows.size(),
              corpus.paths.test_manifest.c_str(), corpus.test_rows.size(),
              corpus.paths.test_longform_manifest.c_str(), corpus.test_longform_rows.size());
  auto stats = corpus_stats(corpus.train_rows);
  for (const std::string& name : regime_names()) {
    const LengthStats& s = stats[name];
    std::printf("regime %-7s mean %6.2fs  std %6.2fs  (%zu examples)\n", name.c_str(),
                s.mean_s, s.std_s, s.count);
  }
  return 0;
}

int run_segment(const std::string& manifest, const std::string& regime_name,
                const std::string& out_path) {
  const auto rows = load_manifest(manifest);
  const auto merged = merge_segments(rows, SegRegime::from_name(regime_name));
  std::vector<SegmentAnnotation> out_rows;
  out_rows.reserve(merged.size());
  for (const MergedUtterance& m : merged) out_rows.push_back(merged_to_annotation(m));
  save_manifest(out_path, out_rows);
  const LengthStats in_stats = length_stats(merge_segments(rows, SegRegime::raw()));
  const LengthStats out_stats = length_stats(merged);
  std::printf("%zu segments -> %zu utterances; mean %.2fs -> %.2fs\n", rows.size(),
              merged.size(), in_stats.mean_s, out_stats.mean_s);
  return 0;
}

int run_train(const TrainConfig& cfg, const std::string& train_manifest,
              const std::vector<std::string>& test_manifests, const std::string& out_dir) {
  TrainResult r = train(cfg, train_manifest, test_manifests, out_dir);
  std::printf("trained %d steps (%s/%s) in %.1fs (%.3fs/step)\n", r.steps_run,
              cfg.loss.c_str(), cfg.regime.c_str(), r.wall_s, r.wall_s / r.steps_run);
  if (!r.metrics.evals.empty())
    std::printf("best WER %.2f%% at step %d\n", r.best_wer, r.best_step);
  if (!out_dir.empty())
    std::printf("checkpoints and metrics.csv under %s\n", out_dir.c_str());
  return 0;
}

int run_two_stage(const std::string& cfg1_path, const std::string& cfg2_path,
                  const std::string& train_manifest,
                  const std::vector<std::string>& test_manifests, const std::string& out_dir) {
  TrainConfig s1 = load_train_config(cfg1_path);
  TrainConfig s2 = load_train_config(cfg2_path);
  TwoStageResult r = two_stage(s1, s2, train_manifest, test_manifests, out_dir);
  std::printf("stage1 (log/%s): %d steps, %.1fs (%.3fs/step), best WER %.2f%% @ step %d\n",
              s1.regime.c_str(), r.stage1.steps_run, r.stage1.wall_s,
              r.stage1.wall_s / r.stage1.steps_run, r.stage1.best_wer, r.stage1.best_step);
  std::printf("stage2 (mwer/%s, freeze=%s): %d steps, %.1fs (%.3fs/step), best WER %.2f%% @ step %d\n",
              s2.regime.c_str(), s2.freeze.c_str(), r.stage2.steps_run, r.stage2.wall_s,
              r.stage2.wall_s / r.stage2.steps_run, r.stage2.best_wer, r.stage2.best_step);
  return 0;
}

int run_decode(const std::string& ckpt_path, const std::string& manifest, int beam,
               int max_syms, double frame_rate, const std::string& out_path) {
  const ModelParams params = load_checkpoint(ckpt_path).params;
  const auto rows = load_manifest(manifest);
  FeatureStore store(manifest, frame_rate);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw IoError("cannot open output: " + out_path);
  for (const SegmentAnnotation& row : rows) {
    const Matrix features = store.slice(row);
    Hypothesis hyp;
    if (beam > 0) {
      NBestList nbest = beam_search(params, features, beam, max_syms);
      if (!nbest.hypotheses.empty()) hyp = nbest.hypotheses.front();
    } else {
      hyp = greedy_decode(params, features, max_syms);
    }
    nlohmann::json j;
    j["recording_id"] = row.recording_id;
    j["start_s"] = row.start_s;
    j["end_s"] = row.end_s;
    j["text"] = join_words(tokens_to_words(hyp.tokens));
    j["log_prob"] = hyp.log_prob;
    out << j.dump() << '\n';
  }
  std::printf("decoded %zu utterances -> %s\n", rows.size(), out_path.c_str());
  return 0;
}

int run_eval(const std::string& ckpt_path, const std::string& manifest, int beam, int max_syms,
             double frame_rate, const std::string& out_path) {
  const ModelParams params = load_checkpoint(ckpt_path).params;
  DecodeParams dp;
  dp.use_beam = beam > 0;
  if (beam > 0) dp.beam = beam;
  dp.max_syms_per_frame = max_syms;
  EvalReport rep = evaluate(params, manifest, frame_rate, dp);
  print_eval_line(fs::path(manifest).filename().string(), rep);
  if (!out_path.empty()) {
    write_report_detail(rep, out_path);
    std::printf("per-utterance report -> %s\n", out_path.c_str());
  }
  return 0;
}

int run_concat_eval(const std::string& ckpt_path, const std::string& manifest,
                    const std::vector<std::string>& n_values, int max_syms, double frame_rate,
                    const std::string& out_path) {
  const ModelParams params = load_checkpoint(ckpt_path).params;
  const auto rows = load_manifest(manifest);
  FeatureStore store(manifest, frame_rate);
  DecodeFn fn = [&](const Matrix& f) { return greedy_decode(params, f, max_syms).tokens; };

  std::vector<ReportRow> report;
  for (const std::string& n_str : n_values) {
    std::vector<SegmentAnnotation> eval_rows;
    if (n_str == "1") {
      eval_rows = rows;  // original utterances
    } else if (n_str == "all") {
      eval_rows = concat_groups(rows, std::nullopt);
    } else {
      eval_rows = concat_groups(rows, std::stoi(n_str));
    }
    EvalReport rep = evaluate_with(fn, eval_rows, store);
    print_eval_line("n=" + n_str, rep);
    report.push_back(
        ReportRow{fs::path(manifest).filename().string(), "n=" + n_str, "-", rep.aggregate});
  }
  if (!out_path.empty()) {
    report_csv(report, out_path);
    std::printf("concat report -> %s\n", out_path.c_str());
  }
  return 0;
}

int run_grid(const TrainConfig& base, int mwer_steps, const std::string& train_manifest,
             const std::vector<std::string>& test_manifests, const std::string& out_dir,
             const std::string& out_csv) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create grid directory " + out_dir + ": " + ec.message());

  std::vector<ReportRow> report;
  for (const std::string& regime : regime_names()) {
    TrainConfig log_cfg = base;
    log_cfg.loss = "log";
    log_cfg.regime = regime;
    const std::string log_dir = (fs::path(out_dir) / ("log_" + regime)).string();
    std::printf("== grid cell log/%s ==\n", regime.c_str());
    TrainResult log_r = train(log_cfg, train_manifest, test_manifests, log_dir);
    for (const std::string& tm : test_manifests) {
      EvalReport rep = evaluate(log_r.best_params, tm, base.frame_rate);
      print_eval_line("log/" + regime, rep);
      report.push_back(
          ReportRow{fs::path(tm).filename().string(), regime, "log", rep.aggregate});
    }

    TrainConfig mwer_cfg = base;
    mwer_cfg.loss = "mwer";
    mwer_cfg.regime = regime;
    mwer_cfg.max_steps = mwer_steps > 0 ? mwer_steps : base.max_steps;
    mwer_cfg.init_checkpoint = (fs::path(log_dir) / "best.ckpt").string();
    const std::string mwer_dir = (fs::path(out_dir) / ("mwer_" + regime)).string();
    std::printf("== grid cell mwer/%s ==\n", regime.c_str());
    TrainResult mwer_r = train(mwer_cfg, train_manifest, test_manifests, mwer_dir);
    for (const std::string& tm : test_manifests) {
      EvalReport rep = evaluate(mwer_r.best_params, tm, base.frame_rate);
      print_eval_line("mwer/" + regime, rep);
      report.push_back(
          ReportRow{fs::path(tm).filename().string(), regime, "mwer", rep.aggregate});
    }
  }
  report_csv(report, out_csv);
  std::printf("grid report -> %s\n", out_csv.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tlab: a desk-scale sequence-transducer training laboratory"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate the synthetic telephony-like corpus");
  std::string synth_out;
  SynthConfig synth_cfg;
  synth_cmd->add_option("--out", synth_out, "output corpus directory")->required();
  synth_cmd->add_option("--seed", synth_cfg.seed, "corpus seed");
  synth_cmd->add_option("--vocab_size", synth_cfg.vocab_size, "vocabulary size V");
  synth_cmd->add_option("--feat_dim", synth_cfg.feat_dim, "feature dimension F");
  synth_cmd->add_option("--frame_rate", synth_cfg.frame_rate, "frames per second");
  synth_cmd->add_option("--frames_per_token", synth_cfg.frames_per_token, "frames per token");
  synth_cmd->add_option("--n_train", synth_cfg.n_train_recordings, "training recordings");
  synth_cmd->add_option("--n_test", synth_cfg.n_test_recordings, "test recordings");
  synth_cmd->add_option("--segments_per_recording", synth_cfg.segments_per_recording,
                        "segments per recording");
  synth_cmd->add_option("--speakers_per_recording", synth_cfg.speakers_per_recording,
                        "speakers per recording");
  synth_cmd->add_option("--noise_std", synth_cfg.noise_std, "per-frame noise std");

  // segment
  auto* segment_cmd = app.add_subcommand("segment", "merge manifest segments under a regime");
  std::string seg_manifest, seg_regime = "raw", seg_out;
  segment_cmd->add_option("--manifest", seg_manifest, "input manifest (JSONL)")->required();
  segment_cmd->add_option("--regime", seg_regime, "raw | short | medium | long")->required();
  segment_cmd->add_option("--out", seg_out, "output manifest path")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train with log loss or MWER");
  std::string train_config_path, train_manifest, train_out;
  std::vector<std::string> train_tests;
  ConfigFlags train_flags;
  train_cmd->add_option("--config", train_config_path, "key=value config file");
  train_flags.add_to(train_cmd);
  train_cmd->add_option("--train-manifest", train_manifest, "training manifest")->required();
  train_cmd->add_option("--test-manifest", train_tests, "test manifest(s), repeatable");
  train_cmd->add_option("--out", train_out, "output directory (checkpoints, metrics.csv)");

  // two-stage
  auto* two_cmd = app.add_subcommand("two-stage", "log-loss stage then MWER fine-tuning");
  std::string ts_cfg1, ts_cfg2, ts_manifest, ts_out;
  std::vector<std::string> ts_tests;
  two_cmd->add_option("--stage1-config", ts_cfg1, "stage-1 config file")->required();
  two_cmd->add_option("--stage2-config", ts_cfg2, "stage-2 config file")->required();
  two_cmd->add_option("--train-manifest", ts_manifest, "training manifest")->required();
  two_cmd->add_option("--test-manifest", ts_tests, "test manifest(s), repeatable");
  two_cmd->add_option("--out", ts_out, "output directory")->required();

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "decode a manifest to hypotheses (JSONL)");
  std::string dec_ckpt, dec_manifest, dec_out;
  int dec_beam = 0, dec_max_syms = kDefaultMaxSymsPerFrame;
  double dec_frame_rate = 20.0;
  decode_cmd->add_option("--checkpoint", dec_ckpt, "model checkpoint")->required();
  decode_cmd->add_option("--manifest", dec_manifest, "manifest to decode")->required();
  decode_cmd->add_option("--out", dec_out, "output hypotheses JSONL")->required();
  decode_cmd->add_option("--beam", dec_beam, "beam width (0 = greedy)");
  decode_cmd->add_option("--max_syms_per_frame", dec_max_syms, "per-frame emission cap");
  decode_cmd->add_option("--frame_rate", dec_frame_rate, "frames per second");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "WER with del/sub/ins breakdown");
  std::string ev_ckpt, ev_manifest, ev_out;
  int ev_beam = 0, ev_max_syms = kDefaultMaxSymsPerFrame;
  double ev_frame_rate = 20.0;
  eval_cmd->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
  eval_cmd->add_option("--manifest", ev_manifest, "manifest to evaluate")->required();
  eval_cmd->add_option("--out", ev_out, "per-utterance report CSV");
  eval_cmd->add_option("--beam", ev_beam, "beam width (0 = greedy)");
  eval_cmd->add_option("--max_syms_per_frame", ev_max_syms, "per-frame emission cap");
  eval_cmd->add_option("--frame_rate", ev_frame_rate, "frames per second");

  // concat-eval
  auto* concat_cmd =
      app.add_subcommand("concat-eval", "evaluate across concatenated utterance groups");
  std::string cc_ckpt, cc_manifest, cc_out;
  std::vector<std::string> cc_n = {"1", "2", "4", "8"};
  int cc_max_syms = kDefaultMaxSymsPerFrame;
  double cc_frame_rate = 20.0;
  concat_cmd->add_option("--checkpoint", cc_ckpt, "model checkpoint")->required();
  concat_cmd->add_option("--manifest", cc_manifest, "raw test manifest")->required();
  concat_cmd->add_option("--n", cc_n, "group sizes, e.g. --n 1 2 4 8 all");
  concat_cmd->add_option("--out", cc_out, "report CSV");
  concat_cmd->add_option("--max_syms_per_frame", cc_max_syms, "per-frame emission cap");
  concat_cmd->add_option("--frame_rate", cc_frame_rate, "frames per second");

  // grid
  auto* grid_cmd = app.add_subcommand("grid", "run the {log,mwer} x {regime} matrix");
  std::string gr_config, gr_manifest, gr_dir = "grid_runs", gr_csv;
  std::vector<std::string> gr_tests;
  int gr_mwer_steps = 0;
  ConfigFlags grid_flags;
  grid_cmd->add_option("--config", gr_config, "base key=value config file")->required();
  grid_flags.add_to(grid_cmd);
  grid_cmd->add_option("--train-manifest", gr_manifest, "training manifest")->required();
  grid_cmd->add_option("--test-manifest", gr_tests, "test manifest(s), repeatable")
      ->required();
  grid_cmd->add_option("--run-dir", gr_dir, "directory for per-cell checkpoints");
  grid_cmd->add_option("--mwer_steps", gr_mwer_steps,
                       "MWER fine-tune steps (default: config max_steps)");
  grid_cmd->add_option("--out", gr_csv, "consolidated report CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth_out, synth_cfg);
    if (segment_cmd->parsed()) return run_segment(seg_manifest, seg_regime, seg_out);
    if (train_cmd->parsed())
      return run_train(train_flags.resolve(train_config_path), train_manifest, train_tests,
                       train_out);
    if (two_cmd->parsed()) return run_two_stage(ts_cfg1, ts_cfg2, ts_manifest, ts_tests, ts_out);
    if (decode_cmd->parsed())
      return run_decode(dec_ckpt, dec_manifest, dec_beam, dec_max_syms, dec_frame_rate, dec_out);
    if (eval_cmd->parsed())
      return run_eval(ev_ckpt, ev_manifest, ev_beam, ev_max_syms, ev_frame_rate, ev_out);
    if (concat_cmd->parsed())
      return run_concat_eval(cc_ckpt, cc_manifest, cc_n, cc_max_syms, cc_frame_rate, cc_out);
    if (grid_cmd->parsed())
      return run_grid(grid_flags.resolve(gr_config), gr_mwer_steps, gr_manifest, gr_tests,
                      gr_dir, gr_csv);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return 2;
  } catch (const VersionError& e) {
    std::cerr << "version error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
