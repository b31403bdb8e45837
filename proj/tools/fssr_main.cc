// tools/fssr_main.cc
//
// Copyright 2026  FSSR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// The fssr command-line tool. Everything goes through the public C API in
// fssr.h: flags become config keys, layered as defaults < --config files <
// explicit flags < --set overrides.

#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fssr.h"

namespace {

struct ConfigHandle {
  fssr_config *cfg;
  ConfigHandle() : cfg(fssr_config_create()) {}
  ~ConfigHandle() { fssr_config_destroy(cfg); }
};

struct KeyedOptions {
  std::vector<std::string> config_files;
  std::vector<std::pair<std::string, std::string>> values;  // flag-provided
  std::vector<std::string> overrides;                       // --set key=value

  // Flags first, then --set, so explicit overrides always win.
  int ApplyTo(fssr_config *cfg) const {
    for (const auto &f : config_files) {
      if (fssr_config_load_file(cfg, f.c_str()) != FSSR_OK) {
        std::fprintf(stderr, "error: %s\n", fssr_last_error());
        return 1;
      }
    }
    for (const auto &[k, v] : values) fssr_config_set(cfg, k.c_str(), v.c_str());
    for (const auto &kv : overrides) {
      const size_t eq = kv.find('=');
      if (eq == std::string::npos) {
        std::fprintf(stderr, "error: --set expects key=value, got '%s'\n",
                     kv.c_str());
        return 1;
      }
      std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      while (!key.empty() && key.back() == ' ') key.pop_back();
      while (!value.empty() && value.front() == ' ') value.erase(0, 1);
      fssr_config_set(cfg, key.c_str(), value.c_str());
    }
    return 0;
  }
};

void AddCommonFlags(CLI::App *cmd, KeyedOptions *kv) {
  cmd->add_option("--config", kv->config_files,
                  "Config file(s), 'key = value' lines; later files win");
  cmd->add_option("--set", kv->overrides,
                  "Override any config key (key=value), repeatable");
  cmd->add_option_function<std::string>(
      "--seed", [kv](const std::string &v) { kv->values.emplace_back("seed", v); },
      "Random seed");
  cmd->add_flag_callback(
      "--verbose", [kv] { kv->values.emplace_back("verbose", "true"); },
      "Print progress to stderr");
  cmd->add_flag_callback(
      "--quiet", [kv] { kv->values.emplace_back("quiet", "true"); },
      "Suppress the run summary");
}

// Binds --flag to a config key, recorded only when the user passes it.
void Key(CLI::App *cmd, KeyedOptions *kv, const std::string &flag,
         const std::string &key, const std::string &help) {
  cmd->add_option_function<std::string>(
      flag, [kv, key](const std::string &v) { kv->values.emplace_back(key, v); },
      help);
}

int RunWithConfig(const KeyedOptions &kv,
                  const std::function<fssr_status(fssr_config *)> &fn) {
  ConfigHandle handle;
  if (kv.ApplyTo(handle.cfg) != 0) return 2;
  const fssr_status st = fn(handle.cfg);
  if (st != FSSR_OK) {
    std::fprintf(stderr, "error [%s]: %s\n", fssr_status_name(st),
                 fssr_last_error());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"fssr: few-shot speaker identification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fssr_version_string());

  int exit_code = 0;

  // prepare-splits ---------------------------------------------------------
  auto kv_prepare = std::make_shared<KeyedOptions>();
  CLI::App *prepare = app.add_subcommand(
      "prepare-splits", "Build a train/test manifest (voxceleb, vctk or toy)");
  AddCommonFlags(prepare, kv_prepare.get());
  Key(prepare, kv_prepare.get(), "--dataset", "dataset",
      "voxceleb | vctk | toy");
  Key(prepare, kv_prepare.get(), "--root", "root", "Dataset root directory");
  Key(prepare, kv_prepare.get(), "--out", "out", "Manifest output path");
  Key(prepare, kv_prepare.get(), "--n-classes", "n_classes",
      "Speakers to take, lexicographic order (voxceleb protocol)");
  Key(prepare, kv_prepare.get(), "--k-per-class", "k_per_class",
      "Training crops per speaker (voxceleb protocol)");
  Key(prepare, kv_prepare.get(), "--train-fraction", "train_fraction",
      "Train share of each speaker's utterances (vctk protocol)");
  Key(prepare, kv_prepare.get(), "--toy-speakers", "toy.speakers",
      "Toy corpus: number of synthetic speakers");
  Key(prepare, kv_prepare.get(), "--toy-utts", "toy.utts",
      "Toy corpus: utterances per speaker");
  Key(prepare, kv_prepare.get(), "--toy-test-utts", "toy.test_utts",
      "Toy corpus: test utterances per speaker");
  prepare->callback([kv_prepare, &exit_code] {
    exit_code = RunWithConfig(*kv_prepare, fssr_run_prepare_splits);
  });

  // spectrogram -------------------------------------------------------------
  auto kv_spec = std::make_shared<KeyedOptions>();
  CLI::App *spec = app.add_subcommand(
      "spectrogram", "Extract a spectrogram tensor, or fill a cache");
  AddCommonFlags(spec, kv_spec.get());
  Key(spec, kv_spec.get(), "--input", "input", "Input audio file (wav)");
  Key(spec, kv_spec.get(), "--output", "output", "Output .fssr tensor path");
  Key(spec, kv_spec.get(), "--manifest", "manifest",
      "Manifest whose entries should be cached");
  Key(spec, kv_spec.get(), "--cache-dir", "cache_dir",
      "Spectrogram cache directory (default: FSSR_CACHE_DIR)");
  Key(spec, kv_spec.get(), "--normalize", "normalize",
      "Per-bin normalization (default true)");
  Key(spec, kv_spec.get(), "--crop-offset", "crop_offset_s",
      "Crop offset in seconds before extraction");
  spec->callback([kv_spec, &exit_code] {
    exit_code = RunWithConfig(*kv_spec, fssr_run_spectrogram);
  });

  // train --------------------------------------------------------------------
  auto kv_train = std::make_shared<KeyedOptions>();
  CLI::App *train =
      app.add_subcommand("train", "Train a classifier on a manifest");
  AddCommonFlags(train, kv_train.get());
  Key(train, kv_train.get(), "--manifest", "manifest", "Manifest path");
  Key(train, kv_train.get(), "--arch", "arch",
      "vgg_m | resnet34 | capsnet_m | capsnet_ma");
  Key(train, kv_train.get(), "--out-dir", "out_dir", "Run output directory");
  Key(train, kv_train.get(), "--cache-dir", "cache_dir", "Spectrogram cache");
  Key(train, kv_train.get(), "--lr", "train.lr", "Learning rate");
  Key(train, kv_train.get(), "--optimizer", "train.optimizer",
      "adam | sgd_momentum");
  Key(train, kv_train.get(), "--batch-size", "train.batch_size", "Batch size");
  Key(train, kv_train.get(), "--epochs", "train.max_epochs", "Epoch budget");
  Key(train, kv_train.get(), "--max-steps", "train.max_steps", "Step budget");
  Key(train, kv_train.get(), "--loss", "train.loss",
      "cross_entropy | margin (default by architecture)");
  Key(train, kv_train.get(), "--tag", "tag", "Experiment tag for records");
  train->callback([kv_train, &exit_code] {
    exit_code = RunWithConfig(*kv_train, fssr_run_train);
  });

  // episodic-train ------------------------------------------------------------
  auto kv_epi = std::make_shared<KeyedOptions>();
  CLI::App *epi = app.add_subcommand(
      "episodic-train", "Prototypical-loss episodic training");
  AddCommonFlags(epi, kv_epi.get());
  Key(epi, kv_epi.get(), "--manifest", "manifest", "Manifest path");
  Key(epi, kv_epi.get(), "--arch", "arch",
      "Architecture (ignored with --init-checkpoint)");
  Key(epi, kv_epi.get(), "--init-checkpoint", "init_checkpoint",
      "Start from a trained checkpoint instead of fresh weights");
  Key(epi, kv_epi.get(), "--out-dir", "out_dir", "Run output directory");
  Key(epi, kv_epi.get(), "--cache-dir", "cache_dir", "Spectrogram cache");
  Key(epi, kv_epi.get(), "--n-way", "episode.n_way", "Classes per episode");
  Key(epi, kv_epi.get(), "--k-shot", "episode.k_shot", "Support per class");
  Key(epi, kv_epi.get(), "--n-query", "episode.n_query", "Queries per class");
  Key(epi, kv_epi.get(), "--lr", "train.lr", "Learning rate");
  Key(epi, kv_epi.get(), "--max-steps", "train.max_steps", "Episode budget");
  Key(epi, kv_epi.get(), "--early-stop-acc", "train.early_stop_acc",
      "Stop when the running train-episode accuracy reaches this");
  Key(epi, kv_epi.get(), "--tag", "tag", "Experiment tag for records");
  epi->callback([kv_epi, &exit_code] {
    exit_code = RunWithConfig(*kv_epi, fssr_run_episodic_train);
  });

  // fewshot-eval ---------------------------------------------------------------
  auto kv_eval = std::make_shared<KeyedOptions>();
  CLI::App *eval = app.add_subcommand(
      "fewshot-eval", "N-way K-shot evaluation of a frozen checkpoint");
  AddCommonFlags(eval, kv_eval.get());
  Key(eval, kv_eval.get(), "--checkpoint", "checkpoint", "Model checkpoint");
  Key(eval, kv_eval.get(), "--manifest", "manifest", "Manifest path");
  Key(eval, kv_eval.get(), "--split", "split", "train | test (default test)");
  Key(eval, kv_eval.get(), "--cache-dir", "cache_dir", "Spectrogram cache");
  Key(eval, kv_eval.get(), "--n-way", "episode.n_way", "Classes per episode");
  Key(eval, kv_eval.get(), "--k-shot", "episode.k_shot", "Support per class");
  Key(eval, kv_eval.get(), "--n-query", "episode.n_query",
      "Queries per class (default 15)");
  Key(eval, kv_eval.get(), "--episodes", "episode.count",
      "Episode count (default 1000)");
  Key(eval, kv_eval.get(), "--distance", "episode.distance",
      "sq_euclidean | euclidean | cosine");
  Key(eval, kv_eval.get(), "--out", "out", "Append the eval record here");
  eval->callback([kv_eval, &exit_code] {
    ConfigHandle handle;
    if (kv_eval->ApplyTo(handle.cfg) != 0) {
      exit_code = 2;
      return;
    }
    fssr_fewshot_result res;
    const fssr_status st = fssr_run_fewshot_eval(handle.cfg, &res);
    if (st != FSSR_OK) {
      std::fprintf(stderr, "error [%s]: %s\n", fssr_status_name(st),
                   fssr_last_error());
      exit_code = 1;
      return;
    }
    std::printf("mean_acc %.6f ci95 %.6f episodes %d\n", res.mean_accuracy,
                res.ci95_half_width, res.n_episodes);
  });

  // finetune -------------------------------------------------------------------
  auto kv_ft = std::make_shared<KeyedOptions>();
  CLI::App *ft = app.add_subcommand(
      "finetune", "Replace the head and fine-tune on a target manifest");
  AddCommonFlags(ft, kv_ft.get());
  Key(ft, kv_ft.get(), "--checkpoint", "checkpoint", "Source checkpoint");
  Key(ft, kv_ft.get(), "--manifest", "manifest", "Target manifest");
  Key(ft, kv_ft.get(), "--out-dir", "out_dir", "Run output directory");
  Key(ft, kv_ft.get(), "--cache-dir", "cache_dir", "Spectrogram cache");
  Key(ft, kv_ft.get(), "--lr", "train.lr", "Learning rate");
  Key(ft, kv_ft.get(), "--batch-size", "train.batch_size", "Batch size");
  Key(ft, kv_ft.get(), "--epochs", "train.max_epochs", "Epoch budget");
  Key(ft, kv_ft.get(), "--max-steps", "train.max_steps", "Step budget");
  Key(ft, kv_ft.get(), "--tag", "tag", "Experiment tag for records");
  ft->callback([kv_ft, &exit_code] {
    exit_code = RunWithConfig(*kv_ft, fssr_run_finetune);
  });

  // sweep ------------------------------------------------------------------------
  auto kv_sweep = std::make_shared<KeyedOptions>();
  CLI::App *sweep = app.add_subcommand(
      "sweep", "Limited-samples sweep: train at several samples-per-class");
  AddCommonFlags(sweep, kv_sweep.get());
  Key(sweep, kv_sweep.get(), "--manifest", "manifest", "Manifest path");
  Key(sweep, kv_sweep.get(), "--archs", "archs",
      "Comma list (default vgg_m,resnet34,capsnet_m)");
  Key(sweep, kv_sweep.get(), "--samples-per-class", "samples_per_class",
      "Comma list of training sizes, e.g. 10,20,40");
  Key(sweep, kv_sweep.get(), "--out-dir", "out_dir", "Run output directory");
  Key(sweep, kv_sweep.get(), "--cache-dir", "cache_dir", "Spectrogram cache");
  Key(sweep, kv_sweep.get(), "--epochs", "train.max_epochs", "Epoch budget");
  Key(sweep, kv_sweep.get(), "--max-steps", "train.max_steps", "Step budget");
  sweep->callback([kv_sweep, &exit_code] {
    exit_code = RunWithConfig(*kv_sweep, fssr_run_sweep);
  });

  // report -----------------------------------------------------------------------
  auto kv_report = std::make_shared<KeyedOptions>();
  CLI::App *report = app.add_subcommand(
      "report", "Render experiment records as a table, CSV or SVG plot");
  AddCommonFlags(report, kv_report.get());
  Key(report, kv_report.get(), "--records", "records", "records.jsonl path");
  Key(report, kv_report.get(), "--format", "format", "table | csv | plot");
  Key(report, kv_report.get(), "--out", "out", "Output file");
  report->callback([kv_report, &exit_code] {
    exit_code = RunWithConfig(*kv_report, fssr_run_report);
  });

  // selftest --------------------------------------------------------------------
  CLI::App *selftest =
      app.add_subcommand("selftest", "Run the built-in property suite");
  selftest->callback([&exit_code] {
    int failed = 0;
    const fssr_status st = fssr_run_selftest(&failed);
    if (st != FSSR_OK) {
      std::fprintf(stderr, "error [%s]: %s\n", fssr_status_name(st),
                   fssr_last_error());
      exit_code = 1;
      return;
    }
    exit_code = failed == 0 ? 0 : 1;
  });

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
