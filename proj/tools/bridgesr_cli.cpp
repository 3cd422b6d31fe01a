// Copyright 2026 The bridgesr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>
#include <exception>
#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace bridgesr::cli;
  CLI::App app{"Latent bridge audio super-resolution toolkit"};
  app.set_version_flag("--version", BRIDGESR_VERSION);
  app.require_subcommand(1);

  MakeCorpusArgs mc;
  auto* c_mc = app.add_subcommand("make-corpus", "Write a synthetic toy corpus of WAV clips");
  c_mc->add_option("--out", mc.out_dir, "Output directory")->required();
  c_mc->add_option("--count", mc.count, "Number of clips")->check(CLI::PositiveNumber);
  c_mc->add_option("--sample-rate", mc.sample_rate, "Sample rate in Hz")->check(CLI::PositiveNumber);
  c_mc->add_option("--length", mc.length, "Samples per clip")->check(CLI::PositiveNumber);
  c_mc->add_option("--seed", mc.seed, "Random seed");

  TrainCodecArgs tc;
  auto* c_tc = app.add_subcommand("train-codec", "Train the waveform codec and fit its latent scale");
  c_tc->add_option("--config", tc.config, "Codec config file")->required()->check(CLI::ExistingFile);
  c_tc->add_option("--corpus", tc.corpus, "Directory of WAV clips")->required()->check(CLI::ExistingDirectory);
  c_tc->add_option("--out", tc.out, "Output checkpoint")->required();
  c_tc->add_option("--seed", tc.seed, "Random seed");
  c_tc->add_option("--steps", tc.steps, "Override train.steps");

  TrainBridgeArgs tb;
  auto* c_tb = app.add_subcommand("train-bridge", "Train a stage noise predictor");
  c_tb->add_option("--config", tb.config, "Stage config file")->required()->check(CLI::ExistingFile);
  c_tb->add_option("--corpus", tb.corpus, "Directory of WAV clips at the stage rate")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_tb->add_option("--out", tb.out, "Output predictor checkpoint")->required();
  c_tb->add_option("--seed", tb.seed, "Random seed");
  c_tb->add_option("--steps", tb.steps, "Override train.steps");

  UpsampleArgs up;
  auto* c_up = app.add_subcommand("upsample", "Run the cascaded super-resolution chain on one file");
  c_up->add_option("input", up.input, "Input WAV")->required()->check(CLI::ExistingFile);
  c_up->add_option("--stage", up.stages, "Stage config, repeat in chain order")->required();
  c_up->add_option("--out", up.out, "Output WAV")->required();
  c_up->add_option("--steps", up.steps, "Sampling steps")->check(CLI::PositiveNumber)->capture_default_str();
  c_up->add_option("--seed", up.seed, "Random seed");
  c_up->add_flag("--post-replace", up.post_replace, "Replace the output low band with the input below f_prior");
  c_up->add_option("--stitch", up.stitch_seconds, "Windowed sampling with this window length in seconds");

  EvalArgs ev;
  auto* c_ev = app.add_subcommand("eval", "Compute LSD, LSD-LF, LSD-HF and spectral SSIM per file");
  c_ev->add_option("--ref", ev.ref_dir, "Reference WAV directory")->required()->check(CLI::ExistingDirectory);
  c_ev->add_option("--est", ev.est_dir, "Estimate WAV directory")->required()->check(CLI::ExistingDirectory);
  c_ev->add_option("--band-split", ev.band_split, "LF/HF split in Hz (default: half the reference Nyquist)");
  c_ev->add_option("--lr", ev.lr_dir, "LR input directory; split at each file's detected f_prior");
  c_ev->add_option("--out", ev.out, "Output CSV (default: stdout)");

  DegradeArgs dg;
  auto* c_dg = app.add_subcommand("degrade", "Simulate low-resolution copies of a corpus");
  c_dg->add_option("--corpus", dg.corpus, "Input WAV directory")->required()->check(CLI::ExistingDirectory);
  c_dg->add_option("--config", dg.config, "Degradation policy config")->required()->check(CLI::ExistingFile);
  c_dg->add_option("--out", dg.out_dir, "Output directory")->required();
  c_dg->add_option("--seed", dg.seed, "Random seed");

  std::string bw_path;
  auto* c_bw = app.add_subcommand("detect-bw", "Estimate the effective bandwidth of a WAV file");
  c_bw->add_option("input", bw_path, "Input WAV")->required()->check(CLI::ExistingFile);

  TuneArgs tu;
  auto* c_tu = app.add_subcommand("tune-aug", "Grid-search inference augmentation for a cascaded stage");
  c_tu->add_option("--stage", tu.stage, "Stage config")->required()->check(CLI::ExistingFile);
  c_tu->add_option("--val", tu.val_dir, "Directory with prior/ and hr/ subdirectories")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_tu->add_option("--b-r", tu.b_r, "Blur ratio grid")->delimiter(',');
  c_tu->add_option("--margins", tu.margins, "Margin grid in Hz")->delimiter(',');
  c_tu->add_option("--steps", tu.steps, "Sampling steps")->check(CLI::PositiveNumber)->capture_default_str();
  c_tu->add_option("--seed", tu.seed, "Random seed");
  c_tu->add_option("--out", tu.out, "Output CSV")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*c_mc) return make_corpus(mc);
    if (*c_tc) return train_codec(tc);
    if (*c_tb) return train_bridge(tb);
    if (*c_up) return upsample(up);
    if (*c_ev) return eval(ev);
    if (*c_dg) return degrade(dg);
    if (*c_bw) return detect_bw(bw_path);
    if (*c_tu) return tune_aug(tu);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
