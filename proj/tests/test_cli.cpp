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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bridgesr/config.hpp"
#include "bridgesr/filter.hpp"
#include "bridgesr/io_util.hpp"
#include "bridgesr/pipeline.hpp"
#include "bridgesr/resample.hpp"
#include "bridgesr/waveform.hpp"
#include "test_support.hpp"

namespace bridgesr {
namespace {

namespace fs = std::filesystem;

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  static fs::path root;

  static CmdResult run(const std::string& args) {
    const auto out = root / "stdout.txt", err = root / "stderr.txt";
    const std::string cmd = std::string(BRIDGESR_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
  }

  static std::string p(const fs::path& path) { return path.string(); }

  // Tiny codec and stage configs so the whole chain trains in seconds.
  static void SetUpTestSuite() {
    root = fs::temp_directory_path() / "bridgesr_cli_test";
    fs::remove_all(root);
    fs::create_directories(root);
    write_file_atomic(root / "codec.ini",
                      "[codec]\nsample_rate = 16000\nchannels = 4\nwidths = 8, 8, 8, 8, 8\nstrides = 2, 2, 2, 2\n"
                      "kl_weight = 0\n[train]\nsteps = 4\nbatch = 2\ncrop = 512\nlr = 1e-3\nlog_every = 2\n"
                      "[mrstft]\nffts = 64, 128\n");
    write_file_atomic(root / "stage.ini",
                      "[stage]\ntarget_sr = 16000\ncodec = codec.ckpt\npredictor = pred.ckpt\n"
                      "[predictor]\nlatent_channels = 4\nwidth = 8\nblocks = 1\nembed_dim = 8\n"
                      "[train]\nsteps = 4\nbatch = 2\nlr = 1e-3\ncrop_frames = 16\npool_size = 4\nlog_every = 2\n");
    write_file_atomic(root / "stage2.ini",
                      "[stage]\ntarget_sr = 32000\nprior_sr = 16000\ncodec = codec32.ckpt\npredictor = pred2.ckpt\n"
                      "[augment]\nlpf_margin_hz = 1000\nb_r_max = 1.0\nb_r_star = 0.3\ntrain_margin_max_hz = 2000\n"
                      "[predictor]\nlatent_channels = 4\nwidth = 8\nblocks = 1\nembed_dim = 8\n");
    ASSERT_EQ(run("make-corpus --out " + p(root / "corpus") + " --count 6 --sample-rate 16000 --length 2048 --seed 1")
                  .code,
              0);
    ASSERT_EQ(run("train-codec --config " + p(root / "codec.ini") + " --corpus " + p(root / "corpus") + " --out " +
                  p(root / "codec.ckpt") + " --seed 2")
                  .code,
              0);
    ASSERT_EQ(run("train-bridge --config " + p(root / "stage.ini") + " --corpus " + p(root / "corpus") + " --out " +
                  p(root / "pred.ckpt") + " --seed 3")
                  .code,
              0);
  }

  static void TearDownTestSuite() { fs::remove_all(root); }
};

fs::path Cli::root;

std::string bytes_of(const fs::path& path) { return read_file(path); }

std::map<std::string, std::vector<std::string>> read_csv(const std::string& text, std::string* header) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::map<std::string, std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows[cells.front()] = {cells.begin() + 1, cells.end()};
  }
  return rows;
}

TEST_F(Cli, MissingConfigKeyIsNamed) {
  write_file_atomic(root / "broken.ini", "[codec]\nsample_rate = 16000\nchannels = 4\nwidths = 8,8,8,8,8\n"
                                         "strides = 2,2,2,2\nkl_weight = 0\n[train]\nsteps = 1\ncrop = 512\nlr = 1e-3\n");
  const auto r = run("train-codec --config " + p(root / "broken.ini") + " --corpus " + p(root / "corpus") + " --out " +
                     p(root / "x.ckpt"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("train.batch"), std::string::npos) << r.err;
}

TEST_F(Cli, StageTwoConfigRequiresBlurFields) {
  write_file_atomic(root / "stage2_broken.ini",
                    "[stage]\ntarget_sr = 32000\nprior_sr = 16000\ncodec = codec32.ckpt\n"
                    "[augment]\nlpf_margin_hz = 1000\nb_r_max = 1.0\ntrain_margin_max_hz = 2000\n"
                    "[train]\nsteps = 1\nbatch = 1\nlr = 1e-3\n");
  const auto r = run("train-bridge --config " + p(root / "stage2_broken.ini") + " --corpus " + p(root / "corpus") +
                     " --out " + p(root / "x.ckpt"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("augment.b_r_star"), std::string::npos) << r.err;
}

TEST_F(Cli, TrainingIsReproducibleUnderSeed) {
  ASSERT_EQ(run("train-codec --config " + p(root / "codec.ini") + " --corpus " + p(root / "corpus") + " --out " +
                p(root / "codec_b.ckpt") + " --seed 2")
                .code,
            0);
  EXPECT_EQ(bytes_of(root / "codec.ckpt"), bytes_of(root / "codec_b.ckpt"));
  EXPECT_EQ(bytes_of(root / "codec.ckpt.loss.csv"), bytes_of(root / "codec_b.ckpt.loss.csv"));
  std::string header;
  const auto rows = read_csv(bytes_of(root / "codec.ckpt.loss.csv"), &header);
  EXPECT_EQ(header, "step,total,mrstft,kl");
  EXPECT_EQ(rows.size(), 2u);

  ASSERT_EQ(run("train-bridge --config " + p(root / "stage.ini") + " --corpus " + p(root / "corpus") + " --out " +
                p(root / "pred_b.ckpt") + " --seed 3")
                .code,
            0);
  EXPECT_EQ(bytes_of(root / "pred.ckpt"), bytes_of(root / "pred_b.ckpt"));
  EXPECT_EQ(bytes_of(root / "pred.ckpt.loss.csv"), bytes_of(root / "pred_b.ckpt.loss.csv"));
  const auto manifest = bytes_of(root / "pred.ckpt.manifest.json");
  EXPECT_NE(manifest.find("\"seed\": 3"), std::string::npos);
}

TEST_F(Cli, CorpusRateMismatchIsRejected) {
  ASSERT_EQ(run("make-corpus --out " + p(root / "corpus8k") + " --count 2 --sample-rate 8000 --length 1024").code, 0);
  const auto r = run("train-bridge --config " + p(root / "stage.ini") + " --corpus " + p(root / "corpus8k") +
                     " --out " + p(root / "x.ckpt"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("8000"), std::string::npos) << r.err;
}

TEST_F(Cli, UpsampleKeepsToneAndIsBitReproducible) {
  // A 440 Hz tone at 8 kHz goes through the 16 kHz stage. The low band is
  // replaced from the input, so the tone must survive an untrained predictor.
  Waveform tone(std::vector<double>(4000), 8000);
  for (std::size_t i = 0; i < tone.size(); ++i) tone.samples[i] = 0.4 * std::sin(2 * M_PI * 440.0 * i / 8000.0);
  write_wav(root / "tone.wav", tone);
  const std::string base = "upsample " + p(root / "tone.wav") + " --stage " + p(root / "stage.ini") +
                           " --steps 5 --seed 4 --post-replace --out ";
  ASSERT_EQ(run(base + p(root / "up_a.wav")).code, 0);
  ASSERT_EQ(run(base + p(root / "up_b.wav")).code, 0);
  EXPECT_EQ(bytes_of(root / "up_a.wav"), bytes_of(root / "up_b.wav"));
  EXPECT_TRUE(fs::exists(root / "up_a.wav.manifest.json"));

  const Waveform out = read_wav(root / "up_a.wav");
  ASSERT_EQ(out.sample_rate, 16000);
  ASSERT_EQ(out.size(), 8000u);
  double best_f = 0.0, best_p = 0.0;
  for (double f = 100.0; f <= 7500.0; f += 1.0) {
    const double pw = testing::dft_power(out.samples, f, 16000);
    if (pw > best_p) {
      best_p = pw;
      best_f = f;
    }
  }
  EXPECT_NEAR(best_f, 440.0, 4.4);
  // Hann weighting keeps leakage from the generated high band out of the amplitude check.
  const auto hann = [](std::vector<double> x) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= 0.5 - 0.5 * std::cos(2 * M_PI * i / x.size());
    return x;
  };
  // The reference is the conditioning signal: Chebyshev ripple at the clamped 1 kHz prior.
  const Waveform cond = resample(lowpass(tone, {FilterFamily::Chebyshev1, 8, 1000.0}), 16000);
  const double in_p = testing::dft_power(hann(cond.samples), 440.0, 16000);
  EXPECT_NEAR(std::sqrt(testing::dft_power(hann(out.samples), 440.0, 16000) / in_p), 1.0, 0.01);
}

TEST_F(Cli, UpsampleDefaultsAndErrorContext) {
  const auto help = run("upsample --help");
  EXPECT_NE(help.out.find("50"), std::string::npos);
  write_wav(root / "hi.wav", testing::white_noise(3200, 32000, 5, 0.1));
  const auto r = run("upsample " + p(root / "hi.wav") + " --stage " + p(root / "stage.ini") + " --out " +
                     p(root / "never.wav"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("hi.wav"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(root / "never.wav"));
}

TEST_F(Cli, EvalIdentityAndLowpassOrdering) {
  ASSERT_EQ(run("make-corpus --out " + p(root / "eval_ref") + " --count 6 --sample-rate 16000 --length 16000").code, 0);
  fs::create_directories(root / "est_same");
  fs::create_directories(root / "est_lp");
  for (const auto& e : fs::directory_iterator(root / "eval_ref")) {
    if (e.path().extension() != ".wav") continue;
    fs::copy_file(e.path(), root / "est_same" / e.path().filename(), fs::copy_options::overwrite_existing);
    write_wav(root / "est_lp" / e.path().filename(),
              lowpass(read_wav(e.path()), {FilterFamily::Chebyshev1, 8, 4000.0}));
  }
  fs::remove(root / "est_lp" / "clip_0005.wav");
  std::string header;
  auto same = run("eval --ref " + p(root / "eval_ref") + " --est " + p(root / "est_same"));
  ASSERT_EQ(same.code, 0) << same.err;
  const auto rows = read_csv(same.out, &header);
  EXPECT_EQ(header, "file,lsd,lsd_lf,lsd_hf,ssim");
  ASSERT_EQ(rows.size(), 7u);  // six clips plus the mean row
  for (const auto& [name, cells] : rows) {
    EXPECT_EQ(std::stod(cells[0]), 0.0) << name;
    EXPECT_EQ(std::stod(cells[3]), 1.0) << name;
  }
  const auto lp = run("eval --ref " + p(root / "eval_ref") + " --est " + p(root / "est_lp") + " --band-split 4000");
  ASSERT_EQ(lp.code, 0) << lp.err;
  EXPECT_NE(lp.err.find("clip_0005.wav"), std::string::npos);
  const auto lp_rows = read_csv(lp.out, nullptr);
  ASSERT_EQ(lp_rows.size(), 6u);
  const auto& mean = lp_rows.at("mean");
  EXPECT_GT(std::stod(mean[2]), 10.0 * std::stod(mean[1]));
}

TEST_F(Cli, DegradeDrawsUniformCutoffsReproducibly) {
  ASSERT_EQ(run("make-corpus --out " + p(root / "many") + " --count 1000 --sample-rate 48000 --length 256 --seed 6")
                .code,
            0);
  const std::string cfg = "--config " + std::string(BRIDGESR_CONFIG_DIR) + "/degrade_stage1.ini";
  ASSERT_EQ(run("degrade --corpus " + p(root / "many") + " --out " + p(root / "lr_a") + " --seed 7 " + cfg).code, 0);
  ASSERT_EQ(run("degrade --corpus " + p(root / "many") + " --out " + p(root / "lr_b") + " --seed 7 " + cfg).code, 0);
  const auto manifest = bytes_of(root / "lr_a" / "degrade_manifest.csv");
  EXPECT_EQ(manifest, bytes_of(root / "lr_b" / "degrade_manifest.csv"));
  EXPECT_EQ(bytes_of(root / "lr_a" / "clip_0123.wav"), bytes_of(root / "lr_b" / "clip_0123.wav"));
  std::string header;
  const auto rows = read_csv(manifest, &header);
  EXPECT_EQ(header, "file,f_prior,family,order");
  ASSERT_EQ(rows.size(), 1000u);
  std::vector<double> cutoffs;
  for (const auto& [name, cells] : rows) cutoffs.push_back(std::stod(cells[0]));
  EXPECT_GT(testing::ks_uniform_p(cutoffs, 1000.0, 20000.0), 0.01);
}

TEST_F(Cli, DetectBandwidthReportsCutoff) {
  const Waveform x = lowpass(testing::white_noise(48000, 48000, 8, 0.3), {FilterFamily::Chebyshev1, 8, 8000.0});
  write_wav(root / "lp.wav", x);
  const auto r = run("detect-bw " + p(root / "lp.wav"));
  ASSERT_EQ(r.code, 0);
  const auto pos = r.out.find("f_eff=");
  ASSERT_NE(pos, std::string::npos);
  EXPECT_NEAR(std::stod(r.out.substr(pos + 6)), 8000.0, 800.0);
}

TEST_F(Cli, TuneAugmentationIsReproducible) {
  ASSERT_EQ(run("make-corpus --out " + p(root / "corpus32") + " --count 2 --sample-rate 32000 --length 2048 --seed 9")
                .code,
            0);
  write_file_atomic(root / "codec32.ini", "[codec]\nsample_rate = 32000\nchannels = 4\nwidths = 8,8,8,8,8\n"
                                          "strides = 2,2,2,2\nkl_weight = 0\n[train]\nsteps = 2\nbatch = 1\n"
                                          "crop = 512\nlr = 1e-3\n[mrstft]\nffts = 64\n");
  ASSERT_EQ(run("train-codec --config " + p(root / "codec32.ini") + " --corpus " + p(root / "corpus32") + " --out " +
                p(root / "codec32.ckpt"))
                .code,
            0);
  write_file_atomic(root / "stage2_train.ini", bytes_of(root / "stage2.ini") +
                                                   "[train]\nsteps = 2\nbatch = 1\nlr = 1e-3\ncrop_frames = 16\n"
                                                   "pool_size = 2\n");
  ASSERT_EQ(run("train-bridge --config " + p(root / "stage2_train.ini") + " --corpus " + p(root / "corpus32") +
                " --out " + p(root / "pred2.ckpt") + " --seed 10")
                .code,
            0);
  fs::create_directories(root / "val" / "prior");
  fs::create_directories(root / "val" / "hr");
  for (const auto& e : fs::directory_iterator(root / "corpus32")) {
    if (e.path().extension() != ".wav") continue;
    const Waveform hr = read_wav(e.path());
    write_wav(root / "val" / "hr" / e.path().filename(), hr);
    write_wav(root / "val" / "prior" / e.path().filename(), resample(hr, 16000));
  }
  const std::string base = "tune-aug --stage " + p(root / "stage2.ini") + " --val " + p(root / "val") +
                           " --b-r 0.05,0.3 --margins 0,1000 --steps 2 --seed 11 --out ";
  ASSERT_EQ(run(base + p(root / "tune_a.csv")).code, 0);
  ASSERT_EQ(run(base + p(root / "tune_b.csv")).code, 0);
  EXPECT_EQ(bytes_of(root / "tune_a.csv"), bytes_of(root / "tune_b.csv"));
  std::istringstream csv(bytes_of(root / "tune_a.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "b_r,margin_hz,mean_lsd");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(ShippedConfigs, HighRateChainValidates) {
  const fs::path dir = fs::path(BRIDGESR_CONFIG_DIR) / "hires";
  std::vector<StageConfig> chain;
  for (const char* name : {"stage1_48k.ini", "stage2_96k.ini", "stage3_192k.ini"}) {
    chain.push_back(stage_config_from(Config::load(dir / name), dir));
  }
  EXPECT_NO_THROW(validate_chain(chain));
  EXPECT_EQ(chain[1].augmentation.b_r_star, 0.3);
  EXPECT_EQ(chain[1].augmentation.lpf_margin_hz, 4000.0);
  EXPECT_EQ(chain[1].degradation.cutoff_lo, 16000.0);
  EXPECT_EQ(chain[1].degradation.cutoff_hi, 48000.0);
  for (const char* name : {"stage1_8k.ini", "stage2_16k.ini"}) {
    EXPECT_NO_THROW(stage_config_from(Config::load(fs::path(BRIDGESR_CONFIG_DIR) / name)));
  }
}

}  // namespace
}  // namespace bridgesr
