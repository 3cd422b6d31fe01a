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
#include <filesystem>
#include <random>
#include <sstream>

#include "bridgesr/corpus.hpp"
#include "bridgesr/metrics.hpp"
#include "bridgesr/pipeline.hpp"
#include "bridgesr/resample.hpp"
#include "test_support.hpp"

namespace bridgesr {
namespace {

namespace fs = std::filesystem;

CodecConfig tiny_codec(int sr) {
  CodecConfig c;
  c.sample_rate = sr;
  c.widths = {8, 8, 8, 8, 8};
  return c;
}

PredictorConfig tiny_predictor(bool blur) {
  PredictorConfig p;
  p.width = 12;
  p.blocks = 1;
  p.embed_dim = 8;
  p.blur_token = blur;
  return p;
}

StageModel make_stage(int target_sr, int prior_sr, std::uint64_t seed) {
  StageConfig cfg;
  cfg.target_sr = target_sr;
  cfg.prior_sr = prior_sr;
  cfg.predictor = tiny_predictor(prior_sr > 0);
  if (prior_sr > 0) {
    cfg.augmentation.lpf_margin_hz = 0.1 * prior_sr;
    cfg.augmentation.train_margin_max_hz = 0.2 * prior_sr;
  }
  return StageModel{cfg, Codec(tiny_codec(target_sr), seed), Predictor(cfg.predictor, seed + 1),
                    make_schedule(cfg.schedule, cfg.g_min_sq, cfg.g_max_sq)};
}

Waveform tone_mix(int sr, std::size_t n) {
  Waveform w(std::vector<double>(n), sr);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    w.samples[i] = 0.3 * std::sin(2 * M_PI * 440.0 * t) + 0.1 * std::sin(2 * M_PI * 1250.0 * t);
  }
  return w;
}

TEST(StageConfig, ParsesBothStageKinds) {
  const auto first = stage_config_from(Config::parse("[stage]\ntarget_sr = 8000\ncodec = c.ckpt\npredictor = p.ckpt\n"),
                                       "/models");
  EXPECT_FALSE(first.cascaded());
  EXPECT_EQ(first.codec_path, fs::path("/models/c.ckpt"));
  EXPECT_FALSE(first.predictor.blur_token);
  EXPECT_EQ(first.degradation.cutoff_lo, 1000.0);

  const std::string cascaded =
      "[stage]\ntarget_sr = 16000\nprior_sr = 8000\ncodec = /abs/c.ckpt\n"
      "[augment]\nlpf_margin_hz = 1000\nb_r_max = 1.0\nb_r_star = 0.3\ntrain_margin_max_hz = 2000\n"
      "[predictor]\nwidth = 16\ndilations = 1,3\n";
  const auto second = stage_config_from(Config::parse(cascaded), "/models");
  EXPECT_TRUE(second.cascaded());
  EXPECT_EQ(second.codec_path, fs::path("/abs/c.ckpt"));
  EXPECT_TRUE(second.predictor.blur_token);
  EXPECT_EQ(second.predictor.width, 16);
  EXPECT_EQ(second.predictor.dilations, (std::vector<int>{1, 3}));
  EXPECT_EQ(second.augmentation.b_r_star, 0.3);
}

TEST(StageConfig, CascadedStageRequiresBlurFields) {
  const std::string text =
      "[stage]\ntarget_sr = 16000\nprior_sr = 8000\ncodec = c\n"
      "[augment]\nlpf_margin_hz = 1000\nb_r_star = 0.3\ntrain_margin_max_hz = 2000\n";
  try {
    stage_config_from(Config::parse(text));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("augment.b_r_max"), std::string::npos);
  }
}

TEST(StageConfig, ValidationRejectsBadValues) {
  auto s = make_stage(16000, 8000, 1).cfg;
  EXPECT_NO_THROW(validate(s));
  s.augmentation.b_r_star = 1.5;
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = make_stage(16000, 8000, 1).cfg;
  s.augmentation.lpf_margin_hz = 4000.0;
  EXPECT_THROW(validate(s), std::invalid_argument);
  s.prior_sr = 16000;
  EXPECT_THROW(validate(s), std::invalid_argument);
  s = make_stage(8000, 0, 1).cfg;
  s.target_sr = 0;
  EXPECT_THROW(validate(s), std::invalid_argument);
}

TEST(StageChain, RatesStrictlyIncrease) {
  std::vector<StageConfig> chain;
  for (auto [target, prior] : {std::pair{48000, 0}, {96000, 48000}, {192000, 96000}}) {
    StageConfig s;
    s.target_sr = target;
    s.prior_sr = prior;
    s.predictor.blur_token = prior > 0;
    chain.push_back(s);
  }
  EXPECT_NO_THROW(validate_chain(chain));
  auto swapped = chain;
  std::swap(swapped[1], swapped[2]);
  EXPECT_THROW(validate_chain(swapped), std::invalid_argument);
  auto mismatched = chain;
  mismatched[2].prior_sr = 48000;
  EXPECT_THROW(validate_chain(mismatched), std::invalid_argument);
  EXPECT_THROW(validate_chain({}), std::invalid_argument);
}

TEST(LoadStage, RejectsCodecRateMismatch) {
  const auto dir = fs::temp_directory_path() / "bridgesr_pipeline_load";
  fs::create_directories(dir);
  Codec(tiny_codec(8000), 1).save(dir / "codec.ckpt");
  save_checkpoint(dir / "pred.ckpt", Predictor(tiny_predictor(false), 2).to_checkpoint());
  StageConfig cfg;
  cfg.target_sr = 8000;
  cfg.codec_path = dir / "codec.ckpt";
  cfg.predictor_path = dir / "pred.ckpt";
  cfg.predictor = tiny_predictor(false);
  EXPECT_NO_THROW(load_stage(cfg));
  cfg.target_sr = 16000;
  EXPECT_THROW(load_stage(cfg), std::invalid_argument);
  cfg.target_sr = 8000;
  cfg.predictor_path.clear();
  EXPECT_THROW(load_stage(cfg), std::invalid_argument);
  fs::remove_all(dir);
}

TEST(Upsample, DeterministicUnderSeedAndReportsStages) {
  const auto s1 = make_stage(8000, 0, 3), s2 = make_stage(16000, 8000, 5);
  const Waveform in = tone_mix(4000, 1000);
  UpsampleOptions opts;
  opts.n_steps = 6;
  std::mt19937_64 a(11), b(11), c(12);
  const auto ra = upsample(in, {&s1, &s2}, opts, a);
  const auto rb = upsample(in, {&s1, &s2}, opts, b);
  const auto rc = upsample(in, {&s1, &s2}, opts, c);
  EXPECT_EQ(ra.output.samples, rb.output.samples);
  EXPECT_NE(ra.output.samples, rc.output.samples);
  EXPECT_EQ(ra.output.sample_rate, 16000);
  EXPECT_EQ(ra.output.size(), 4000u);
  ASSERT_EQ(ra.stages.size(), 2u);
  EXPECT_FALSE(ra.stages[0].b_r.has_value());
  ASSERT_TRUE(ra.stages[1].b_r.has_value());
  EXPECT_EQ(*ra.stages[1].b_r, 0.3);
  EXPECT_EQ(ra.stages[1].f_prior, 4000.0 - 800.0);
  EXPECT_EQ(ra.stages[1].f_target, 8000.0);
  EXPECT_GE(ra.stages[0].f_prior, 1000.0);
  EXPECT_LE(ra.stages[0].f_prior, 2000.0 * 1.05);
  EXPECT_EQ(kDefaultSamplingSteps, UpsampleOptions{}.n_steps);
}

TEST(Upsample, RejectsRateAboveFinalAndBypassesSilence) {
  const auto s1 = make_stage(8000, 0, 3);
  UpsampleOptions opts;
  opts.n_steps = 3;
  std::mt19937_64 rng(1);
  EXPECT_THROW(upsample(tone_mix(16000, 800), {&s1}, opts, rng), std::invalid_argument);
  opts.n_steps = 0;
  EXPECT_THROW(upsample(tone_mix(8000, 800), {&s1}, opts, rng), std::invalid_argument);
  opts.n_steps = 3;
  const auto r = upsample(Waveform(std::vector<double>(400, 0.0), 4000), {&s1}, opts, rng);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.output.sample_rate, 8000);
  EXPECT_EQ(r.output.size(), 800u);
  for (double v : r.output.samples) EXPECT_EQ(v, 0.0);
}

TEST(Upsample, StitchedPathIsDeterministicAndShaped) {
  const auto s1 = make_stage(8000, 0, 7);
  const Waveform in = tone_mix(8000, 4000);
  UpsampleOptions opts;
  opts.n_steps = 4;
  opts.stitch_window_seconds = 0.1;  // 50 frames of 250
  std::mt19937_64 a(2), b(2);
  const auto ra = upsample(in, {&s1}, opts, a), rb = upsample(in, {&s1}, opts, b);
  EXPECT_EQ(ra.output.samples, rb.output.samples);
  EXPECT_EQ(ra.output.size(), in.size());
  for (double v : ra.output.samples) EXPECT_TRUE(std::isfinite(v));
}

TEST(Upsample, PostReplacementKeepsInputBand) {
  const auto s1 = make_stage(8000, 0, 9);
  ToyCorpusConfig tc;
  tc.length = 8192;
  const Waveform hr = generate_toy_corpus(tc, 1, 3)[0];
  const Waveform in = resample(hr, 4000);
  UpsampleOptions opts;
  opts.n_steps = 4;
  std::mt19937_64 a(4), b(4);
  const auto raw = upsample(in, {&s1}, opts, a);
  opts.post_replace = true;
  const auto post = upsample(in, {&s1}, opts, b);
  const Waveform ref = resample(in, 8000);
  const double f = post.stages[0].f_prior;
  EXPECT_LT(lsd_band(ref, post.output, 0.0, 0.9 * f), 0.5 * lsd_band(ref, raw.output, 0.0, 0.9 * f));
}

TEST(Upsample, FilterOrderFlagChangesOnlyConditioning) {
  const auto s1 = make_stage(8000, 0, 13);
  const Waveform in = tone_mix(4000, 1000);
  UpsampleOptions opts;
  opts.n_steps = 3;
  std::mt19937_64 a(6), b(6);
  const auto before = upsample(in, {&s1}, opts, a);
  opts.filter_before_resample = false;
  const auto after = upsample(in, {&s1}, opts, b);
  EXPECT_EQ(before.output.size(), after.output.size());
  EXPECT_EQ(before.stages[0].f_prior, after.stages[0].f_prior);
}

TEST(TrainStage, FirstStageRunsAndIsReproducible) {
  auto s = make_stage(8000, 0, 15);
  ToyCorpusConfig tc;
  tc.length = 2048;
  const auto corpus = generate_toy_corpus(tc, 6, 16);
  StageTrainOptions opts;
  opts.steps = 6;
  opts.batch = 2;
  opts.crop_frames = 32;
  opts.pool_size = 4;
  opts.seed = 17;
  Predictor p1(s.cfg.predictor, 1), p2(s.cfg.predictor, 1);
  int calls = 0;
  const auto t1 = train_stage(s.cfg, s.codec, p1, *s.schedule, corpus, opts, [&](const StageLossRecord&) { ++calls; });
  const auto t2 = train_stage(s.cfg, s.codec, p2, *s.schedule, corpus, opts);
  ASSERT_EQ(t1.size(), 6u);
  EXPECT_EQ(calls, 6);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    EXPECT_EQ(t1[i].loss, t2[i].loss);
    EXPECT_TRUE(std::isfinite(t1[i].loss));
  }
  EXPECT_EQ(p1.to_checkpoint().tensors.front().second.data, p2.to_checkpoint().tensors.front().second.data);
}

TEST(TrainStage, CascadedStageRunsWithFrozenCodec) {
  auto s = make_stage(16000, 8000, 18);
  ToyCorpusConfig tc;
  tc.sample_rate = 16000;
  tc.length = 2048;
  const auto corpus = generate_toy_corpus(tc, 4, 19);
  const auto codec_before = s.codec.to_checkpoint().tensors;
  StageTrainOptions opts;
  opts.steps = 3;
  opts.batch = 2;
  opts.crop_frames = 32;
  opts.pool_size = 4;
  Predictor p(s.cfg.predictor, 2);
  const auto trace = train_stage(s.cfg, s.codec, p, *s.schedule, corpus, opts);
  EXPECT_EQ(trace.size(), 3u);
  const auto codec_after = s.codec.to_checkpoint().tensors;
  for (std::size_t i = 0; i < codec_before.size(); ++i) EXPECT_EQ(codec_before[i].second.data, codec_after[i].second.data);
}

TEST(TrainStage, RejectsMismatches) {
  auto s = make_stage(8000, 0, 20);
  StageTrainOptions opts;
  opts.steps = 1;
  Predictor p(s.cfg.predictor, 1);
  EXPECT_THROW(train_stage(s.cfg, s.codec, p, *s.schedule, {}, opts), std::invalid_argument);
  EXPECT_THROW(train_stage(s.cfg, s.codec, p, *s.schedule, {tone_mix(16000, 2048)}, opts), std::invalid_argument);
  Predictor blurred(tiny_predictor(true), 1);
  EXPECT_THROW(train_stage(s.cfg, s.codec, blurred, *s.schedule, {tone_mix(8000, 2048)}, opts),
               std::invalid_argument);
}

TEST(TuneAugmentation, FullGridAndArgmin) {
  const auto s2 = make_stage(16000, 8000, 21);
  ToyCorpusConfig tc;
  tc.sample_rate = 16000;
  tc.length = 4096;
  std::vector<ValidationPair> val;
  for (const auto& hr : generate_toy_corpus(tc, 2, 22)) val.push_back({resample(hr, 8000), hr});
  const auto res = tune_augmentation(s2, val, {0.5, 0.05, 0.3}, {0.0, 2000.0, 1000.0}, 2, 23);
  ASSERT_EQ(res.rows.size(), 9u);
  EXPECT_EQ(res.rows.front().b_r, 0.05);
  EXPECT_EQ(res.rows.front().margin_hz, 0.0);
  double best = res.rows.front().mean_lsd;
  for (const auto& r : res.rows) best = std::min(best, r.mean_lsd);
  EXPECT_EQ(res.best.mean_lsd, best);
  for (const auto& r : res.rows) {
    // The first row reaching the minimum wins, which is the smallest b_r then margin.
    if (r.mean_lsd == best) {
      EXPECT_EQ(r.b_r, res.best.b_r);
      EXPECT_EQ(r.margin_hz, res.best.margin_hz);
      break;
    }
  }
  std::istringstream csv(tune_csv(res));
  std::string line;
  int lines = 0;
  std::getline(csv, line);
  EXPECT_EQ(line, "b_r,margin_hz,mean_lsd");
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 9);
  const auto again = tune_augmentation(s2, val, {0.5, 0.05, 0.3}, {0.0, 2000.0, 1000.0}, 2, 23);
  EXPECT_EQ(again.best.mean_lsd, res.best.mean_lsd);
  EXPECT_THROW(tune_augmentation(s2, val, {}, {0.0}, 2, 1), std::invalid_argument);
  const auto s1 = make_stage(8000, 0, 24);
  EXPECT_THROW(tune_augmentation(s1, val, {0.3}, {0.0}, 2, 1), std::invalid_argument);
}

}  // namespace
}  // namespace bridgesr
