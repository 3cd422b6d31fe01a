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
#include <random>

#include "bridgesr/codec.hpp"
#include "bridgesr/corpus.hpp"
#include "test_support.hpp"

namespace bridgesr {
namespace {

CodecConfig tiny_config() {
  CodecConfig c;
  c.widths = {8, 12, 12, 16, 16};
  return c;
}

TEST(CodecConfig, RatioAndValidation) {
  EXPECT_EQ(CodecConfig{}.ratio(), 16);
  CodecConfig c;
  c.strides = {2, 2};
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.kl_weight = -1.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  for (double kl : {0.0, 1e-7, 1e-4}) {
    c.kl_weight = kl;
    EXPECT_NO_THROW(validate(c));
  }
}

TEST(Codec, FullScaleFrameRate) {
  // r_x = 512 at 48 kHz is 93.75 frames/s; 100 frames/s needs r_x = 480.
  CodecConfig c;
  c.sample_rate = 48000;
  c.channels = 64;
  c.widths = {4, 4, 4, 4};
  for (const auto& [strides, rate] : {std::pair{std::vector<int>{8, 8, 8}, 93.75}, {std::vector<int>{8, 6, 10}, 100.0}}) {
    c.strides = strides;
    const Codec codec(c, 1);
    const auto z = codec.encode(Waveform(std::vector<double>(4800, 0.0), 48000));
    EXPECT_DOUBLE_EQ(z.frame_rate, rate);
    EXPECT_EQ(z.channels(), 64);
    EXPECT_EQ(z.frames(), (4800 + codec.ratio() - 1) / codec.ratio());
  }
}

TEST(Codec, ShapesAndLengthRoundTrip) {
  const Codec codec(tiny_config(), 2);
  for (std::size_t n : {16u, 17u, 1000u, 4096u}) {
    const auto z = codec.encode(testing::white_noise(n, 8000, n, 0.1));
    EXPECT_EQ(z.frames(), static_cast<int>((n + 15) / 16));
    EXPECT_EQ(z.channels(), 8);
    EXPECT_EQ(codec.decode(z).size(), static_cast<std::size_t>(z.frames()) * 16);
    EXPECT_EQ(codec.decode(z, n).size(), n);
  }
}

TEST(Codec, DeterministicMeanAndSeededSample) {
  const Codec codec(tiny_config(), 3);
  const auto x = testing::white_noise(512, 8000, 4, 0.1);
  EXPECT_EQ(codec.encode(x).data.data, codec.encode(x).data.data);
  const Waveform zero(std::vector<double>(256, 0.0), 8000);
  EXPECT_EQ(codec.encode(zero).data.data, codec.encode(zero).data.data);
  std::mt19937_64 a(9), b(9);
  const auto sa = codec.encode(x, EncodeMode::Sample, &a), sb = codec.encode(x, EncodeMode::Sample, &b);
  EXPECT_EQ(sa.data.data, sb.data.data);
  EXPECT_NE(sa.data.data, codec.encode(x).data.data);
  EXPECT_THROW(codec.encode(x, EncodeMode::Sample, nullptr), std::invalid_argument);
}

TEST(Codec, RejectsShortOrMismatchedInput) {
  const Codec codec(tiny_config(), 4);
  EXPECT_THROW(codec.encode(Waveform(std::vector<double>(15, 0.0), 8000)), std::invalid_argument);
  EXPECT_THROW(codec.encode(Waveform(std::vector<double>(64, 0.0), 16000)), std::invalid_argument);
}

TEST(Codec, ShiftConsistentAtFrameGranularity) {
  const Codec codec(tiny_config(), 5);
  const auto x = testing::white_noise(1024, 8000, 6, 0.2);
  std::vector<double> shifted(16, 0.0);
  shifted.insert(shifted.end(), x.samples.begin(), x.samples.end() - 16);
  const auto a = codec.encode(x).data, b = codec.encode(Waveform(shifted, 8000)).data;
  // Frames near either edge see the padding differently.
  const int edge = 6;
  for (int ch = 0; ch < a.c; ++ch) {
    for (int k = edge; k < a.t - edge; ++k) EXPECT_NEAR(b(0, ch, k + 1), a(0, ch, k), 1e-12);
  }
}

TEST(Codec, CheckpointRoundTrip) {
  Codec codec(tiny_config(), 6);
  codec.latent_scale = 0.37;
  const auto path = std::filesystem::temp_directory_path() / "bridgesr_codec_test.ckpt";
  codec.save(path);
  const Codec back = Codec::load(path);
  std::filesystem::remove(path);
  EXPECT_DOUBLE_EQ(back.latent_scale, 0.37);
  EXPECT_EQ(back.config().widths, codec.config().widths);
  const auto x = testing::white_noise(256, 8000, 7, 0.1);
  EXPECT_LT(testing::max_abs_diff(codec.encode(x).data.data, back.encode(x).data.data), 1e-4);
}

TEST(LatentScale, DirectStandardDeviation) {
  std::mt19937_64 rng(8);
  std::vector<Tensor> unit, wide;
  for (int i = 0; i < 20; ++i) {
    unit.push_back(randn(1, 8, 500, rng));
    Tensor w = randn(1, 8, 500, rng);
    for (auto& v : w.data) v *= 4.0;
    wide.push_back(w);
  }
  EXPECT_NEAR(fit_latent_scale(unit), 1.0, 0.01);
  EXPECT_NEAR(fit_latent_scale(wide), 0.25, 0.01);
  EXPECT_THROW(fit_latent_scale({Tensor(1, 2, 10, 3.0)}), std::runtime_error);
}

TEST(Training, OneStepChangesParameters) {
  Codec codec(tiny_config(), 9);
  const auto corpus = generate_toy_corpus({}, 2, 10);
  std::vector<double> before;
  for (auto* p : codec.parameters()) before.insert(before.end(), p->value.data.begin(), p->value.data.end());
  CodecTrainConfig tc;
  tc.steps = 1;
  tc.batch = 2;
  tc.crop = 256;
  tc.mrstft.resolutions = {{64, 16}};
  const auto trace = train_codec(codec, corpus, tc);
  ASSERT_EQ(trace.size(), 1u);
  EXPECT_GE(trace[0].kl, 0.0);
  EXPECT_GE(trace[0].total, 0.0);
  std::size_t changed = 0, i = 0;
  for (auto* p : codec.parameters()) {
    for (double v : p->value.data) changed += v != before[i++];
  }
  EXPECT_GT(changed, before.size() / 2);
  EXPECT_THROW(train_codec(codec, {}, tc), std::invalid_argument);
}

TEST(Training, ToyReconstructionBeatsSilence) {
  CodecConfig cfg = tiny_config();
  cfg.kl_weight = 0.0;
  Codec codec(cfg, 11);
  ToyCorpusConfig tcfg;
  tcfg.length = 2048;
  const auto train = generate_toy_corpus(tcfg, 32, 12);
  const auto held = generate_toy_corpus(tcfg, 8, 13);
  CodecTrainConfig tc;
  tc.steps = 120;
  tc.batch = 2;
  tc.crop = 1024;
  tc.adam.lr = 2e-3;
  tc.seed = 14;
  tc.mrstft.resolutions = {{128, 32}, {256, 64}};
  const auto trace = train_codec(codec, train, tc);
  double first = 0.0, last = 0.0;
  for (int k = 0; k < 10; ++k) {
    first += trace[k].mrstft;
    last += trace[trace.size() - 1 - k].mrstft;
  }
  EXPECT_LT(last, first);

  double rec = 0.0, sil = 0.0;
  for (const auto& x : held) {
    const Waveform y = codec.decode(codec.encode(x), x.size());
    rec += mrstft_loss(x, y, tc.mrstft);
    sil += mrstft_loss(x, Waveform(std::vector<double>(x.size(), 0.0), x.sample_rate), tc.mrstft);
  }
  EXPECT_LE(rec, 0.5 * sil);

  codec.latent_scale = fit_latent_scale(codec, train);
  EXPECT_TRUE(std::isfinite(codec.latent_scale));
  EXPECT_GT(codec.latent_scale, 0.0);
  std::vector<Tensor> scaled;
  for (const auto& x : held) {
    Tensor z = codec.encode(x).data;
    for (auto& v : z.data) v *= codec.latent_scale;
    scaled.push_back(z);
  }
  const double held_std = 1.0 / fit_latent_scale(scaled);
  EXPECT_GE(held_std, 0.9);
  EXPECT_LE(held_std, 1.1);
}

}  // namespace
}  // namespace bridgesr
