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
#include <fstream>
#include <random>

#include "bridgesr/bandwidth.hpp"
#include "bridgesr/checkpoint.hpp"
#include "bridgesr/config.hpp"
#include "bridgesr/corpus.hpp"
#include "bridgesr/io_util.hpp"
#include "test_support.hpp"

namespace bridgesr {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("bridgesr_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Config, SectionsTypesAndComments) {
  const auto cfg = Config::parse(
      "seed = 3\n"
      "# comment\n"
      "[stage]\n"
      "target_sr = 16000 ; trailing\n"
      "name =  desk \n"
      "[train]\n"
      "lr = 1e-3\n"
      "strides = 2, 2,4\n"
      "cutoffs = 1.5,2\n"
      "flag = Yes\n");
  EXPECT_EQ(cfg.get_int("seed"), 3);
  EXPECT_EQ(cfg.get_int("stage.target_sr"), 16000);
  EXPECT_EQ(cfg.get_string("stage.name"), "desk");
  EXPECT_DOUBLE_EQ(cfg.get_double("train.lr"), 1e-3);
  EXPECT_EQ(cfg.get_int_list("train.strides"), (std::vector<int>{2, 2, 4}));
  EXPECT_EQ(cfg.get_double_list("train.cutoffs"), (std::vector<double>{1.5, 2.0}));
  EXPECT_TRUE(cfg.get_bool("train.flag"));
  EXPECT_EQ(cfg.get_int("train.steps", 7), 7);
  EXPECT_EQ(Config::parse(cfg.to_ini()).entries(), cfg.entries());
}

TEST(Config, ErrorsNameTheKey) {
  const auto cfg = Config::parse("[a]\nx = 1.5\ny = maybe\n", "stage.ini");
  try {
    cfg.get_int("a.missing");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("a.missing"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("stage.ini"), std::string::npos);
  }
  EXPECT_THROW(cfg.get_int("a.x"), ConfigError);
  EXPECT_THROW(cfg.get_bool("a.y"), ConfigError);
  EXPECT_THROW(Config::parse("[broken\n"), ConfigError);
  EXPECT_THROW(Config::parse("novalue\n"), ConfigError);
}

TEST(Checkpoint, BytesRoundTripAndCorruption) {
  Checkpoint c;
  c.meta["kind"] = "test";
  Tensor t(2, 3, 4);
  for (std::size_t i = 0; i < t.size(); ++i) t.data[i] = 0.25 * static_cast<double>(i) - 1.0;
  c.tensors.emplace_back("w", t);
  const auto bytes = serialize_checkpoint(c);
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_TRUE(std::equal(bytes.begin(), bytes.begin() + 8, kCheckpointMagic));
  const auto back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.get("kind"), "test");
  EXPECT_EQ(back.tensor("w").data, t.data);  // exactly representable in float32
  EXPECT_THROW(back.tensor("nope"), std::exception);
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_THROW(deserialize_checkpoint(truncated), std::exception);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad_magic), std::exception);
}

TEST(Checkpoint, ParameterShapeMismatchRejected) {
  Parameter a("w", Tensor(1, 2, 3, 0.5)), b("w", Tensor(1, 2, 4, 0.0)), other("v", Tensor(1, 1, 1));
  Checkpoint c;
  store_parameters(c, {&a});
  Parameter a2("w", Tensor(1, 2, 3, 0.0));
  restore_parameters(c, {&a2});
  EXPECT_EQ(a2.value.data, a.value.data);
  EXPECT_THROW(restore_parameters(c, {&b}), std::exception);
  EXPECT_THROW(restore_parameters(c, {&a2, &other}), std::exception);
}

TEST(AtomicWrite, ReplacesContents) {
  const auto dir = scratch_dir("atomic");
  const auto p = dir / "f.txt";
  write_file_atomic(p, "one");
  write_file_atomic(p, "two");
  EXPECT_EQ(read_file(p), "two");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
  fs::remove_all(dir);
}

TEST(ToyCorpus, ReproducibleSubsetsAndPeak) {
  ToyCorpusConfig cfg;
  cfg.length = 2048;
  const auto a = generate_toy_corpus(cfg, 6, 42);
  const auto b = generate_toy_corpus(cfg, 3, 42);
  ASSERT_EQ(a.size(), 6u);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(a[i].samples, b[i].samples);
  EXPECT_NE(a[0].samples, a[1].samples);
  for (const auto& w : a) {
    EXPECT_EQ(w.sample_rate, 8000);
    EXPECT_EQ(w.size(), 2048u);
    double peak = 0.0;
    for (double v : w.samples) peak = std::max(peak, std::abs(v));
    EXPECT_NEAR(peak, 0.5, 1e-12);
  }
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(ToyCorpus, ClipsReadAsFullBand) {
  ToyCorpusConfig cfg;
  cfg.length = 8192;
  int full = 0;
  for (const auto& w : generate_toy_corpus(cfg, 20, 7)) full += estimate_f_eff(w).f_eff >= 0.9 * w.nyquist();
  EXPECT_GE(full, 18);
}

TEST(WavDir, SortedAndSkipsUnreadable) {
  const auto dir = scratch_dir("wavdir");
  write_wav(dir / "b.wav", testing::white_noise(64, 8000, 1, 0.1));
  write_wav(dir / "a.wav", testing::white_noise(32, 8000, 2, 0.1));
  std::ofstream(dir / "c.wav") << "not a wav";
  std::ofstream(dir / "notes.txt") << "ignored";
  std::vector<std::string> warnings;
  const auto files = load_wav_dir(dir, warnings);
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0].path.filename(), "a.wav");
  EXPECT_EQ(files[1].path.filename(), "b.wav");
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("c.wav"), std::string::npos);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace bridgesr
