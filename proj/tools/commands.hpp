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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bridgesr::cli {

struct MakeCorpusArgs {
  std::string out_dir;
  int count = 64;
  int sample_rate = 8000;
  int length = 4096;
  std::uint64_t seed = 0;
};

struct TrainCodecArgs {
  std::string config;
  std::string corpus;
  std::string out;
  std::uint64_t seed = 0;
  std::optional<int> steps;
};

struct TrainBridgeArgs {
  std::string config;
  std::string corpus;
  std::string out;
  std::uint64_t seed = 0;
  std::optional<int> steps;
};

struct UpsampleArgs {
  std::string input;
  std::vector<std::string> stages;
  std::string out;
  int steps = 50;
  std::uint64_t seed = 0;
  bool post_replace = false;
  std::optional<double> stitch_seconds;
};

struct EvalArgs {
  std::string ref_dir;
  std::string est_dir;
  std::optional<double> band_split;
  std::string lr_dir;
  std::string out;
};

struct DegradeArgs {
  std::string corpus;
  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
};

struct TuneArgs {
  std::string stage;
  std::string val_dir;
  std::vector<double> b_r{0.05, 0.3, 0.5};
  std::vector<double> margins{0.0, 2000.0, 4000.0};
  int steps = 50;
  std::uint64_t seed = 0;
  std::string out;
};

int make_corpus(const MakeCorpusArgs& a);
int train_codec(const TrainCodecArgs& a);
int train_bridge(const TrainBridgeArgs& a);
int upsample(const UpsampleArgs& a);
int eval(const EvalArgs& a);
int degrade(const DegradeArgs& a);
int detect_bw(const std::string& path);
int tune_aug(const TuneArgs& a);

/// Worker count from BRIDGESR_THREADS (default 1).
int thread_count();

}  // namespace bridgesr::cli
