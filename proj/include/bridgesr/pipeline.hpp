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
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bridgesr/bandwidth.hpp"
#include "bridgesr/bridge.hpp"
#include "bridgesr/codec.hpp"
#include "bridgesr/config.hpp"
#include "bridgesr/degradation.hpp"
#include "bridgesr/predictor.hpp"
#include "bridgesr/stitch.hpp"

namespace bridgesr {

struct AugmentationConfig {
  double lpf_margin_hz = 4000.0;        // inference margin below the prior Nyquist
  double b_r_max = 1.0;                 // training blur ratio ~ U(0, b_r_max)
  double b_r_star = 0.3;                // inference blur ratio
  double train_margin_max_hz = 8000.0;  // training margin ~ U(0, max)
};

struct StageConfig {
  int target_sr = 0;
  int prior_sr = 0;  // 0: first (any-to-any) stage; otherwise the previous stage's rate
  std::filesystem::path codec_path;
  std::filesystem::path predictor_path;
  DegradationPolicy degradation = DegradationPolicy::first_stage();
  AugmentationConfig augmentation{};
  std::string schedule = "gmax";
  double g_min_sq = 0.001;
  double g_max_sq = 1.0;
  PredictorConfig predictor{};

  bool cascaded() const { return prior_sr > 0; }
};

/// Reads [stage], [degrade], [augment], [bridge] and [predictor] sections.
/// Relative checkpoint paths resolve against `base_dir`.
StageConfig stage_config_from(const Config& cfg, const std::filesystem::path& base_dir = {});
void validate(const StageConfig& cfg);
/// Stage rates must strictly increase and each cascaded prior rate must match the previous target.
void validate_chain(const std::vector<StageConfig>& stages);

struct StageModel {
  StageConfig cfg;
  Codec codec;
  Predictor predictor;
  std::unique_ptr<BridgeSchedule> schedule;

  double scale() const { return codec.latent_scale; }
};

/// Loads codec and predictor checkpoints; rejects codec/stage rate mismatches.
StageModel load_stage(const StageConfig& cfg);

struct StageTrainOptions {
  int steps = 1000;
  int batch = 8;
  int crop_frames = 64;  // latent frames per training item
  AdamConfig adam{};
  std::uint64_t seed = 0;
  int pool_size = 64;      // encoded pairs kept in memory
  int pool_refresh = 200;  // steps between pool rebuilds
  PairOptions pairs{};     // first stage only
  EstimatorConfig estimator{};
};

struct StageLossRecord {
  int step = 0;
  double loss = 0.0;
};

/// Stage 1: any-to-any pairs, conditioning (t, f_prior, f_target).
/// Cascaded: prior = Blur(s * E(LPF(x_hr))) with b_r ~ U(0, b_r_max), margin ~ U(0, max).
/// Codec stays frozen. Throws std::runtime_error naming the step on non-finite loss.
std::vector<StageLossRecord> train_stage(const StageConfig& cfg, const Codec& codec, Predictor& predictor,
                                         const BridgeSchedule& sched, const std::vector<Waveform>& corpus,
                                         const StageTrainOptions& opts,
                                         const std::function<void(const StageLossRecord&)>& on_step = {});

struct UpsampleOptions {
  int n_steps = kDefaultSamplingSteps;
  bool post_replace = false;  // replace the output low band with the conditioned input below f_prior
  bool filter_before_resample = true;
  FilterFamily inference_filter = FilterFamily::Chebyshev1;
  std::optional<double> stitch_window_seconds;  // windowed sampling when the clip is longer
  StitchSchedule stitch{};
  EstimatorConfig estimator{};
  std::optional<double> b_r_override;     // tuning hooks for cascaded stages
  std::optional<double> margin_override;
};

struct StageReport {
  int target_sr = 0;
  double f_prior = 0.0;
  double f_target = 0.0;
  std::optional<double> b_r;
  double seconds = 0.0;
};

struct UpsampleResult {
  Waveform output;
  std::vector<StageReport> stages;
  std::vector<std::string> warnings;
};

/// Runs every stage in order. Throws if the input rate exceeds the final stage rate.
UpsampleResult upsample(const Waveform& input, const std::vector<const StageModel*>& stages,
                        const UpsampleOptions& opts, std::mt19937_64& rng);

struct TuneRow {
  double b_r = 0.0;
  double margin_hz = 0.0;
  double mean_lsd = 0.0;
};

struct TuneResult {
  std::vector<TuneRow> rows;
  TuneRow best;
};

struct ValidationPair {
  Waveform prior;  // previous-stage output at the stage's prior rate
  Waveform hr;     // ground truth at the stage's target rate
};

/// Exhaustive grid over (b_r, margin) on a cascaded stage, selecting the
/// smallest mean LSD; ties go to the smaller b_r, then the smaller margin.
TuneResult tune_augmentation(const StageModel& stage, const std::vector<ValidationPair>& val,
                             const std::vector<double>& b_r_grid, const std::vector<double>& margin_grid,
                             int n_steps, std::uint64_t seed);

std::string tune_csv(const TuneResult& result);

}  // namespace bridgesr
