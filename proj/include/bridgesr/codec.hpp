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
#include <random>
#include <vector>

#include "bridgesr/autodiff.hpp"
#include "bridgesr/checkpoint.hpp"
#include "bridgesr/config.hpp"
#include "bridgesr/metrics.hpp"
#include "bridgesr/nn.hpp"
#include "bridgesr/waveform.hpp"

namespace bridgesr {

struct CodecConfig {
  int sample_rate = 8000;
  int channels = 8;                             // c
  std::vector<int> widths{16, 32, 32, 64, 64};  // encoder widths, input conv first
  std::vector<int> strides{2, 2, 2, 2};         // one per downsampling layer
  double kl_weight = 0.0;

  int ratio() const;  // r_x, product of strides
};

void validate(const CodecConfig& cfg);
CodecConfig codec_config_from(const Config& cfg, const std::string& section = "codec");
void write_codec_config(const CodecConfig& cfg, std::map<std::string, std::string>& meta);

/// c x l latent for one clip. `data` holds unscaled codec units; the bridge
/// works on scale * data.
struct Latent {
  Tensor data;  // [1, c, l]
  double frame_rate = 0.0;
  int ratio = 1;
  double scale = 1.0;

  int channels() const { return data.c; }
  int frames() const { return data.t; }
};

enum class EncodeMode { Mean, Sample };

class Codec {
 public:
  explicit Codec(CodecConfig cfg, std::uint64_t seed = 0);

  const CodecConfig& config() const { return cfg_; }
  int ratio() const { return cfg_.ratio(); }

  struct Posterior {
    Tape::Var mu;
    Tape::Var logvar;
  };

  /// x: [B, 1, L] -> mu, logvar: [B, c, ceil(L / r_x)].
  Posterior encode_graph(Tape& tape, Tape::Var x);
  /// z: [B, c, l] -> [B, 1, l * r_x].
  Tape::Var decode_graph(Tape& tape, Tape::Var z);

  /// Posterior means for a batch; read-only on parameters.
  Tensor encode_mean(const Tensor& x) const;
  Tensor decode_tensor(const Tensor& z) const;

  /// Throws std::invalid_argument if the clip is shorter than r_x or at the wrong rate.
  Latent encode(const Waveform& wav, EncodeMode mode = EncodeMode::Mean, std::mt19937_64* rng = nullptr) const;
  /// Output length l * r_x, trimmed to `length` when non-zero.
  Waveform decode(const Latent& z, std::size_t length = 0) const;

  std::vector<Parameter*> parameters();

  double latent_scale = 1.0;

  Checkpoint to_checkpoint() const;
  static Codec from_checkpoint(const Checkpoint& ckpt);
  void save(const std::filesystem::path& path) const;
  static Codec load(const std::filesystem::path& path);

 private:
  template <typename Self>
  static Posterior encode_impl(Self& self, Tape& tape, Tape::Var x);
  template <typename Self>
  static Tape::Var decode_impl(Self& self, Tape& tape, Tape::Var z);

  CodecConfig cfg_;
  Conv1d enc_in_;
  std::vector<Conv1d> enc_down_;
  Conv1d enc_out_;
  Conv1d dec_in_;
  std::vector<ConvTranspose1d> dec_up_;
  std::vector<Conv1d> dec_res_;
  Conv1d dec_out_;
};

struct CodecTrainConfig {
  int steps = 2000;
  int batch = 4;
  int crop = 2048;  // samples, rounded down to a multiple of r_x
  AdamConfig adam{};
  // Decoding posterior samples with a weak KL lets the decoder lean on the
  // sampling noise, which mean-mode inference then lacks.
  bool sample_posterior = false;
  std::uint64_t seed = 0;
  MrStftConfig mrstft{};
};

struct CodecLossRecord {
  int step = 0;
  double total = 0.0;
  double mrstft = 0.0;
  double kl = 0.0;
};

/// MR-STFT reconstruction plus kl_weight * KL(q || N(0, I)) with Adam.
/// Throws std::runtime_error naming the step on a non-finite loss.
std::vector<CodecLossRecord> train_codec(Codec& codec, const std::vector<Waveform>& corpus,
                                         const CodecTrainConfig& cfg,
                                         const std::function<void(const CodecLossRecord&)>& on_step = {});

/// 1 / std of pooled posterior means over the corpus.
double fit_latent_scale(const std::vector<Tensor>& latents);
double fit_latent_scale(const Codec& codec, const std::vector<Waveform>& corpus);

}  // namespace bridgesr
