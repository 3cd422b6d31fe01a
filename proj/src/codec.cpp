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

#include "bridgesr/codec.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bridgesr {

int CodecConfig::ratio() const {
  return std::accumulate(strides.begin(), strides.end(), 1, [](int a, int b) { return a * b; });
}

void validate(const CodecConfig& cfg) {
  if (cfg.sample_rate <= 0) throw std::invalid_argument("codec: sample_rate must be positive");
  if (cfg.channels < 1) throw std::invalid_argument("codec: channels must be >= 1");
  if (cfg.strides.empty()) throw std::invalid_argument("codec: need at least one stride");
  if (cfg.widths.size() != cfg.strides.size() + 1) {
    throw std::invalid_argument("codec: widths must have one more entry than strides");
  }
  for (int s : cfg.strides) {
    if (s < 1) throw std::invalid_argument("codec: strides must be >= 1");
  }
  for (int w : cfg.widths) {
    if (w < 1) throw std::invalid_argument("codec: widths must be >= 1");
  }
  if (!(cfg.kl_weight >= 0.0)) throw std::invalid_argument("codec: kl_weight must be non-negative");
}

CodecConfig codec_config_from(const Config& cfg, const std::string& section) {
  CodecConfig out;
  out.sample_rate = cfg.get_int(section + ".sample_rate");
  out.channels = cfg.get_int(section + ".channels");
  out.widths = cfg.get_int_list(section + ".widths");
  out.strides = cfg.get_int_list(section + ".strides");
  out.kl_weight = cfg.get_double(section + ".kl_weight");
  if (cfg.has(section + ".ratio") && cfg.get_int(section + ".ratio") != out.ratio()) {
    throw ConfigError("codec: ratio " + cfg.get_string(section + ".ratio") + " differs from product of strides " +
                      std::to_string(out.ratio()));
  }
  validate(out);
  return out;
}

void write_codec_config(const CodecConfig& cfg, std::map<std::string, std::string>& meta) {
  meta["codec.sample_rate"] = std::to_string(cfg.sample_rate);
  meta["codec.channels"] = std::to_string(cfg.channels);
  meta["codec.widths"] = join_list(cfg.widths);
  meta["codec.strides"] = join_list(cfg.strides);
  meta["codec.ratio"] = std::to_string(cfg.ratio());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", cfg.kl_weight);
  meta["codec.kl_weight"] = buf;
}

Codec::Codec(CodecConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  validate(cfg_);
  const auto& w = cfg_.widths;
  const auto& s = cfg_.strides;
  const int c = cfg_.channels;
  enc_in_ = Conv1d("enc.in", 1, w[0], 7, 1, 1, PadMode::Reflect);
  for (std::size_t i = 0; i < s.size(); ++i) {
    enc_down_.emplace_back("enc.down" + std::to_string(i), w[i], w[i + 1], 5, s[i], 1, PadMode::Reflect);
  }
  enc_out_ = Conv1d("enc.out", w.back(), 2 * c, 3, 1, 1, PadMode::Reflect);
  dec_in_ = Conv1d("dec.in", c, w.back(), 3, 1, 1, PadMode::Reflect);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const std::size_t i = s.size() - 1 - j;
    dec_up_.emplace_back("dec.up" + std::to_string(j), w[i + 1], w[i], s[i]);
    dec_res_.emplace_back("dec.res" + std::to_string(j), w[i], w[i], 5, 1, 1, PadMode::Reflect);
  }
  dec_out_ = Conv1d("dec.out", w[0], 1, 7, 1, 1, PadMode::Reflect);

  std::mt19937_64 rng(seed);
  enc_in_.init(rng);
  for (auto& l : enc_down_) l.init(rng);
  enc_out_.init(rng);
  dec_in_.init(rng);
  for (std::size_t j = 0; j < dec_up_.size(); ++j) {
    dec_up_[j].init(rng);
    dec_res_[j].init(rng);
  }
  dec_out_.init(rng);
}

std::vector<Parameter*> Codec::parameters() {
  std::vector<Parameter*> out;
  append(out, enc_in_.parameters());
  for (auto& l : enc_down_) append(out, l.parameters());
  append(out, enc_out_.parameters());
  append(out, dec_in_.parameters());
  for (std::size_t j = 0; j < dec_up_.size(); ++j) {
    append(out, dec_up_[j].parameters());
    append(out, dec_res_[j].parameters());
  }
  append(out, dec_out_.parameters());
  return out;
}

template <typename Self>
Codec::Posterior Codec::encode_impl(Self& self, Tape& tape, Tape::Var x) {
  Tape::Var h = tape.silu(self.enc_in_(tape, x));
  for (auto& l : self.enc_down_) h = tape.silu(l(tape, h));
  const Tape::Var out = self.enc_out_(tape, h);
  const int c = self.cfg_.channels;
  return {tape.slice_channels(out, 0, c), tape.slice_channels(out, c, c)};
}

template <typename Self>
Tape::Var Codec::decode_impl(Self& self, Tape& tape, Tape::Var z) {
  Tape::Var h = tape.silu(self.dec_in_(tape, z));
  for (std::size_t j = 0; j < self.dec_up_.size(); ++j) {
    h = tape.silu(self.dec_up_[j](tape, h));
    h = tape.add(h, tape.silu(self.dec_res_[j](tape, h)));
  }
  return self.dec_out_(tape, h);
}

Codec::Posterior Codec::encode_graph(Tape& tape, Tape::Var x) { return encode_impl(*this, tape, x); }
Tape::Var Codec::decode_graph(Tape& tape, Tape::Var z) { return decode_impl(*this, tape, z); }

Tensor Codec::encode_mean(const Tensor& x) const {
  if (x.c != 1) throw std::invalid_argument("codec: encoder expects mono [B,1,L] input");
  if (x.t < ratio()) {
    throw std::invalid_argument("codec: input of " + std::to_string(x.t) + " samples is shorter than r_x=" +
                                std::to_string(ratio()));
  }
  Tape tape;
  const auto post = encode_impl(*this, tape, tape.constant(x));
  return tape.value(post.mu);
}

Tensor Codec::decode_tensor(const Tensor& z) const {
  if (z.c != cfg_.channels) {
    throw std::invalid_argument("codec: latent has " + std::to_string(z.c) + " channels, expected " +
                                std::to_string(cfg_.channels));
  }
  Tape tape;
  return tape.value(decode_impl(*this, tape, tape.constant(z)));
}

Latent Codec::encode(const Waveform& wav, EncodeMode mode, std::mt19937_64* rng) const {
  if (wav.sample_rate != cfg_.sample_rate) {
    throw std::invalid_argument("codec: waveform at " + std::to_string(wav.sample_rate) + " Hz, codec expects " +
                                std::to_string(cfg_.sample_rate) + " Hz");
  }
  if (static_cast<int>(wav.size()) < ratio()) {
    throw std::invalid_argument("codec: input of " + std::to_string(wav.size()) + " samples is shorter than r_x=" +
                                std::to_string(ratio()));
  }
  Tensor x(1, 1, static_cast<int>(wav.size()));
  x.data = wav.samples;
  Latent out;
  out.ratio = ratio();
  out.frame_rate = static_cast<double>(cfg_.sample_rate) / out.ratio;
  out.scale = latent_scale;
  Tape tape;
  const auto post = encode_impl(*this, tape, tape.constant(x));
  out.data = tape.value(post.mu);
  if (mode == EncodeMode::Sample) {
    if (rng == nullptr) throw std::invalid_argument("codec: sample mode needs an rng");
    const Tensor& lv = tape.value(post.logvar);
    const Tensor eps = randn(lv.b, lv.c, lv.t, *rng);
    for (std::size_t i = 0; i < lv.size(); ++i) out.data.data[i] += std::exp(0.5 * lv.data[i]) * eps.data[i];
  }
  return out;
}

Waveform Codec::decode(const Latent& z, std::size_t length) const {
  if (z.data.b != 1) throw std::invalid_argument("codec: decode expects a single latent");
  Tensor y = decode_tensor(z.data);
  Waveform out(std::move(y.data), cfg_.sample_rate);
  if (length > 0) {
    if (length > out.samples.size()) throw std::invalid_argument("codec: requested length exceeds decoded length");
    out.samples.resize(length);
  }
  return out;
}

Checkpoint Codec::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.meta["kind"] = "codec";
  write_codec_config(cfg_, ckpt.meta);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", latent_scale);
  ckpt.meta["codec.scale"] = buf;
  store_parameters(ckpt, const_cast<Codec*>(this)->parameters());
  return ckpt;
}

Codec Codec::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.count("kind") == 0 || ckpt.get("kind") != "codec") {
    throw std::runtime_error("checkpoint is not a codec checkpoint");
  }
  Config cfg;
  for (const auto& [k, v] : ckpt.meta) cfg.set(k, v);
  Codec codec(codec_config_from(cfg));
  restore_parameters(ckpt, codec.parameters());
  codec.latent_scale = cfg.get_double("codec.scale", 1.0);
  return codec;
}

void Codec::save(const std::filesystem::path& path) const { save_checkpoint(path, to_checkpoint()); }

Codec Codec::load(const std::filesystem::path& path) { return from_checkpoint(load_checkpoint(path)); }

std::vector<CodecLossRecord> train_codec(Codec& codec, const std::vector<Waveform>& corpus,
                                         const CodecTrainConfig& cfg,
                                         const std::function<void(const CodecLossRecord&)>& on_step) {
  if (corpus.empty()) throw std::invalid_argument("train_codec: empty corpus");
  const int r = codec.ratio();
  const int crop = (cfg.crop / r) * r;
  if (crop < r) throw std::invalid_argument("train_codec: crop shorter than r_x");
  std::vector<const Waveform*> usable;
  for (const auto& w : corpus) {
    if (w.sample_rate != codec.config().sample_rate) {
      throw std::invalid_argument("train_codec: corpus clip at " + std::to_string(w.sample_rate) +
                                  " Hz, codec expects " + std::to_string(codec.config().sample_rate));
    }
    if (static_cast<int>(w.size()) >= crop) usable.push_back(&w);
  }
  if (usable.empty()) throw std::invalid_argument("train_codec: no clip is at least one crop long");

  std::mt19937_64 rng(cfg.seed);
  auto params = codec.parameters();
  Adam adam(params, cfg.adam);
  std::vector<CodecLossRecord> trace;
  trace.reserve(static_cast<std::size_t>(cfg.steps));
  const double klw = codec.config().kl_weight;
  for (int step = 0; step < cfg.steps; ++step) {
    Tensor x(cfg.batch, 1, crop);
    for (int i = 0; i < cfg.batch; ++i) {
      const Waveform& w = *usable[std::uniform_int_distribution<std::size_t>(0, usable.size() - 1)(rng)];
      const std::size_t off = std::uniform_int_distribution<std::size_t>(0, w.size() - crop)(rng);
      std::copy_n(w.samples.begin() + static_cast<std::ptrdiff_t>(off), crop, x.row(i, 0));
    }
    Tape tape;
    const auto xv = tape.constant(x);
    const auto post = codec.encode_graph(tape, xv);
    Tape::Var z = post.mu;
    if (cfg.sample_posterior) {
      const Tensor& mu = tape.value(post.mu);
      z = tape.reparameterize(post.mu, post.logvar, randn(mu.b, mu.c, mu.t, rng));
    }
    const auto y = codec.decode_graph(tape, z);
    const auto rec = tape.mrstft(y, x, codec.config().sample_rate, cfg.mrstft);
    const auto kl = tape.gaussian_kl(post.mu, post.logvar);
    const auto loss = tape.add(rec, tape.scale(kl, klw));
    CodecLossRecord record{step, tape.value(loss).data[0], tape.value(rec).data[0], tape.value(kl).data[0]};
    if (!std::isfinite(record.total)) {
      throw std::runtime_error("train_codec: non-finite loss at step " + std::to_string(step) +
                               " (mrstft=" + std::to_string(record.mrstft) + ", kl=" + std::to_string(record.kl) + ")");
    }
    adam.zero_grad();
    tape.backward(loss);
    adam.step();
    trace.push_back(record);
    if (on_step) on_step(record);
  }
  return trace;
}

double fit_latent_scale(const std::vector<Tensor>& latents) {
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (const auto& z : latents) {
    for (double v : z.data) {
      sum += v;
      sq += v * v;
      ++n;
    }
  }
  if (n < 2) throw std::invalid_argument("fit_latent_scale: need at least two latent entries");
  const double mean = sum / n;
  const double var = std::max(0.0, sq / n - mean * mean);
  if (!(var > 1e-24)) throw std::runtime_error("fit_latent_scale: latent has zero variance");
  return 1.0 / std::sqrt(var);
}

double fit_latent_scale(const Codec& codec, const std::vector<Waveform>& corpus) {
  std::vector<Tensor> latents;
  for (const auto& w : corpus) latents.push_back(codec.encode(w).data);
  return fit_latent_scale(latents);
}

}  // namespace bridgesr
