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

#include "bridgesr/predictor.hpp"

#include <cmath>
#include <stdexcept>

namespace bridgesr {

double quantize_f_target(double hz) { return std::round(hz / kTargetQuantumHz) * kTargetQuantumHz; }

std::vector<double> sinusoidal_embed(double value, int dim) {
  if (dim < 2 || dim % 2 != 0) throw std::invalid_argument("sinusoidal_embed: dim must be even and >= 2");
  const int half = dim / 2;
  std::vector<double> out(static_cast<std::size_t>(dim));
  for (int j = 0; j < half; ++j) {
    const double w = std::pow(10000.0, -static_cast<double>(j) / half);
    out[2 * j] = std::sin(value * w);
    out[2 * j + 1] = std::cos(value * w);
  }
  return out;
}

void validate(const PredictorConfig& cfg) {
  if (cfg.latent_channels < 1 || cfg.width < 1 || cfg.blocks < 1 || cfg.kernel < 1) {
    throw std::invalid_argument("predictor: dimensions must be positive");
  }
  if (cfg.embed_dim < 2 || cfg.embed_dim % 2 != 0) throw std::invalid_argument("predictor: embed_dim must be even");
  if (cfg.dilations.empty()) throw std::invalid_argument("predictor: need at least one dilation");
}

Predictor::Predictor(PredictorConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)) {
  validate(cfg_);
  const int c = cfg_.latent_channels, d = cfg_.width;
  in_ = Conv1d("pred.in", 2 * c, d, 1);
  for (int k = 0; k < num_tokens(); ++k) {
    token_proj_.emplace_back("pred.token" + std::to_string(k), cfg_.embed_dim, d, 1);
  }
  for (int b = 0; b < cfg_.blocks; ++b) {
    const int dil = cfg_.dilations[static_cast<std::size_t>(b) % cfg_.dilations.size()];
    const std::string p = "pred.block" + std::to_string(b);
    conv_a_.emplace_back(p + ".a", d, d, cfg_.kernel, 1, dil);
    conv_b_.emplace_back(p + ".b", d, d, cfg_.kernel, 1, 1);
    pool_proj_.emplace_back(p + ".pool", d, d, 1);
  }
  out_ = Conv1d("pred.out", d, c, 1);

  std::mt19937_64 rng(seed);
  in_.init(rng);
  for (auto& l : token_proj_) l.init(rng);
  for (int b = 0; b < cfg_.blocks; ++b) {
    conv_a_[b].init(rng);
    conv_b_[b].init(rng);
    pool_proj_[b].init(rng);
  }
  out_.init(rng);
}

std::vector<Parameter*> Predictor::parameters() {
  std::vector<Parameter*> out;
  append(out, in_.parameters());
  for (auto& l : token_proj_) append(out, l.parameters());
  for (int b = 0; b < cfg_.blocks; ++b) {
    append(out, conv_a_[b].parameters());
    append(out, conv_b_[b].parameters());
    append(out, pool_proj_[b].parameters());
  }
  append(out, out_.parameters());
  return out;
}

Tensor Predictor::token_embeddings(const std::vector<Conditioning>& cond, int token) const {
  const int e = cfg_.embed_dim;
  Tensor out(static_cast<int>(cond.size()), e, 1);
  for (std::size_t i = 0; i < cond.size(); ++i) {
    double v = 0.0;
    switch (token) {
      case 0: v = cond[i].t * kTimeEmbedScale; break;
      case 1: v = cond[i].f_prior; break;
      case 2: v = quantize_f_target(cond[i].f_target); break;
      default: v = cond[i].b_r.value_or(0.0) * kBlurEmbedScale; break;
    }
    const auto emb = sinusoidal_embed(v, e);
    for (int k = 0; k < e; ++k) out(static_cast<int>(i), k, 0) = emb[k];
  }
  return out;
}

template <typename Self>
Tape::Var Predictor::forward_impl(Self& self, Tape& tape, Tape::Var z_t, Tape::Var z_T,
                                  const std::vector<Conditioning>& cond) {
  const Tensor& zt = tape.value(z_t);
  check_same_shape(zt, tape.value(z_T), "predictor");
  if (zt.c != self.cfg_.latent_channels) {
    throw std::invalid_argument("predictor: latent has " + std::to_string(zt.c) + " channels, expected " +
                                std::to_string(self.cfg_.latent_channels));
  }
  if (static_cast<int>(cond.size()) != zt.b) {
    throw std::invalid_argument("predictor: " + std::to_string(cond.size()) + " conditionings for batch of " +
                                std::to_string(zt.b));
  }
  for (const auto& c : cond) {
    if (self.cfg_.blur_token != c.b_r.has_value()) {
      throw std::invalid_argument(self.cfg_.blur_token ? "predictor: cascaded stage requires b_r"
                                                       : "predictor: b_r given to a stage without a blur token");
    }
  }
  const int l = zt.t;
  const int ntok = self.num_tokens();
  std::vector<Tape::Var> seq;
  for (int k = 0; k < ntok; ++k) {
    seq.push_back(self.token_proj_[k](tape, tape.constant(self.token_embeddings(cond, k))));
  }
  seq.push_back(self.in_(tape, tape.concat_channels(z_t, z_T)));
  Tape::Var h = tape.concat_time(seq);
  for (int b = 0; b < self.cfg_.blocks; ++b) {
    Tape::Var a = self.conv_a_[b](tape, tape.silu(h));
    const Tape::Var pooled = self.pool_proj_[b](tape, tape.mean_time(tape.slice_time(h, 0, ntok)));
    a = tape.add_time_broadcast(a, pooled);
    a = self.conv_b_[b](tape, tape.silu(a));
    h = tape.add(h, a);
  }
  const Tape::Var y = self.out_(tape, tape.silu(h));
  return tape.slice_time(y, ntok, l);
}

Tape::Var Predictor::forward_graph(Tape& tape, Tape::Var z_t, Tape::Var z_T, const std::vector<Conditioning>& cond) {
  return forward_impl(*this, tape, z_t, z_T, cond);
}

Tensor Predictor::forward(const Tensor& z_t, const Tensor& z_T, const std::vector<Conditioning>& cond) const {
  Tape tape;
  return tape.value(forward_impl(*this, tape, tape.constant(z_t), tape.constant(z_T), cond));
}

Tensor Predictor::forward(const Tensor& z_t, const Tensor& z_T, const Conditioning& cond) const {
  return forward(z_t, z_T, std::vector<Conditioning>(static_cast<std::size_t>(z_t.b), cond));
}

Checkpoint Predictor::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.meta["kind"] = "predictor";
  ckpt.meta["predictor.latent_channels"] = std::to_string(cfg_.latent_channels);
  ckpt.meta["predictor.width"] = std::to_string(cfg_.width);
  ckpt.meta["predictor.blocks"] = std::to_string(cfg_.blocks);
  ckpt.meta["predictor.kernel"] = std::to_string(cfg_.kernel);
  ckpt.meta["predictor.embed_dim"] = std::to_string(cfg_.embed_dim);
  std::string dil;
  for (std::size_t i = 0; i < cfg_.dilations.size(); ++i) dil += (i ? "," : "") + std::to_string(cfg_.dilations[i]);
  ckpt.meta["predictor.dilations"] = dil;
  ckpt.meta["predictor.blur_token"] = cfg_.blur_token ? "true" : "false";
  store_parameters(ckpt, const_cast<Predictor*>(this)->parameters());
  return ckpt;
}

Predictor Predictor::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.meta.count("kind") == 0 || ckpt.get("kind") != "predictor") {
    throw std::runtime_error("checkpoint is not a predictor checkpoint");
  }
  PredictorConfig cfg;
  cfg.latent_channels = std::stoi(ckpt.get("predictor.latent_channels"));
  cfg.width = std::stoi(ckpt.get("predictor.width"));
  cfg.blocks = std::stoi(ckpt.get("predictor.blocks"));
  cfg.kernel = std::stoi(ckpt.get("predictor.kernel"));
  cfg.embed_dim = std::stoi(ckpt.get("predictor.embed_dim"));
  cfg.dilations.clear();
  const std::string& dil = ckpt.get("predictor.dilations");
  std::size_t pos = 0;
  while (pos < dil.size()) {
    const auto comma = dil.find(',', pos);
    cfg.dilations.push_back(std::stoi(dil.substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  cfg.blur_token = ckpt.get("predictor.blur_token") == "true";
  Predictor net(cfg);
  restore_parameters(ckpt, net.parameters());
  return net;
}

namespace {

void bridge_inputs(const BridgeBatch& batch, const BridgeSchedule& sched, Tensor& z_t, Tensor& target) {
  check_same_shape(batch.z0, batch.zT, "bridge batch");
  check_same_shape(batch.z0, batch.eps, "bridge batch");
  if (static_cast<int>(batch.cond.size()) != batch.z0.b) throw std::invalid_argument("bridge batch: cond size");
  std::vector<Tensor> zs, ts;
  for (int i = 0; i < batch.z0.b; ++i) {
    const double t = batch.cond[static_cast<std::size_t>(i)].t;
    const Tensor z0 = batch_item(batch.z0, i);
    const Tensor zt = forward_sample(z0, batch_item(batch.zT, i), t, batch_item(batch.eps, i), sched);
    ts.push_back(loss_target(zt, z0, t, sched));
    zs.push_back(zt);
  }
  z_t = stack_batch(zs);
  target = stack_batch(ts);
}

}  // namespace

Tape::Var bridge_loss_graph(Tape& tape, Predictor& net, const BridgeBatch& batch, const BridgeSchedule& sched) {
  Tensor z_t, target;
  bridge_inputs(batch, sched, z_t, target);
  const auto pred = net.forward_graph(tape, tape.constant(z_t), tape.constant(batch.zT), batch.cond);
  return tape.mse(pred, tape.constant(target));
}

double bridge_loss(const Predictor& net, const BridgeBatch& batch, const BridgeSchedule& sched) {
  Tensor z_t, target;
  bridge_inputs(batch, sched, z_t, target);
  const Tensor pred = net.forward(z_t, batch.zT, batch.cond);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred.data[i] - target.data[i]) * (pred.data[i] - target.data[i]);
  return s / static_cast<double>(pred.size());
}

GradCheckResult grad_check(Predictor& net, const BridgeBatch& batch, const BridgeSchedule& sched, double eps,
                           int n_params, std::mt19937_64& rng) {
  if (!(eps >= 1e-6 && eps <= 1e-3)) throw std::invalid_argument("grad_check: eps must lie in [1e-6, 1e-3]");
  auto params = net.parameters();
  for (auto* p : params) p->zero_grad();
  {
    Tape tape;
    tape.backward(bridge_loss_graph(tape, net, batch, sched));
  }
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (auto* p : params) {
    offsets.push_back(total);
    total += p->value.size();
  }
  GradCheckResult res;
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  for (int n = 0; n < n_params; ++n) {
    const std::size_t flat = pick(rng);
    std::size_t j = params.size() - 1;
    while (offsets[j] > flat) --j;
    Parameter& p = *params[j];
    const std::size_t k = flat - offsets[j];
    const double saved = p.value.data[k];
    p.value.data[k] = saved + eps;
    const double up = bridge_loss(net, batch, sched);
    p.value.data[k] = saved - eps;
    const double down = bridge_loss(net, batch, sched);
    p.value.data[k] = saved;
    const double numeric = p.frozen ? 0.0 : (up - down) / (2.0 * eps);
    const double analytic = p.grad.data[k];
    const double denom = std::max(std::abs(analytic), std::abs(numeric));
    const double rel = denom < 1e-12 ? std::abs(analytic - numeric) : std::abs(analytic - numeric) / denom;
    if (rel > res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst_param = p.name + "[" + std::to_string(k) + "]";
    }
    ++res.checked;
  }
  for (auto* p : params) p->zero_grad();
  return res;
}

}  // namespace bridgesr
