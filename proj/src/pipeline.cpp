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

#include "bridgesr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bridgesr/corpus.hpp"
#include "bridgesr/metrics.hpp"
#include "bridgesr/resample.hpp"
#include "bridgesr/stft.hpp"

namespace bridgesr {

namespace {

constexpr double kMinPriorHz = 1000.0;
constexpr double kBypassFraction = 0.98;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

Tensor scaled(Tensor z, double s) {
  for (auto& v : z.data) v *= s;
  return z;
}

double peak_abs(const Waveform& w) {
  double p = 0.0;
  for (double v : w.samples) p = std::max(p, std::abs(v));
  return p;
}

}  // namespace

StageConfig stage_config_from(const Config& cfg, const std::filesystem::path& base_dir) {
  StageConfig s;
  s.target_sr = cfg.get_int("stage.target_sr");
  s.prior_sr = cfg.get_int("stage.prior_sr", 0);
  s.codec_path = resolve(base_dir, cfg.get_string("stage.codec"));
  s.predictor_path = resolve(base_dir, cfg.get_string("stage.predictor", ""));
  if (cfg.has("degrade.cutoff_lo")) s.degradation = degradation_policy_from(cfg, "degrade");
  if (s.cascaded()) {
    s.augmentation.lpf_margin_hz = cfg.get_double("augment.lpf_margin_hz");
    s.augmentation.b_r_max = cfg.get_double("augment.b_r_max");
    s.augmentation.b_r_star = cfg.get_double("augment.b_r_star");
    s.augmentation.train_margin_max_hz = cfg.get_double("augment.train_margin_max_hz");
  }
  s.schedule = cfg.get_string("bridge.schedule", s.schedule);
  s.g_min_sq = cfg.get_double("bridge.g_min_sq", s.g_min_sq);
  s.g_max_sq = cfg.get_double("bridge.g_max_sq", s.g_max_sq);
  auto& p = s.predictor;
  p.latent_channels = cfg.get_int("predictor.latent_channels", p.latent_channels);
  p.width = cfg.get_int("predictor.width", p.width);
  p.blocks = cfg.get_int("predictor.blocks", p.blocks);
  p.kernel = cfg.get_int("predictor.kernel", p.kernel);
  p.embed_dim = cfg.get_int("predictor.embed_dim", p.embed_dim);
  if (cfg.has("predictor.dilations")) p.dilations = cfg.get_int_list("predictor.dilations");
  p.blur_token = s.cascaded();
  validate(s);
  return s;
}

void validate(const StageConfig& cfg) {
  if (cfg.target_sr <= 0) throw std::invalid_argument("stage: target_sr must be positive");
  if (cfg.cascaded()) {
    if (cfg.prior_sr >= cfg.target_sr) throw std::invalid_argument("stage: prior_sr must be below target_sr");
    const auto& a = cfg.augmentation;
    if (!(a.b_r_star >= 0.0 && a.b_r_star <= a.b_r_max)) {
      throw std::invalid_argument("stage: need 0 <= b_r_star <= b_r_max");
    }
    if (!(a.lpf_margin_hz >= 0.0 && a.lpf_margin_hz < 0.5 * cfg.prior_sr)) {
      throw std::invalid_argument("stage: lpf_margin_hz must lie in [0, prior Nyquist)");
    }
    if (!(a.train_margin_max_hz >= 0.0 && a.train_margin_max_hz < 0.5 * cfg.prior_sr)) {
      throw std::invalid_argument("stage: train_margin_max_hz must lie in [0, prior Nyquist)");
    }
  }
  validate(cfg.predictor);
  make_schedule(cfg.schedule, cfg.g_min_sq, cfg.g_max_sq);
}

void validate_chain(const std::vector<StageConfig>& stages) {
  if (stages.empty()) throw std::invalid_argument("upsample: need at least one stage");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    validate(stages[i]);
    if (i == 0) continue;
    if (stages[i].target_sr <= stages[i - 1].target_sr) {
      throw std::invalid_argument("stage chain: sample rates must strictly increase (" +
                                  std::to_string(stages[i - 1].target_sr) + " -> " +
                                  std::to_string(stages[i].target_sr) + ")");
    }
    if (stages[i].cascaded() && stages[i].prior_sr != stages[i - 1].target_sr) {
      throw std::invalid_argument("stage chain: stage " + std::to_string(i) + " expects prior rate " +
                                  std::to_string(stages[i].prior_sr) + " but previous stage outputs " +
                                  std::to_string(stages[i - 1].target_sr));
    }
  }
}

StageModel load_stage(const StageConfig& cfg) {
  validate(cfg);
  Codec codec = Codec::load(cfg.codec_path);
  if (codec.config().sample_rate != cfg.target_sr) {
    throw std::invalid_argument("stage: codec runs at " + std::to_string(codec.config().sample_rate) +
                                " Hz but stage target is " + std::to_string(cfg.target_sr) + " Hz");
  }
  if (cfg.predictor_path.empty()) throw std::invalid_argument("stage: no predictor checkpoint configured");
  Predictor predictor = Predictor::from_checkpoint(load_checkpoint(cfg.predictor_path));
  if (predictor.config().latent_channels != codec.config().channels) {
    throw std::invalid_argument("stage: predictor latent channels differ from codec channels");
  }
  if (predictor.config().blur_token != cfg.cascaded()) {
    throw std::invalid_argument("stage: predictor blur token does not match stage type");
  }
  return StageModel{cfg, std::move(codec), std::move(predictor), make_schedule(cfg.schedule, cfg.g_min_sq, cfg.g_max_sq)};
}

namespace {

struct PoolItem {
  Tensor z0;
  Tensor zT;
  double f_prior = 0.0;
  double f_target = 0.0;
};

std::vector<PoolItem> build_pool(const StageConfig& cfg, const Codec& codec, const std::vector<Waveform>& corpus,
                                 const std::vector<double>& f_eff, const StageTrainOptions& opts,
                                 std::mt19937_64& rng) {
  std::vector<PoolItem> pool;
  const double s = codec.latent_scale;
  const int max_attempts = 20 * opts.pool_size;
  for (int attempt = 0; attempt < max_attempts && static_cast<int>(pool.size()) < opts.pool_size; ++attempt) {
    const std::size_t idx = std::uniform_int_distribution<std::size_t>(0, corpus.size() - 1)(rng);
    const Waveform& x = corpus[idx];
    PoolItem item;
    if (!cfg.cascaded()) {
      auto pair = prepare_anytoany_pair(x, f_eff[idx], rng, opts.pairs);
      if (!pair) continue;
      item.z0 = scaled(codec.encode(pair->x_hr).data, s);
      item.zT = scaled(codec.encode(pair->x_lr).data, s);
      item.f_prior = pair->f_prior;
      item.f_target = pair->f_target;
    } else {
      const double prior_nyq = 0.5 * cfg.prior_sr;
      const double margin = cfg.augmentation.train_margin_max_hz > 0.0
                                ? std::uniform_real_distribution<double>(0.0, cfg.augmentation.train_margin_max_hz)(rng)
                                : 0.0;
      const Waveform prior = augment_prior(resample(x, cfg.prior_sr), cfg.prior_sr, margin);
      Waveform up = resample(prior, cfg.target_sr);
      up.samples.resize(x.size(), 0.0);
      item.z0 = scaled(codec.encode(x).data, s);
      item.zT = scaled(codec.encode(up).data, s);
      item.f_prior = prior_nyq - margin;
      item.f_target = 0.5 * cfg.target_sr;
    }
    pool.push_back(std::move(item));
  }
  if (pool.empty()) throw std::runtime_error("train_stage: no usable training pairs (all clips below minimum band)");
  return pool;
}

}  // namespace

std::vector<StageLossRecord> train_stage(const StageConfig& cfg, const Codec& codec, Predictor& predictor,
                                         const BridgeSchedule& sched, const std::vector<Waveform>& corpus,
                                         const StageTrainOptions& opts,
                                         const std::function<void(const StageLossRecord&)>& on_step) {
  validate(cfg);
  if (corpus.empty()) throw std::invalid_argument("train_stage: empty corpus");
  if (predictor.config().blur_token != cfg.cascaded()) {
    throw std::invalid_argument("train_stage: predictor blur token does not match stage type");
  }
  for (const auto& w : corpus) {
    if (w.sample_rate != cfg.target_sr) {
      throw std::invalid_argument("train_stage: corpus clip at " + std::to_string(w.sample_rate) +
                                  " Hz, stage expects " + std::to_string(cfg.target_sr) + " Hz");
    }
  }
  if (codec.config().sample_rate != cfg.target_sr) throw std::invalid_argument("train_stage: codec rate mismatch");
  std::mt19937_64 rng(opts.seed);
  std::vector<double> f_eff;
  if (!cfg.cascaded()) {
    for (const auto& w : corpus) f_eff.push_back(estimate_f_eff(w, opts.estimator).f_eff);
  }
  Adam adam(predictor.parameters(), opts.adam);
  std::vector<PoolItem> pool;
  std::vector<StageLossRecord> trace;
  int crop = 0;
  for (int step = 0; step < opts.steps; ++step) {
    if (pool.empty() || (opts.pool_refresh > 0 && step % opts.pool_refresh == 0)) {
      pool = build_pool(cfg, codec, corpus, f_eff, opts, rng);
      crop = opts.crop_frames;
      for (const auto& it : pool) crop = std::min(crop, it.z0.t);
    }
    std::vector<Tensor> z0s, zTs;
    BridgeBatch batch;
    for (int i = 0; i < opts.batch; ++i) {
      const PoolItem& it = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
      const int off = std::uniform_int_distribution<int>(0, it.z0.t - crop)(rng);
      Conditioning c;
      c.t = std::uniform_real_distribution<double>(kTrainingTMin, 1.0)(rng);
      c.f_prior = it.f_prior;
      c.f_target = it.f_target;
      Tensor zT = it.zT;
      if (cfg.cascaded()) {
        const double b_r = std::uniform_real_distribution<double>(0.0, cfg.augmentation.b_r_max)(rng);
        zT = blur_latent(zT, b_r);
        c.b_r = b_r;
      }
      z0s.push_back(slice_time(it.z0, off, crop));
      zTs.push_back(slice_time(zT, off, crop));
      batch.cond.push_back(c);
    }
    batch.z0 = stack_batch(z0s);
    batch.zT = stack_batch(zTs);
    batch.eps = randn(batch.z0.b, batch.z0.c, batch.z0.t, rng);
    Tape tape;
    const auto loss = bridge_loss_graph(tape, predictor, batch, sched);
    const double value = tape.value(loss).data[0];
    if (!std::isfinite(value)) throw std::runtime_error("train_stage: non-finite loss at step " + std::to_string(step));
    adam.zero_grad();
    tape.backward(loss);
    adam.step();
    trace.push_back({step, value});
    if (on_step) on_step(trace.back());
  }
  return trace;
}

namespace {

Waveform run_stage(const Waveform& input, const StageModel& stage, const UpsampleOptions& opts, std::mt19937_64& rng,
                   StageReport& report) {
  const StageConfig& cfg = stage.cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const int out_len = static_cast<int>(std::lround(static_cast<double>(input.size()) * cfg.target_sr / input.sample_rate));
  Waveform cond_wav;
  double f_prior = 0.0;
  std::optional<double> b_r;
  if (!cfg.cascaded()) {
    f_prior = std::max(estimate_f_eff(input, opts.estimator).f_eff, kMinPriorHz);
    FilterSpec spec;
    spec.family = opts.inference_filter;
    spec.order = 8;
    auto band_limit = [&](const Waveform& w) {
      if (f_prior >= kBypassFraction * w.nyquist()) return w;
      spec.cutoff_hz = f_prior;
      return lowpass(w, spec, FilterMode::ZeroPhase);
    };
    cond_wav = opts.filter_before_resample ? resample(band_limit(input), cfg.target_sr)
                                           : band_limit(resample(input, cfg.target_sr));
  } else {
    if (input.sample_rate != cfg.prior_sr) {
      throw std::invalid_argument("cascaded stage expects input at " + std::to_string(cfg.prior_sr) + " Hz, got " +
                                  std::to_string(input.sample_rate));
    }
    const double margin = opts.margin_override.value_or(cfg.augmentation.lpf_margin_hz);
    f_prior = 0.5 * cfg.prior_sr - margin;
    cond_wav = resample(augment_prior(input, cfg.prior_sr, margin), cfg.target_sr);
    b_r = opts.b_r_override.value_or(cfg.augmentation.b_r_star);
  }
  cond_wav.samples.resize(static_cast<std::size_t>(out_len), 0.0);
  const double f_target = quantize_f_target(0.5 * cfg.target_sr);

  const double s = stage.scale();
  Tensor zT = scaled(stage.codec.encode(cond_wav).data, s);
  if (b_r) zT = blur_latent(zT, *b_r);
  Tensor z0;
  const int window = opts.stitch_window_seconds
                         ? std::max(1, static_cast<int>(std::lround(*opts.stitch_window_seconds * cfg.target_sr /
                                                                    stage.codec.ratio())))
                         : zT.t;
  if (window < zT.t) {
    WindowNoiseFn fn = [&](const Tensor& z, const Tensor& zTw, double t) {
      return stage.predictor.forward(z, zTw, Conditioning{t, f_prior, f_target, b_r});
    };
    z0 = stitch_sample(fn, zT, window, opts.n_steps, rng, *stage.schedule, opts.stitch);
  } else {
    NoiseFn fn = [&](const Tensor& z, double t) {
      return stage.predictor.forward(z, zT, Conditioning{t, f_prior, f_target, b_r});
    };
    z0 = sample(fn, zT, opts.n_steps, rng, *stage.schedule);
  }
  Latent lat;
  lat.data = scaled(std::move(z0), 1.0 / s);
  lat.ratio = stage.codec.ratio();
  lat.frame_rate = static_cast<double>(cfg.target_sr) / lat.ratio;
  lat.scale = s;
  Waveform out = stage.codec.decode(lat, static_cast<std::size_t>(out_len));
  if (opts.post_replace) out = replace_low_band(out, cond_wav, f_prior);

  report.target_sr = cfg.target_sr;
  report.f_prior = f_prior;
  report.f_target = f_target;
  report.b_r = b_r;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace

UpsampleResult upsample(const Waveform& input, const std::vector<const StageModel*>& stages,
                        const UpsampleOptions& opts, std::mt19937_64& rng) {
  validate(input);
  std::vector<StageConfig> cfgs;
  for (const auto* s : stages) cfgs.push_back(s->cfg);
  validate_chain(cfgs);
  if (opts.n_steps < 1) throw std::invalid_argument("upsample: n_steps must be >= 1");
  const int final_sr = cfgs.back().target_sr;
  if (input.sample_rate > final_sr) {
    throw std::invalid_argument("upsample: input rate " + std::to_string(input.sample_rate) +
                                " Hz exceeds final stage rate " + std::to_string(final_sr) + " Hz");
  }
  UpsampleResult result;
  if (peak_abs(input) == 0.0) {
    result.warnings.push_back("silent input: bypassing super-resolution");
    result.output = resample(input, final_sr);
    return result;
  }
  Waveform cur = input;
  for (const auto* stage : stages) {
    StageReport report;
    cur = run_stage(cur, *stage, opts, rng, report);
    result.stages.push_back(report);
  }
  result.output = std::move(cur);
  return result;
}

TuneResult tune_augmentation(const StageModel& stage, const std::vector<ValidationPair>& val,
                             const std::vector<double>& b_r_grid, const std::vector<double>& margin_grid,
                             int n_steps, std::uint64_t seed) {
  if (b_r_grid.empty() || margin_grid.empty()) throw std::invalid_argument("tune_augmentation: empty grid");
  if (val.empty()) throw std::invalid_argument("tune_augmentation: no validation pairs");
  if (!stage.cfg.cascaded()) throw std::invalid_argument("tune_augmentation: stage is not cascaded");
  std::vector<double> brs = b_r_grid, margins = margin_grid;
  std::sort(brs.begin(), brs.end());
  std::sort(margins.begin(), margins.end());
  TuneResult res;
  bool have_best = false;
  for (double b_r : brs) {
    for (double margin : margins) {
      UpsampleOptions opts;
      opts.n_steps = n_steps;
      opts.b_r_override = b_r;
      opts.margin_override = margin;
      double total = 0.0;
      for (std::size_t j = 0; j < val.size(); ++j) {
        std::mt19937_64 rng(derive_seed(seed, j));
        StageReport report;
        Waveform out = run_stage(val[j].prior, stage, opts, rng, report);
        Waveform ref = val[j].hr;
        const std::size_t n = std::min(out.size(), ref.size());
        out.samples.resize(n);
        ref.samples.resize(n);
        total += lsd(ref, out);
      }
      TuneRow row{b_r, margin, total / static_cast<double>(val.size())};
      res.rows.push_back(row);
      // Rows arrive in (b_r, margin) ascending order, so strict < keeps the documented tie-break.
      if (!have_best || row.mean_lsd < res.best.mean_lsd) {
        res.best = row;
        have_best = true;
      }
    }
  }
  return res;
}

std::string tune_csv(const TuneResult& result) {
  std::ostringstream out;
  out.precision(10);
  out << "b_r,margin_hz,mean_lsd\n";
  for (const auto& r : result.rows) out << r.b_r << "," << r.margin_hz << "," << r.mean_lsd << "\n";
  return out.str();
}

}  // namespace bridgesr
