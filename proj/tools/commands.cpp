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

#include "commands.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "bridgesr/bandwidth.hpp"
#include "bridgesr/codec.hpp"
#include "bridgesr/config.hpp"
#include "bridgesr/corpus.hpp"
#include "bridgesr/degradation.hpp"
#include "bridgesr/io_util.hpp"
#include "bridgesr/metrics.hpp"
#include "bridgesr/pipeline.hpp"
#include "bridgesr/resample.hpp"

namespace bridgesr::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Manifest {
 public:
  explicit Manifest(std::string command) : start_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["version"] = std::string("bridgesr ") + BRIDGESR_VERSION;
  }
  json& operator[](const char* key) { return doc_[key]; }
  void write(const fs::path& path) {
    doc_["wall_clock_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_file_atomic(path, doc_.dump(2) + "\n");
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point start_;
};

fs::path sidecar(const fs::path& out, const std::string& suffix) { return fs::path(out.string() + suffix); }

std::vector<Waveform> load_corpus(const std::string& dir, int expected_sr, const std::string& what) {
  std::vector<std::string> warnings;
  auto files = load_wav_dir(dir, warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (files.empty()) throw std::runtime_error(what + ": corpus " + dir + " has no readable WAV files");
  std::vector<Waveform> out;
  for (auto& f : files) {
    if (f.wav.sample_rate != expected_sr) {
      throw std::runtime_error(what + ": " + f.path.string() + " is at " + std::to_string(f.wav.sample_rate) +
                               " Hz, expected " + std::to_string(expected_sr) + " Hz");
    }
    out.push_back(std::move(f.wav));
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

MrStftConfig mrstft_from(const Config& cfg) {
  MrStftConfig out;
  if (!cfg.has("mrstft.ffts")) return out;
  out.resolutions.clear();
  for (int fft : cfg.get_int_list("mrstft.ffts")) out.resolutions.push_back(StftParams{fft, fft / 4});
  for (const auto& p : out.resolutions) validate(p);
  return out;
}

}  // namespace

int thread_count() {
  const char* env = std::getenv("BRIDGESR_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n > 0 ? n : 1;
}

int make_corpus(const MakeCorpusArgs& a) {
  fs::create_directories(a.out_dir);
  ToyCorpusConfig cfg;
  cfg.sample_rate = a.sample_rate;
  cfg.length = a.length;
  Manifest m("make-corpus");
  m["seed"] = a.seed;
  m["output"] = a.out_dir;
  m["count"] = a.count;
  parallel_for(static_cast<std::size_t>(a.count), [&](std::size_t i) {
    std::mt19937_64 rng(derive_seed(a.seed, i));
    char name[32];
    std::snprintf(name, sizeof name, "clip_%04zu.wav", i);
    write_wav(fs::path(a.out_dir) / name, generate_toy_clip(cfg, rng));
  });
  m.write(fs::path(a.out_dir) / "corpus.manifest.json");
  std::cout << "wrote " << a.count << " clips to " << a.out_dir << "\n";
  return 0;
}

int train_codec(const TrainCodecArgs& a) {
  const Config cfg = Config::load(a.config);
  const CodecConfig codec_cfg = codec_config_from(cfg, "codec");
  CodecTrainConfig tc;
  tc.steps = a.steps.value_or(cfg.get_int("train.steps"));
  tc.batch = cfg.get_int("train.batch");
  tc.crop = cfg.get_int("train.crop");
  tc.adam.lr = cfg.get_double("train.lr");
  tc.sample_posterior = cfg.get_bool("train.sample_posterior", false);
  tc.seed = a.seed;
  tc.mrstft = mrstft_from(cfg);
  const int log_every = std::max(1, cfg.get_int("train.log_every", 50));
  const auto corpus = load_corpus(a.corpus, codec_cfg.sample_rate, "train-codec");

  Codec codec(codec_cfg, derive_seed(a.seed, 0));
  std::ostringstream csv;
  csv << "step,total,mrstft,kl\n";
  double acc_t = 0, acc_m = 0, acc_k = 0;
  int acc_n = 0;
  train_codec(codec, corpus, tc, [&](const CodecLossRecord& r) {
    acc_t += r.total;
    acc_m += r.mrstft;
    acc_k += r.kl;
    ++acc_n;
    if ((r.step + 1) % log_every == 0 || r.step + 1 == tc.steps) {
      csv << r.step << "," << fmt(acc_t / acc_n) << "," << fmt(acc_m / acc_n) << "," << fmt(acc_k / acc_n) << "\n";
      acc_t = acc_m = acc_k = 0;
      acc_n = 0;
    }
  });
  codec.latent_scale = fit_latent_scale(codec, corpus);
  codec.save(a.out);
  write_file_atomic(sidecar(a.out, ".loss.csv"), csv.str());
  Manifest m("train-codec");
  m["config"] = a.config;
  m["seed"] = a.seed;
  m["inputs"] = {a.corpus};
  m["outputs"] = {a.out, sidecar(a.out, ".loss.csv").string()};
  m["latent_scale"] = codec.latent_scale;
  m.write(sidecar(a.out, ".manifest.json"));
  std::cout << "latent_scale=" << fmt(codec.latent_scale) << "\n";
  return 0;
}

int train_bridge(const TrainBridgeArgs& a) {
  const Config cfg = Config::load(a.config);
  const StageConfig stage = stage_config_from(cfg, fs::path(a.config).parent_path());
  const Codec codec = Codec::load(stage.codec_path);
  if (codec.config().sample_rate != stage.target_sr) {
    throw std::runtime_error("train-bridge: codec rate " + std::to_string(codec.config().sample_rate) +
                             " Hz differs from stage rate " + std::to_string(stage.target_sr) + " Hz");
  }
  StageTrainOptions opts;
  opts.steps = a.steps.value_or(cfg.get_int("train.steps"));
  opts.batch = cfg.get_int("train.batch");
  opts.adam.lr = cfg.get_double("train.lr");
  opts.crop_frames = cfg.get_int("train.crop_frames", opts.crop_frames);
  opts.pool_size = cfg.get_int("train.pool_size", opts.pool_size);
  opts.pool_refresh = cfg.get_int("train.pool_refresh", opts.pool_refresh);
  opts.seed = a.seed;
  if (cfg.has("pairs.f_target_lo")) opts.pairs.f_target_lo = cfg.get_double("pairs.f_target_lo");
  if (cfg.has("pairs.f_target_hi")) opts.pairs.f_target_hi = cfg.get_double("pairs.f_target_hi");
  if (cfg.has("pairs.f_prior_lo")) opts.pairs.f_prior_lo = cfg.get_double("pairs.f_prior_lo");
  if (cfg.has("pairs.f_prior_hi")) opts.pairs.f_prior_hi = cfg.get_double("pairs.f_prior_hi");
  if (cfg.has("pairs.lr_family")) opts.pairs.lr_filter.families = {parse_filter_family(cfg.get_string("pairs.lr_family"))};
  if (cfg.has("pairs.lr_order")) {
    opts.pairs.lr_filter.order_lo = opts.pairs.lr_filter.order_hi = cfg.get_int("pairs.lr_order");
  }
  const int log_every = std::max(1, cfg.get_int("train.log_every", 50));
  const auto corpus = load_corpus(a.corpus, stage.target_sr, "train-bridge");

  PredictorConfig pcfg = stage.predictor;
  pcfg.latent_channels = codec.config().channels;
  Predictor net(pcfg, derive_seed(a.seed, 1));
  const auto sched = make_schedule(stage.schedule, stage.g_min_sq, stage.g_max_sq);
  std::ostringstream csv;
  csv << "step,loss\n";
  double acc = 0;
  int acc_n = 0;
  train_stage(stage, codec, net, *sched, corpus, opts, [&](const StageLossRecord& r) {
    acc += r.loss;
    ++acc_n;
    if ((r.step + 1) % log_every == 0 || r.step + 1 == opts.steps) {
      csv << r.step << "," << fmt(acc / acc_n) << "\n";
      acc = 0;
      acc_n = 0;
    }
  });
  save_checkpoint(a.out, net.to_checkpoint());
  write_file_atomic(sidecar(a.out, ".loss.csv"), csv.str());
  Manifest m("train-bridge");
  m["config"] = a.config;
  m["seed"] = a.seed;
  m["inputs"] = {a.corpus, stage.codec_path.string()};
  m["outputs"] = {a.out, sidecar(a.out, ".loss.csv").string()};
  m.write(sidecar(a.out, ".manifest.json"));
  return 0;
}

int upsample(const UpsampleArgs& a) {
  std::vector<StageModel> models;
  for (const auto& path : a.stages) {
    const Config cfg = Config::load(path);
    models.push_back(load_stage(stage_config_from(cfg, fs::path(path).parent_path())));
  }
  std::vector<const StageModel*> chain;
  for (const auto& m : models) chain.push_back(&m);
  UpsampleOptions opts;
  opts.n_steps = a.steps;
  opts.post_replace = a.post_replace;
  opts.stitch_window_seconds = a.stitch_seconds;
  std::mt19937_64 rng(a.seed);
  const Waveform input = read_wav(a.input);
  UpsampleResult res;
  try {
    res = bridgesr::upsample(input, chain, opts, rng);
  } catch (const std::exception& e) {
    throw std::runtime_error(a.input + ": " + e.what());
  }
  for (const auto& w : res.warnings) std::cerr << "warning: " << a.input << ": " << w << "\n";
  write_wav(a.out, res.output);
  Manifest m("upsample");
  m["seed"] = a.seed;
  m["config"] = a.stages;
  m["inputs"] = {a.input};
  m["outputs"] = {a.out};
  m["steps"] = a.steps;
  json stages = json::array();
  for (const auto& s : res.stages) {
    stages.push_back({{"target_sr", s.target_sr},
                      {"f_prior", s.f_prior},
                      {"f_target", s.f_target},
                      {"b_r", s.b_r ? json(*s.b_r) : json(nullptr)},
                      {"seconds", s.seconds}});
    std::cerr << "stage " << s.target_sr << " Hz: f_prior=" << s.f_prior << " f_target=" << s.f_target
              << " time=" << s.seconds << "s\n";
  }
  m["stages"] = stages;
  m.write(sidecar(a.out, ".manifest.json"));
  return 0;
}

int eval(const EvalArgs& a) {
  std::vector<std::string> warnings;
  const auto refs = load_wav_dir(a.ref_dir, warnings);
  std::map<std::string, fs::path> est_paths;
  for (const auto& e : fs::directory_iterator(a.est_dir)) est_paths[e.path().filename().string()] = e.path();
  struct Row {
    std::string name;
    double lsd = 0, lf = 0, hf = 0, ssim = 0;
    bool ok = false;
  };
  std::vector<Row> rows(refs.size());
  std::mutex warn_mu;
  parallel_for(refs.size(), [&](std::size_t i) {
    const auto& ref = refs[i];
    const std::string name = ref.path.filename().string();
    rows[i].name = name;
    auto it = est_paths.find(name);
    if (it == est_paths.end()) {
      std::lock_guard<std::mutex> lock(warn_mu);
      warnings.push_back("no estimate for " + name + ", skipping");
      return;
    }
    Waveform est = read_wav(it->second);
    if (est.sample_rate != ref.wav.sample_rate) est = resample(est, ref.wav.sample_rate);
    Waveform r = ref.wav;
    const std::size_t n = std::min(r.size(), est.size());
    r.samples.resize(n);
    est.samples.resize(n);
    double split = a.band_split.value_or(0.25 * r.sample_rate);
    if (!a.lr_dir.empty()) split = estimate_f_eff(read_wav(fs::path(a.lr_dir) / name)).f_eff;
    split = std::min(split, r.nyquist());
    const auto S = stft(r);
    const auto E = stft(est);
    rows[i].lsd = lsd(S, E);
    rows[i].lf = lsd_band(S, E, 0.0, split);
    rows[i].hf = split < r.nyquist() ? lsd_band(S, E, split, r.nyquist()) : 0.0;
    rows[i].ssim = spectral_ssim(S, E);
    rows[i].ok = true;
  });
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  std::ostringstream csv;
  csv << "file,lsd,lsd_lf,lsd_hf,ssim\n";
  double m[4] = {0, 0, 0, 0};
  int count = 0;
  for (const auto& r : rows) {
    if (!r.ok) continue;
    csv << r.name << "," << fmt(r.lsd) << "," << fmt(r.lf) << "," << fmt(r.hf) << "," << fmt(r.ssim) << "\n";
    m[0] += r.lsd;
    m[1] += r.lf;
    m[2] += r.hf;
    m[3] += r.ssim;
    ++count;
  }
  if (count == 0) throw std::runtime_error("eval: no matching files");
  csv << "mean," << fmt(m[0] / count) << "," << fmt(m[1] / count) << "," << fmt(m[2] / count) << ","
      << fmt(m[3] / count) << "\n";
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_file_atomic(a.out, csv.str());
  }
  return 0;
}

int degrade(const DegradeArgs& a) {
  const Config cfg = Config::load(a.config);
  const DegradationPolicy policy = degradation_policy_from(cfg, "degrade");
  std::vector<std::string> warnings;
  const auto files = load_wav_dir(a.corpus, warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (files.empty()) throw std::runtime_error("degrade: corpus " + a.corpus + " has no readable WAV files");
  fs::create_directories(a.out_dir);
  std::vector<DegradedClip> results(files.size());
  parallel_for(files.size(), [&](std::size_t i) {
    std::mt19937_64 rng(derive_seed(a.seed, i));
    results[i] = simulate_lr(files[i].wav, policy, rng);
    write_wav(fs::path(a.out_dir) / files[i].path.filename(), results[i].lr);
  });
  std::ostringstream csv;
  csv << "file,f_prior,family,order\n";
  for (std::size_t i = 0; i < files.size(); ++i) {
    csv << files[i].path.filename().string() << "," << fmt(results[i].f_prior) << ","
        << to_string(results[i].filter.family) << "," << results[i].filter.order << "\n";
  }
  write_file_atomic(fs::path(a.out_dir) / "degrade_manifest.csv", csv.str());
  Manifest m("degrade");
  m["config"] = a.config;
  m["seed"] = a.seed;
  m["inputs"] = {a.corpus};
  m["outputs"] = {a.out_dir};
  m.write(fs::path(a.out_dir) / "degrade.manifest.json");
  return 0;
}

int detect_bw(const std::string& path) {
  const Waveform wav = read_wav(path);
  const auto est = estimate_f_eff(wav);
  std::cout << "f_eff=" << fmt(est.f_eff) << "\n";
  std::cout << "trunc_index=" << est.trunc_index << "\n";
  std::cout << "spectrum_len=" << est.spectrum_len << "\n";
  std::cout << "sample_rate=" << wav.sample_rate << "\n";
  return 0;
}

int tune_aug(const TuneArgs& a) {
  const Config cfg = Config::load(a.stage);
  const StageModel model = load_stage(stage_config_from(cfg, fs::path(a.stage).parent_path()));
  std::vector<std::string> warnings;
  const auto priors = load_wav_dir(fs::path(a.val_dir) / "prior", warnings);
  std::vector<ValidationPair> val;
  for (const auto& p : priors) {
    const fs::path hr = fs::path(a.val_dir) / "hr" / p.path.filename();
    if (!fs::exists(hr)) {
      warnings.push_back("no hr file for " + p.path.filename().string() + ", skipping");
      continue;
    }
    val.push_back({p.wav, read_wav(hr)});
  }
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const TuneResult res = tune_augmentation(model, val, a.b_r, a.margins, a.steps, a.seed);
  write_file_atomic(a.out, tune_csv(res));
  std::cout << "b_r_star=" << fmt(res.best.b_r) << "\n";
  std::cout << "margin_star=" << fmt(res.best.margin_hz) << "\n";
  Manifest m("tune-aug");
  m["config"] = a.stage;
  m["seed"] = a.seed;
  m["inputs"] = {a.val_dir};
  m["outputs"] = {a.out};
  m.write(sidecar(a.out, ".manifest.json"));
  return 0;
}

}  // namespace bridgesr::cli
