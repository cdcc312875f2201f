// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/train/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>
#include <vector>

#include "fpvoc/error.hpp"
#include "fpvoc/schedules.hpp"

namespace fpvoc::train {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("option " + key + ": bad number '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("option " + key + ": bad integer '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("option " + key + ": bad boolean '" + v + "'");
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

struct Option {
  const char* key;
  std::function<void(TrainConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

#define FPVOC_SIZE(name, field)                                                                         \
  Option {                                                                                              \
    name, [](TrainConfig& c, const std::string& k, const std::string& v) { c.field = to_u64(k, v); }, \
        [](const TrainConfig& c) { return std::to_string(c.field); }                                    \
  }
#define FPVOC_INT(name, field)                                                                                  \
  Option {                                                                                                      \
    name, [](TrainConfig& c, const std::string& k, const std::string& v) { c.field = static_cast<int>(to_u64(k, v)); }, \
        [](const TrainConfig& c) { return std::to_string(c.field); }                                            \
  }
#define FPVOC_REAL(name, field)                                                                            \
  Option {                                                                                                 \
    name, [](TrainConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); }, \
        [](const TrainConfig& c) { return num(c.field); }                                                  \
  }
#define FPVOC_TEXT(name, field)                                                                     \
  Option {                                                                                          \
    name, [](TrainConfig& c, const std::string&, const std::string& v) { c.field = v; },          \
        [](const TrainConfig& c) { return c.field; }                                                \
  }
#define FPVOC_FLAG(name, field)                                                                          \
  Option {                                                                                               \
    name, [](TrainConfig& c, const std::string& k, const std::string& v) { c.field = to_bool(k, v); }, \
        [](const TrainConfig& c) { return std::string(c.field ? "true" : "false"); }                     \
  }

const std::vector<Option>& options() {
  static const std::vector<Option> table = {
      Option{"mode", [](TrainConfig& c, const std::string&, const std::string& v) { c.mode = parse_train_mode(v); },
             [](const TrainConfig& c) { return to_string(c.mode); }},
      FPVOC_SIZE("iterations", iterations),
      FPVOC_TEXT("train_schedule", train_schedule),
      FPVOC_TEXT("infer_schedule", infer_schedule),
      FPVOC_REAL("lambda_fm", weights.lambda_fm),
      FPVOC_REAL("lambda_stft", weights.lambda_stft),
      FPVOC_REAL("lambda_if", weights.lambda_if),
      FPVOC_FLAG("mel_mae", weights.include_mel_mae),
      FPVOC_SIZE("clip_frames", clip_frames),
      FPVOC_SIZE("batch", batch),
      FPVOC_REAL("lr", lr),
      FPVOC_REAL("disc_lr", disc_lr),
      FPVOC_REAL("finetune_lr", finetune_lr),
      FPVOC_REAL("max_grad_norm", max_grad_norm),
      FPVOC_SIZE("total_steps", total_steps),
      FPVOC_SIZE("seed", seed),
      FPVOC_TEXT("corpus", corpus),
      FPVOC_SIZE("corpus_clips", corpus_clips),
      FPVOC_REAL("corpus_seconds", corpus_seconds),
      FPVOC_TEXT("out_dir", out_dir),
      FPVOC_TEXT("init_checkpoint", init_checkpoint),
      FPVOC_SIZE("checkpoint_every", checkpoint_every),
      Option{"gain_mode",
             [](TrainConfig& c, const std::string&, const std::string& v) { c.gain_mode = dsp::parse_gain_mode(v); },
             [](const TrainConfig& c) { return dsp::to_string(c.gain_mode); }},
      FPVOC_FLAG("shaped_reverse_noise", shaped_reverse_noise),
      FPVOC_TEXT("conditioning", conditioning),
      FPVOC_REAL("sample_rate", sample_rate),
      FPVOC_INT("window_length", stft.window_length),
      FPVOC_INT("hop", stft.hop),
      FPVOC_INT("fft_size", stft.fft_size),
      FPVOC_INT("mel_bands", mel_bands),
      FPVOC_REAL("f_low", f_low),
      FPVOC_REAL("f_high", f_high),
      FPVOC_SIZE("channels", channels),
      FPVOC_SIZE("out_channels", out_channels),
      FPVOC_SIZE("embedding", embedding),
      FPVOC_SIZE("blocks", blocks),
      FPVOC_SIZE("downsample", downsample),
  };
  return table;
}

#undef FPVOC_SIZE
#undef FPVOC_INT
#undef FPVOC_REAL
#undef FPVOC_TEXT
#undef FPVOC_FLAG

}  // namespace

TrainMode parse_train_mode(const std::string& name) {
  if (name == "wavefit") return TrainMode::kWaveFit;
  if (name == "ddpm") return TrainMode::kDdpm;
  if (name == "infergrad") return TrainMode::kInferGrad;
  throw ConfigError("unknown training mode '" + name + "' (expected wavefit, ddpm or infergrad)");
}

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kWaveFit: return "wavefit";
    case TrainMode::kDdpm: return "ddpm";
    case TrainMode::kInferGrad: return "infergrad";
  }
  return "?";
}

void validate(const TrainConfig& cfg) {
  dsp::validate(cfg.stft);
  validate(cfg.weights);
  if (cfg.iterations == 0) throw ConfigError("iterations must be at least 1");
  if (cfg.clip_frames == 0 || cfg.batch == 0) throw ConfigError("clip_frames and batch must be positive");
  if (!(cfg.lr > 0.0) || !(cfg.disc_lr > 0.0) || !(cfg.finetune_lr > 0.0)) throw ConfigError("learning rates must be positive");
  if (cfg.corpus_clips == 0 || !(cfg.corpus_seconds > 0.0)) throw ConfigError("corpus size must be positive");
  if (!(cfg.sample_rate > 0.0)) throw ConfigError("sample_rate must be positive");
  if (cfg.mel_bands <= 0 || !(cfg.f_low >= 0.0) || !(cfg.f_high > cfg.f_low) || cfg.f_high > cfg.sample_rate / 2) {
    throw ConfigError("invalid mel band settings");
  }
  if (cfg.conditioning != "auto") nn::parse_step_conditioning(cfg.conditioning);
  preset(cfg.train_schedule);
  preset(cfg.infer_schedule);
  nn::validate(denoiser_config(cfg));
  if (cfg.clip_samples() < nn::DiscriminatorStack::kMinLength) throw ConfigError("clip too short for the discriminator");
}

void set_option(TrainConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& opt : options()) {
    if (key == opt.key) {
      opt.set(cfg, key, value);
      return;
    }
  }
  throw ConfigError("unknown option '" + key + "'");
}

TrainConfig parse_config(const std::string& text, TrainConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    set_option(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

TrainConfig load_config(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string format_config(const TrainConfig& cfg) {
  std::string out;
  for (const auto& opt : options()) out += std::string(opt.key) + " = " + opt.get(cfg) + "\n";
  return out;
}

nn::DenoiserConfig denoiser_config(const TrainConfig& cfg) {
  nn::DenoiserConfig d;
  d.mel_bands = static_cast<std::size_t>(cfg.mel_bands);
  d.hop = static_cast<std::size_t>(cfg.stft.hop);
  d.channels = cfg.channels;
  d.out_channels = cfg.out_channels;
  d.embedding = cfg.embedding;
  d.downsample = cfg.downsample;
  d.blocks = cfg.blocks;
  if (cfg.conditioning == "auto") {
    d.conditioning = cfg.mode == TrainMode::kWaveFit ? nn::StepConditioning::kStepIndex : nn::StepConditioning::kNoiseLevel;
  } else {
    d.conditioning = nn::parse_step_conditioning(cfg.conditioning);
  }
  d.steps = cfg.mode == TrainMode::kWaveFit ? cfg.iterations : preset(cfg.train_schedule).steps();
  return d;
}

nn::DiscriminatorConfig discriminator_config(const TrainConfig&) { return {}; }

dsp::MelFilterbank mel_filterbank(const TrainConfig& cfg) {
  return dsp::mel_filterbank(cfg.mel_bands, cfg.f_low, cfg.f_high, cfg.stft, cfg.sample_rate);
}

}  // namespace fpvoc::train
