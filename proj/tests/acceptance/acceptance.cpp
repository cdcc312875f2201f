// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "fpvoc/dsp/gain.hpp"
#include "fpvoc/dsp/stft.hpp"
#include "fpvoc/dsp/tf_filter.hpp"
#include "fpvoc/dsp/wav.hpp"
#include "fpvoc/losses.hpp"
#include "fpvoc/prior.hpp"
#include "fpvoc/rng.hpp"
#include "fpvoc/schedules.hpp"
#include "fpvoc/train/evaluate.hpp"
#include "fpvoc/train/trainer.hpp"
#include "gradcheck.hpp"

using namespace fpvoc;
namespace fs = std::filesystem;

namespace {

// Tolerances, pinned.
constexpr double kStftRoundTrip = 1e-10;
constexpr double kOlaTolerance = 1e-12;
constexpr double kDspSeconds = 1.0;
constexpr double kFilterInverse = 0.1;
constexpr std::size_t kFilterClips = 50;
constexpr double kConstantFilterRoundTrip = 1e-10;
constexpr double kOracleMaxAbs = 1e-8;
constexpr std::size_t kOracleTriples = 100;
constexpr double kGradSeconds = 120.0;
constexpr double kPriorVariance = 0.05;
constexpr std::size_t kPriorSamples = 1000000;
constexpr double kPeriodogramDb = 1.0;
constexpr double kInversionSlack = 0.05;
constexpr std::size_t kEvalClips = 32;
constexpr double kLossIdentity = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

dsp::Waveform gaussian(std::size_t n, std::uint64_t seed) {
  Philox rng(seed, 0);
  return {rng.gaussian_vector(n), 24000.0};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict dsp_exactness() {
  const auto t0 = Clock::now();
  double worst_rt = 0.0, worst_ola = 0.0;
  for (const dsp::StftConfig cfg : {dsp::StftConfig{1200, 300, 2048}, dsp::StftConfig{240, 48, 512}}) {
    const dsp::Waveform x = gaussian(40 * 1200 + 7, 11);
    const dsp::Waveform y = dsp::istft(dsp::stft(x, cfg));
    worst_rt = std::max(worst_rt, rel_l2(y.samples, x.samples));
    const auto w = dsp::analysis_window(cfg);
    const auto d = dsp::dual_window(cfg);
    for (int t = 0; t < cfg.hop; ++t) {
      double s = 0.0;
      for (int m = 0; m * cfg.hop + t < cfg.window_length; ++m) s += w[m * cfg.hop + t] * d[m * cfg.hop + t];
      worst_ola = std::max(worst_ola, std::abs(s - 1.0));
    }
  }
  const double secs = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "round trip %.2e, overlap-add error %.2e, %.3f s", worst_rt, worst_ola, secs);
  return {worst_rt < kStftRoundTrip && worst_ola < kOlaTolerance && secs < kDspSeconds, buf};
}

Verdict filter_inverse() {
  const train::TrainConfig cfg;
  const auto fb = train::mel_filterbank(cfg);
  const train::Corpus corpus = train::make_synthetic_corpus(kFilterClips, 777, cfg.sample_rate, cfg.corpus_seconds, fb);
  double worst = 0.0;
  for (const auto& clip : corpus.clips) {
    const AdaptivePrior p = build_prior(clip.mel, fb, cfg.stft);
    const dsp::Waveform y = dsp::apply_tf_filter_inverse(dsp::apply_tf_filter(clip.audio, p.filter), p.filter);
    worst = std::max(worst, rel_l2(y.samples, clip.audio.samples));
  }
  const std::size_t frames = 40;
  const dsp::TfFilter c = dsp::constant_filter(dsp::Complex(0.37, 0.0), frames, cfg.stft);
  const dsp::Waveform x = gaussian(frames * 300, 12);
  const double constant = rel_l2(dsp::apply_tf_filter_inverse(dsp::apply_tf_filter(x, c), c).samples, x.samples);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "worst of %zu clips %.4f, constant filter %.2e", kFilterClips, worst, constant);
  return {worst < kFilterInverse && constant < kConstantFilterRoundTrip, buf};
}

Verdict oracle_reverse_step() {
  Philox rng(13, 0);
  double worst = 0.0;
  for (std::size_t i = 0; i < kOracleTriples; ++i) {
    const double beta = 1e-5 + rng.uniform() * 0.5;
    const NoiseSchedule s = derive_schedule(std::vector<double>{beta, 0.5});
    const dsp::Waveform x0{rng.gaussian_vector(64), 24000.0};
    const dsp::Waveform eps{rng.gaussian_vector(64), 24000.0};
    const dsp::Waveform noise{rng.gaussian_vector(64), 24000.0};
    const dsp::Waveform y = reverse_step(forward_diffuse(x0, eps, 1, s), eps, noise, 1, s);
    for (std::size_t k = 0; k < 64; ++k) worst = std::max(worst, std::abs(y.samples[k] - x0.samples[k]));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max-abs %.2e over %zu triples", worst, kOracleTriples);
  return {worst < kOracleMaxAbs, buf};
}

Verdict gradient_integrity() {
  const auto t0 = Clock::now();
  std::size_t cases = 0, failed = 0;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& group : {testing::op_grad_cases(), testing::loss_grad_cases()}) {
    for (const auto& c : group) {
      const auto r = testing::check_gradient(c);
      ++cases;
      if (!(r.rel_error < testing::kGradTolerance)) ++failed;
      if (!(r.rel_error <= worst)) {
        worst = r.rel_error;
        worst_name = r.name;
      }
    }
  }
  const double secs = seconds_since(t0);
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%zu cases, %zu failed, worst %.2e (%s), %.1f s", cases, failed, worst,
                worst_name.c_str(), secs);
  return {failed == 0 && secs < kGradSeconds, buf};
}

Verdict prior_statistics() {
  const dsp::StftConfig cfg{1200, 300, 2048};
  const double c0 = 0.3;
  const AdaptivePrior flat = constant_prior(c0, kPriorSamples / 300 + 1, cfg, 24000.0);
  const double var = dsp::mean_square(sample_prior(flat, kPriorSamples, std::uint64_t{21}).samples);
  const double var_err = std::abs(var / (c0 * c0) - 1.0);

  // Stationary conditioning: spectral tilt plus one resonance.
  const auto fb = dsp::default_mel_filterbank(cfg, 24000.0);
  const std::size_t frames = 2000;
  dsp::MelSpectrogram c;
  c.bands = 128;
  c.frames = frames;
  c.values.resize(c.bands * frames);
  for (std::size_t b = 0; b < c.bands; ++b) {
    const double u = static_cast<double>(b) / 127.0;
    const double v = -1.0 - 3.0 * u + 1.2 * std::exp(-40.0 * (u - 0.35) * (u - 0.35));
    for (std::size_t k = 0; k < frames; ++k) c.at(b, k) = v;
  }
  const AdaptivePrior p = build_prior(c, fb, cfg);
  const dsp::ComplexSpectrogram spec = dsp::stft(sample_prior(p, p.signal_length(), std::uint64_t{22}), cfg);
  double wsum = 0.0;
  for (double w : dsp::analysis_window(cfg)) wsum += w * w;
  const auto bin_of = [&](double hz) { return static_cast<std::size_t>(hz / 24000.0 * cfg.fft_size); };
  double worst_db = 0.0;
  for (std::size_t n = bin_of(300.0); n + 8 <= bin_of(8000.0); n += 8) {
    double measured = 0.0, expected = 0.0;
    for (std::size_t j = n; j < n + 8; ++j) {
      for (std::size_t k = 8; k + 8 < spec.frames; ++k) measured += std::norm(spec.at(k, j)) / (spec.frames - 16);
      expected += std::norm(p.filter.at(frames / 2, j)) * wsum;
    }
    worst_db = std::max(worst_db, std::abs(10.0 * std::log10(measured / expected)));
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "variance error %.2f%%, worst mid-band periodogram deviation %.3f dB", 100 * var_err,
                worst_db);
  return {var_err < kPriorVariance && worst_db < kPeriodogramDb, buf};
}

Verdict schedule_presets() {
  const bool verbatim = preset("infer2").betas == std::vector<double>{3e-4, 9e-1} &&
                        preset("infer3").betas == std::vector<double>{3e-4, 6e-2, 9e-1} &&
                        preset("infer5").betas == std::vector<double>{1.0e-4, 2.1e-3, 2.8e-2, 3.5e-1, 7.0e-1};
  bool gamma_ok = true, decreasing = true;
  for (const char* name : {"infer2", "infer3", "infer5", "train50"}) {
    const NoiseSchedule s = preset(name);
    gamma_ok &= s.gamma(1) == 0.0;
    for (std::size_t t = 2; t <= s.steps(); ++t) decreasing &= s.alpha_bar(t) < s.alpha_bar(t - 1);
  }
  return {verbatim && gamma_ok && decreasing, std::string("presets ") + (verbatim ? "verbatim" : "differ") +
                                                  ", gamma_1 " + (gamma_ok ? "zero" : "nonzero") + ", alpha_bar " +
                                                  (decreasing ? "decreasing" : "not decreasing")};
}

// Budget shared by the WaveFit model and the DDPM baseline.
train::TrainConfig trend_config(train::TrainMode mode, const fs::path& dir, std::size_t steps) {
  train::TrainConfig cfg;
  cfg.mode = mode;
  cfg.batch = 4;
  cfg.clip_frames = 12;
  cfg.total_steps = steps;
  cfg.checkpoint_every = 0;
  cfg.out_dir = (dir / train::to_string(mode)).string();
  return cfg;
}

// Counts rises along y_2 -> y_1 -> y_0; one rise of at most 5% is tolerated.
bool non_increasing(const std::vector<double>& v, std::string& why) {
  std::size_t rises = 0;
  double worst = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[i - 1]) {
      ++rises;
      worst = std::max(worst, v[i] / v[i - 1] - 1.0);
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%zu rise(s), worst %.1f%%", rises, 100 * worst);
  why = buf;
  return rises == 0 || (rises == 1 && worst <= kInversionSlack);
}

std::vector<ProbeRow> probe(const std::string& ckpt) {
  const train::TrainedModel model = train::load_model(ckpt);
  train::SynthOptions opt;
  opt.seed = model.config.seed;
  return train::mean_probe(model, train::eval_corpus(model.config, kEvalClips), opt);
}

struct TrendResult {
  std::vector<ProbeRow> wavefit, ddpm;
};

TrendResult train_pair(const fs::path& dir, std::size_t steps) {
  TrendResult r;
  for (auto mode : {train::TrainMode::kWaveFit, train::TrainMode::kDdpm}) {
    const train::TrainConfig cfg = trend_config(mode, dir, steps);
    const auto t0 = Clock::now();
    const train::TrainSummary sum = train::run_training(cfg, train::corpus_for(cfg));
    std::printf("  trained %s for %zu steps in %.0f s\n", train::to_string(mode).c_str(), sum.steps,
                seconds_since(t0));
    (mode == train::TrainMode::kWaveFit ? r.wavefit : r.ddpm) = probe(sum.checkpoint);
    std::fflush(stdout);
  }
  for (const auto& [name, rows] : {std::pair{"wavefit", r.wavefit}, std::pair{"ddpm", r.ddpm}}) {
    for (const auto& row : rows) std::printf("  %s y_%zu sc %.4f mag %.4f\n", name, row.t, row.sc, row.mag);
  }
  return r;
}

Verdict wavefit_trend(const TrendResult& r) {
  std::vector<double> sc, mag;
  for (const auto& row : r.wavefit) {
    if (row.t <= 2) {
      sc.push_back(row.sc);
      mag.push_back(row.mag);
    }
  }
  std::string why_sc, why_mag;
  const bool ok_sc = non_increasing(sc, why_sc);
  const bool ok_mag = non_increasing(mag, why_mag);
  return {ok_sc && ok_mag, "sc " + why_sc + ", mag " + why_mag};
}

Verdict baseline_ordering(const TrendResult& r) {
  const ProbeRow& w = r.wavefit.back();
  const ProbeRow& d = r.ddpm.back();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "y_0 wavefit sc %.4f mag %.4f, ddpm sc %.4f mag %.4f", w.sc, w.mag, d.sc, d.mag);
  return {w.sc <= d.sc && w.mag <= d.mag, buf};
}

Verdict determinism(const fs::path& dir) {
  // Both runs share one out_dir, which is part of the stored configuration.
  std::vector<std::string> differing;
  for (auto mode : {train::TrainMode::kWaveFit, train::TrainMode::kDdpm}) {
    train::TrainConfig cfg = trend_config(mode, dir, 4);
    cfg.batch = 2;
    cfg.clip_frames = 8;
    cfg.corpus_clips = 4;
    cfg.checkpoint_every = 2;
    const fs::path out(cfg.out_dir);
    std::vector<std::string> ckpt, wav;
    for (const char* run : {"a", "b"}) {
      const train::TrainSummary sum = train::run_training(cfg, train::corpus_for(cfg));
      const train::TrainedModel model = train::load_model(sum.checkpoint);
      const train::Corpus eval = train::eval_corpus(cfg, 1);
      dsp::write_wav((out / "y0.wav").string(),
                     train::synthesize(model, eval.clips[0].mel, train::SynthOptions{}).output());
      ckpt.push_back(slurp(sum.checkpoint) + slurp(out / "step_000002.ckpt"));
      wav.push_back(slurp(out / "y0.wav"));
      fs::rename(out, dir / (train::to_string(mode) + "_" + run));
    }
    if (ckpt[0] != ckpt[1] || ckpt[0].empty()) differing.push_back(train::to_string(mode) + " checkpoints");
    if (wav[0] != wav[1] || wav[0].empty()) differing.push_back(train::to_string(mode) + " wav");
  }
  std::string detail = differing.empty() ? "checkpoints and WAVs byte-identical" : "differ:";
  for (const auto& d : differing) detail += " " + d;
  return {differing.empty(), detail};
}

Verdict loss_identities(const fs::path& dir) {
  // T = 1 total against the single step loss.
  const nn::DiscriminatorStack disc(nn::DiscriminatorConfig{}, 5);
  const SpectralLossContext ctx(default_loss_resolutions(), 24000.0);
  const nn::Tensor x0 = nn::Tensor::constant({2, 2400}, testing::uniform_values(4800, 31));
  const nn::Tensor y = nn::Tensor::constant({2, 2400}, testing::uniform_values(4800, 32));
  std::vector<nn::DiscriminatorOutput> real;
  {
    nn::NoGradGuard guard;
    real = disc.forward(x0);
  }
  const LossWeights w;
  const double step = wavefit_step_loss(x0, y, real, disc, ctx, w).value.item();
  const double total = wavefit_total_loss(x0, {y}, real, disc, ctx, w).value.item();
  const double gap = std::abs(total - step);

  // InferGrad at zero weight against DDPM, step by step.
  train::TrainConfig ddpm = trend_config(train::TrainMode::kDdpm, dir / "ddpm", 0);
  ddpm.batch = 2;
  ddpm.clip_frames = 8;
  ddpm.corpus_clips = 4;
  train::TrainConfig ig = ddpm;
  ig.mode = train::TrainMode::kInferGrad;
  ig.out_dir = (dir / "infergrad").string();
  ig.weights.lambda_if = 0.0;
  ig.finetune_lr = ddpm.lr;
  const train::Corpus corpus = train::corpus_for(ddpm);
  train::TrainingSession a(ddpm, corpus), b(ig, corpus);
  bool same = true;
  for (int i = 0; i < 5; ++i) {
    const auto sa = a.step(), sb = b.step();
    same &= train::stat(sa, "total") == train::stat(sb, "total");
  }
  const auto& pa = a.generator().parameters().items();
  const auto& pb = b.generator().parameters().items();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    same &= std::equal(pa[i].second.values().begin(), pa[i].second.values().end(), pb[i].second.values().begin());
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "T=1 gap %.2e, zero-weight infergrad %s ddpm over 5 steps", gap,
                same ? "matches" : "differs from");
  return {gap < kLossIdentity && same, buf};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpvoc acceptance run"};
  std::string work = (fs::temp_directory_path() / "fpvoc_acceptance").string();
  std::size_t steps = 1000;
  app.add_option("--work", work, "scratch directory");
  app.add_option("--steps", steps, "training steps per model for the trend criteria");
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path dir(work);

  bool all = true;
  auto report = [&all](int id, const std::string& title, const std::function<Verdict()>& fn) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    all &= v.pass;
    std::printf("criterion %2d %s  %-22s %s (%.1f s)\n", id, v.pass ? "PASS" : "FAIL", title.c_str(), v.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  };

  report(1, "dsp exactness", dsp_exactness);
  report(2, "filter inverse", filter_inverse);
  report(3, "oracle reverse step", oracle_reverse_step);
  report(4, "gradient integrity", gradient_integrity);
  report(5, "prior statistics", prior_statistics);
  report(6, "schedule presets", schedule_presets);

  TrendResult trend;
  bool trained = false;
  std::string train_error;
  try {
    trend = train_pair(dir / "trend", steps);
    trained = true;
  } catch (const std::exception& e) {
    train_error = e.what();
  }
  auto needs_training = [&](std::function<Verdict(const TrendResult&)> fn) {
    return [&, fn]() { return trained ? fn(trend) : Verdict{false, "training failed: " + train_error}; };
  };
  report(7, "iteration trend", needs_training(wavefit_trend));
  report(8, "baseline ordering", needs_training(baseline_ordering));
  report(9, "determinism", [&] { return determinism(dir / "determinism"); });
  report(10, "loss identities", [&] { return loss_identities(dir / "identities"); });

  std::printf("%s\n", all ? "ALL PASS" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
