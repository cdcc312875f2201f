// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "fpvoc/dsp/gain.hpp"
#include "fpvoc/error.hpp"
#include "fpvoc/train/config.hpp"
#include "fpvoc/train/corpus.hpp"
#include "fpvoc/train/csv_log.hpp"
#include "fpvoc/train/evaluate.hpp"
#include "fpvoc/train/trainer.hpp"

using namespace fpvoc;
using namespace fpvoc::train;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("fpvoc_train_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TrainConfig tiny(TrainMode mode, const fs::path& out) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.batch = 2;
  cfg.clip_frames = 4;
  cfg.corpus_clips = 3;
  cfg.corpus_seconds = 0.3;
  cfg.channels = 8;
  cfg.out_channels = 4;
  cfg.embedding = 4;
  cfg.blocks = 1;
  cfg.total_steps = 3;
  cfg.checkpoint_every = 2;
  cfg.out_dir = out.string();
  return cfg;
}

}  // namespace

TEST_CASE("configuration defaults and parsing", "[config]") {
  const TrainConfig d;
  REQUIRE_NOTHROW(validate(d));
  REQUIRE(d.clip_samples() == 36 * 300);
  REQUIRE(d.weights.lambda_if == 0.1);
  REQUIRE(d.finetune_lr == 5e-5);

  const TrainConfig c = parse_config("mode = ddpm  # baseline\n\nbatch=4\nlr = 0.0003\nshaped_reverse_noise = false\n");
  REQUIRE(c.mode == TrainMode::kDdpm);
  REQUIRE(c.batch == 4);
  REQUIRE(c.lr == 3e-4);
  REQUIRE_FALSE(c.shaped_reverse_noise);
  REQUIRE(parse_config(format_config(c)).lr == c.lr);
  REQUIRE(format_config(parse_config(format_config(c))) == format_config(c));

  REQUIRE_THROWS_AS(parse_config("bogus = 1\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("batch\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("batch = -2\n"), ConfigError);
  REQUIRE_THROWS_AS(parse_config("mode = gan\n"), ConfigError);
  TrainConfig bad;
  bad.batch = 0;
  REQUIRE_THROWS_AS(validate(bad), ConfigError);
  bad = {};
  bad.infer_schedule = "infer9";
  REQUIRE_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("step conditioning follows the training mode", "[config]") {
  TrainConfig cfg;
  cfg.iterations = 5;
  REQUIRE(denoiser_config(cfg).conditioning == nn::StepConditioning::kStepIndex);
  REQUIRE(denoiser_config(cfg).steps == 5);
  cfg.mode = TrainMode::kDdpm;
  REQUIRE(denoiser_config(cfg).conditioning == nn::StepConditioning::kNoiseLevel);
  cfg.mode = TrainMode::kInferGrad;
  REQUIRE(denoiser_config(cfg).conditioning == nn::StepConditioning::kNoiseLevel);
  cfg.conditioning = "index";
  REQUIRE(denoiser_config(cfg).conditioning == nn::StepConditioning::kStepIndex);
  REQUIRE(denoiser_config(cfg).steps == 50);
}

TEST_CASE("synthetic corpus is deterministic and normalized", "[corpus]") {
  const TrainConfig cfg;
  const auto fb = mel_filterbank(cfg);
  const Corpus a = make_synthetic_corpus(4, 7, 24000.0, 1.0, fb);
  const Corpus b = make_synthetic_corpus(4, 7, 24000.0, 1.0, fb);
  const Corpus other = make_synthetic_corpus(4, 8, 24000.0, 1.0, fb);
  REQUIRE(a.clips.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    REQUIRE(a.clips[i].audio.samples == b.clips[i].audio.samples);
    REQUIRE(a.clips[i].mel.values == b.clips[i].mel.values);
    REQUIRE(a.clips[i].audio.samples != other.clips[i].audio.samples);
    REQUIRE(a.clips[i].audio.size() % 300 == 0);
    REQUIRE(a.clips[i].mel.frames == a.clips[i].audio.size() / 300);
    double peak = 0.0;
    for (double v : a.clips[i].audio.samples) peak = std::max(peak, std::abs(v));
    REQUIRE(peak <= kCorpusPeak + 1e-12);
    REQUIRE(peak > kCorpusPeak - 1e-9);
  }
}

TEST_CASE("voiced frames show a harmonic comb", "[corpus]") {
  const dsp::StftConfig cfg{1200, 300, 2048};
  const double hz_per_bin = 24000.0 / cfg.fft_size;
  std::size_t harmonic = 0;
  const std::size_t clips = 12;
  for (std::size_t i = 0; i < clips; ++i) {
    const dsp::Waveform x = synthetic_clip(24000, 24000.0, 31, i);
    const dsp::ComplexSpectrogram s = dsp::stft(x, cfg);
    // Loudest frame below 1 kHz, where voiced energy dominates.
    const std::size_t top = static_cast<std::size_t>(1000.0 / hz_per_bin);
    std::size_t best = 0;
    double best_e = -1.0;
    for (std::size_t k = 0; k < s.frames; ++k) {
      double e = 0.0;
      for (std::size_t n = 0; n < top; ++n) e += std::norm(s.at(k, n));
      if (e > best_e) {
        best_e = e;
        best = k;
      }
    }
    std::vector<double> mag(top);
    double mean = 0.0;
    for (std::size_t n = 0; n < top; ++n) mean += (mag[n] = std::abs(s.at(best, n))) / top;
    for (auto& v : mag) v -= mean;
    auto ac = [&](std::size_t lag) {
      double acc = 0.0;
      for (std::size_t n = 0; n + lag < top; ++n) acc += mag[n] * mag[n + lag];
      return acc;
    };
    const double zero = ac(0);
    // f0 in 80-300 Hz puts the first comb peak at 6.8-25.6 bins.
    double peak = 0.0;
    for (std::size_t lag = 6; lag <= 27; ++lag) peak = std::max(peak, ac(lag) / zero);
    if (peak > 0.3) ++harmonic;
  }
  REQUIRE(harmonic >= clips * 3 / 4);
}

TEST_CASE("corpus save and load", "[corpus]") {
  const auto dir = scratch("corpus");
  TrainConfig cfg;
  const auto fb = mel_filterbank(cfg);
  const Corpus a = make_synthetic_corpus(2, 3, 24000.0, 0.5, fb);
  save_corpus(a, dir.string());
  REQUIRE(fs::exists(dir / "clip_000.wav"));
  const Corpus b = load_corpus(dir.string(), fb);
  REQUIRE(b.clips.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(b.clips[i].audio.size() == a.clips[i].audio.size());
    for (std::size_t j = 0; j < a.clips[i].audio.size(); ++j) {
      REQUIRE(b.clips[i].audio.samples[j] == static_cast<double>(static_cast<float>(a.clips[i].audio.samples[j])));
    }
  }
  cfg.corpus = dir.string();
  REQUIRE(corpus_for(cfg).clips.size() == 2);
  REQUIRE_THROWS_AS(load_corpus((dir / "none").string(), fb), IoError);
}

TEST_CASE("csv log", "[io]") {
  const auto dir = scratch("csv");
  {
    CsvLog log((dir / "l.csv").string(), false);
    log.write(1, "gen", 0.5);
    log.write(2, "gen", 0.25);
  }
  {
    CsvLog log((dir / "l.csv").string(), true);
    log.write(3, "gen", 1e-9);
  }
  REQUIRE(slurp(dir / "l.csv") == "step,name,value\n1,gen,0.5\n2,gen,0.25\n3,gen,1e-09\n");
}

TEST_CASE("batches are frame-aligned excerpts keyed by step", "[trainer]") {
  const TrainConfig cfg = tiny(TrainMode::kWaveFit, scratch("batch"));
  const Corpus corpus = corpus_for(cfg);
  const auto fb = mel_filterbank(cfg);
  const Batch a = sample_batch(corpus, cfg, fb, 5), b = sample_batch(corpus, cfg, fb, 5);
  const Batch c = sample_batch(corpus, cfg, fb, 6);
  REQUIRE(a.x0.shape() == nn::Shape{2, 1200});
  REQUIRE(a.c.shape() == nn::Shape{2, 128, 4});
  REQUIRE(std::vector<double>(a.x0.values().begin(), a.x0.values().end()) ==
          std::vector<double>(b.x0.values().begin(), b.x0.values().end()));
  REQUIRE((a.clips != c.clips || a.offsets != c.offsets));
  for (std::size_t r = 0; r < 2; ++r) {
    const auto& clip = corpus.clips[a.clips[r]];
    REQUIRE(a.x0.values()[r * 1200 + 17] == clip.audio.samples[a.offsets[r] * 300 + 17]);
    const auto ex = mel_excerpt(clip.mel, a.offsets[r], 4);
    REQUIRE(a.c.values()[r * 128 * 4 + 5] == ex.values[5]);
    REQUIRE(a.target_power[r] == dsp::target_power(ex, fb));
  }
}

TEST_CASE("diffusion indices cover the schedule", "[trainer]") {
  const std::size_t T = 50, B = 8;
  std::set<std::size_t> seen;
  for (std::size_t step = 1; step <= 10 * T; ++step) {
    for (std::size_t row = 0; row < B; ++row) {
      const std::size_t t = sampled_step_index(1, step, row, T);
      REQUIRE(t >= 1);
      REQUIRE(t <= T);
      seen.insert(t);
    }
  }
  REQUIRE(seen.size() == T);
}

TEST_CASE("resumed training replays the next step exactly", "[trainer]") {
  for (TrainMode mode : {TrainMode::kWaveFit, TrainMode::kDdpm}) {
    const auto dir = scratch("resume_" + to_string(mode));
    TrainConfig cfg = tiny(mode, dir);
    const Corpus corpus = corpus_for(cfg);
    TrainingSession a(cfg, corpus);
    a.step();
    a.step();
    a.save((dir / "two.ckpt").string());
    const StepStats next = a.step();
    a.save((dir / "three_a.ckpt").string());

    TrainingSession b(cfg, corpus);
    b.resume((dir / "two.ckpt").string());
    REQUIRE(b.completed_steps() == 2);
    const StepStats replay = b.step();
    b.save((dir / "three_b.ckpt").string());
    REQUIRE(next == replay);
    REQUIRE(slurp(dir / "three_a.ckpt") == slurp(dir / "three_b.ckpt"));
  }
}

TEST_CASE("infergrad with zero weight is ddpm training", "[trainer]") {
  const auto dir = scratch("lambda0");
  TrainConfig ddpm = tiny(TrainMode::kDdpm, dir / "d");
  TrainConfig ig = tiny(TrainMode::kInferGrad, dir / "i");
  ig.weights.lambda_if = 0.0;
  ig.finetune_lr = ddpm.lr;
  const Corpus corpus = corpus_for(ddpm);
  TrainingSession a(ddpm, corpus), b(ig, corpus);
  for (int i = 0; i < 3; ++i) {
    const StepStats sa = a.step(), sb = b.step();
    REQUIRE(stat(sa, "sg") == stat(sb, "sg"));
    REQUIRE(stat(sa, "total") == stat(sb, "total"));
  }
  for (std::size_t i = 0; i < a.generator().parameters().items().size(); ++i) {
    const auto& pa = a.generator().parameters().items()[i].second;
    const auto& pb = b.generator().parameters().items()[i].second;
    REQUIRE(std::equal(pa.values().begin(), pa.values().end(), pb.values().begin()));
  }
}

TEST_CASE("initial denoising loss matches its Monte-Carlo expectation", "[trainer]") {
  const auto dir = scratch("init_loss");
  TrainConfig cfg = tiny(TrainMode::kDdpm, dir);
  cfg.batch = 4;
  cfg.clip_frames = 12;
  cfg.corpus_seconds = 1.0;
  const Corpus corpus = corpus_for(cfg);
  TrainingSession s(cfg, corpus);
  const double first = stat(s.step(), "sg");

  // The zero-output net leaves ||L^-1 eps||^2; estimate its mean with fresh draws.
  const Batch batch = sample_batch(corpus, cfg, mel_filterbank(cfg), 1);
  double mc = 0.0;
  const std::size_t draws = 16;
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    for (std::uint64_t d = 0; d < draws; ++d) {
      const dsp::Waveform eps = sample_prior(batch.priors[b], cfg.clip_samples(), 1000 + d);
      mc += prior_weighted_residual(eps, dsp::Waveform{std::vector<double>(eps.size(), 0.0), eps.sample_rate},
                                    batch.priors[b]);
    }
  }
  mc /= static_cast<double>(draws * cfg.batch);
  CAPTURE(first, mc);
  REQUIRE(std::abs(first / mc - 1.0) < 0.10);
}

TEST_CASE("training run writes logs, checkpoints and a loadable model", "[trainer]") {
  const auto dir = scratch("run");
  TrainConfig cfg = tiny(TrainMode::kWaveFit, dir);
  const TrainSummary sum = run_training(cfg, corpus_for(cfg));
  REQUIRE(sum.steps == 3);
  REQUIRE(fs::exists(dir / "step_000002.ckpt"));
  REQUIRE(fs::exists(dir / "model.ckpt"));

  std::ifstream in(dir / "loss.csv");
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "step,name,value");
  std::size_t last = 0;
  std::set<std::string> names;
  while (std::getline(in, line)) {
    const std::size_t step = std::stoul(line.substr(0, line.find(',')));
    REQUIRE((step == last || step == last + 1));
    last = step;
    names.insert(line.substr(line.find(',') + 1, line.rfind(',') - line.find(',') - 1));
  }
  REQUIRE(last == 3);
  for (const char* n : {"gen", "gen_stft", "gen_fm", "gen_gan", "disc"}) REQUIRE(names.count(n) == 1);

  const TrainedModel model = load_model((dir / "model.ckpt").string());
  REQUIRE(model.config.channels == 8);
  REQUIRE(model.config.mode == TrainMode::kWaveFit);
  const Corpus eval = eval_corpus(model.config, 1);
  const InferenceTrace tr = synthesize(model, eval.clips[0].mel, SynthOptions{});
  REQUIRE(tr.steps() == 3);

  // Resuming a finished run into a longer one appends to the same log.
  cfg.total_steps = 4;
  run_training(cfg, corpus_for(cfg), (dir / "model.ckpt").string());
  REQUIRE(slurp(dir / "loss.csv").find("\n4,gen,") != std::string::npos);
  REQUIRE(slurp(dir / "loss.csv").find("\n1,gen,") != std::string::npos);
}

TEST_CASE("non-finite losses abort with a dump", "[trainer]") {
  const auto dir = scratch("nonfinite");
  TrainConfig cfg = tiny(TrainMode::kDdpm, dir);
  cfg.lr = 1e200;
  const Corpus corpus = corpus_for(cfg);
  TrainingSession s(cfg, corpus);
  REQUIRE_THROWS_AS([&] {
    for (int i = 0; i < 4; ++i) s.step();
  }(), NonFiniteError);
  bool dumped = false;
  for (const auto& e : fs::directory_iterator(dir)) dumped |= e.path().filename().string().rfind("nonfinite_step_", 0) == 0;
  REQUIRE(dumped);
}

TEST_CASE("wrong entry point for the mode is rejected", "[trainer]") {
  const TrainConfig cfg = tiny(TrainMode::kDdpm, scratch("mode"));
  REQUIRE_THROWS_AS(train_wavefit(cfg, corpus_for(cfg)), ConfigError);
  REQUIRE_THROWS_AS(train_infergrad(cfg, corpus_for(cfg), ""), ConfigError);
}
