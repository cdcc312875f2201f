// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fpvoc/error.hpp"
#include "fpvoc/nn/ops.hpp"
#include "fpvoc/nn/spectral_ops.hpp"
#include "fpvoc/rng.hpp"
#include "fpvoc/train/csv_log.hpp"
#include "fpvoc/vocoder.hpp"

namespace fpvoc::train {

namespace {

constexpr std::uint64_t kBatchTag = 0xB001;
constexpr std::uint64_t kPriorTag = 0xB002;
constexpr std::uint64_t kDiffusionTag = 0xB003;
constexpr std::uint64_t kInferTag = 0xB004;

using nn::Tensor;

Tensor stack_rows(const std::vector<dsp::Waveform>& rows) {
  const std::size_t L = rows.front().size();
  std::vector<double> v;
  v.reserve(rows.size() * L);
  for (const auto& r : rows) v.insert(v.end(), r.samples.begin(), r.samples.end());
  return Tensor::constant({rows.size(), L}, std::move(v));
}

bool finite(double v) { return std::isfinite(v); }

std::vector<double> config_bytes(const TrainConfig& cfg) {
  const std::string text = format_config(cfg);
  return std::vector<double>(text.begin(), text.end());
}

TrainConfig config_from(const nn::Checkpoint& ckpt) {
  const auto& e = ckpt.get("meta.config");
  std::string text;
  for (float f : e.data) text.push_back(static_cast<char>(f));
  return parse_config(text);
}

}  // namespace

std::size_t draw_step_index(Philox& rng, std::size_t T) { return 1 + static_cast<std::size_t>(rng.next_u32()) % T; }

std::size_t sampled_step_index(std::uint64_t seed, std::size_t step, std::size_t row, std::size_t T) {
  Philox rng(seed, stream_id(kDiffusionTag, step, row));
  return draw_step_index(rng, T);
}

dsp::MelSpectrogram mel_excerpt(const dsp::MelSpectrogram& mel, std::size_t offset, std::size_t frames) {
  if (offset + frames > mel.frames) throw ShapeError("mel_excerpt: range exceeds the spectrogram");
  dsp::MelSpectrogram out;
  out.bands = mel.bands;
  out.frames = frames;
  out.kind = mel.kind;
  out.values.resize(mel.bands * frames);
  for (std::size_t f = 0; f < mel.bands; ++f) {
    for (std::size_t k = 0; k < frames; ++k) out.at(f, k) = mel.at(f, offset + k);
  }
  return out;
}

Batch sample_batch(const Corpus& corpus, const TrainConfig& cfg, const dsp::MelFilterbank& fb, std::size_t step) {
  if (corpus.clips.empty()) throw ConfigError("empty corpus");
  const auto hop = static_cast<std::size_t>(cfg.stft.hop);
  const std::size_t F = cfg.clip_frames, L = cfg.clip_samples();
  Philox rng(cfg.seed, stream_id(kBatchTag, step));
  Batch batch;
  std::vector<dsp::Waveform> audio;
  std::vector<double> mels;
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    const std::size_t ci = static_cast<std::size_t>(rng.next_u32()) % corpus.clips.size();
    const CorpusClip& clip = corpus.clips[ci];
    if (clip.mel.frames < F || clip.audio.size() < L) {
      throw ConfigError("clip " + clip.name + " is shorter than clip_frames");
    }
    const std::size_t span = std::min(clip.mel.frames - F, (clip.audio.size() - L) / hop);
    const std::size_t off = static_cast<std::size_t>(rng.next_u32()) % (span + 1);
    dsp::Waveform x;
    x.sample_rate = clip.audio.sample_rate;
    x.samples.assign(clip.audio.samples.begin() + static_cast<std::ptrdiff_t>(off * hop),
                     clip.audio.samples.begin() + static_cast<std::ptrdiff_t>(off * hop + L));
    audio.push_back(std::move(x));
    const dsp::MelSpectrogram c = mel_excerpt(clip.mel, off, F);
    mels.insert(mels.end(), c.values.begin(), c.values.end());
    batch.target_power.push_back(dsp::target_power(c, fb));
    batch.priors.push_back(build_prior(c, fb, cfg.stft));
    batch.clips.push_back(ci);
    batch.offsets.push_back(off);
  }
  batch.x0 = stack_rows(audio);
  batch.c = Tensor::constant({cfg.batch, fb.bands, F}, std::move(mels));
  return batch;
}

double stat(const StepStats& stats, const std::string& name) {
  for (const auto& [n, v] : stats) {
    if (n == name) return v;
  }
  throw ConfigError("no statistic named '" + name + "'");
}

TrainingSession::TrainingSession(const TrainConfig& cfg, const Corpus& corpus) : cfg_(cfg), corpus_(corpus) {
  validate(cfg_);
  fb_ = mel_filterbank(cfg_);
  train_sched_ = preset(cfg_.train_schedule);
  infer_sched_ = preset(cfg_.infer_schedule);
  gen_ = std::make_unique<nn::Denoiser>(denoiser_config(cfg_), stream_id(cfg_.seed, 1));
  const bool adversarial =
      cfg_.mode == TrainMode::kWaveFit || (cfg_.mode == TrainMode::kInferGrad && cfg_.weights.lambda_if > 0.0);
  nn::AdamConfig gopt;
  gopt.lr = cfg_.mode == TrainMode::kInferGrad ? cfg_.finetune_lr : cfg_.lr;
  gopt.max_grad_norm = cfg_.max_grad_norm;
  gen_opt_ = std::make_unique<nn::Adam>(gen_->parameters(), gopt);
  if (adversarial) {
    disc_ = std::make_unique<nn::DiscriminatorStack>(discriminator_config(cfg_), stream_id(cfg_.seed, 2));
    nn::AdamConfig dopt;
    dopt.lr = cfg_.disc_lr;
    dopt.max_grad_norm = cfg_.max_grad_norm;
    disc_opt_ = std::make_unique<nn::Adam>(disc_->parameters(), dopt);
    loss_ctx_ = std::make_unique<SpectralLossContext>(default_loss_resolutions(), cfg_.sample_rate);
  }
}

StepStats TrainingSession::step() {
  const std::size_t next = step_ + 1;
  const Batch batch = sample_batch(corpus_, cfg_, fb_, next);
  StepStats stats = cfg_.mode == TrainMode::kWaveFit ? wavefit_step(batch) : diffusion_step(batch);
  step_ = next;
  return stats;
}

void TrainingSession::abort_non_finite(const std::string& what, const Batch& batch, const Tensor& extra) const {
  std::string where;
  if (!cfg_.out_dir.empty()) {
    std::filesystem::create_directories(cfg_.out_dir);
    nn::Checkpoint dump = checkpoint();
    const auto xv = batch.x0.values();
    dump.put("dump.x0", batch.x0.shape(), std::vector<double>(xv.begin(), xv.end()));
    const auto cv = batch.c.values();
    dump.put("dump.c", batch.c.shape(), std::vector<double>(cv.begin(), cv.end()));
    if (extra.defined()) {
      const auto ev = extra.values();
      dump.put("dump.input", extra.shape(), std::vector<double>(ev.begin(), ev.end()));
    }
    char name[64];
    std::snprintf(name, sizeof(name), "nonfinite_step_%06zu.ckpt", step_ + 1);
    where = (std::filesystem::path(cfg_.out_dir) / name).string();
    dump.save(where);
  }
  throw NonFiniteError("non-finite " + what + " at step " + std::to_string(step_ + 1) +
                       (where.empty() ? std::string() : "; inputs dumped to " + where));
}

void TrainingSession::discriminator_step(const Tensor& x0, const std::vector<Tensor>& fakes, StepStats& stats) {
  gen_->parameters().set_requires_grad(false);
  const auto real = disc_->forward(x0);
  std::vector<std::vector<nn::DiscriminatorOutput>> fake_outs;
  for (const auto& y : fakes) fake_outs.push_back(disc_->forward(y.detach()));
  const Tensor loss = gan_discriminator_loss(real, fake_outs);
  gen_->parameters().set_requires_grad(true);
  const double value = loss.item();
  if (!finite(value)) throw NonFiniteError("non-finite discriminator loss at step " + std::to_string(step_ + 1));
  disc_->parameters().zero_grad();
  loss.backward();
  stats.emplace_back("disc_grad_norm", disc_opt_->step());
  stats.emplace_back("disc", value);
}

StepStats TrainingSession::wavefit_step(const Batch& batch) {
  const std::size_t B = cfg_.batch, L = cfg_.clip_samples();
  std::vector<dsp::Waveform> init;
  for (std::size_t b = 0; b < B; ++b) {
    Philox rng(cfg_.seed, stream_id(kPriorTag, step_ + 1, b));
    init.push_back(sample_prior(batch.priors[b], L, rng));
  }
  const Tensor y_T = stack_rows(init);

  std::vector<nn::DiscriminatorOutput> real;
  {
    nn::NoGradGuard guard;
    real = disc_->forward(batch.x0);
  }
  disc_->parameters().set_requires_grad(false);
  const auto ys = wavefit_unroll(*gen_, y_T, batch.c, batch.target_power, cfg_.iterations, cfg_.gain_mode);
  const StepLoss loss = wavefit_total_loss(batch.x0, ys, real, *disc_, *loss_ctx_, cfg_.weights);
  disc_->parameters().set_requires_grad(true);
  const double total = loss.value.item();
  if (!finite(total)) abort_non_finite("generator loss", batch, y_T);

  StepStats stats;
  gen_->parameters().zero_grad();
  loss.value.backward();
  const double gnorm = gen_opt_->step();
  stats.emplace_back("gen", total);
  stats.emplace_back("gen_gan", loss.gan);
  stats.emplace_back("gen_fm", loss.fm);
  stats.emplace_back("gen_stft", loss.stft);
  stats.emplace_back("gen_mel", loss.mel);
  stats.emplace_back("gen_grad_norm", gnorm);
  discriminator_step(batch.x0, ys, stats);
  return stats;
}

StepStats TrainingSession::diffusion_step(const Batch& batch) {
  const std::size_t B = cfg_.batch, L = cfg_.clip_samples();
  const std::size_t T = train_sched_.steps();
  std::vector<dsp::Waveform> eps_rows, xt_rows;
  std::vector<double> cond;
  std::vector<std::shared_ptr<const dsp::TfFilterOperator>> inverse;
  const auto x0v = batch.x0.values();
  double t_sum = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    Philox rng(cfg_.seed, stream_id(kDiffusionTag, step_ + 1, b));
    const std::size_t t = draw_step_index(rng, T);
    t_sum += static_cast<double>(t);
    dsp::Waveform eps = sample_prior(batch.priors[b], L, rng);
    dsp::Waveform x0{std::vector<double>(x0v.begin() + static_cast<std::ptrdiff_t>(b * L),
                                         x0v.begin() + static_cast<std::ptrdiff_t>((b + 1) * L)),
                     cfg_.sample_rate};
    xt_rows.push_back(forward_diffuse(x0, eps, t, train_sched_));
    eps_rows.push_back(std::move(eps));
    cond.push_back(step_condition(*gen_, t, &train_sched_));
    inverse.push_back(std::make_shared<const dsp::TfFilterOperator>(batch.priors[b].filter, true));
  }
  const Tensor eps = stack_rows(eps_rows);
  const Tensor x_t = stack_rows(xt_rows);
  const Tensor residual = nn::tf_filter(eps - gen_->forward(x_t, batch.c, cond), inverse);
  const Tensor sg = nn::sum(nn::square(residual)) * (1.0 / static_cast<double>(B));

  StepStats stats;
  Tensor total = sg;
  std::vector<Tensor> fakes;
  if (cfg_.mode == TrainMode::kInferGrad && cfg_.weights.lambda_if > 0.0) {
    const std::size_t Ti = infer_sched_.steps();
    std::vector<dsp::Waveform> init;
    std::vector<std::vector<dsp::Waveform>> per_step(Ti);
    for (std::size_t b = 0; b < B; ++b) {
      Philox rng(cfg_.seed, stream_id(kInferTag, step_ + 1, b));
      init.push_back(sample_prior(batch.priors[b], L, rng));
      for (std::size_t i = 0; i < Ti; ++i) {
        per_step[i].push_back(cfg_.shaped_reverse_noise ? sample_prior(batch.priors[b], L, rng)
                                                        : dsp::Waveform{rng.gaussian_vector(L), cfg_.sample_rate});
      }
    }
    std::vector<Tensor> noise;
    for (const auto& rows : per_step) noise.push_back(stack_rows(rows));
    std::vector<nn::DiscriminatorOutput> real;
    {
      nn::NoGradGuard guard;
      real = disc_->forward(batch.x0);
    }
    disc_->parameters().set_requires_grad(false);
    const auto ys = ddpm_unroll(*gen_, stack_rows(init), batch.c, infer_sched_, noise);
    const StepLoss infer = wavefit_step_loss(batch.x0, ys.back(), real, *disc_, *loss_ctx_, cfg_.weights);
    disc_->parameters().set_requires_grad(true);
    total = infergrad_total_loss(sg, infer.value, cfg_.weights.lambda_if);
    stats.emplace_back("infer", infer.value.item());
    stats.emplace_back("infer_stft", infer.stft);
    fakes.push_back(ys.back());
  }
  const double value = total.item();
  if (!finite(value)) abort_non_finite("denoising loss", batch, x_t);
  gen_->parameters().zero_grad();
  total.backward();
  const double gnorm = gen_opt_->step();
  stats.insert(stats.begin(), {"sg", sg.item()});
  stats.insert(stats.begin(), {"total", value});
  stats.emplace_back("mean_t", t_sum / static_cast<double>(B));
  stats.emplace_back("gen_grad_norm", gnorm);
  if (!fakes.empty()) discriminator_step(batch.x0, fakes, stats);
  return stats;
}

nn::Checkpoint TrainingSession::checkpoint() const {
  nn::Checkpoint ckpt;
  ckpt.put("meta.config", {config_bytes(cfg_).size()}, config_bytes(cfg_));
  ckpt.put_scalar("train.step", static_cast<double>(step_));
  nn::store_parameters(ckpt, "gen.", gen_->parameters());
  nn::store_optimizer(ckpt, "adam_gen.", gen_->parameters(), *gen_opt_);
  if (disc_) {
    nn::store_parameters(ckpt, "disc.", disc_->parameters());
    nn::store_optimizer(ckpt, "adam_disc.", disc_->parameters(), *disc_opt_);
  }
  return ckpt;
}

void TrainingSession::save(const std::string& path) const { checkpoint().save(path); }

void TrainingSession::resume(const std::string& path) {
  const nn::Checkpoint ckpt = nn::Checkpoint::load(path);
  nn::restore_parameters(ckpt, "gen.", gen_->parameters());
  nn::restore_optimizer(ckpt, "adam_gen.", gen_->parameters(), *gen_opt_);
  if (disc_) {
    nn::restore_parameters(ckpt, "disc.", disc_->parameters());
    nn::restore_optimizer(ckpt, "adam_disc.", disc_->parameters(), *disc_opt_);
  }
  step_ = static_cast<std::size_t>(ckpt.scalar("train.step"));
}

void TrainingSession::load_generator(const std::string& path) {
  nn::restore_parameters(nn::Checkpoint::load(path), "gen.", gen_->parameters());
}

namespace {

TrainSummary run_session(TrainingSession& session, const TrainConfig& cfg, const std::string& resume_from) {
  std::filesystem::create_directories(cfg.out_dir);
  if (!resume_from.empty()) session.resume(resume_from);
  const auto dir = std::filesystem::path(cfg.out_dir);
  CsvLog log((dir / "loss.csv").string(), !resume_from.empty());
  TrainSummary summary;
  while (session.completed_steps() < cfg.total_steps) {
    summary.last = session.step();
    const std::size_t s = session.completed_steps();
    for (const auto& [name, value] : summary.last) log.write(s, name, value);
    if (cfg.checkpoint_every > 0 && s % cfg.checkpoint_every == 0 && s < cfg.total_steps) {
      char name[32];
      std::snprintf(name, sizeof(name), "step_%06zu.ckpt", s);
      session.save((dir / name).string());
    }
  }
  summary.steps = session.completed_steps();
  summary.checkpoint = (dir / "model.ckpt").string();
  session.save(summary.checkpoint);
  return summary;
}

}  // namespace

TrainSummary train_wavefit(const TrainConfig& cfg, const Corpus& corpus, const std::string& resume_from) {
  if (cfg.mode != TrainMode::kWaveFit) throw ConfigError("train_wavefit needs mode = wavefit");
  TrainingSession session(cfg, corpus);
  return run_session(session, cfg, resume_from);
}

TrainSummary train_ddpm(const TrainConfig& cfg, const Corpus& corpus, const std::string& resume_from) {
  if (cfg.mode != TrainMode::kDdpm) throw ConfigError("train_ddpm needs mode = ddpm");
  TrainingSession session(cfg, corpus);
  return run_session(session, cfg, resume_from);
}

TrainSummary train_infergrad(const TrainConfig& cfg, const Corpus& corpus, const std::string& pretrained,
                             const std::string& resume_from) {
  if (cfg.mode != TrainMode::kInferGrad) throw ConfigError("train_infergrad needs mode = infergrad");
  TrainingSession session(cfg, corpus);
  if (!pretrained.empty() && resume_from.empty()) session.load_generator(pretrained);
  return run_session(session, cfg, resume_from);
}

TrainSummary run_training(const TrainConfig& cfg, const Corpus& corpus, const std::string& resume_from) {
  switch (cfg.mode) {
    case TrainMode::kWaveFit: return train_wavefit(cfg, corpus, resume_from);
    case TrainMode::kDdpm: return train_ddpm(cfg, corpus, resume_from);
    case TrainMode::kInferGrad: return train_infergrad(cfg, corpus, cfg.init_checkpoint, resume_from);
  }
  throw ConfigError("unknown training mode");
}

Corpus corpus_for(const TrainConfig& cfg) {
  const dsp::MelFilterbank fb = mel_filterbank(cfg);
  if (cfg.corpus == "synthetic") {
    return make_synthetic_corpus(cfg.corpus_clips, cfg.seed, cfg.sample_rate, cfg.corpus_seconds, fb);
  }
  return load_corpus(cfg.corpus, fb);
}

TrainedModel load_model(const std::string& checkpoint_path) {
  const nn::Checkpoint ckpt = nn::Checkpoint::load(checkpoint_path);
  TrainedModel model;
  model.config = config_from(ckpt);
  model.net = std::make_unique<nn::Denoiser>(denoiser_config(model.config), 0);
  nn::restore_parameters(ckpt, "gen.", model.net->parameters());
  return model;
}

}  // namespace fpvoc::train
