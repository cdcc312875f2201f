// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/nn/denoiser.hpp"

#include <cmath>

#include "fpvoc/error.hpp"
#include "fpvoc/nn/ops.hpp"

namespace fpvoc::nn {

namespace {

constexpr double kSlope = 0.2;
// Log-mel values sit roughly in [-11.5, 1]; centre them before the first conv.
constexpr double kMelOffset = 5.0;
constexpr double kMelScale = 0.25;
constexpr double kLevelScale = 5000.0;

std::vector<std::size_t> prime_factors(std::size_t n) {
  std::vector<std::size_t> out;
  for (std::size_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

std::string idx(const std::string& prefix, std::size_t i, const std::string& suffix) {
  return prefix + std::to_string(i) + suffix;
}

}  // namespace

StepConditioning parse_step_conditioning(const std::string& name) {
  if (name == "index") return StepConditioning::kStepIndex;
  if (name == "level") return StepConditioning::kNoiseLevel;
  throw ConfigError("unknown step conditioning '" + name + "' (expected index or level)");
}

std::string to_string(StepConditioning mode) {
  return mode == StepConditioning::kStepIndex ? "index" : "level";
}

void validate(const DenoiserConfig& cfg) {
  if (cfg.mel_bands == 0 || cfg.channels == 0 || cfg.out_channels == 0 || cfg.embedding == 0 || cfg.blocks == 0) {
    throw ConfigError("denoiser: widths and block count must be positive");
  }
  if (cfg.embedding % 2 != 0) throw ConfigError("denoiser: embedding width must be even");
  if (cfg.downsample == 0 || cfg.downsample % 2 != 0) throw ConfigError("denoiser: downsample must be even");
  if (cfg.hop % cfg.downsample != 0) throw ConfigError("denoiser: hop must be a multiple of downsample");
  if (cfg.conditioning == StepConditioning::kStepIndex && cfg.steps == 0) {
    throw ConfigError("denoiser: step table needs at least one entry");
  }
}

Denoiser::Denoiser(const DenoiserConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  validate(cfg_);
  factors_ = prime_factors(cfg_.hop / cfg_.downsample);
  const std::size_t C = cfg_.channels, E = cfg_.embedding, d = cfg_.downsample;

  params_.add_uniform("in.w", {C, 1, 2 * d}, 2 * d, seed);
  params_.add_zeros("in.b", {C});
  params_.add_uniform("cond.w", {C, cfg_.mel_bands, 3}, cfg_.mel_bands * 3, seed);
  params_.add_zeros("cond.b", {C});
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    params_.add_uniform(idx("up", i, ".w"), {C, C, factors_[i]}, C, seed);
    params_.add_zeros(idx("up", i, ".b"), {C});
  }
  if (cfg_.conditioning == StepConditioning::kStepIndex) {
    params_.add_uniform("emb.table", {cfg_.steps, E}, 1, seed);
  }
  params_.add_uniform("emb.w", {E, E}, E, seed);
  params_.add_zeros("emb.b", {1, E});
  for (std::size_t b = 0; b < cfg_.blocks; ++b) {
    params_.add_uniform(idx("block", b, ".conv1.w"), {C, C, 3}, 3 * C, seed);
    params_.add_zeros(idx("block", b, ".conv1.b"), {C});
    params_.add_uniform(idx("block", b, ".cproj.w"), {C, C, 1}, C, seed);
    params_.add_uniform(idx("block", b, ".film.w"), {E, 2 * C}, E, seed);
    params_.add_zeros(idx("block", b, ".film.b"), {1, 2 * C});
    params_.add_uniform(idx("block", b, ".conv2.w"), {C, C, 3}, 3 * C, seed);
    params_.add_zeros(idx("block", b, ".conv2.b"), {C});
  }
  params_.add_uniform("up_out.w", {C, cfg_.out_channels, d}, C, seed);
  params_.add_zeros("up_out.b", {cfg_.out_channels});
  params_.add_uniform("post.w", {cfg_.out_channels, cfg_.out_channels + 1, 5}, 5 * (cfg_.out_channels + 1), seed);
  params_.add_zeros("post.b", {cfg_.out_channels});
  params_.add_zeros("out.w", {1, cfg_.out_channels, 5});
  params_.add_zeros("out.b", {1});
}

Tensor Denoiser::embed(std::span<const double> step) const {
  const std::size_t B = step.size(), E = cfg_.embedding;
  Tensor e;
  if (cfg_.conditioning == StepConditioning::kStepIndex) {
    std::vector<std::size_t> rows(B);
    for (std::size_t b = 0; b < B; ++b) {
      const double t = step[b];
      if (t < 1.0 || t > static_cast<double>(cfg_.steps) || t != std::floor(t)) {
        throw ConfigError("denoiser: step index " + std::to_string(t) + " outside 1.." + std::to_string(cfg_.steps));
      }
      rows[b] = static_cast<std::size_t>(t) - 1;
    }
    e = gather_rows(params_.get("emb.table"), rows);
  } else {
    const std::size_t half = E / 2;
    std::vector<double> code(B * E);
    for (std::size_t b = 0; b < B; ++b) {
      for (std::size_t j = 0; j < half; ++j) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(j) / static_cast<double>(half));
        const double arg = kLevelScale * step[b] * freq;
        code[b * E + j] = std::sin(arg);
        code[b * E + half + j] = std::cos(arg);
      }
    }
    e = Tensor::constant({B, E}, std::move(code));
  }
  return leaky_relu(matmul(e, params_.get("emb.w")) + params_.get("emb.b"), kSlope);
}

Tensor Denoiser::forward(const Tensor& y, const Tensor& c, std::span<const double> step) const {
  if (y.rank() != 2 || c.rank() != 3) throw ShapeError("denoiser expects y [B, L] and c [B, F, K]");
  const std::size_t B = y.dim(0), L = y.dim(1), K = c.dim(2);
  if (c.dim(0) != B || step.size() != B) throw ShapeError("denoiser: batch sizes of y, c and step differ");
  if (c.dim(1) != cfg_.mel_bands) throw ShapeError("denoiser: expected " + std::to_string(cfg_.mel_bands) + " mel bands");
  if (L != K * cfg_.hop) {
    throw ShapeError("denoiser: waveform length " + std::to_string(L) + " != frames " + std::to_string(K) + " x hop " +
                     std::to_string(cfg_.hop));
  }
  const std::size_t C = cfg_.channels, d = cfg_.downsample;
  const auto& p = params_;

  const Tensor y3 = reshape(y, {B, 1, L});
  Tensor h = leaky_relu(conv1d(y3, p.get("in.w"), p.get("in.b"), {.stride = d, .padding = d / 2}), kSlope);

  Tensor cu = (c + kMelOffset) * kMelScale;
  cu = leaky_relu(conv1d(cu, p.get("cond.w"), p.get("cond.b"), {.padding = 1}), kSlope);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    cu = leaky_relu(conv_transpose1d(cu, p.get(idx("up", i, ".w")), p.get(idx("up", i, ".b")), factors_[i]), kSlope);
  }

  const Tensor emb = embed(step);
  const Tensor none;
  for (std::size_t b = 0; b < cfg_.blocks; ++b) {
    const std::size_t dil = std::size_t{1} << b;
    Tensor a = conv1d(h, p.get(idx("block", b, ".conv1.w")), p.get(idx("block", b, ".conv1.b")),
                      {.dilation = dil, .padding = dil});
    a = a + conv1d(cu, p.get(idx("block", b, ".cproj.w")), none);
    const Tensor film = matmul(emb, p.get(idx("block", b, ".film.w"))) + p.get(idx("block", b, ".film.b"));
    const Tensor gamma = reshape(slice(film, 1, 0, C), {B, C, 1});
    const Tensor beta = reshape(slice(film, 1, C, 2 * C), {B, C, 1});
    a = leaky_relu(a * (gamma + 1.0) + beta, kSlope);
    a = conv1d(a, p.get(idx("block", b, ".conv2.w")), p.get(idx("block", b, ".conv2.b")), {.padding = 1});
    h = h + a;
  }

  Tensor u = leaky_relu(conv_transpose1d(leaky_relu(h, kSlope), p.get("up_out.w"), p.get("up_out.b"), d), kSlope);
  u = leaky_relu(conv1d(concat({u, y3}, 1), p.get("post.w"), p.get("post.b"), {.padding = 2}), kSlope);
  const Tensor out = conv1d(u, p.get("out.w"), p.get("out.b"), {.padding = 2});
  return reshape(out, {B, L});
}

}  // namespace fpvoc::nn
