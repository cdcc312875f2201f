// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>

#include "fpvoc/error.hpp"
#include "fpvoc/losses.hpp"
#include "fpvoc/nn/ops.hpp"
#include "gradcheck.hpp"

using namespace fpvoc;
using nn::Tensor;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const dsp::StftConfig kSmall{64, 16, 64};

struct Setup {
  nn::DiscriminatorStack disc{nn::DiscriminatorConfig{2, {4, 4, 8, 8, 8, 4}}, 3};
  SpectralLossContext ctx{{kSmall, dsp::StftConfig{128, 32, 128}}, 24000.0};
  Tensor x0 = Tensor::constant({2, 480}, testing::uniform_values(960, 1));
  std::vector<nn::DiscriminatorOutput> real() const {
    nn::NoGradGuard guard;
    return disc.forward(x0);
  }
};

}  // namespace

TEST_CASE("every loss passes a central-difference gradient check", "[losses]") {
  for (const auto& c : testing::loss_grad_cases()) {
    const auto r = testing::check_gradient(c);
    CAPTURE(r.name, r.rel_error);
    CHECK(r.rel_error < testing::kGradTolerance);
  }
}

TEST_CASE("loss resolutions", "[losses]") {
  const auto r = default_loss_resolutions();
  REQUIRE(r.size() == 3);
  REQUIRE(r[0] == dsp::StftConfig{360, 80, 512});
  REQUIRE(r[1] == dsp::StftConfig{900, 150, 1024});
  REQUIRE(r[2] == dsp::StftConfig{1800, 300, 2048});
  REQUIRE(mel_loss_config() == dsp::StftConfig{900, 150, 1024});
  const LossWeights w;
  REQUIRE(w.lambda_fm == 100.0);
  REQUIRE(w.lambda_stft == 1.0);
  REQUIRE(w.lambda_if == 0.1);
  REQUIRE_THROWS_AS(validate(LossWeights{-1.0, 1.0, 0.1, true}), ConfigError);
}

TEST_CASE("spectral losses vanish on identical signals and match closed forms", "[losses]") {
  const dsp::Waveform x{testing::uniform_values(2000, 4), 24000.0};
  REQUIRE(spectral_convergence(x, x, kSmall) == 0.0);
  REQUIRE(log_mag_loss(x, x, kSmall) == 0.0);
  REQUIRE(multi_res_stft(x, x, default_loss_resolutions()) == 0.0);
  dsp::Waveform half = x;
  for (auto& v : half.samples) v *= 0.5;
  REQUIRE_THAT(spectral_convergence(x, half, kSmall), WithinRel(0.5, 1e-12));
  REQUIRE_THAT(log_mag_loss(x, half, kSmall), WithinRel(std::log(2.0), 1e-9));
  const dsp::MelFilterbank fb = dsp::default_mel_filterbank(mel_loss_config(), 24000.0);
  REQUIRE(mel_mae(x, x, fb) == 0.0);
  REQUIRE(mel_mae(x, half, fb) > 0.0);

  const dsp::Waveform zero{std::vector<double>(2000, 0.0), 24000.0};
  REQUIRE_THROWS_AS(spectral_convergence(zero, x, kSmall), ConditioningError);
  REQUIRE_THROWS_AS(spectral_convergence(x, dsp::Waveform{{1.0, 2.0}, 24000.0}, kSmall), ShapeError);
}

TEST_CASE("hinge losses", "[losses]") {
  const auto out = [](std::vector<double> v) {
    return std::vector<nn::DiscriminatorOutput>{
        {Tensor::constant({1, 1, v.size()}, v), {Tensor::constant({1, 1, 1}, {0.0})}}};
  };
  REQUIRE_THAT(gan_generator_hinge(out({2.0, -1.0})).item(), WithinAbs((0.0 + 2.0) / 2, 1e-15));
  // Real at +2 and fake at -2 are both past the margin.
  REQUIRE(gan_discriminator_loss(out({2.0}), out({-2.0})).item() == 0.0);
  REQUIRE_THAT(gan_discriminator_loss(out({0.0}), out({0.5})).item(), WithinAbs(1.0 + 1.5, 1e-15));
  REQUIRE_THAT(gan_discriminator_loss(out({0.0}), std::vector{out({0.5}), out({-2.0})}).item(),
               WithinAbs((2.5 + 1.0) / 2, 1e-15));
  REQUIRE(feature_matching({Tensor::constant({2}, {1, 2})}, {Tensor::constant({2}, {1, 4})}).item() == 1.0);
  REQUIRE_THROWS_AS(feature_matching({}, {}), ShapeError);
}

TEST_CASE("ddpm loss is the squared error per row", "[losses]") {
  const Tensor e = Tensor::constant({2, 2}, {1, 2, 3, 4});
  const Tensor h = Tensor::constant({2, 2}, {0, 0, 3, 0});
  REQUIRE(ddpm_simple_loss(e, h).item() == (1.0 + 4.0 + 16.0) / 2.0);
}

TEST_CASE("total wavefit loss with one step equals the step loss", "[losses]") {
  const Setup s;
  const auto real = s.real();
  const Tensor y = Tensor::constant({2, 480}, testing::uniform_values(960, 2));
  const LossWeights w;
  const StepLoss one = wavefit_step_loss(s.x0, y, real, s.disc, s.ctx, w);
  const StepLoss total = wavefit_total_loss(s.x0, {y}, real, s.disc, s.ctx, w);
  REQUIRE_THAT(total.value.item(), WithinAbs(one.value.item(), 1e-12));
  REQUIRE(total.stft == one.stft);

  const StepLoss parts = wavefit_step_loss(s.x0, y, real, s.disc, s.ctx, w);
  REQUIRE_THAT(parts.value.item(), WithinRel(parts.gan + w.lambda_fm * parts.fm + w.lambda_stft * (parts.stft + parts.mel), 1e-12));

  LossWeights no_mel = w;
  no_mel.include_mel_mae = false;
  REQUIRE(wavefit_step_loss(s.x0, y, real, s.disc, s.ctx, no_mel).mel == 0.0);
  REQUIRE_THROWS_AS(wavefit_total_loss(s.x0, {}, real, s.disc, s.ctx, w), ConfigError);
}

TEST_CASE("total wavefit loss averages its steps", "[losses]") {
  const Setup s;
  const auto real = s.real();
  const Tensor a = Tensor::constant({2, 480}, testing::uniform_values(960, 5));
  const Tensor b = Tensor::constant({2, 480}, testing::uniform_values(960, 6));
  const LossWeights w;
  const double la = wavefit_step_loss(s.x0, a, real, s.disc, s.ctx, w).value.item();
  const double lb = wavefit_step_loss(s.x0, b, real, s.disc, s.ctx, w).value.item();
  REQUIRE_THAT(wavefit_total_loss(s.x0, {a, b}, real, s.disc, s.ctx, w).value.item(), WithinRel((la + lb) / 2, 1e-12));
}

TEST_CASE("infergrad objective", "[losses]") {
  const Tensor sg = Tensor::scalar(3.0), inf = Tensor::scalar(5.0);
  REQUIRE(infergrad_total_loss(sg, inf, 0.0).item() == 3.0);
  REQUIRE_THAT(infergrad_total_loss(sg, inf, 0.1).item(), WithinAbs(3.5, 1e-15));
  REQUIRE_THROWS_AS(infergrad_total_loss(sg, inf, -1.0), ConfigError);
}
