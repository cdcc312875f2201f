// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/nn/spectral_ops.hpp"

#include <cmath>

#include "fpvoc/error.hpp"
#include "fpvoc/nn/ops.hpp"

namespace fpvoc::nn {

Tensor stft_magnitude(const Tensor& x, std::shared_ptr<const dsp::StftEngine> engine) {
  if (x.rank() != 2) throw ShapeError("stft_magnitude expects [B, L]");
  const std::size_t batch = x.dim(0), length = x.dim(1);
  const std::size_t frames = engine->frames(length), bins = engine->bins();
  const std::size_t per_row = frames * bins;
  std::vector<double> out(batch * per_row);
  auto spectra = std::make_shared<std::vector<dsp::Complex>>(batch * per_row);
  const auto xv = x.values();
  for (std::size_t b = 0; b < batch; ++b) {
    const std::vector<dsp::Complex> spec = engine->analyze(xv.subspan(b * length, length));
    std::copy(spec.begin(), spec.end(), spectra->begin() + static_cast<std::ptrdiff_t>(b * per_row));
    for (std::size_t i = 0; i < per_row; ++i) out[b * per_row + i] = std::abs(spec[i]);
  }
  return make_result({batch, frames, bins}, std::move(out), {x},
                     [engine, spectra, batch, length, per_row](Node& self) {
                       auto& gx = self.parents[0]->ensure_grad();
                       std::vector<dsp::Complex> g(per_row);
                       for (std::size_t b = 0; b < batch; ++b) {
                         for (std::size_t i = 0; i < per_row; ++i) {
                           const double mag = self.value[b * per_row + i];
                           const dsp::Complex s = (*spectra)[b * per_row + i];
                           g[i] = mag > 0.0 ? s * (self.grad[b * per_row + i] / mag) : dsp::Complex();
                         }
                         const std::vector<double> row = engine->analyze_adjoint(g, length);
                         for (std::size_t t = 0; t < length; ++t) gx[b * length + t] += row[t];
                       }
                     });
}

Tensor stft_magnitude(const Tensor& x, const dsp::StftConfig& cfg) {
  return stft_magnitude(x, std::make_shared<const dsp::StftEngine>(cfg));
}

Tensor tf_filter(const Tensor& x, std::vector<std::shared_ptr<const dsp::TfFilterOperator>> ops) {
  if (x.rank() != 2) throw ShapeError("tf_filter expects [B, L]");
  const std::size_t batch = x.dim(0), length = x.dim(1);
  if (ops.size() != batch) throw ShapeError("tf_filter: one operator per batch row required");
  std::vector<double> out(batch * length);
  const auto xv = x.values();
  for (std::size_t b = 0; b < batch; ++b) {
    const std::vector<double> row = ops[b]->apply(xv.subspan(b * length, length));
    std::copy(row.begin(), row.end(), out.begin() + static_cast<std::ptrdiff_t>(b * length));
  }
  return make_result({batch, length}, std::move(out), {x}, [ops = std::move(ops), batch, length](Node& self) {
    auto& gx = self.parents[0]->ensure_grad();
    for (std::size_t b = 0; b < batch; ++b) {
      const std::vector<double> row =
          ops[b]->apply_adjoint(std::span<const double>(self.grad.data() + b * length, length));
      for (std::size_t t = 0; t < length; ++t) gx[b * length + t] += row[t];
    }
  });
}

Tensor filterbank_tensor(const dsp::MelFilterbank& fb) {
  std::vector<double> wt(fb.num_bins * fb.bands);
  for (std::size_t f = 0; f < fb.bands; ++f) {
    for (std::size_t h = 0; h < fb.num_bins; ++h) wt[h * fb.bands + f] = fb.at(f, h);
  }
  return Tensor::constant({fb.num_bins, fb.bands}, std::move(wt));
}

Tensor mel_amplitude(const Tensor& x, std::shared_ptr<const dsp::StftEngine> engine, const Tensor& fb_t) {
  if (fb_t.rank() != 2 || fb_t.dim(0) != engine->bins()) throw ShapeError("mel_amplitude: filterbank/STFT mismatch");
  const Tensor mag = stft_magnitude(x, std::move(engine));
  const std::size_t batch = mag.dim(0), frames = mag.dim(1), bins = mag.dim(2);
  const Tensor mel = matmul(reshape(mag, {batch * frames, bins}), fb_t);
  return reshape(mel, {batch, frames, fb_t.dim(1)});
}

Tensor gain_adjust(const Tensor& z, std::span<const double> target_power, dsp::GainMode mode) {
  if (z.rank() != 2) throw ShapeError("gain_adjust expects [B, L]");
  const std::size_t batch = z.dim(0);
  if (target_power.size() != batch) throw ShapeError("gain_adjust: one target power per row required");
  const Tensor pc = Tensor::constant({batch, 1}, std::vector<double>(target_power.begin(), target_power.end()));
  const Tensor pz = mean_axis(square(z), 1, true) + dsp::kGainEpsilon;
  Tensor g = pc / pz;
  if (mode == dsp::GainMode::kSqrt) g = sqrt(g);
  return z * g;
}

}  // namespace fpvoc::nn
