// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/nn/adam.hpp"

#include <cmath>

#include "fpvoc/error.hpp"

namespace fpvoc::nn {

namespace {

double to_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

}  // namespace

Adam::Adam(ParameterSet& params, const AdamConfig& cfg) : params_(params), cfg_(cfg) {
  if (!(cfg_.lr >= 0.0) || !(cfg_.beta1 >= 0.0 && cfg_.beta1 < 1.0) || !(cfg_.beta2 >= 0.0 && cfg_.beta2 < 1.0)) {
    throw ConfigError("adam: invalid hyperparameters");
  }
  for (const auto& [name, p] : params_.items()) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

double Adam::step() {
  auto& items = params_.items();
  if (items.size() != m_.size()) throw ShapeError("adam: parameter set changed after construction");
  double sq = 0.0;
  for (const auto& [name, p] : items) {
    for (double g : p.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  double clip = 1.0;
  if (cfg_.max_grad_norm > 0.0 && norm > cfg_.max_grad_norm) clip = cfg_.max_grad_norm / norm;

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < items.size(); ++i) {
    Tensor& p = items[i].second;
    const auto g = p.grad();
    auto& w = p.mutable_values();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = g.empty() ? 0.0 : g[j] * clip;
      m[j] = to_f32(cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * gj);
      v[j] = to_f32(cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * gj * gj);
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      w[j] = to_f32(w[j] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
    }
  }
  return norm;
}

}  // namespace fpvoc::nn
