// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/nn/discriminator.hpp"

#include <algorithm>
#include <string>

#include "fpvoc/error.hpp"
#include "fpvoc/nn/ops.hpp"

namespace fpvoc::nn {

namespace {

constexpr double kSlope = 0.2;

std::string name(std::size_t r, std::size_t layer, const char* what) {
  return "d" + std::to_string(r) + ".l" + std::to_string(layer) + "." + what;
}

}  // namespace

DiscriminatorStack::DiscriminatorStack(const DiscriminatorConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg_.scales == 0) throw ConfigError("discriminator: need at least one scale");
  if (cfg_.channels.size() != 6) throw ConfigError("discriminator: expected six hidden widths");
  plan_.push_back({15, 1, 7, 1});
  for (std::size_t i = 1; i < 5; ++i) {
    const std::size_t groups = std::max<std::size_t>(1, cfg_.channels[i - 1] / 4);
    if (cfg_.channels[i] % groups != 0) throw ConfigError("discriminator: widths incompatible with grouping");
    plan_.push_back({21, 4, 10, groups});
  }
  plan_.push_back({5, 1, 2, 1});
  plan_.push_back({3, 1, 1, 1});

  for (std::size_t r = 0; r < cfg_.scales; ++r) {
    std::size_t cin = 1;
    for (std::size_t l = 0; l < plan_.size(); ++l) {
      const std::size_t cout = l < cfg_.channels.size() ? cfg_.channels[l] : 1;
      const std::size_t per_group = cin / plan_[l].groups;
      params_.add_uniform(name(r, l, "w"), {cout, per_group, plan_[l].kernel}, per_group * plan_[l].kernel, seed);
      params_.add_zeros(name(r, l, "b"), {cout});
      cin = cout;
    }
  }
}

DiscriminatorOutput DiscriminatorStack::forward_scale(std::size_t r, const Tensor& x) const {
  DiscriminatorOutput out;
  Tensor h = x;
  for (std::size_t l = 0; l < plan_.size(); ++l) {
    const Layer& ly = plan_[l];
    h = conv1d(h, params_.get(name(r, l, "w")), params_.get(name(r, l, "b")),
               {.stride = ly.stride, .padding = ly.padding, .groups = ly.groups});
    if (l + 1 < plan_.size()) {
      h = leaky_relu(h, kSlope);
      out.features.push_back(h);
    }
  }
  out.logits = h;
  return out;
}

std::vector<DiscriminatorOutput> DiscriminatorStack::forward(const Tensor& x) const {
  if (x.rank() != 2) throw ShapeError("discriminator expects [B, L]");
  if (x.dim(1) < kMinLength) {
    throw ShapeError("discriminator: input length " + std::to_string(x.dim(1)) + " below minimum " +
                     std::to_string(kMinLength));
  }
  std::vector<DiscriminatorOutput> outs;
  Tensor h = reshape(x, {x.dim(0), 1, x.dim(1)});
  for (std::size_t r = 0; r < cfg_.scales; ++r) {
    if (r > 0) h = avg_pool1d(h, 2, 2);
    outs.push_back(forward_scale(r, h));
  }
  return outs;
}

}  // namespace fpvoc::nn
