// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>

#include "fpvoc/error.hpp"
#include "fpvoc/nn/ops.hpp"

namespace fpvoc::nn {

namespace {

struct ConvGeometry {
  std::size_t batch, cin, cout, length, kernel, out_length, cin_per_group, cout_per_group;
  Conv1dOptions opt;

  // Output positions t with 0 <= t*stride + k*dilation - padding < length.
  std::pair<std::size_t, std::size_t> valid_range(std::size_t k) const {
    const long long off = static_cast<long long>(k * opt.dilation) - static_cast<long long>(opt.padding);
    const auto s = static_cast<long long>(opt.stride);
    long long lo = off >= 0 ? 0 : (-off + s - 1) / s;
    long long hi = (static_cast<long long>(length) - 1 - off);
    hi = hi < 0 ? 0 : hi / s + 1;
    hi = std::min<long long>(hi, static_cast<long long>(out_length));
    if (lo > hi) lo = hi;
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  }
  long long offset(std::size_t k) const {
    return static_cast<long long>(k * opt.dilation) - static_cast<long long>(opt.padding);
  }
};

}  // namespace

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, const Conv1dOptions& opt) {
  const std::size_t span = opt.dilation * (kernel - 1) + 1;
  if (length + 2 * opt.padding < span) return 0;
  return (length + 2 * opt.padding - span) / opt.stride + 1;
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& bias, const Conv1dOptions& opt) {
  if (x.rank() != 3 || w.rank() != 3) throw ShapeError("conv1d expects x [B, C, L] and w [Cout, Cin/g, K]");
  if (opt.stride == 0 || opt.dilation == 0 || opt.groups == 0) throw ConfigError("conv1d: zero stride/dilation/groups");
  ConvGeometry g{};
  g.opt = opt;
  g.batch = x.dim(0);
  g.cin = x.dim(1);
  g.length = x.dim(2);
  g.cout = w.dim(0);
  g.kernel = w.dim(2);
  if (g.cin % opt.groups != 0 || g.cout % opt.groups != 0) throw ShapeError("conv1d: channels not divisible by groups");
  g.cin_per_group = g.cin / opt.groups;
  g.cout_per_group = g.cout / opt.groups;
  if (w.dim(1) != g.cin_per_group) {
    throw ShapeError("conv1d: weight " + to_string(w.shape()) + " does not match input " + to_string(x.shape()));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != g.cout)) throw ShapeError("conv1d: bias shape mismatch");
  g.out_length = conv1d_output_length(g.length, g.kernel, opt);
  if (g.out_length == 0) throw ShapeError("conv1d: input shorter than the kernel span");

  std::vector<double> out(g.batch * g.cout * g.out_length, 0.0);
  const auto xv = x.values();
  const auto wv = w.values();
  const std::size_t s = opt.stride;
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t oc = 0; oc < g.cout; ++oc) {
      double* orow = out.data() + (b * g.cout + oc) * g.out_length;
      if (bias.defined()) std::fill_n(orow, g.out_length, bias.values()[oc]);
      const std::size_t group = oc / g.cout_per_group;
      for (std::size_t ic = 0; ic < g.cin_per_group; ++ic) {
        const double* irow = xv.data() + (b * g.cin + group * g.cin_per_group + ic) * g.length;
        const double* wrow = wv.data() + (oc * g.cin_per_group + ic) * g.kernel;
        for (std::size_t k = 0; k < g.kernel; ++k) {
          const double wk = wrow[k];
          const auto [lo, hi] = g.valid_range(k);
          const long long off = g.offset(k);
          if (s == 1) {
            const double* src = irow + off;
            for (std::size_t t = lo; t < hi; ++t) orow[t] += wk * src[t];
          } else {
            for (std::size_t t = lo; t < hi; ++t) orow[t] += wk * irow[static_cast<long long>(t * s) + off];
          }
        }
      }
    }
  }

  std::vector<Tensor> inputs{x, w};
  if (bias.defined()) inputs.push_back(bias);
  return make_result({g.batch, g.cout, g.out_length}, std::move(out), inputs, [g](Node& self) {
    Node& nx = *self.parents[0];
    Node& nw = *self.parents[1];
    Node* nb = self.parents.size() > 2 ? self.parents[2].get() : nullptr;
    double* gx = nx.requires_grad ? nx.ensure_grad().data() : nullptr;
    double* gw = nw.requires_grad ? nw.ensure_grad().data() : nullptr;
    double* gb = (nb && nb->requires_grad) ? nb->ensure_grad().data() : nullptr;
    const std::size_t s = g.opt.stride;
    for (std::size_t b = 0; b < g.batch; ++b) {
      for (std::size_t oc = 0; oc < g.cout; ++oc) {
        const double* grow = self.grad.data() + (b * g.cout + oc) * g.out_length;
        if (gb) {
          double acc = 0.0;
#pragma omp simd reduction(+ : acc)
          for (std::size_t t = 0; t < g.out_length; ++t) acc += grow[t];
          gb[oc] += acc;
        }
        const std::size_t group = oc / g.cout_per_group;
        for (std::size_t ic = 0; ic < g.cin_per_group; ++ic) {
          const std::size_t in_row = (b * g.cin + group * g.cin_per_group + ic) * g.length;
          const double* irow = nx.value.data() + in_row;
          const std::size_t w_row = (oc * g.cin_per_group + ic) * g.kernel;
          for (std::size_t k = 0; k < g.kernel; ++k) {
            const auto [lo, hi] = g.valid_range(k);
            const long long off = g.offset(k);
            if (gw) {
              double acc = 0.0;
              if (s == 1) {
                const double* src = irow + off;
#pragma omp simd reduction(+ : acc)
                for (std::size_t t = lo; t < hi; ++t) acc += grow[t] * src[t];
              } else {
                for (std::size_t t = lo; t < hi; ++t) acc += grow[t] * irow[static_cast<long long>(t * s) + off];
              }
              gw[w_row + k] += acc;
            }
            if (gx) {
              const double wk = nw.value[w_row + k];
              double* dst = gx + in_row;
              if (s == 1) {
                double* d = dst + off;
                for (std::size_t t = lo; t < hi; ++t) d[t] += wk * grow[t];
              } else {
                for (std::size_t t = lo; t < hi; ++t) dst[static_cast<long long>(t * s) + off] += wk * grow[t];
              }
            }
          }
        }
      }
    }
  });
}

Tensor conv_transpose1d(const Tensor& x, const Tensor& w, const Tensor& bias, std::size_t stride, std::size_t padding) {
  if (x.rank() != 3 || w.rank() != 3 || w.dim(0) != x.dim(1)) {
    throw ShapeError("conv_transpose1d expects x [B, Cin, L] and w [Cin, Cout, K]");
  }
  if (stride == 0) throw ConfigError("conv_transpose1d: zero stride");
  const std::size_t batch = x.dim(0), cin = x.dim(1), length = x.dim(2);
  const std::size_t cout = w.dim(1), kernel = w.dim(2);
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout)) throw ShapeError("conv_transpose1d: bias shape");
  const long long full = static_cast<long long>((length - 1) * stride + kernel);
  const long long out_len_signed = full - 2 * static_cast<long long>(padding);
  if (length == 0 || out_len_signed <= 0) throw ShapeError("conv_transpose1d: empty output");
  const auto out_length = static_cast<std::size_t>(out_len_signed);

  std::vector<double> out(batch * cout * out_length, 0.0);
  const auto xv = x.values();
  const auto wv = w.values();
  auto for_taps = [=](auto&& f) {
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t ic = 0; ic < cin; ++ic) {
        for (std::size_t oc = 0; oc < cout; ++oc) {
          for (std::size_t k = 0; k < kernel; ++k) {
            f(b, ic, oc, k);
          }
        }
      }
    }
  };
  // out position = t*stride + k - padding
  auto range = [=](std::size_t k) {
    const long long off = static_cast<long long>(k) - static_cast<long long>(padding);
    const auto s = static_cast<long long>(stride);
    long long lo = off >= 0 ? 0 : (-off + s - 1) / s;
    long long hi = static_cast<long long>(out_length) - 1 - off;
    hi = hi < 0 ? 0 : hi / s + 1;
    hi = std::min<long long>(hi, static_cast<long long>(length));
    if (lo > hi) lo = hi;
    return std::tuple<std::size_t, std::size_t, long long>(lo, hi, off);
  };
  for_taps([&](std::size_t b, std::size_t ic, std::size_t oc, std::size_t k) {
    const double wk = wv[(ic * cout + oc) * kernel + k];
    const double* irow = xv.data() + (b * cin + ic) * length;
    double* orow = out.data() + (b * cout + oc) * out_length;
    const auto [lo, hi, off] = range(k);
    for (std::size_t t = lo; t < hi; ++t) orow[static_cast<long long>(t * stride) + off] += wk * irow[t];
  });
  if (bias.defined()) {
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t oc = 0; oc < cout; ++oc) {
        double* orow = out.data() + (b * cout + oc) * out_length;
        for (std::size_t t = 0; t < out_length; ++t) orow[t] += bias.values()[oc];
      }
    }
  }

  std::vector<Tensor> inputs{x, w};
  if (bias.defined()) inputs.push_back(bias);
  return make_result({batch, cout, out_length}, std::move(out), inputs,
                     [=](Node& self) {
                       Node& nx = *self.parents[0];
                       Node& nw = *self.parents[1];
                       Node* nb = self.parents.size() > 2 ? self.parents[2].get() : nullptr;
                       double* gx = nx.requires_grad ? nx.ensure_grad().data() : nullptr;
                       double* gw = nw.requires_grad ? nw.ensure_grad().data() : nullptr;
                       for_taps([&](std::size_t b, std::size_t ic, std::size_t oc, std::size_t k) {
                         const std::size_t widx = (ic * cout + oc) * kernel + k;
                         const double* grow = self.grad.data() + (b * cout + oc) * out_length;
                         const std::size_t in_row = (b * cin + ic) * length;
                         const auto [lo, hi, off] = range(k);
                         if (gw) {
                           double acc = 0.0;
                           for (std::size_t t = lo; t < hi; ++t) {
                             acc += grow[static_cast<long long>(t * stride) + off] * nx.value[in_row + t];
                           }
                           gw[widx] += acc;
                         }
                         if (gx) {
                           const double wk = nw.value[widx];
                           for (std::size_t t = lo; t < hi; ++t) {
                             gx[in_row + t] += wk * grow[static_cast<long long>(t * stride) + off];
                           }
                         }
                       });
                       if (nb && nb->requires_grad) {
                         auto& gb = nb->ensure_grad();
                         for (std::size_t b = 0; b < batch; ++b) {
                           for (std::size_t oc = 0; oc < cout; ++oc) {
                             const double* grow = self.grad.data() + (b * cout + oc) * out_length;
                             for (std::size_t t = 0; t < out_length; ++t) gb[oc] += grow[t];
                           }
                         }
                       }
                     });
}

Tensor avg_pool1d(const Tensor& x, std::size_t kernel, std::size_t stride) {
  if (x.rank() != 3) throw ShapeError("avg_pool1d expects [B, C, L]");
  if (kernel == 0 || stride == 0) throw ConfigError("avg_pool1d: zero kernel or stride");
  const std::size_t rows = x.dim(0) * x.dim(1), length = x.dim(2);
  if (length < kernel) throw ShapeError("avg_pool1d: input shorter than kernel");
  const std::size_t out_length = (length - kernel) / stride + 1;
  std::vector<double> out(rows * out_length, 0.0);
  const auto xv = x.values();
  const double inv = 1.0 / static_cast<double>(kernel);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < out_length; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kernel; ++k) acc += xv[r * length + j * stride + k];
      out[r * out_length + j] = acc * inv;
    }
  }
  return make_result({x.dim(0), x.dim(1), out_length}, std::move(out), {x},
                     [rows, length, out_length, kernel, stride, inv](Node& self) {
                       auto& gx = self.parents[0]->ensure_grad();
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t j = 0; j < out_length; ++j) {
                           const double g = self.grad[r * out_length + j] * inv;
                           for (std::size_t k = 0; k < kernel; ++k) gx[r * length + j * stride + k] += g;
                         }
                       }
                     });
}

}  // namespace fpvoc::nn
