// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/nn/ops.hpp"

#include <algorithm>
#include <cmath>

#include "fpvoc/error.hpp"

namespace fpvoc::nn {

namespace {

struct Broadcast {
  Shape out;
  std::vector<std::size_t> stride_a;
  std::vector<std::size_t> stride_b;
  bool same = false;
};

std::vector<std::size_t> strides_for(const Shape& shape, std::size_t rank, const Shape& out) {
  std::vector<std::size_t> strides(rank, 0);
  std::size_t s = 1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const std::size_t axis = shape.size() - 1 - i;
    const std::size_t out_axis = rank - 1 - i;
    strides[out_axis] = (shape[axis] == 1 && out[out_axis] != 1) ? 0 : s;
    s *= shape[axis];
  }
  return strides;
}

Broadcast plan(const Shape& a, const Shape& b) {
  Broadcast p;
  if (a == b) {
    p.out = a;
    p.same = true;
    return p;
  }
  const std::size_t rank = std::max(a.size(), b.size());
  p.out.assign(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < a.size() ? a[a.size() - 1 - i] : 1;
    const std::size_t db = i < b.size() ? b[b.size() - 1 - i] : 1;
    if (da != db && da != 1 && db != 1) {
      throw ShapeError("cannot broadcast " + to_string(a) + " with " + to_string(b));
    }
    p.out[rank - 1 - i] = std::max(da, db);
  }
  p.stride_a = strides_for(a, rank, p.out);
  p.stride_b = strides_for(b, rank, p.out);
  return p;
}

// Calls f(out_index, a_index, b_index) for every output element in order.
template <typename F>
void for_each_broadcast(const Broadcast& p, F&& f) {
  const std::size_t total = numel(p.out);
  if (p.same) {
    for (std::size_t i = 0; i < total; ++i) f(i, i, i);
    return;
  }
  const std::size_t rank = p.out.size();
  if (total == 0) return;
  const std::size_t inner = p.out[rank - 1];
  const std::size_t sa = p.stride_a[rank - 1];
  const std::size_t sb = p.stride_b[rank - 1];
  std::vector<std::size_t> idx(rank, 0);
  std::size_t base_a = 0, base_b = 0;
  for (std::size_t o = 0; o < total; o += inner) {
    for (std::size_t j = 0; j < inner; ++j) f(o + j, base_a + j * sa, base_b + j * sb);
    for (std::size_t d = rank - 1; d-- > 0;) {
      ++idx[d];
      base_a += p.stride_a[d];
      base_b += p.stride_b[d];
      if (idx[d] < p.out[d]) break;
      base_a -= p.stride_a[d] * idx[d];
      base_b -= p.stride_b[d] * idx[d];
      idx[d] = 0;
    }
  }
}

template <typename Forward, typename GradA, typename GradB>
Tensor binary(const Tensor& a, const Tensor& b, Forward fwd, GradA grad_a, GradB grad_b) {
  Broadcast p = plan(a.shape(), b.shape());
  std::vector<double> out(numel(p.out));
  const auto av = a.values();
  const auto bv = b.values();
  for_each_broadcast(p, [&](std::size_t o, std::size_t ia, std::size_t ib) { out[o] = fwd(av[ia], bv[ib]); });
  Shape shape = p.out;
  return make_result(std::move(shape), std::move(out), {a, b}, [p = std::move(p), grad_a, grad_b](Node& self) {
    Node& na = *self.parents[0];
    Node& nb = *self.parents[1];
    const auto& g = self.grad;
    if (na.requires_grad) {
      auto& ga = na.ensure_grad();
      for_each_broadcast(p, [&](std::size_t o, std::size_t ia, std::size_t ib) {
        ga[ia] += grad_a(g[o], na.value[ia], nb.value[ib], self.value[o]);
      });
    }
    if (nb.requires_grad) {
      auto& gb = nb.ensure_grad();
      for_each_broadcast(p, [&](std::size_t o, std::size_t ia, std::size_t ib) {
        gb[ib] += grad_b(g[o], na.value[ia], nb.value[ib], self.value[o]);
      });
    }
  });
}

// y = f(x) with dy/dx = df(x, y).
template <typename Forward, typename Deriv>
Tensor unary(const Tensor& x, Forward fwd, Deriv deriv) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = fwd(xv[i]);
  return make_result(x.shape(), std::move(out), {x}, [deriv](Node& self) {
    Node& nx = *self.parents[0];
    auto& gx = nx.ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] * deriv(nx.value[i], self.value[i]);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x + y; }, [](double g, double, double, double) { return g; },
      [](double g, double, double, double) { return g; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x - y; }, [](double g, double, double, double) { return g; },
      [](double g, double, double, double) { return -g; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x * y; }, [](double g, double, double y, double) { return g * y; },
      [](double g, double x, double, double) { return g * x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, [](double x, double y) { return x / y; }, [](double g, double, double y, double) { return g / y; },
      [](double g, double, double y, double out) { return -g * out / y; });
}

Tensor scale(const Tensor& x, double s) {
  return unary(x, [s](double v) { return s * v; }, [s](double, double) { return s; });
}

Tensor add_scalar(const Tensor& x, double s) {
  return unary(x, [s](double v) { return v + s; }, [](double, double) { return 1.0; });
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor relu(const Tensor& x) {
  return unary(x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  return unary(
      x, [slope](double v) { return v > 0.0 ? v : slope * v; },
      [slope](double v, double) { return v > 0.0 ? 1.0 : slope; });
}

Tensor tanh(const Tensor& x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor abs(const Tensor& x) {
  return unary(
      x, [](double v) { return std::abs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor log(const Tensor& x) {
  return unary(x, [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor exp(const Tensor& x) {
  return unary(x, [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor sqrt(const Tensor& x) {
  return unary(
      x, [](double v) { return std::sqrt(v); }, [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Tensor square(const Tensor& x) {
  return unary(x, [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor clamp_min(const Tensor& x, double lo) {
  return unary(
      x, [lo](double v) { return v > lo ? v : lo; }, [lo](double v, double) { return v > lo ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.values()) acc += v;
  return make_result({1}, {acc}, {x}, [](Node& self) {
    Node& nx = *self.parents[0];
    auto& gx = nx.ensure_grad();
    const double g = self.grad[0];
    for (double& v : gx) v += g;
  });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor sum_axis(const Tensor& x, std::size_t axis, bool keepdim) {
  const Shape& in = x.shape();
  if (axis >= in.size()) throw ShapeError("sum_axis: axis out of range");
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= in[d];
  for (std::size_t d = axis + 1; d < in.size(); ++d) inner *= in[d];
  const std::size_t n = in[axis];
  std::vector<double> out(outer * inner, 0.0);
  const auto xv = x.values();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t k = 0; k < n; ++k) {
      const double* src = xv.data() + (o * n + k) * inner;
      double* dst = out.data() + o * inner;
      for (std::size_t i = 0; i < inner; ++i) dst[i] += src[i];
    }
  }
  Shape shape = in;
  if (keepdim) {
    shape[axis] = 1;
  } else {
    shape.erase(shape.begin() + static_cast<std::ptrdiff_t>(axis));
    if (shape.empty()) shape = {1};
  }
  return make_result(std::move(shape), std::move(out), {x}, [outer, inner, n](Node& self) {
    auto& gx = self.parents[0]->ensure_grad();
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t k = 0; k < n; ++k) {
        double* dst = gx.data() + (o * n + k) * inner;
        const double* g = self.grad.data() + o * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] += g[i];
      }
    }
  });
}

Tensor mean_axis(const Tensor& x, std::size_t axis, bool keepdim) {
  return scale(sum_axis(x, axis, keepdim), 1.0 / static_cast<double>(x.shape().at(axis)));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
    throw ShapeError("matmul: incompatible shapes " + to_string(a.shape()) + " x " + to_string(b.shape()));
  }
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(m * n, 0.0);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    Node& na = *self.parents[0];
    Node& nb = *self.parents[1];
    const auto& g = self.grad;
    if (na.requires_grad) {
      auto& ga = na.ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = nb.value.data() + p * n;
          const double* grow = g.data() + i * n;
          double acc = 0.0;
#pragma omp simd reduction(+ : acc)
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (nb.requires_grad) {
      auto& gb = nb.ensure_grad();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = na.value[i * k + p];
          if (aip == 0.0) continue;
          double* gbrow = gb.data() + p * n;
          const double* grow = g.data() + i * n;
          for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
        }
      }
    }
  });
}

Tensor reshape(const Tensor& x, Shape shape) {
  if (numel(shape) != x.numel()) {
    throw ShapeError("reshape: " + to_string(x.shape()) + " -> " + to_string(shape) + " changes element count");
  }
  std::vector<double> out(x.values().begin(), x.values().end());
  return make_result(std::move(shape), std::move(out), {x}, [](Node& self) {
    auto& gx = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
  });
}

Tensor slice(const Tensor& x, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape& in = x.shape();
  if (axis >= in.size() || begin > end || end > in[axis]) throw ShapeError("slice: range out of bounds");
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= in[d];
  for (std::size_t d = axis + 1; d < in.size(); ++d) inner *= in[d];
  const std::size_t n = in[axis];
  const std::size_t len = end - begin;
  std::vector<double> out(outer * len * inner);
  const auto xv = x.values();
  for (std::size_t o = 0; o < outer; ++o) {
    std::copy_n(xv.data() + (o * n + begin) * inner, len * inner, out.data() + o * len * inner);
  }
  Shape shape = in;
  shape[axis] = len;
  return make_result(std::move(shape), std::move(out), {x}, [outer, inner, n, len, begin](Node& self) {
    auto& gx = self.parents[0]->ensure_grad();
    for (std::size_t o = 0; o < outer; ++o) {
      double* dst = gx.data() + (o * n + begin) * inner;
      const double* g = self.grad.data() + o * len * inner;
      for (std::size_t i = 0; i < len * inner; ++i) dst[i] += g[i];
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts[0].shape();
  if (axis >= first.size()) throw ShapeError("concat: axis out of range");
  std::size_t outer = 1, inner = 1;
  for (std::size_t d = 0; d < axis; ++d) outer *= first[d];
  for (std::size_t d = axis + 1; d < first.size(); ++d) inner *= first[d];
  std::vector<std::size_t> lens;
  std::size_t total = 0;
  for (const Tensor& t : parts) {
    const Shape& s = t.shape();
    if (s.size() != first.size()) throw ShapeError("concat: rank mismatch");
    for (std::size_t d = 0; d < s.size(); ++d) {
      if (d != axis && s[d] != first[d]) throw ShapeError("concat: shape mismatch off the concat axis");
    }
    lens.push_back(s[axis]);
    total += s[axis];
  }
  std::vector<double> out(outer * total * inner);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto v = parts[p].values();
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(v.data() + o * lens[p] * inner, lens[p] * inner, out.data() + (o * total + offset) * inner);
    }
    offset += lens[p];
  }
  Shape shape = first;
  shape[axis] = total;
  return make_result(std::move(shape), std::move(out), parts, [outer, inner, total, lens](Node& self) {
    std::size_t off = 0;
    for (std::size_t p = 0; p < lens.size(); ++p) {
      Node& np = *self.parents[p];
      if (np.requires_grad) {
        auto& gp = np.ensure_grad();
        for (std::size_t o = 0; o < outer; ++o) {
          const double* g = self.grad.data() + (o * total + off) * inner;
          double* dst = gp.data() + o * lens[p] * inner;
          for (std::size_t i = 0; i < lens[p] * inner; ++i) dst[i] += g[i];
        }
      }
      off += lens[p];
    }
  });
}

Tensor gather_rows(const Tensor& table, const std::vector<std::size_t>& rows) {
  if (table.rank() != 2) throw ShapeError("gather_rows: table must be 2-D");
  const std::size_t width = table.dim(1);
  std::vector<double> out(rows.size() * width);
  const auto tv = table.values();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= table.dim(0)) throw ShapeError("gather_rows: row index out of range");
    std::copy_n(tv.data() + rows[r] * width, width, out.data() + r * width);
  }
  return make_result({rows.size(), width}, std::move(out), {table}, [rows, width](Node& self) {
    auto& gt = self.parents[0]->ensure_grad();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t j = 0; j < width; ++j) gt[rows[r] * width + j] += self.grad[r * width + j];
    }
  });
}

Tensor row_norm(const Tensor& x) {
  if (x.rank() != 2) throw ShapeError("row_norm: expected a 2-D tensor");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  std::vector<double> out(rows, 0.0);
  const auto xv = x.values();
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += xv[r * cols + j] * xv[r * cols + j];
    out[r] = std::sqrt(acc);
  }
  return make_result({rows}, std::move(out), {x}, [rows, cols](Node& self) {
    Node& nx = *self.parents[0];
    auto& gx = nx.ensure_grad();
    for (std::size_t r = 0; r < rows; ++r) {
      const double n = self.value[r];
      if (n == 0.0) continue;
      const double s = self.grad[r] / n;
      for (std::size_t j = 0; j < cols; ++j) gx[r * cols + j] += s * nx.value[r * cols + j];
    }
  });
}

}  // namespace fpvoc::nn
