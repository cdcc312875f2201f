// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fpvoc::nn {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

// One vertex of the computation graph. `grad` stays empty until something
// flows into it; backward rules accumulate into their parents' grads.
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<double>& ensure_grad();
};

/// Differentiable n-dimensional array of doubles (row-major). Copies share
/// the underlying node.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape);
  static Tensor scalar(double value);
  /// Leaf that accumulates gradients.
  static Tensor parameter(Shape shape, std::vector<double> values);

  bool defined() const { return static_cast<bool>(node_); }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->value.size(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::span<const double> values() const { return node_->value; }
  std::vector<double>& mutable_values() { return node_->value; }
  std::span<const double> grad() const { return node_->grad; }
  double item() const;

  /// Reverse pass from this scalar; gradients accumulate into every leaf.
  void backward() const;
  void zero_grad();
  /// Same values, cut from the graph.
  Tensor detach() const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Disables graph construction on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

/// Creates an op result. The backward rule is attached only when graph
/// construction is enabled and some input requires a gradient.
Tensor make_result(Shape shape, std::vector<double> value, std::initializer_list<Tensor> inputs,
                   std::function<void(Node&)> backward);
Tensor make_result(Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs,
                   std::function<void(Node&)> backward);

}  // namespace fpvoc::nn
