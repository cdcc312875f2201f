// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace fpvoc {

/// Invalid configuration or argument (bad STFT config, unknown preset, ...).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operands whose lengths or shapes do not line up.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// A filter too close to singular to invert.
class ConditioningError : public std::domain_error {
 public:
  explicit ConditioningError(const std::string& what) : std::domain_error(what) {}
};

/// File-format and filesystem failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Training produced NaN or Inf.
class NonFiniteError : public std::runtime_error {
 public:
  explicit NonFiniteError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fpvoc
