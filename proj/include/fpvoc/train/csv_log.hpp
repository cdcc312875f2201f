// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <fstream>
#include <string>

namespace fpvoc::train {

/// Append-only "step,name,value" log. Rows are flushed on every write.
class CsvLog {
 public:
  CsvLog() = default;
  /// Opens path; truncates unless `append` (used when resuming).
  CsvLog(const std::string& path, bool append);

  bool is_open() const { return out_.is_open(); }
  void write(std::size_t step, const std::string& name, double value);

 private:
  std::ofstream out_;
};

}  // namespace fpvoc::train
