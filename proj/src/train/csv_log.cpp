// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/train/csv_log.hpp"

#include <cstdio>

#include "fpvoc/error.hpp"

namespace fpvoc::train {

CsvLog::CsvLog(const std::string& path, bool append) {
  out_.open(path, append ? std::ios::app : std::ios::trunc);
  if (!out_) throw IoError("cannot open log " + path);
  if (!append || out_.tellp() == 0) out_ << "step,name,value\n";
}

void CsvLog::write(std::size_t step, const std::string& name, double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  out_ << step << ',' << name << ',' << buf << '\n';
  out_.flush();
}

}  // namespace fpvoc::train
