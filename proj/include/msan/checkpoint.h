//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MSAN_CHECKPOINT_H_
#define MSAN_CHECKPOINT_H_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "msan/matrix.h"
#include "msan/tensor.h"

namespace msan::checkpoint {

inline constexpr int kFormatVersion = 1;

// File layout:
//   8 bytes   magic "MSANCKPT"
//   8 bytes   header length L, unsigned little-endian
//   L bytes   UTF-8 JSON header: caller fields plus "format_version" and
//             "tensors": [{"name", "rows", "cols"}, ...]
//   then, per listed tensor in order, rows * cols little-endian IEEE-754
//   binary64 values in row-major order.
void save(const std::filesystem::path &path,
          const tensor::ParameterStore &params, nlohmann::json header);

struct Loaded {
  nlohmann::json header;
  std::vector<std::pair<std::string, Matrix>> tensors;
};

// Throws IoError or IncompatibleCheckpoint (bad magic, version, truncation).
Loaded load(const std::filesystem::path &path);

// Copies tensors into same-named parameters. Every parameter must be present
// with an identical shape, and no extra tensors may remain; otherwise
// IncompatibleCheckpoint.
void restore(tensor::ParameterStore &params, const Loaded &loaded);

}  // namespace msan::checkpoint

#endif  // MSAN_CHECKPOINT_H_
