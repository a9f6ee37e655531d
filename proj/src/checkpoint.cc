//
// Project msan - Copyright 2026 The msan Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "msan/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "msan/error.h"

namespace msan::checkpoint {
namespace {

constexpr char kMagic[8] = { 'M', 'S', 'A', 'N', 'C', 'K', 'P', 'T' };

void put_u64(std::string &out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xffU));
}

std::uint64_t get_u64(const unsigned char *p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

[[noreturn]] void incompatible(const std::filesystem::path &path,
                               const std::string &why) {
  throw Error(ErrorCode::kIncompatibleCheckpoint, path.string() + ": " + why);
}

}  // namespace

void save(const std::filesystem::path &path,
          const tensor::ParameterStore &params, nlohmann::json header) {
  header["format_version"] = kFormatVersion;
  nlohmann::json listing = nlohmann::json::array();
  for (std::size_t i = 0; i < params.size(); ++i)
    listing.push_back({ { "name", params[i].name },
                        { "rows", params[i].value.rows() },
                        { "cols", params[i].value.cols() } });
  header["tensors"] = std::move(listing);
  const std::string text = header.dump();

  std::string blob(kMagic, sizeof(kMagic));
  put_u64(blob, text.size());
  blob += text;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (double v: params[i].value.data())
      put_u64(blob, std::bit_cast<std::uint64_t>(v));

  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out)
    throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

Loaded load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  const std::string blob((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  const auto *bytes = reinterpret_cast<const unsigned char *>(blob.data());

  if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, 8) != 0)
    incompatible(path, "not a checkpoint file");
  const std::uint64_t header_len = get_u64(bytes + 8);
  if (header_len > blob.size() - 16)
    incompatible(path, "truncated header");

  Loaded loaded;
  try {
    loaded.header = nlohmann::json::parse(blob.substr(16, header_len));
  } catch (const nlohmann::json::exception &e) {
    incompatible(path, std::string("bad header: ") + e.what());
  }
  if (loaded.header.value("format_version", -1) != kFormatVersion)
    incompatible(path, "unsupported format version");

  std::size_t offset = 16 + header_len;
  for (const auto &t: loaded.header.at("tensors")) {
    const auto rows = t.at("rows").get<std::size_t>();
    const auto cols = t.at("cols").get<std::size_t>();
    if ((blob.size() - offset) / 8 < rows * cols)
      incompatible(path, "truncated tensor data");
    std::vector<double> data(rows * cols);
    for (double &v: data) {
      v = std::bit_cast<double>(get_u64(bytes + offset));
      offset += 8;
    }
    loaded.tensors.emplace_back(t.at("name").get<std::string>(),
                                Matrix(rows, cols, std::move(data)));
  }
  if (offset != blob.size())
    incompatible(path, "trailing bytes after tensor data");
  return loaded;
}

void restore(tensor::ParameterStore &params, const Loaded &loaded) {
  if (loaded.tensors.size() != params.size())
    throw Error(ErrorCode::kIncompatibleCheckpoint,
                "checkpoint holds " + std::to_string(loaded.tensors.size())
                    + " tensors, model has " + std::to_string(params.size()));
  for (const auto &[name, value]: loaded.tensors) {
    if (!params.contains(name))
      throw Error(ErrorCode::kIncompatibleCheckpoint,
                  "checkpoint tensor '" + name + "' is not a model parameter");
    tensor::Parameter &p = params.get(name);
    if (!p.value.same_shape(value))
      throw Error(ErrorCode::kIncompatibleCheckpoint,
                  "shape mismatch for '" + name + "'");
    p.value = value;
  }
}

}  // namespace msan::checkpoint
