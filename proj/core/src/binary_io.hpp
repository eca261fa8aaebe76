// Copyright 2026 The rectmatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian byte packing shared by the binary containers.
#ifndef RECTMATCH_SRC_BINARY_IO_HPP_
#define RECTMATCH_SRC_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "rectmatch/error.hpp"

namespace rectmatch::detail {

class ByteWriter {
 public:
  void Magic(const char (&tag)[5]) { bytes_.insert(bytes_.end(), tag, tag + 4); }
  void U8(std::uint8_t v) { bytes_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void I32(std::int32_t v) { U32(std::bit_cast<std::uint32_t>(v)); }
  void F32(float v) { U32(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> Take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool Magic(const char (&tag)[5]) {
    Need(4);
    const bool ok = std::memcmp(bytes_.data() + pos_, tag, 4) == 0;
    pos_ += 4;
    return ok;
  }
  std::uint8_t U8() {
    Need(1);
    return bytes_[pos_++];
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::int32_t I32() { return std::bit_cast<std::int32_t>(U32()); }
  float F32() { return std::bit_cast<float>(U32()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) Fail(ErrorCode::kFormatError, "truncated data");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> ReadFile(const std::string& path);
void WriteFile(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace rectmatch::detail

#endif  // RECTMATCH_SRC_BINARY_IO_HPP_
