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

#include "rectmatch/error.hpp"
#include "rectmatch/features.hpp"
#include "binary_io.hpp"

namespace rectmatch {
namespace {

constexpr std::uint32_t kFeatureFormatVersion = 1;

}  // namespace

std::vector<std::uint8_t> EncodeFeatureSet(const FeatureSet& features) {
  if (features.descriptors.cols() != static_cast<Eigen::Index>(features.keypoints.size())) {
    Fail(ErrorCode::kDimensionMismatch, "descriptor count differs from keypoint count");
  }
  detail::ByteWriter w;
  w.Magic("FEAT");
  w.U32(kFeatureFormatVersion);
  w.U32(static_cast<std::uint32_t>(features.keypoints.size()));
  for (std::size_t i = 0; i < features.keypoints.size(); ++i) {
    const Keypoint& kp = features.keypoints[i];
    w.F32(static_cast<float>(kp.position.x()));
    w.F32(static_cast<float>(kp.position.y()));
    w.F32(static_cast<float>(kp.scale));
    w.F32(static_cast<float>(kp.response));
    w.I32(kp.provenance);
    for (int k = 0; k < kDescriptorSize; ++k) {
      w.F32(features.descriptors(k, static_cast<Eigen::Index>(i)));
    }
  }
  return w.Take();
}

FeatureSet DecodeFeatureSet(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  if (!r.Magic("FEAT")) Fail(ErrorCode::kFormatError, "bad MATCHSET magic");
  if (r.U32() != kFeatureFormatVersion) Fail(ErrorCode::kFormatError, "unsupported MATCHSET version");
  const std::uint32_t n = r.U32();
  constexpr std::size_t kRecord = 5 * 4 + kDescriptorSize * 4;
  if (r.remaining() != static_cast<std::size_t>(n) * kRecord) {
    Fail(ErrorCode::kDimensionMismatch, "MATCHSET payload size does not match its count");
  }
  FeatureSet out;
  out.keypoints.resize(n);
  out.descriptors.resize(kDescriptorSize, static_cast<Eigen::Index>(n));
  for (std::uint32_t i = 0; i < n; ++i) {
    Keypoint& kp = out.keypoints[i];
    kp.position.x() = r.F32();
    kp.position.y() = r.F32();
    kp.scale = r.F32();
    kp.response = r.F32();
    kp.provenance = r.I32();
    for (int k = 0; k < kDescriptorSize; ++k) out.descriptors(k, static_cast<Eigen::Index>(i)) = r.F32();
  }
  return out;
}

void SaveFeatureSet(const std::string& path, const FeatureSet& features) {
  detail::WriteFile(path, EncodeFeatureSet(features));
}

FeatureSet LoadFeatureSet(const std::string& path) {
  return DecodeFeatureSet(detail::ReadFile(path));
}

}  // namespace rectmatch
