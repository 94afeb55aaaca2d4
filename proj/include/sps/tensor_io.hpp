// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sps/tensor.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sps {

// Binary layouts (all integers little-endian):
//   Tensor4:    "SPT4" u8 version=1, u32 c_out, c_in, h_k, w_k, then c_out*c_in*h_k*w_k int8
//   FeatureMap: "SPFM" u8 version=1, u32 c, h, w, then c*h*w int32
std::vector<std::uint8_t> serialize(const Tensor4& t);
std::vector<std::uint8_t> serialize(const FeatureMap& fm);
Tensor4 deserialize_tensor4(std::span<const std::uint8_t> data);
FeatureMap deserialize_feature_map(std::span<const std::uint8_t> data);

// JSON fixtures: {"kind": "tensor4", "dims": [c_out, c_in, h_k, w_k], "values": [...]}
//                {"kind": "feature_map", "dims": [c, h, w], "values": [...]}
std::string to_json(const Tensor4& t);
std::string to_json(const FeatureMap& fm);
Tensor4 tensor4_from_json(const std::string& text);
FeatureMap feature_map_from_json(const std::string& text);

void save(const std::string& path, const Tensor4& t);
void save(const std::string& path, const FeatureMap& fm);
Tensor4 load_tensor4(const std::string& path);
FeatureMap load_feature_map(const std::string& path);

/// FNV-1a over the little-endian payload; identifies OFMs in reports.
std::uint64_t checksum(const FeatureMap& fm);

}  // namespace sps
