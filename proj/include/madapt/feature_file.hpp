// Copyright 2026 The madapt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Binary container for pre-extracted features. All integers and floats are
// little-endian.
//
//   header   "MMDA" | version u16 | count u32 | K u16 | G u16 | d_v u16 |
//            token_vocab u32
//   record   K·d_v f32 region features | G·d_v f32 grid features |
//            token count u16 | tokens u32 × count |
//            10 × (byte length u16 | UTF-8 answer) |
//            category u8 | domain u8

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "madapt/data.hpp"

namespace madapt {

inline constexpr std::uint16_t kFeatureFileVersion = 1;

class FeatureFileError : public std::runtime_error {
 public:
  FeatureFileError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) +
                           ")"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

std::vector<std::uint8_t> encode_feature_file(const Dataset& data);
Dataset decode_feature_file(const std::vector<std::uint8_t>& bytes);

void save_feature_file(const Dataset& data, const std::filesystem::path& path);
Dataset load_feature_file(const std::filesystem::path& path);

}  // namespace madapt
