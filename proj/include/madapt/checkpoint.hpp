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

// Model parameter snapshot, little-endian:
//
//   "MMCK" | version u16 | echo length u32 | echo bytes |
//   parameter count u32 |
//   per parameter: name length u16 | UTF-8 name | rank u8 | dims u32 × rank |
//                  f64 × numel

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "madapt/model.hpp"

namespace madapt {

inline constexpr std::uint16_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  CheckpointError(const std::string& what, std::uint64_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) +
                           ")"),
        offset_(offset) {}
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

std::vector<std::uint8_t> encode_checkpoint(const DualDomainModel& model,
                                            const std::string& config_echo);

/// Overwrites the parameters of `model`. Every name and shape is checked
/// before any value is written; a mismatch names the offending parameter.
/// Returns the stored config echo.
std::string decode_checkpoint_into(DualDomainModel& model,
                                   const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const DualDomainModel& model, const std::string& config_echo,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  DualDomainModel model;
  std::string config_echo;
};

/// Builds a model for `expected` and fills it from the file.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const ModelConfig& expected);

}  // namespace madapt
