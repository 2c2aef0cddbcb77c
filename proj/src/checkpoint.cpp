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

#include "madapt/checkpoint.hpp"

#include <algorithm>

#include "madapt/binary_io.hpp"

namespace madapt {

std::vector<std::uint8_t> encode_checkpoint(const DualDomainModel& model,
                                            const std::string& config_echo) {
  io::Writer w;
  w.put_bytes("MMCK");
  w.put<std::uint16_t>(kCheckpointVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(config_echo.size()));
  w.put_bytes(config_echo);
  const ParamList params = model.parameters();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.put<std::uint16_t>(static_cast<std::uint16_t>(p.name.size()));
    w.put_bytes(p.name);
    const Shape& shape = p.tensor.shape();
    w.put<std::uint8_t>(static_cast<std::uint8_t>(shape.size()));
    for (auto d : shape) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (double v : p.tensor.values()) w.put<double>(v);
  }
  return std::move(w.bytes());
}

std::string decode_checkpoint_into(DualDomainModel& model,
                                   const std::vector<std::uint8_t>& bytes) {
  io::Reader<CheckpointError> r(bytes);
  if (bytes.size() < 4 || r.get_bytes(4, "magic") != "MMCK") {
    throw CheckpointError("bad magic, not a checkpoint", 0);
  }
  const auto version_at = r.pos();
  const auto version = r.get<std::uint16_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                              std::to_string(version),
                          version_at);
  }
  const auto echo_len = r.get<std::uint32_t>("config echo length");
  std::string echo = r.get_bytes(echo_len, "config echo");

  ParamList params = model.parameters();
  const auto count_at = r.pos();
  const auto count = r.get<std::uint32_t>("parameter count");
  if (count != params.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(count) +
                              " parameters, model has " +
                              std::to_string(params.size()),
                          count_at);
  }
  // Validate everything and stage values before writing any of them.
  std::vector<std::vector<double>> staged(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_at = r.pos();
    const auto name_len = r.get<std::uint16_t>("parameter name length");
    const std::string name = r.get_bytes(name_len, "parameter name");
    if (name != params[i].name) {
      throw CheckpointError("parameter '" + name + "' does not match model parameter '" +
                                params[i].name + "'",
                            name_at);
    }
    const auto shape_at = r.pos();
    const auto rank = r.get<std::uint8_t>("parameter rank");
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint32_t>("parameter dims");
    if (shape != params[i].tensor.shape()) {
      throw CheckpointError("parameter '" + name + "' has shape " + shape_str(shape) +
                                ", model expects " +
                                shape_str(params[i].tensor.shape()),
                            shape_at);
    }
    auto& vals = staged[i];
    vals.resize(params[i].tensor.numel());
    r.need(vals.size() * sizeof(double), "parameter values");
    for (auto& v : vals) v = r.get<double>("parameter values");
  }
  if (r.remaining() != 0) {
    throw CheckpointError(std::to_string(r.remaining()) + " trailing bytes", r.pos());
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    auto dst = params[i].tensor.mutable_values();
    std::copy(staged[i].begin(), staged[i].end(), dst.begin());
  }
  return echo;
}

void save_checkpoint(const DualDomainModel& model, const std::string& config_echo,
                     const std::filesystem::path& path) {
  io::write_file(path, encode_checkpoint(model, config_echo));
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path,
                                 const ModelConfig& expected) {
  LoadedCheckpoint out{DualDomainModel(expected, 0), {}};
  out.config_echo = decode_checkpoint_into(out.model, io::read_file(path));
  return out;
}

}  // namespace madapt
