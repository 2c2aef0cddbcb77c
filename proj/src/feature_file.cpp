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

#include "madapt/feature_file.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "madapt/binary_io.hpp"

namespace madapt {
namespace io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path,
                const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace io

namespace {

template <typename T>
T narrow(std::size_t v, const char* what) {
  if (v > std::numeric_limits<T>::max()) {
    throw std::invalid_argument(std::string(what) + " too large for format");
  }
  return static_cast<T>(v);
}

}  // namespace

std::vector<std::uint8_t> encode_feature_file(const Dataset& data) {
  data.validate();
  io::Writer w;
  w.put_bytes("MMDA");
  w.put<std::uint16_t>(kFeatureFileVersion);
  w.put<std::uint32_t>(narrow<std::uint32_t>(data.size(), "record count"));
  w.put<std::uint16_t>(narrow<std::uint16_t>(data.regions_per_image, "K"));
  w.put<std::uint16_t>(narrow<std::uint16_t>(data.grid_cells, "G"));
  w.put<std::uint16_t>(narrow<std::uint16_t>(data.feature_dim, "d_v"));
  w.put<std::uint32_t>(
      narrow<std::uint32_t>(data.token_vocab_size, "token vocabulary"));
  for (const Sample& s : data.samples) {
    for (double v : s.regions) w.put<float>(static_cast<float>(v));
    for (double v : s.grid) w.put<float>(static_cast<float>(v));
    w.put<std::uint16_t>(narrow<std::uint16_t>(s.tokens.size(), "question"));
    for (auto t : s.tokens) w.put<std::uint32_t>(t);
    for (const auto& a : s.answers) {
      w.put<std::uint16_t>(narrow<std::uint16_t>(a.size(), "answer"));
      w.put_bytes(a);
    }
    w.put<std::uint8_t>(static_cast<std::uint8_t>(s.category));
    w.put<std::uint8_t>(static_cast<std::uint8_t>(s.domain));
  }
  return std::move(w.bytes());
}

Dataset decode_feature_file(const std::vector<std::uint8_t>& bytes) {
  io::Reader<FeatureFileError> r(bytes);
  if (bytes.size() < 4 || r.get_bytes(4, "magic") != "MMDA") {
    throw FeatureFileError("bad magic, expected \"MMDA\"", 0);
  }
  const auto version = r.get<std::uint16_t>("version");
  if (version != kFeatureFileVersion) {
    throw FeatureFileError("unsupported version " + std::to_string(version),
                           4);
  }
  const auto count = r.get<std::uint32_t>("record count");
  Dataset data;
  data.regions_per_image = r.get<std::uint16_t>("K");
  data.grid_cells = r.get<std::uint16_t>("G");
  data.feature_dim = r.get<std::uint16_t>("d_v");
  data.token_vocab_size = r.get<std::uint32_t>("token vocabulary size");
  if (data.regions_per_image == 0 || data.grid_cells == 0 ||
      data.feature_dim == 0) {
    throw FeatureFileError("zero feature dimension in header", 10);
  }

  auto floats = [&](std::size_t n, std::vector<double>& out) {
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t at = r.pos();
      const float f = r.get<float>("feature values");
      if (!std::isfinite(f)) throw FeatureFileError("non-finite feature", at);
      out.push_back(static_cast<double>(f));
    }
  };

  for (std::uint32_t i = 0; i < count; ++i) {
    if (r.remaining() == 0) {
      throw FeatureFileError("record count " + std::to_string(count) +
                                 " declared but data ends after " +
                                 std::to_string(i) + " records",
                             r.pos());
    }
    Sample s;
    floats(data.regions_per_image * data.feature_dim, s.regions);
    floats(data.grid_cells * data.feature_dim, s.grid);
    const std::size_t at = r.pos();
    const auto n_tokens = r.get<std::uint16_t>("token count");
    if (n_tokens == 0 || n_tokens > kMaxQuestionLength) {
      throw FeatureFileError("question length " + std::to_string(n_tokens) +
                                 " outside [1, " +
                                 std::to_string(kMaxQuestionLength) + "]",
                             at);
    }
    for (std::uint16_t k = 0; k < n_tokens; ++k) {
      const std::size_t tat = r.pos();
      const auto t = r.get<std::uint32_t>("tokens");
      if (t == 0 || t >= data.token_vocab_size) {
        throw FeatureFileError("token index " + std::to_string(t) +
                                   " out of range",
                               tat);
      }
      s.tokens.push_back(t);
    }
    for (auto& a : s.answers) {
      const auto len = r.get<std::uint16_t>("answer length");
      a = r.get_bytes(len, "answer text");
    }
    const std::size_t cat_at = r.pos();
    const auto cat = r.get<std::uint8_t>("category");
    if (cat >= kCategoryCount) {
      throw FeatureFileError("bad category tag " + std::to_string(cat), cat_at);
    }
    s.category = static_cast<Category>(cat);
    const auto dom = r.get<std::uint8_t>("domain");
    if (dom > 1) {
      throw FeatureFileError("bad domain tag " + std::to_string(dom),
                             r.pos() - 1);
    }
    s.domain = static_cast<DomainTag>(dom);
    data.samples.push_back(std::move(s));
  }
  if (r.remaining() != 0) {
    throw FeatureFileError("record count " + std::to_string(count) +
                               " declared but " +
                               std::to_string(r.remaining()) +
                               " bytes follow the last record",
                           r.pos());
  }
  return data;
}

void save_feature_file(const Dataset& data, const std::filesystem::path& path) {
  io::write_file(path, encode_feature_file(data));
}

Dataset load_feature_file(const std::filesystem::path& path) {
  return decode_feature_file(io::read_file(path));
}

}  // namespace madapt
