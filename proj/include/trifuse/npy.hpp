// Copyright 2026 The TriFuse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

// NPY v1.x reader/writer. Supported element types: little/big-endian
// floats of 2, 4, 8 bytes and signed/unsigned integers of 1, 2, 4, 8 bytes,
// C order only. Anything else raises FormatError.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace trifuse::npy {

enum class ByteOrder { kLittle, kBig };

struct Array {
  char kind = 'f';  // 'f', 'i' or 'u'
  int item_size = 4;
  ByteOrder order = ByteOrder::kLittle;
  std::vector<int64_t> shape;
  std::vector<unsigned char> bytes;  // raw element storage as laid out on disk

  int64_t numel() const;
  /// The dtype string as written in the header, e.g. "<f4".
  std::string descr() const;
  /// Element values converted to float / double.
  std::vector<float> to_float() const;
  std::vector<double> to_double() const;
};

Array parse(std::span<const unsigned char> file_bytes);
Array read(const std::filesystem::path& path);

std::vector<unsigned char> serialize(const Array& a);
void write(const std::filesystem::path& path, const Array& a);

/// Packs float32 values with the requested byte order.
Array from_float(std::vector<int64_t> shape, std::span<const float> values,
                 ByteOrder order = ByteOrder::kLittle);

}  // namespace trifuse::npy
