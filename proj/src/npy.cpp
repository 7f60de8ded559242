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
#include "trifuse/npy.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "trifuse/errors.hpp"

namespace trifuse::npy {

namespace {

constexpr unsigned char kMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};

constexpr ByteOrder native_order() {
  return std::endian::native == std::endian::little ? ByteOrder::kLittle : ByteOrder::kBig;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\n\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\n\r");
  return s.substr(b, e - b + 1);
}

// Returns the raw text of `'key': <value>` up to the next top-level comma
// or closing brace.
std::string dict_value(const std::string& header, const std::string& key) {
  auto pos = header.find("'" + key + "'");
  if (pos == std::string::npos) throw FormatError("npy header missing key '" + key + "'");
  pos = header.find(':', pos);
  if (pos == std::string::npos) throw FormatError("npy header malformed near '" + key + "'");
  ++pos;
  int depth = 0;
  size_t end = pos;
  for (; end < header.size(); ++end) {
    const char ch = header[end];
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (depth == 0 && (ch == ',' || ch == '}')) break;
  }
  return trim(header.substr(pos, end - pos));
}

std::vector<int64_t> parse_shape(const std::string& text) {
  if (text.size() < 2 || text.front() != '(' || text.back() != ')') {
    throw FormatError("npy shape is not a tuple: " + text);
  }
  std::vector<int64_t> shape;
  std::string inner = text.substr(1, text.size() - 2);
  size_t start = 0;
  while (start <= inner.size()) {
    auto comma = inner.find(',', start);
    std::string tok = trim(inner.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!tok.empty()) {
      char* end = nullptr;
      const long long v = std::strtoll(tok.c_str(), &end, 10);
      if (*end != '\0' || v < 0) throw FormatError("npy shape entry invalid: " + tok);
      shape.push_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return shape;
}

float half_to_float(uint16_t h) {
  const int sign = (h >> 15) & 1;
  const int exp = (h >> 10) & 0x1f;
  const int mant = h & 0x3ff;
  double v;
  if (exp == 0) {
    v = std::ldexp(static_cast<double>(mant), -24);
  } else if (exp == 31) {
    v = mant == 0 ? INFINITY : NAN;
  } else {
    v = std::ldexp(static_cast<double>(mant | 0x400), exp - 25);
  }
  return static_cast<float>(sign ? -v : v);
}

template <typename T>
T load(const unsigned char* p, int size, bool swap) {
  unsigned char buf[8];
  std::memcpy(buf, p, static_cast<size_t>(size));
  if (swap) std::reverse(buf, buf + size);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

int64_t Array::numel() const {
  int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string Array::descr() const {
  const char o = item_size == 1 ? '|' : (order == ByteOrder::kLittle ? '<' : '>');
  return std::string(1, o) + kind + std::to_string(item_size);
}

std::vector<double> Array::to_double() const {
  const auto n = static_cast<size_t>(numel());
  std::vector<double> out(n);
  const bool swap = item_size > 1 && order != native_order();
  const unsigned char* p = bytes.data();
  for (size_t i = 0; i < n; ++i, p += item_size) {
    double v = 0.0;
    if (kind == 'f') {
      switch (item_size) {
        case 2: v = half_to_float(load<uint16_t>(p, 2, swap)); break;
        case 4: v = load<float>(p, 4, swap); break;
        case 8: v = load<double>(p, 8, swap); break;
      }
    } else if (kind == 'i') {
      switch (item_size) {
        case 1: v = load<int8_t>(p, 1, false); break;
        case 2: v = load<int16_t>(p, 2, swap); break;
        case 4: v = load<int32_t>(p, 4, swap); break;
        case 8: v = static_cast<double>(load<int64_t>(p, 8, swap)); break;
      }
    } else {
      switch (item_size) {
        case 1: v = load<uint8_t>(p, 1, false); break;
        case 2: v = load<uint16_t>(p, 2, swap); break;
        case 4: v = load<uint32_t>(p, 4, swap); break;
        case 8: v = static_cast<double>(load<uint64_t>(p, 8, swap)); break;
      }
    }
    out[i] = v;
  }
  return out;
}

std::vector<float> Array::to_float() const {
  if (kind == 'f' && item_size == 4) {
    const auto n = static_cast<size_t>(numel());
    std::vector<float> out(n);
    const bool swap = order != native_order();
    for (size_t i = 0; i < n; ++i) out[i] = load<float>(bytes.data() + i * 4, 4, swap);
    return out;
  }
  auto d = to_double();
  return {d.begin(), d.end()};
}

Array parse(std::span<const unsigned char> file) {
  if (file.size() < 10 || std::memcmp(file.data(), kMagic, 6) != 0) {
    throw FormatError("not an NPY file (bad magic)");
  }
  const int major = file[6];
  if (major != 1) throw FormatError("unsupported NPY version " + std::to_string(major) + "." + std::to_string(file[7]));
  const size_t header_len = static_cast<size_t>(file[8]) | (static_cast<size_t>(file[9]) << 8);
  if (file.size() < 10 + header_len) throw FormatError("NPY header truncated");
  const std::string header(reinterpret_cast<const char*>(file.data() + 10), header_len);

  Array a;
  std::string descr = dict_value(header, "descr");
  if (descr.size() < 4 || (descr.front() != '\'' && descr.front() != '"')) {
    throw FormatError("npy descr malformed: " + descr);
  }
  descr = descr.substr(1, descr.size() - 2);
  if (descr.size() < 3) throw FormatError("npy descr malformed: " + descr);
  const char order = descr[0];
  a.kind = descr[1];
  a.item_size = std::atoi(descr.c_str() + 2);
  if (order == '<') {
    a.order = ByteOrder::kLittle;
  } else if (order == '>') {
    a.order = ByteOrder::kBig;
  } else if (order == '|' || order == '=') {
    a.order = native_order();
  } else {
    throw FormatError("npy byte order unsupported: " + descr);
  }
  const bool ok_kind = (a.kind == 'f' && (a.item_size == 2 || a.item_size == 4 || a.item_size == 8)) ||
                       ((a.kind == 'i' || a.kind == 'u') &&
                        (a.item_size == 1 || a.item_size == 2 || a.item_size == 4 || a.item_size == 8));
  if (!ok_kind) throw FormatError("npy dtype unsupported: " + descr);

  const std::string fortran = dict_value(header, "fortran_order");
  if (fortran == "True") throw FormatError("npy fortran_order arrays are not supported");
  if (fortran != "False") throw FormatError("npy fortran_order malformed: " + fortran);
  a.shape = parse_shape(dict_value(header, "shape"));

  const size_t payload = static_cast<size_t>(a.numel()) * static_cast<size_t>(a.item_size);
  if (file.size() - 10 - header_len < payload) {
    throw FormatError("npy payload truncated: expected " + std::to_string(payload) + " bytes");
  }
  a.bytes.assign(file.begin() + 10 + header_len, file.begin() + 10 + header_len + payload);
  return a;
}

Array read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse(buf);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<unsigned char> serialize(const Array& a) {
  std::string shape = "(";
  for (size_t i = 0; i < a.shape.size(); ++i) {
    shape += std::to_string(a.shape[i]);
    if (a.shape.size() == 1 || i + 1 < a.shape.size()) shape += ",";
    if (i + 1 < a.shape.size()) shape += " ";
  }
  shape += ")";
  std::string header = "{'descr': '" + a.descr() + "', 'fortran_order': False, 'shape': " + shape + ", }";
  const size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header += '\n';

  std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<unsigned char>(header.size() & 0xff));
  out.push_back(static_cast<unsigned char>(header.size() >> 8));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), a.bytes.begin(), a.bytes.end());
  return out;
}

void write(const std::filesystem::path& path, const Array& a) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  const auto bytes = serialize(a);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

Array from_float(std::vector<int64_t> shape, std::span<const float> values, ByteOrder order) {
  Array a;
  a.kind = 'f';
  a.item_size = 4;
  a.order = order;
  a.shape = std::move(shape);
  if (a.numel() != static_cast<int64_t>(values.size())) {
    throw ShapeError("npy::from_float: " + std::to_string(values.size()) + " values for shape of " +
                     std::to_string(a.numel()));
  }
  a.bytes.resize(values.size() * 4);
  const bool swap = order != native_order();
  for (size_t i = 0; i < values.size(); ++i) {
    unsigned char buf[4];
    std::memcpy(buf, &values[i], 4);
    if (swap) std::reverse(buf, buf + 4);
    std::memcpy(a.bytes.data() + i * 4, buf, 4);
  }
  return a;
}

}  // namespace trifuse::npy
