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

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace trifuse {

/// A named trainable tensor. Shapes follow the PyTorch convention:
/// conv (out, in/groups, kh, kw), linear (out, in), vectors (n).
uint64_t fnv1a(std::string_view s);
uint64_t splitmix64(uint64_t x);

struct Param {
  std::vector<int64_t> shape;
  std::vector<float> values;

  int64_t numel() const;
};

enum class Init { kTruncNormal, kZeros, kOnes };

struct ParamSpec {
  std::string name;
  std::vector<int64_t> shape;
  Init init = Init::kTruncNormal;

  int64_t numel() const;
};

/// Collects parameter declarations under a hierarchical dotted prefix.
class ParamSpecList {
 public:
  void weight(const std::string& name, std::vector<int64_t> shape);
  void bias(const std::string& name, int64_t n);
  /// LayerNorm pair: `<name>.gamma` (ones) and `<name>.beta` (zeros).
  void norm(const std::string& name, int64_t n);
  /// `<name>.weight` (out, in) plus `<name>.bias`.
  void linear(const std::string& name, int64_t in, int64_t out, bool with_bias = true);
  /// `<name>.weight` (out, in/groups, k, k) plus `<name>.bias`.
  void conv(const std::string& name, int64_t in, int64_t out, int64_t k, int64_t groups = 1,
            bool with_bias = true);

  const std::vector<ParamSpec>& specs() const { return specs_; }
  int64_t total() const;
  void append(const ParamSpecList& other);

 private:
  std::vector<ParamSpec> specs_;
};

/// Immutable-by-convention parameter set. Every tensor is initialised from
/// its own RNG stream keyed by (seed, name), so a parameter's values do not
/// depend on which other parameters exist.
class ParamStore {
 public:
  ParamStore() = default;

  static ParamStore build(const ParamSpecList& specs, uint64_t seed);

  const Param& at(std::string_view name) const;
  const std::vector<float>& values(std::string_view name) const { return at(name).values; }
  bool contains(std::string_view name) const;

  /// Replaces the values of an existing parameter (test fixtures, fault
  /// injection). Size must match.
  void set(std::string_view name, std::vector<float> values);
  void fill(std::string_view name, float value);

  uint64_t seed() const { return seed_; }
  size_t size() const { return params_.size(); }
  int64_t total() const;
  const std::map<std::string, Param, std::less<>>& entries() const { return params_; }

  bool operator==(const ParamStore& other) const;

 private:
  std::map<std::string, Param, std::less<>> params_;
  uint64_t seed_ = 0;
};

/// Truncated normal (std 0.02, cut at two standard deviations).
inline constexpr double kInitStd = 0.02;

}  // namespace trifuse
