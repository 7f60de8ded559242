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
#include "trifuse/params.hpp"

#include <algorithm>
#include <cstring>
#include <random>

#include "trifuse/errors.hpp"

namespace trifuse {

namespace {

int64_t product(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

}  // namespace

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

int64_t Param::numel() const { return product(shape); }
int64_t ParamSpec::numel() const { return product(shape); }

void ParamSpecList::weight(const std::string& name, std::vector<int64_t> shape) {
  specs_.push_back({name, std::move(shape), Init::kTruncNormal});
}

void ParamSpecList::bias(const std::string& name, int64_t n) {
  specs_.push_back({name, {n}, Init::kZeros});
}

void ParamSpecList::norm(const std::string& name, int64_t n) {
  specs_.push_back({name + ".gamma", {n}, Init::kOnes});
  specs_.push_back({name + ".beta", {n}, Init::kZeros});
}

void ParamSpecList::linear(const std::string& name, int64_t in, int64_t out, bool with_bias) {
  weight(name + ".weight", {out, in});
  if (with_bias) bias(name + ".bias", out);
}

void ParamSpecList::conv(const std::string& name, int64_t in, int64_t out, int64_t k,
                         int64_t groups, bool with_bias) {
  weight(name + ".weight", {out, in / groups, k, k});
  if (with_bias) bias(name + ".bias", out);
}

int64_t ParamSpecList::total() const {
  int64_t n = 0;
  for (const auto& s : specs_) n += s.numel();
  return n;
}

void ParamSpecList::append(const ParamSpecList& other) {
  specs_.insert(specs_.end(), other.specs_.begin(), other.specs_.end());
}

ParamStore ParamStore::build(const ParamSpecList& specs, uint64_t seed) {
  ParamStore store;
  store.seed_ = seed;
  for (const auto& spec : specs.specs()) {
    Param p{spec.shape, std::vector<float>(static_cast<size_t>(spec.numel()))};
    switch (spec.init) {
      case Init::kZeros:
        break;
      case Init::kOnes:
        std::fill(p.values.begin(), p.values.end(), 1.0f);
        break;
      case Init::kTruncNormal: {
        std::mt19937_64 gen(splitmix64(seed ^ fnv1a(spec.name)));
        std::normal_distribution<double> normal(0.0, kInitStd);
        for (auto& v : p.values) {
          double s;
          do {
            s = normal(gen);
          } while (std::abs(s) > 2.0 * kInitStd);
          v = static_cast<float>(s);
        }
        break;
      }
    }
    if (!store.params_.emplace(spec.name, std::move(p)).second) {
      throw ConfigError(spec.name, "duplicate parameter name");
    }
  }
  return store;
}

const Param& ParamStore::at(std::string_view name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError(std::string(name), "missing parameter");
  return it->second;
}

bool ParamStore::contains(std::string_view name) const { return params_.find(name) != params_.end(); }

void ParamStore::set(std::string_view name, std::vector<float> values) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError(std::string(name), "missing parameter");
  if (values.size() != it->second.values.size()) {
    throw ShapeError(std::string(name) + ": expected " + std::to_string(it->second.values.size()) +
                     " values, got " + std::to_string(values.size()));
  }
  it->second.values = std::move(values);
}

void ParamStore::fill(std::string_view name, float value) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ConfigError(std::string(name), "missing parameter");
  std::fill(it->second.values.begin(), it->second.values.end(), value);
}

int64_t ParamStore::total() const {
  int64_t n = 0;
  for (const auto& [name, p] : params_) n += p.numel();
  return n;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  auto it = other.params_.begin();
  for (const auto& [name, p] : params_) {
    if (name != it->first || p.shape != it->second.shape) return false;
    if (std::memcmp(p.values.data(), it->second.values.data(), p.values.size() * sizeof(float)) != 0)
      return false;
    ++it;
  }
  return true;
}

}  // namespace trifuse
