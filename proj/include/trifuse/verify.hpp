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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trifuse/fusion.hpp"

namespace trifuse {

/// A property returns nullopt on success or a failure description.
using PropertyCheck = std::function<std::optional<std::string>(uint64_t seed, const FaultInjection& faults)>;

struct Property {
  std::string name;
  PropertyCheck check;
};

/// Every cross-module invariant, in a fixed order.
const std::vector<Property>& property_registry();

struct PropertyResult {
  std::string name;
  int runs = 0;
  int passed = 0;
  std::optional<uint64_t> first_failing_seed;
  std::string detail;
};

struct VerifySummary {
  std::vector<PropertyResult> results;
  bool ok() const;
  /// One line per property; deterministic for a given (seeds, faults).
  std::string str() const;
};

/// Seeds are base_seed, base_seed + 1, ..., base_seed + seed_count - 1.
/// An exception thrown by a check counts as a failure.
VerifySummary cmd_verify(int seed_count, uint64_t base_seed = 0, const FaultInjection& faults = {},
                         const std::string& filter = "");

}  // namespace trifuse
