// Copyright 2026 The sbx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Seeded random profiles and regexes for property tests and benchmarks.

#ifndef SBX_GENERATOR_HPP_
#define SBX_GENERATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "sbx/model.hpp"
#include "sbx/regex.hpp"
#include "sbx/vocab.hpp"

namespace sbx {

enum class Scale : std::uint8_t { small, container };

struct GeneratorLimits {
  std::size_t max_ops = 4;        // operations given rules
  std::size_t max_rules = 3;      // rules per operation
  std::size_t max_depth = 3;      // 1 = atoms only
  std::size_t max_children = 3;   // per require-all / require-any
  std::size_t max_keys = 4;       // distinct filter keys per profile
  std::size_t max_regex_len = 6;  // atoms in a random regex
  double regex_ratio = 0.25;      // share of path atoms that are regexes
  double allow_default = 0.2;     // chance of an allow default
  Scale scale = Scale::small;
};

struct ProfileGenerator {
  std::uint64_t seed = 1;
  GeneratorLimits limits;

  static ProfileGenerator small(std::uint64_t seed);
  // Targets about 1964 non-terminal records, 6.6% of them regex filters,
  // against the 125-operation vocabulary.
  static ProfileGenerator container_scale(std::uint64_t seed);
};

// Deterministic per seed; the result validates against `vocab`. Container
// scale compiles and resizes until the node count is within 5% of the target.
Profile generate_profile(const ProfileGenerator& gen, const Vocabulary& vocab);

inline constexpr std::size_t kContainerNodeTarget = 1964;

// Random tree over `alphabet` using every supported construct. At most
// `max_atoms` leaves; the root is never empty.
RegexAst random_regex(std::mt19937_64& rng, std::span<const std::uint8_t> alphabet,
                      std::size_t max_atoms);

}  // namespace sbx

#endif  // SBX_GENERATOR_HPP_
