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

#include "sbx/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "sbx/blob.hpp"

namespace sbx {

ProfileGenerator ProfileGenerator::small(std::uint64_t seed) { return {seed, GeneratorLimits{}}; }

ProfileGenerator ProfileGenerator::container_scale(std::uint64_t seed) {
  GeneratorLimits l;
  l.max_ops = 124;
  l.max_rules = 6;
  l.max_depth = 3;
  l.max_children = 3;
  l.max_keys = 16;
  l.max_regex_len = 8;
  l.regex_ratio = 0.07;
  l.allow_default = 0.0;
  l.scale = Scale::container;
  return {seed, l};
}

namespace {

using Rng = std::mt19937_64;

std::size_t pick(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}
bool chance(Rng& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

RegexAst regex_leaf(Rng& rng, std::span<const std::uint8_t> alphabet) {
  const std::size_t k = pick(rng, 10);
  if (k < 6) return RegexAst::ch(alphabet[pick(rng, alphabet.size())]);
  if (k < 7) return RegexAst::any_char();
  std::vector<ByteRange> ranges;
  const std::size_t n = 1 + pick(rng, 2);
  for (std::size_t i = 0; i < n; ++i) {
    auto a = alphabet[pick(rng, alphabet.size())], b = alphabet[pick(rng, alphabet.size())];
    ranges.push_back({std::min(a, b), std::max(a, b)});
  }
  return RegexAst::char_class(chance(rng, 0.25), std::move(ranges));
}

RegexAst regex_tree(Rng& rng, std::span<const std::uint8_t> alphabet, std::size_t budget,
                    int depth) {
  if (budget <= 1 || depth >= 4 || chance(rng, 0.3)) return regex_leaf(rng, alphabet);
  switch (pick(rng, 5)) {
    case 0:
    case 1: {
      const std::size_t n = 2 + pick(rng, std::min<std::size_t>(budget - 1, 3));
      std::vector<RegexAst> parts;
      for (std::size_t i = 0; i < n; ++i)
        parts.push_back(regex_tree(rng, alphabet, std::max<std::size_t>(1, budget / n), depth + 1));
      return pick(rng, 3) == 0 ? RegexAst::alternate(std::move(parts))
                               : RegexAst::concat(std::move(parts));
    }
    case 2: return RegexAst::star(regex_tree(rng, alphabet, budget - 1, depth + 1));
    case 3: return RegexAst::plus(regex_tree(rng, alphabet, budget - 1, depth + 1));
    default: return RegexAst::optional(regex_tree(rng, alphabet, budget - 1, depth + 1));
  }
}

}  // namespace

RegexAst random_regex(std::mt19937_64& rng, std::span<const std::uint8_t> alphabet,
                      std::size_t max_atoms) {
  RegexAst body = regex_tree(rng, alphabet, std::max<std::size_t>(1, max_atoms), 0);
  std::vector<RegexAst> parts;
  if (chance(rng, 0.3)) parts.push_back(RegexAst::anchor_start());
  parts.push_back(std::move(body));
  if (chance(rng, 0.2)) parts.push_back(RegexAst::anchor_end());
  return parts.size() == 1 ? std::move(parts.front()) : RegexAst::concat(std::move(parts));
}

namespace {

const char* const kWords[] = {"Library", "Caches",   "Documents", "tmp",     "Preferences",
                              "Media",   "Cookies",  "Logs",      "Mobile",  "Containers",
                              "Data",    "Shared",   "AppGroup",  "Keyboard", "Photos"};

std::string random_path(Rng& rng) {
  std::string p = "/private/var/mobile";
  const std::size_t n = 1 + pick(rng, 3);
  for (std::size_t i = 0; i < n; ++i) p += std::string("/") + kWords[pick(rng, std::size(kWords))];
  if (chance(rng, 0.5)) p += "/" + std::to_string(pick(rng, 1000));
  return p;
}

std::string random_container_regex(Rng& rng) {
  static const char* const kTails[] = {"[^/]+$", "(/.*)?$", "[0-9]+", ".*", "", "/[^/]+/[a-z]+$"};
  std::string p = "^" + random_path(rng) + "/";
  return p + kTails[pick(rng, std::size(kTails))];
}

// One profile's pool of atoms.
class AtomPool {
 public:
  AtomPool(Rng& rng, const Vocabulary& vocab, const GeneratorLimits& limits)
      : limits_(limits) {
    std::vector<const FilterKey*> keys;
    for (const auto& k : vocab.filters.keys()) keys.push_back(&k);
    std::shuffle(keys.begin(), keys.end(), rng);
    keys.resize(std::min(keys.size(), limits.max_keys));
    std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return a->code < b->code; });
    const bool small = limits.scale == Scale::small;
    static const std::uint8_t kAlphabet[] = {'a', 'b', '/'};
    for (const FilterKey* k : keys) {
      std::vector<FilterValue> values;
      const std::size_t n = small ? 2 : 0;
      switch (k->kind) {
        case ValueKind::regex_index:
          regex_key_ = k;
          for (std::size_t i = 0; i < n; ++i)
            values.push_back(to_pattern(random_regex(rng, kAlphabet, limits.max_regex_len)));
          break;
        case ValueKind::literal_string: {
          static const char* const kSmall[] = {"/a", "/bin/ls", "/b/a", "com.apple.x", "com.apple.y"};
          for (std::size_t i = 0; i < n; ++i) values.push_back(std::string(kSmall[pick(rng, 5)]));
          break;
        }
        case ValueKind::enum_named:
          for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i)
            values.push_back(Symbol{k->named_values[pick(rng, k->named_values.size())].first});
          break;
        case ValueKind::numeric:
          for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i)
            values.push_back(std::int64_t{small ? (pick(rng, 2) ? 420 : 493)
                                                : static_cast<std::int64_t>(pick(rng, 65536))});
          break;
        case ValueKind::network_endpoint: {
          static const Endpoint kEndpoints[] = {{"tcp", "localhost:22"}, {"udp", "*:53"},
                                                {"tcp", "*:443"}, {"tcp", "*:25"}};
          for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i)
            values.push_back(kEndpoints[pick(rng, 4)]);
          break;
        }
      }
      if (k->kind != ValueKind::regex_index) entries_.push_back({k, std::move(values)});
      else regex_values_ = std::move(values);
    }
  }

  FilterExpr atom(Rng& rng) {
    const bool container = limits_.scale == Scale::container;
    if (regex_key_ && (entries_.empty() || chance(rng, limits_.regex_ratio))) {
      if (container) return FilterExpr::atom(regex_key_->name, random_container_regex(rng));
      return FilterExpr::atom(regex_key_->name, regex_values_[pick(rng, regex_values_.size())]);
    }
    auto& [key, values] = entries_[pick(rng, entries_.size())];
    if (container && key->kind == ValueKind::literal_string)
      return FilterExpr::atom(key->name, key->binding == "path" ? random_path(rng)
                                                                : "com.apple." + std::string(kWords[pick(rng, std::size(kWords))]));
    return FilterExpr::atom(key->name, values[pick(rng, values.size())]);
  }

  bool empty() const { return !regex_key_ && entries_.empty(); }

 private:
  const GeneratorLimits& limits_;
  const FilterKey* regex_key_ = nullptr;
  std::vector<FilterValue> regex_values_;
  std::vector<std::pair<const FilterKey*, std::vector<FilterValue>>> entries_;
};

FilterExpr random_filter(Rng& rng, AtomPool& pool, const GeneratorLimits& limits,
                         std::size_t depth) {
  if (depth <= 1 || chance(rng, 0.45)) return pool.atom(rng);
  switch (pick(rng, 3)) {
    case 0: return FilterExpr::negate(random_filter(rng, pool, limits, depth - 1));
    default: {
      const std::size_t n = 2 + pick(rng, std::max<std::size_t>(1, limits.max_children - 1));
      std::vector<FilterExpr> children;
      for (std::size_t i = 0; i < n; ++i)
        children.push_back(random_filter(rng, pool, limits, depth - 1));
      return pick(rng, 2) ? FilterExpr::all(std::move(children))
                          : FilterExpr::any(std::move(children));
    }
  }
}

Profile small_profile(const ProfileGenerator& gen, const Vocabulary& vocab) {
  Rng rng(gen.seed);
  const GeneratorLimits& l = gen.limits;
  Profile p;
  p.name = "random-" + std::to_string(gen.seed);
  p.set_default(chance(rng, l.allow_default) ? Decision::allow : Decision::deny);
  AtomPool pool(rng, vocab, l);
  if (pool.empty() || vocab.operations.size() < 2) return p;
  const std::size_t n_ops = 1 + pick(rng, std::min(l.max_ops, vocab.operations.size() - 1));
  for (std::size_t i = 0; i < n_ops; ++i) {
    const std::string& op = vocab.operations.name(1 + pick(rng, vocab.operations.size() - 1));
    auto& rules = p.rules[op];
    const std::size_t n_rules = 1 + pick(rng, l.max_rules);
    for (std::size_t r = 0; r < n_rules; ++r) {
      const Decision d = chance(rng, 0.5) ? Decision::allow : Decision::deny;
      if (r + 1 == n_rules && chance(rng, 0.1)) rules.push_back({d, std::nullopt});
      else rules.push_back({d, random_filter(rng, pool, l, l.max_depth)});
    }
  }
  return p;
}

Profile container_profile(const ProfileGenerator& gen, const Vocabulary& vocab,
                          std::size_t atom_target) {
  Rng rng(gen.seed);
  const GeneratorLimits& l = gen.limits;
  Profile p;
  p.name = "container-" + std::to_string(gen.seed);
  p.set_default(Decision::deny);
  AtomPool pool(rng, vocab, l);
  std::size_t atoms = 0;
  while (atoms < atom_target) {
    const std::string& op = vocab.operations.name(1 + pick(rng, vocab.operations.size() - 1));
    auto& rules = p.rules[op];
    const Decision d = chance(rng, 0.75) ? Decision::allow : Decision::deny;
    FilterExpr f = random_filter(rng, pool, l, l.max_depth);
    atoms += f.atom_count();
    rules.push_back({d, std::move(f)});
  }
  return p;
}

std::size_t filter_nodes(const Profile& p, const Vocabulary& vocab) {
  SectionSizes sizes;
  compile_profile(p, vocab, {}, &sizes);
  return sizes.nodes / kRecordSize - 2;
}

}  // namespace

Profile generate_profile(const ProfileGenerator& gen, const Vocabulary& vocab) {
  if (gen.limits.scale == Scale::small) return small_profile(gen, vocab);
  std::size_t target = kContainerNodeTarget;
  Profile best = container_profile(gen, vocab, target);
  for (int round = 0; round < 8; ++round) {
    const std::size_t nodes = filter_nodes(best, vocab);
    const double ratio = static_cast<double>(nodes) / kContainerNodeTarget;
    if (std::abs(ratio - 1.0) <= 0.05) break;
    target = static_cast<std::size_t>(std::max(1.0, std::round(static_cast<double>(target) / ratio)));
    best = container_profile(gen, vocab, target);
  }
  return best;
}

}  // namespace sbx
