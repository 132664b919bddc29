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

// Round-trip and fuzz drivers shared by the tests, the acceptance binary
// and the benchmarks.

#ifndef SBX_HARNESS_HPP_
#define SBX_HARNESS_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sbx/blob.hpp"
#include "sbx/error.hpp"
#include "sbx/decompile.hpp"
#include "sbx/evaluator.hpp"
#include "sbx/model.hpp"
#include "sbx/vocab.hpp"

namespace sbx {

struct RoundTripCase {
  std::string name;
  Profile profile;
};

// compile -> decompile -> reparse -> recompile -> equivalence with the source.
struct CaseResult {
  std::string name;
  std::string phase;  // last phase reached
  bool pass = false;
  std::string witness;  // disagreement or error text
  bool exhaustive = false;  // the equivalence check enumerated its universe
  std::size_t contexts = 0;
};

struct SuiteSummary {
  std::size_t cases = 0;
  std::size_t passed = 0;
  std::vector<CaseResult> results;  // corpus order
  bool all_passed() const noexcept { return passed == cases; }
};

CaseResult run_roundtrip_case(const RoundTripCase& c, const Vocabulary& vocab,
                              const EquivalenceOptions& eq = {});

// Cases run in parallel; results keep corpus order. When `report` is not
// empty one tab-separated line per case is written: case, phase,
// pass|fail, witness.
SuiteSummary run_roundtrip_suite(const std::vector<RoundTripCase>& corpus,
                                 const Vocabulary& vocab,
                                 const std::filesystem::path& report = {},
                                 const EquivalenceOptions& eq = {});

// Every .sb under data/fixtures, sorted by name.
std::vector<RoundTripCase> fixture_corpus(const Vocabulary& vocab,
                                          const std::filesystem::path& dir = {});

// Small generated profiles for seeds first .. first + count - 1.
std::vector<RoundTripCase> random_corpus(std::uint64_t first, std::size_t count,
                                         const Vocabulary& vocab);

// One to four random byte edits: flips, overwrites, truncation, extension,
// u16 field replacement at a record boundary.
Bytes mutate_blob(const Bytes& blob, std::mt19937_64& rng);

struct FuzzSummary {
  std::size_t cases = 0;
  std::size_t rejected = 0;  // structured sbx::Error
  std::size_t accepted = 0;  // decoded and decompiled cleanly
  std::map<ErrorKind, std::size_t> kinds;
  std::vector<std::string> failures;  // unstructured errors or overruns
  std::chrono::duration<double> slowest{0};
  bool ok() const noexcept { return failures.empty(); }
};

// Decode (or unpack), decompile every view and walk every operation of each
// mutated blob. Cases run in parallel; a case slower than `per_case_limit`
// is a failure, and a watchdog aborts the process if one never returns.
FuzzSummary run_fuzz_suite(const std::vector<Bytes>& seeds, std::size_t count,
                           std::uint64_t seed, const Vocabulary& vocab,
                           std::chrono::duration<double> per_case_limit = std::chrono::seconds(5));

}  // namespace sbx

#endif  // SBX_HARNESS_HPP_
