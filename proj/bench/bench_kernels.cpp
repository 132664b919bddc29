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

// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "sbx/blob.hpp"
#include "sbx/decompile.hpp"
#include "sbx/evaluator.hpp"
#include "sbx/generator.hpp"
#include "sbx/graph.hpp"
#include "sbx/vocab.hpp"

namespace {

using namespace sbx;

struct Container {
  Vocabulary vocab = load_vocabulary(SBX_DATA_DIR "/vocab/ios9.vocab");
  Profile profile = generate_profile(ProfileGenerator::container_scale(1), vocab);
  BinaryProfile blob = decode_blob(compile_profile(profile, vocab));
};

const Container& container() {
  static const Container c;
  return c;
}

EquivalenceOptions samples(benchmark::State& state) {
  EquivalenceOptions eq;
  eq.samples = static_cast<std::size_t>(state.range(0));
  return eq;
}

void BM_EquivalenceParallel(benchmark::State& state) {
  const auto& c = container();
  const auto eq = samples(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(check_equivalence(&c.profile, &c.blob, c.vocab, eq));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EquivalenceParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_EquivalenceSerial(benchmark::State& state) {
  const auto& c = container();
  const auto eq = samples(state);
  for (auto _ : state)
    benchmark::DoNotOptimize(check_equivalence_serial(&c.profile, &c.blob, c.vocab, eq));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EquivalenceSerial)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_EmitRules(benchmark::State& state) {
  const auto& c = container();
  DecompileOptions opts;
  opts.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(emit_rules(c.blob, c.vocab, opts));
}
BENCHMARK(BM_EmitRules)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_RegexPatterns(benchmark::State& state) {
  const auto& c = container();
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(RegexPatterns(c.blob, parallel).size());
}
BENCHMARK(BM_RegexPatterns)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
