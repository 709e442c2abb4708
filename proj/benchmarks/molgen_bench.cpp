//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "molgen/evaluator.h"
#include "molgen/generator.h"
#include "molgen/smiles.h"
#include "molgen/transformer.h"

namespace molgen {
namespace {
const std::vector<std::string> kMolecules {
  "CC(=O)Oc1ccccc1C(=O)O",
  "CN1CCC[C@H]1c1cccnc1",
  "c1ccc2c(c1)[nH]c1ccccc12",
  "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
  "O=C(O)CCCCCCCCC(=O)O",
};

ModelCheckpoint bench_model(int d_model, int n_layers) {
  ModelCheckpoint ckpt;
  ckpt.vocab = Vocabulary::from_tokens({ "C", "N", "O", "c", "n", "1", "(", ")",
                                         "=" });
  ModelConfig &c = ckpt.config;
  c.vocab_size = static_cast<int>(ckpt.vocab.size());
  c.d_model = d_model;
  c.n_layers = n_layers;
  c.n_heads = 4;
  c.d_ff = 4 * d_model;
  c.max_len = 64;
  c.dropout_rate = 0;
  ckpt.params = ModelParams::init(c, 1);
  return ckpt;
}

std::vector<TokenSequence> bench_batch(const ModelConfig &c, int n, int len) {
  std::mt19937_64 rng(7);
  std::vector<TokenSequence> batch(n);
  for (TokenSequence &s: batch) {
    s.ids.push_back(kGoId);
    for (int i = 0; i < len - 2; ++i)
      s.ids.push_back(kNumReserved
                      + static_cast<int>(rng() % (c.vocab_size - kNumReserved)));
    s.ids.push_back(kEosId);
    s.framed = true;
  }
  return batch;
}

void BM_Parse(benchmark::State &state) {
  for (auto _: state)
    for (const std::string &s: kMolecules)
      benchmark::DoNotOptimize(parse(s));
  state.SetItemsProcessed(state.iterations()
                          * static_cast<std::int64_t>(kMolecules.size()));
}
BENCHMARK(BM_Parse);

void BM_Fingerprint(benchmark::State &state) {
  std::vector<MolGraph> mols;
  for (const std::string &s: kMolecules)
    mols.push_back(parse(s));
  for (auto _: state)
    for (const MolGraph &m: mols)
      benchmark::DoNotOptimize(fingerprint(m));
}
BENCHMARK(BM_Fingerprint);

void BM_Diversity(benchmark::State &state) {
  std::vector<std::string> mols;
  for (int i = 0; i < state.range(0); ++i)
    mols.push_back(kMolecules[i % kMolecules.size()] + std::string(i / 5, 'C'));
  for (auto _: state)
    benchmark::DoNotOptimize(internal_diversity(mols));
}
BENCHMARK(BM_Diversity)->Arg(20)->Arg(100);

void BM_ForwardBackward(benchmark::State &state) {
  const ModelCheckpoint ckpt = bench_model(static_cast<int>(state.range(0)), 2);
  const std::vector<TokenSequence> batch = bench_batch(ckpt.config, 16, 32);
  for (auto _: state)
    benchmark::DoNotOptimize(nll_loss_and_grad(ckpt.params, ckpt.config, batch));
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Sample(benchmark::State &state) {
  const ModelCheckpoint ckpt = bench_model(static_cast<int>(state.range(0)), 2);
  SampleConfig sc;
  sc.batch_size = 16;
  sc.max_len = ckpt.config.max_len;
  for (auto _: state) {
    benchmark::DoNotOptimize(sample(ckpt, sc));
    ++sc.seed;
  }
}
BENCHMARK(BM_Sample)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_AucTopK(benchmark::State &state) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> scores(10000);
  for (double &s: scores)
    s = u(rng);
  for (auto _: state)
    benchmark::DoNotOptimize(auc_top_k(scores, static_cast<int>(state.range(0)),
                                       10000));
}
BENCHMARK(BM_AucTopK)->Arg(1)->Arg(10)->Arg(100);
}  // namespace
}  // namespace molgen

BENCHMARK_MAIN();
