//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_GENERATOR_H_
#define MOLGEN_GENERATOR_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "molgen/transformer.h"
#include "molgen/vocab.h"

namespace molgen {
struct SampleConfig {
  double temperature = 1.0;
  // Maximum framed length (GO + generated tokens, EOS included).
  int max_len = 128;
  int batch_size = 1;
  std::uint64_t seed = 0;
  // Argmax decoding; the temperature -> 0 limit.
  bool greedy = false;

  void validate(const ModelConfig &model) const;
};

struct SampleBatch {
  std::vector<TokenSequence> sequences;
  std::vector<bool> terminated;
  std::vector<std::string> decoded;
  // Log-likelihood under the (untempered) model; filled by
  // sample_with_logprob only.
  std::vector<double> logprobs;

  std::size_t size() const { return sequences.size(); }
};

/// Index drawn from softmax(logits / temperature) by inverse CDF at uniform
/// `u` in [0, 1).
int sample_categorical(std::span<const double> logits, double temperature,
                       double u);
int argmax(std::span<const double> logits);

/// Autoregressive sampling from GO. Sequence i's draws come from the
/// counter stream (seed, i, step), so results do not depend on batch size.
SampleBatch sample(const ModelCheckpoint &ckpt, const SampleConfig &cfg);
SampleBatch sample_with_logprob(const ModelCheckpoint &ckpt,
                                const SampleConfig &cfg);
}  // namespace molgen

#endif  // MOLGEN_GENERATOR_H_
