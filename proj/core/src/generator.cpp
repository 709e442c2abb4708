//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/generator.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "molgen/error.h"
#include "molgen/rng.h"

namespace molgen {
namespace {
double log_softmax_at(std::span<const double> logits, int idx) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x: logits)
    mx = std::max(mx, x);
  double total = 0;
  for (double x: logits)
    total += std::exp(x - mx);
  return logits[idx] - (mx + std::log(total));
}

SampleBatch run_sampler(const ModelCheckpoint &ckpt, const SampleConfig &cfg,
                        bool with_logprob) {
  cfg.validate(ckpt.config);
  CounterRng rng(cfg.seed);
  SampleBatch out;
  for (int i = 0; i < cfg.batch_size; ++i) {
    IncrementalDecoder decoder(ckpt.params, ckpt.config);
    TokenSequence seq;
    seq.ids.push_back(kGoId);
    double logprob = 0;
    bool done = false;
    for (int step = 0; static_cast<int>(seq.ids.size()) < cfg.max_len; ++step) {
      std::vector<double> logits = decoder.step(seq.ids.back());
      const int tok =
          cfg.greedy
              ? argmax(logits)
              : sample_categorical(logits, cfg.temperature,
                                   rng.uniform(static_cast<std::uint64_t>(i),
                                               static_cast<std::uint64_t>(step)));
      if (with_logprob)
        logprob += log_softmax_at(logits, tok);
      seq.ids.push_back(tok);
      if (tok == kEosId) {
        done = true;
        break;
      }
    }
    seq.framed = done;
    out.decoded.push_back(ckpt.vocab.decode(seq.ids));
    out.sequences.push_back(std::move(seq));
    out.terminated.push_back(done);
    if (with_logprob)
      out.logprobs.push_back(logprob);
  }
  return out;
}
}  // namespace

void SampleConfig::validate(const ModelConfig &model) const {
  if (!(temperature > 0))
    throw Error(ErrorCode::kBadParameters, "temperature must be > 0");
  if (max_len < 2 || max_len > model.max_len)
    throw Error(ErrorCode::kBadParameters,
                "sample max_len must be in [2, " + std::to_string(model.max_len)
                    + "]");
  if (batch_size < 0)
    throw Error(ErrorCode::kBadParameters, "batch_size must be >= 0");
}

int argmax(std::span<const double> logits) {
  return static_cast<int>(std::max_element(logits.begin(), logits.end())
                          - logits.begin());
}

int sample_categorical(std::span<const double> logits, double temperature,
                       double u) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x: logits)
    mx = std::max(mx, x / temperature);
  std::vector<double> w(logits.size());
  double total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    w[i] = std::exp(logits[i] / temperature - mx);
    total += w[i];
  }
  const double target = u * total;
  double acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (target < acc)
      return static_cast<int>(i);
  }
  // Rounding left target at the very top; take the last nonzero bucket.
  for (std::size_t i = w.size(); i-- > 0;)
    if (w[i] > 0)
      return static_cast<int>(i);
  return 0;
}

SampleBatch sample(const ModelCheckpoint &ckpt, const SampleConfig &cfg) {
  return run_sampler(ckpt, cfg, false);
}

SampleBatch sample_with_logprob(const ModelCheckpoint &ckpt,
                                const SampleConfig &cfg) {
  return run_sampler(ckpt, cfg, true);
}
}  // namespace molgen
