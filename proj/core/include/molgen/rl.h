//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_RL_H_
#define MOLGEN_RL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "molgen/ndarray.h"
#include "molgen/oracle.h"
#include "molgen/transformer.h"
#include "molgen/vocab.h"

namespace molgen {
struct Episode {
  TokenSequence sequence;
  std::string smiles;
  std::string key;  // canonical key; empty when the SMILES does not parse
  double agent_logprob = 0;
  double prior_logprob = 0;
  double score = 0;
  bool terminated = false;
};

struct RLConfig {
  double sigma = 60;
  int batch_size = 64;
  int max_steps = 1000;
  double learning_rate = 5e-4;
  int replay_capacity = 100;
  int replay_sample = 4;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  // Framed sampling length; 0 uses the model's max_len.
  int max_len = 0;
  std::int64_t budget = 10000;

  void validate() const;
  nlohmann::json to_json() const;
  static RLConfig from_json(const nlohmann::json &j);
};

/// Highest-scoring episodes seen so far, unique by canonical key.
class ReplayBuffer {
public:
  explicit ReplayBuffer(std::size_t capacity): capacity_(capacity) { }

  // Ignores episodes without a key; keeps the best `capacity` entries.
  void add(const Episode &ep);
  std::vector<Episode> top(std::size_t n) const;
  const std::vector<Episode> &entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }

private:
  std::size_t capacity_;
  std::vector<Episode> entries_;
};

double episode_loss(const Episode &ep, double sigma);

struct RLLossAndGrad {
  double loss = 0;
  std::vector<double> agent_logprobs;
  std::vector<NDArray> grads;
};

/// Mean episode loss over `episodes` and its gradient with respect to the
/// agent parameters. Uses the stored prior log-probabilities and scores.
RLLossAndGrad rl_loss_and_grad(const ModelParams &agent,
                               const ModelConfig &config,
                               const std::vector<Episode> &episodes,
                               double sigma);

/// Fills `prior_logprob` of every episode.
void assign_prior_logprobs(const ModelCheckpoint &prior,
                           std::vector<Episode> &episodes);

struct RLRecord {
  std::int64_t step = 0;
  double mean_score = 0;
  double valid_fraction = 0;
  double top1 = 0;
  double top10 = 0;
  double top100 = 0;
  double loss = 0;
  std::int64_t oracle_calls = 0;
  double wall_ms = 0;

  nlohmann::json to_json() const;
};

enum class StopReason {
  kMaxSteps,
  kBudgetExhausted,
  kCallback,
};

std::string_view stop_reason_name(StopReason reason);

struct FinetuneHooks {
  // Called after each update; returning false stops the run.
  std::function<bool(const RLRecord &)> on_step;
  // Called with the batch and its gradient before each update.
  std::function<void(std::int64_t step, const std::vector<Episode> &,
                     const RLLossAndGrad &)>
      on_gradient;
};

struct FinetuneResult {
  ModelCheckpoint agent;
  std::vector<RLRecord> records;
  OracleLedger ledger;
  StopReason stop = StopReason::kMaxSteps;
  // Number of batches whose molecules were all scored.
  std::int64_t scoring_rounds = 0;
};

FinetuneResult finetune(const ModelCheckpoint &prior, const OracleSpec &oracle,
                        const RLConfig &cfg, const FinetuneHooks &hooks = {});
}  // namespace molgen

#endif  // MOLGEN_RL_H_
