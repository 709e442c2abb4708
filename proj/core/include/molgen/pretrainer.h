//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_PRETRAINER_H_
#define MOLGEN_PRETRAINER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "molgen/error.h"
#include "molgen/run_record.h"
#include "molgen/transformer.h"
#include "molgen/vocab.h"

namespace molgen {
struct TrainConfig {
  int batch_size = 32;
  int max_steps = 2000;
  double learning_rate = 3e-4;
  int warmup_steps = 100;
  // "inverse_sqrt" or "constant" after warmup.
  std::string decay = "inverse_sqrt";
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;
  // 0 disables periodic checkpoints.
  int checkpoint_interval = 0;
  int log_interval = 100;
  int validity_samples = 100;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json &j);
};

/// Learning rate used for the update at 0-based `step`: linear warmup to the
/// peak, then inverse-square-root decay (or constant).
double learning_rate_at(const TrainConfig &cfg, std::int64_t step);

Vocabulary build_vocab(const std::vector<std::string> &lines,
                       const std::vector<std::size_t> &line_numbers = {});
Vocabulary build_vocab(const std::filesystem::path &corpus);

bool in_validation_split(const std::string &line, double fraction);

struct Dataset {
  std::vector<TokenSequence> train;
  std::vector<TokenSequence> valid;
  std::size_t dropped_too_long = 0;
  std::size_t unknown_tokens = 0;
};

/// Encodes corpus lines; sequences longer than `max_len` are dropped and
/// counted, and the split is a deterministic hash of the line text.
Dataset prepare_dataset(const std::vector<std::string> &lines,
                        const Vocabulary &vocab, int max_len,
                        double validation_fraction);

/// Indices of the training examples used at `step`.
std::vector<std::size_t> batch_indices(std::size_t n, int batch_size,
                                       std::uint64_t seed, std::int64_t step);

struct PretrainHooks {
  std::function<void(const RunRecord &)> on_record;
  std::function<void(const ModelCheckpoint &)> on_checkpoint;
};

struct PretrainResult {
  ModelCheckpoint checkpoint;
  std::vector<RunRecord> records;
  // Batch loss of every step run, indexed from `first_step`.
  std::vector<double> step_losses;
  std::int64_t first_step = 0;
  double final_train_nll = 0;
  double final_valid_nll = 0;
  std::size_t dropped_too_long = 0;
  std::size_t unknown_tokens = 0;
};

/// Raised when a batch loss is not finite; carries the parameters from before
/// the failing step.
class DivergedLossError: public Error {
public:
  DivergedLossError(std::int64_t step, ModelCheckpoint last_good);
  const ModelCheckpoint &last_good() const { return last_good_; }

private:
  ModelCheckpoint last_good_;
};

/// Maximum-likelihood training of the prior. With `resume`, training
/// continues from its parameters, optimizer state and step counter.
PretrainResult pretrain(const std::vector<std::string> &corpus,
                        const Vocabulary &vocab, const ModelConfig &model,
                        const TrainConfig &cfg,
                        const ModelCheckpoint *resume = nullptr,
                        const PretrainHooks &hooks = {});

double sampled_validity_pct(const ModelCheckpoint &ckpt, int n,
                            std::uint64_t seed);
}  // namespace molgen

#endif  // MOLGEN_PRETRAINER_H_
