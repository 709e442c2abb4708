//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/pretrainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "molgen/generator.h"
#include "molgen/hash.h"
#include "molgen/rng.h"
#include "molgen/smiles.h"

namespace molgen {
namespace {
constexpr std::size_t kMaxEvalSequences = 1000;
constexpr std::uint64_t kSplitModulus = 1'000'000;

double mean_nll(const ModelParams &params, const ModelConfig &config,
                const std::vector<TokenSequence> &seqs) {
  if (seqs.empty())
    return 0;
  const std::size_t n = std::min(seqs.size(), kMaxEvalSequences);
  constexpr std::size_t kChunk = 64;
  double total = 0;
  for (std::size_t i = 0; i < n; i += kChunk) {
    std::vector<TokenSequence> chunk(seqs.begin() + i,
                                     seqs.begin() + std::min(n, i + kChunk));
    total += sequence_nll(params, config, chunk)
             * static_cast<double>(chunk.size());
  }
  return total / static_cast<double>(n);
}
}  // namespace

void TrainConfig::validate() const {
  auto bad = [](const std::string &msg) {
    throw Error(ErrorCode::kBadParameters, "train config: " + msg);
  };
  if (batch_size <= 0)
    bad("batch_size must be positive");
  if (max_steps < 0)
    bad("max_steps must be >= 0");
  if (learning_rate < 0)
    bad("learning_rate must be >= 0");
  if (warmup_steps < 0)
    bad("warmup_steps must be >= 0");
  if (decay != "inverse_sqrt" && decay != "constant")
    bad("decay must be inverse_sqrt or constant");
  if (validation_fraction < 0 || validation_fraction > 0.5)
    bad("validation_fraction must be in [0, 0.5]");
  if (checkpoint_interval < 0 || log_interval <= 0 || validity_samples < 0)
    bad("intervals must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return { { "batch_size", batch_size },
           { "max_steps", max_steps },
           { "learning_rate", learning_rate },
           { "warmup_steps", warmup_steps },
           { "decay", decay },
           { "seed", seed },
           { "validation_fraction", validation_fraction },
           { "checkpoint_interval", checkpoint_interval },
           { "log_interval", log_interval },
           { "validity_samples", validity_samples } };
}

TrainConfig TrainConfig::from_json(const nlohmann::json &j) {
  TrainConfig c;
  try {
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
    c.decay = j.value("decay", c.decay);
    c.seed = j.value("seed", c.seed);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.checkpoint_interval = j.value("checkpoint_interval", c.checkpoint_interval);
    c.log_interval = j.value("log_interval", c.log_interval);
    c.validity_samples = j.value("validity_samples", c.validity_samples);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kBadParameters,
                std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

double learning_rate_at(const TrainConfig &cfg, std::int64_t step) {
  const double s = static_cast<double>(step + 1);
  const double w = static_cast<double>(cfg.warmup_steps);
  if (cfg.warmup_steps > 0 && s < w)
    return cfg.learning_rate * s / w;
  if (cfg.decay == "inverse_sqrt" && cfg.warmup_steps > 0)
    return cfg.learning_rate * std::sqrt(w / s);
  return cfg.learning_rate;
}

Vocabulary build_vocab(const std::vector<std::string> &lines,
                       const std::vector<std::size_t> &line_numbers) {
  std::vector<std::string> observed;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      for (Token &tok: tokenize(lines[i]))
        observed.push_back(std::move(tok.text));
    } catch (const Error &e) {
      const std::size_t lineno =
          i < line_numbers.size() ? line_numbers[i] : i + 1;
      throw Error(ErrorCode::kTokenizeError,
                  "line " + std::to_string(lineno) + ": " + e.what(),
                  static_cast<std::int64_t>(lineno));
    }
  }
  return Vocabulary::from_tokens(std::move(observed));
}

Vocabulary build_vocab(const std::filesystem::path &corpus) {
  std::vector<std::size_t> line_numbers;
  std::vector<std::string> lines = read_corpus(corpus, &line_numbers);
  return build_vocab(lines, line_numbers);
}

bool in_validation_split(const std::string &line, double fraction) {
  const auto threshold = static_cast<std::uint64_t>(
      std::llround(fraction * static_cast<double>(kSplitModulus)));
  return fnv1a64(line) % kSplitModulus < threshold;
}

Dataset prepare_dataset(const std::vector<std::string> &lines,
                        const Vocabulary &vocab, int max_len,
                        double validation_fraction) {
  Dataset ds;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    TokenSequence seq;
    try {
      seq = vocab.encode(lines[i], &ds.unknown_tokens);
    } catch (const Error &e) {
      throw Error(ErrorCode::kTokenizeError,
                  "line " + std::to_string(i + 1) + ": " + e.what(),
                  static_cast<std::int64_t>(i + 1));
    }
    if (seq.size() > static_cast<std::size_t>(max_len)) {
      ++ds.dropped_too_long;
      continue;
    }
    if (in_validation_split(lines[i], validation_fraction))
      ds.valid.push_back(std::move(seq));
    else
      ds.train.push_back(std::move(seq));
  }
  return ds;
}

std::vector<std::size_t> batch_indices(std::size_t n, int batch_size,
                                       std::uint64_t seed, std::int64_t step) {
  std::vector<std::size_t> out;
  std::int64_t cached_epoch = -1;
  std::vector<std::size_t> perm(n);
  for (int i = 0; i < batch_size; ++i) {
    const auto p = static_cast<std::uint64_t>(step) * batch_size + i;
    const auto epoch = static_cast<std::int64_t>(p / n);
    if (epoch != cached_epoch) {
      std::iota(perm.begin(), perm.end(), std::size_t { 0 });
      std::mt19937_64 gen(derive_seed(seed, static_cast<std::uint64_t>(epoch)));
      std::shuffle(perm.begin(), perm.end(), gen);
      cached_epoch = epoch;
    }
    out.push_back(perm[p % n]);
  }
  return out;
}

DivergedLossError::DivergedLossError(std::int64_t step,
                                     ModelCheckpoint last_good)
    : Error(ErrorCode::kDivergedLoss,
            "non-finite loss at step " + std::to_string(step), step),
      last_good_(std::move(last_good)) { }

double sampled_validity_pct(const ModelCheckpoint &ckpt, int n,
                            std::uint64_t seed) {
  if (n <= 0)
    return 0;
  SampleConfig sc;
  sc.batch_size = n;
  sc.max_len = ckpt.config.max_len;
  sc.seed = seed;
  SampleBatch batch = sample(ckpt, sc);
  int valid = 0;
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (batch.terminated[i] && is_valid(batch.decoded[i]))
      ++valid;
  return 100.0 * valid / n;
}

PretrainResult pretrain(const std::vector<std::string> &corpus,
                        const Vocabulary &vocab, const ModelConfig &model,
                        const TrainConfig &cfg, const ModelCheckpoint *resume,
                        const PretrainHooks &hooks) {
  cfg.validate();
  model.validate();
  if (static_cast<int>(vocab.size()) != model.vocab_size)
    throw Error(ErrorCode::kBadParameters,
                "model vocab_size does not match the vocabulary");

  Dataset ds = prepare_dataset(corpus, vocab, model.max_len,
                               cfg.validation_fraction);
  if (ds.train.empty())
    throw Error(ErrorCode::kEmptyCorpus, "no trainable sequences in corpus");

  PretrainResult result;
  result.dropped_too_long = ds.dropped_too_long;
  result.unknown_tokens = ds.unknown_tokens;

  ModelCheckpoint &ckpt = result.checkpoint;
  if (resume != nullptr) {
    if (!(resume->config == model) || !(resume->vocab == vocab))
      throw Error(ErrorCode::kBadParameters,
                  "resume checkpoint does not match model config/vocabulary");
    ckpt = *resume;
  } else {
    ckpt.config = model;
    ckpt.vocab = vocab;
    ckpt.params = ModelParams::init(model, derive_seed(cfg.seed, 0x1417));
    ckpt.step = 0;
  }
  if (!ckpt.optimizer)
    ckpt.optimizer = AdamState {};
  AdamState &adam = *ckpt.optimizer;
  result.first_step = ckpt.step;

  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&]() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  };

  auto emit = [&](std::int64_t step, double train_nll) {
    const double validity = sampled_validity_pct(
        ckpt, cfg.validity_samples,
        derive_seed(cfg.seed, 0x5a3b0000ULL + static_cast<std::uint64_t>(step)));
    const double wall = elapsed_ms();
    RunRecord train { step, "train", train_nll, validity, wall };
    result.records.push_back(train);
    if (hooks.on_record)
      hooks.on_record(train);
    if (!ds.valid.empty()) {
      RunRecord valid { step, "valid", mean_nll(ckpt.params, model, ds.valid),
                        validity, wall };
      result.records.push_back(valid);
      if (hooks.on_record)
        hooks.on_record(valid);
    }
  };

  auto make_batch = [&](std::int64_t step) {
    std::vector<TokenSequence> batch;
    for (std::size_t idx:
         batch_indices(ds.train.size(), cfg.batch_size, cfg.seed, step))
      batch.push_back(ds.train[idx]);
    return batch;
  };

  if (ckpt.step == 0)
    emit(0, sequence_nll(ckpt.params, model, make_batch(0)));

  // Parameters whose batch loss was last observed finite.
  ModelCheckpoint last_good = ckpt;
  double interval_sum = 0;
  int interval_count = 0;
  while (ckpt.step < cfg.max_steps) {
    const std::int64_t step = ckpt.step;
    ForwardOptions opts;
    opts.training = true;
    opts.dropout_seed = derive_seed(cfg.seed, 0xd0d0000ULL + step);
    LossAndGrad lg = nll_loss_and_grad(ckpt.params, model, make_batch(step), opts);
    if (!std::isfinite(lg.loss))
      throw DivergedLossError(step, std::move(last_good));
    result.step_losses.push_back(lg.loss);
    interval_sum += lg.loss;
    ++interval_count;

    last_good = ckpt;
    adam.learning_rate = learning_rate_at(cfg, step);
    adam_step(ckpt.params.tensors, lg.grads, adam);
    ckpt.step = step + 1;

    if (ckpt.step % cfg.log_interval == 0 || ckpt.step == cfg.max_steps) {
      emit(ckpt.step, interval_sum / interval_count);
      interval_sum = 0;
      interval_count = 0;
    }
    if (cfg.checkpoint_interval > 0 && ckpt.step % cfg.checkpoint_interval == 0
        && hooks.on_checkpoint)
      hooks.on_checkpoint(ckpt);
  }

  result.final_train_nll = mean_nll(ckpt.params, model, ds.train);
  result.final_valid_nll = mean_nll(ckpt.params, model, ds.valid);
  return result;
}
}  // namespace molgen
