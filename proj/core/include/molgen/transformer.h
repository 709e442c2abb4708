//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_TRANSFORMER_H_
#define MOLGEN_TRANSFORMER_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "molgen/autodiff.h"
#include "molgen/ndarray.h"
#include "molgen/optimizer.h"
#include "molgen/vocab.h"

namespace molgen {
struct ModelConfig {
  int vocab_size = 0;
  int max_len = 128;
  int d_model = 256;
  int n_heads = 8;
  int n_layers = 4;
  int d_ff = 1024;
  double dropout_rate = 0.1;

  // Throws kBadParameters.
  void validate() const;
  int head_dim() const { return d_model / n_heads; }

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json &j);
  bool operator==(const ModelConfig &) const = default;
};

// Per-layer tensor slots, in declared order.
enum class LayerParam : int {
  kLn1Gamma,
  kLn1Beta,
  kWq,
  kBq,
  kWk,
  kBk,
  kWv,
  kBv,
  kWo,
  kBo,
  kLn2Gamma,
  kLn2Beta,
  kW1,
  kB1,
  kW2,
  kB2,
  kCount,
};

struct ParamSpec {
  std::string name;
  std::vector<std::size_t> shape;
};

/// Names and shapes of every parameter tensor, in serialization order:
/// token embedding, position embedding, the per-layer blocks, final layer
/// norm, output projection.
std::vector<ParamSpec> parameter_layout(const ModelConfig &config);

struct ModelParams {
  std::vector<NDArray> tensors;

  static ModelParams init(const ModelConfig &config, std::uint64_t seed);
  static ModelParams zeros(const ModelConfig &config);

  static constexpr std::size_t kTokEmb = 0;
  static constexpr std::size_t kPosEmb = 1;
  static std::size_t layer_index(int layer, LayerParam p) {
    return 2 + static_cast<std::size_t>(layer)
                   * static_cast<std::size_t>(LayerParam::kCount)
           + static_cast<std::size_t>(p);
  }
  static std::size_t final_gamma(const ModelConfig &c) {
    return layer_index(c.n_layers, LayerParam::kLn1Gamma);
  }
  static std::size_t final_beta(const ModelConfig &c) {
    return final_gamma(c) + 1;
  }
  static std::size_t out_weight(const ModelConfig &c) {
    return final_gamma(c) + 2;
  }
  static std::size_t out_bias(const ModelConfig &c) {
    return final_gamma(c) + 3;
  }

  std::size_t num_scalars() const;
  bool all_finite() const;
  bool operator==(const ModelParams &) const = default;
};

struct ModelCheckpoint {
  ModelConfig config;
  ModelParams params;
  Vocabulary vocab;
  std::int64_t step = 0;
  // Present for training checkpoints that can be resumed.
  std::optional<AdamState> optimizer;
};

struct ForwardOptions {
  bool training = false;
  std::uint64_t dropout_seed = 0;
};

/// Tape-level forward pass. `inputs` holds one id list per sequence (no
/// padding); returns packed logits with one row per input position, sequences
/// stacked in order. Attention never crosses sequence boundaries.
Var model_logits(Tape &tape, std::span<const Var> params,
                 const ModelConfig &config,
                 const std::vector<std::vector<int>> &inputs,
                 const ForwardOptions &options = {});

/// Per-sequence log-likelihood (sum over predicted positions) as a
/// [batch x 1] node. Each sequence must start with GO; with `require_eos`
/// it must also end with EOS.
Var sequence_logprob_node(Tape &tape, std::span<const Var> params,
                          const ModelConfig &config,
                          const std::vector<TokenSequence> &batch,
                          bool require_eos,
                          const ForwardOptions &options = {});

std::vector<Var> bind_params(Tape &tape, const ModelParams &params);

/// Logits of shape [batch x max_seq_len x vocab]; rows past a sequence's end
/// are zero.
NDArray forward_logits(const ModelParams &params, const ModelConfig &config,
                       const std::vector<TokenSequence> &batch);

/// Mean over sequences of the summed next-token negative log-likelihood.
double sequence_nll(const ModelParams &params, const ModelConfig &config,
                    const std::vector<TokenSequence> &batch);

double sequence_logprob(const ModelParams &params, const ModelConfig &config,
                        const TokenSequence &seq);

/// Like sequence_logprob but accepts GO-prefixed sequences that were cut at
/// the length limit before EOS.
double partial_logprob(const ModelParams &params, const ModelConfig &config,
                       const TokenSequence &seq);

struct LossAndGrad {
  double loss = 0;
  std::vector<double> per_sequence_nll;
  std::vector<NDArray> grads;
};

/// Batch-mean NLL and its gradient with respect to every parameter tensor.
LossAndGrad nll_loss_and_grad(const ModelParams &params,
                              const ModelConfig &config,
                              const std::vector<TokenSequence> &batch,
                              const ForwardOptions &options = {});

/// Single-sequence decoder with cached keys/values, for sampling.
class IncrementalDecoder {
public:
  IncrementalDecoder(const ModelParams &params, const ModelConfig &config);

  // Feeds `token` at the next position and returns next-token logits.
  std::vector<double> step(int token);
  int position() const { return position_; }

private:
  const ModelParams &params_;
  const ModelConfig &config_;
  int position_ = 0;
  std::vector<std::vector<double>> keys_;
  std::vector<std::vector<double>> values_;
};

std::string serialize_checkpoint(const ModelCheckpoint &ckpt);
ModelCheckpoint deserialize_checkpoint(std::string_view bytes);

/// Binary layout: "MFCK", u32 format version, u64 header length, JSON header
/// (config, vocabulary, step, tensor names and shapes), little-endian f64
/// tensor data in declared order, u64 FNV-1a checksum of all prior bytes.
void save_checkpoint(const ModelCheckpoint &ckpt,
                     const std::filesystem::path &path);
ModelCheckpoint load_checkpoint(const std::filesystem::path &path);

constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace molgen

#endif  // MOLGEN_TRANSFORMER_H_
