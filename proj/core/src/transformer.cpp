//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/transformer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "molgen/error.h"
#include "molgen/rng.h"

namespace molgen {
namespace {
constexpr double kLayerNormEps = 1e-5;
constexpr double kInitStd = 0.02;

std::vector<std::uint8_t> causal_mask(std::size_t t) {
  std::vector<std::uint8_t> mask(t * t, 0);
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = i + 1; j < t; ++j)
      mask[i * t + j] = 1;
  return mask;
}

void check_ids(const ModelConfig &config, const std::vector<int> &ids) {
  for (int id: ids)
    if (id < 0 || id >= config.vocab_size)
      throw Error(ErrorCode::kUnknownTokenId,
                  "token id " + std::to_string(id) + " outside vocabulary of "
                      + std::to_string(config.vocab_size));
}

Var dropout(Tape &tape, Var x, double rate, std::uint64_t seed,
            std::uint64_t stream) {
  if (rate <= 0)
    return x;
  const NDArray &xv = x.value();
  NDArray mask(xv.shape(), 0.0);
  CounterRng rng(seed);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = rng.uniform(stream, i) >= rate ? keep_scale : 0.0;
  return ad::mul(x, tape.constant(std::move(mask)));
}

// Mirrors ad::layer_norm on one row.
void layer_norm_row(const double *x, const NDArray &gamma, const NDArray &beta,
                    std::size_t d, double *out) {
  double mu = 0;
  for (std::size_t c = 0; c < d; ++c)
    mu += x[c];
  mu /= static_cast<double>(d);
  double var = 0;
  for (std::size_t c = 0; c < d; ++c)
    var += (x[c] - mu) * (x[c] - mu);
  var /= static_cast<double>(d);
  const double is = 1.0 / std::sqrt(var + kLayerNormEps);
  for (std::size_t c = 0; c < d; ++c)
    out[c] = (x[c] - mu) * is * gamma[c] + beta[c];
}

// Mirrors ad::matmul followed by ad::add with a bias row.
std::vector<double> affine_row(const std::vector<double> &x, const NDArray &w,
                               const NDArray &b) {
  const std::size_t k = w.rows(), n = w.cols();
  std::vector<double> out(n, 0.0);
  for (std::size_t p = 0; p < k; ++p) {
    const double xv = x[p];
    const double *wp = w.row(p);
    for (std::size_t j = 0; j < n; ++j)
      out[j] += xv * wp[j];
  }
  for (std::size_t j = 0; j < n; ++j)
    out[j] += b[j];
  return out;
}
}  // namespace

void ModelConfig::validate() const {
  auto bad = [](const std::string &msg) {
    throw Error(ErrorCode::kBadParameters, "model config: " + msg);
  };
  if (vocab_size <= kNumReserved)
    bad("vocab_size must exceed the reserved tokens");
  if (max_len < 2)
    bad("max_len must be >= 2");
  if (d_model <= 0 || n_heads <= 0 || n_layers <= 0 || d_ff <= 0)
    bad("dimensions must be positive");
  if (d_model % n_heads != 0)
    bad("d_model must be divisible by n_heads");
  if (dropout_rate < 0 || dropout_rate >= 1)
    bad("dropout_rate must be in [0, 1)");
}

nlohmann::json ModelConfig::to_json() const {
  return { { "vocab_size", vocab_size }, { "max_len", max_len },
           { "d_model", d_model },       { "n_heads", n_heads },
           { "n_layers", n_layers },     { "d_ff", d_ff },
           { "dropout_rate", dropout_rate } };
}

ModelConfig ModelConfig::from_json(const nlohmann::json &j) {
  ModelConfig c;
  try {
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.max_len = j.value("max_len", c.max_len);
    c.d_model = j.value("d_model", c.d_model);
    c.n_heads = j.value("n_heads", c.n_heads);
    c.n_layers = j.value("n_layers", c.n_layers);
    c.d_ff = j.value("d_ff", c.d_ff);
    c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kBadParameters,
                std::string("model config: ") + e.what());
  }
  return c;
}

std::vector<ParamSpec> parameter_layout(const ModelConfig &c) {
  const auto v = static_cast<std::size_t>(c.vocab_size);
  const auto d = static_cast<std::size_t>(c.d_model);
  const auto f = static_cast<std::size_t>(c.d_ff);
  const auto l = static_cast<std::size_t>(c.max_len);

  std::vector<ParamSpec> specs;
  specs.push_back({ "tok_emb", { v, d } });
  specs.push_back({ "pos_emb", { l, d } });
  for (int layer = 0; layer < c.n_layers; ++layer) {
    const std::string p = "layers." + std::to_string(layer) + ".";
    specs.push_back({ p + "ln1.gamma", { 1, d } });
    specs.push_back({ p + "ln1.beta", { 1, d } });
    specs.push_back({ p + "attn.wq", { d, d } });
    specs.push_back({ p + "attn.bq", { 1, d } });
    specs.push_back({ p + "attn.wk", { d, d } });
    specs.push_back({ p + "attn.bk", { 1, d } });
    specs.push_back({ p + "attn.wv", { d, d } });
    specs.push_back({ p + "attn.bv", { 1, d } });
    specs.push_back({ p + "attn.wo", { d, d } });
    specs.push_back({ p + "attn.bo", { 1, d } });
    specs.push_back({ p + "ln2.gamma", { 1, d } });
    specs.push_back({ p + "ln2.beta", { 1, d } });
    specs.push_back({ p + "ff.w1", { d, f } });
    specs.push_back({ p + "ff.b1", { 1, f } });
    specs.push_back({ p + "ff.w2", { f, d } });
    specs.push_back({ p + "ff.b2", { 1, d } });
  }
  specs.push_back({ "ln_f.gamma", { 1, d } });
  specs.push_back({ "ln_f.beta", { 1, d } });
  specs.push_back({ "out.w", { d, v } });
  specs.push_back({ "out.b", { 1, v } });
  return specs;
}

ModelParams ModelParams::zeros(const ModelConfig &config) {
  config.validate();
  ModelParams p;
  for (const ParamSpec &spec: parameter_layout(config))
    p.tensors.emplace_back(spec.shape, 0.0);
  return p;
}

ModelParams ModelParams::init(const ModelConfig &config, std::uint64_t seed) {
  ModelParams p = zeros(config);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, kInitStd);
  const std::vector<ParamSpec> specs = parameter_layout(config);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::string &name = specs[i].name;
    NDArray &t = p.tensors[i];
    if (name.ends_with("gamma")) {
      t.fill(1.0);
    } else if (name.ends_with("beta") || specs[i].shape[0] == 1) {
      // biases stay zero
    } else {
      for (double &x: t.data())
        x = normal(gen);
    }
  }
  return p;
}

std::size_t ModelParams::num_scalars() const {
  std::size_t n = 0;
  for (const NDArray &t: tensors)
    n += t.size();
  return n;
}

bool ModelParams::all_finite() const {
  return std::all_of(tensors.begin(), tensors.end(),
                     [](const NDArray &t) { return t.all_finite(); });
}

std::vector<Var> bind_params(Tape &tape, const ModelParams &params) {
  std::vector<Var> vars;
  vars.reserve(params.tensors.size());
  for (const NDArray &t: params.tensors)
    vars.push_back(tape.leaf(t));
  return vars;
}

Var model_logits(Tape &tape, std::span<const Var> P, const ModelConfig &config,
                 const std::vector<std::vector<int>> &inputs,
                 const ForwardOptions &options) {
  const std::size_t expected = parameter_layout(config).size();
  if (P.size() != expected)
    throw Error(ErrorCode::kShapeMismatch,
                "expected " + std::to_string(expected) + " parameter tensors");
  if (inputs.empty())
    throw Error(ErrorCode::kShapeMismatch, "empty batch");

  std::vector<int> flat, positions;
  std::vector<std::size_t> offsets { 0 };
  for (const std::vector<int> &seq: inputs) {
    if (seq.empty())
      throw Error(ErrorCode::kShapeMismatch, "empty sequence in batch");
    if (seq.size() > static_cast<std::size_t>(config.max_len))
      throw Error(ErrorCode::kSequenceTooLong,
                  "sequence of " + std::to_string(seq.size())
                      + " positions exceeds max_len "
                      + std::to_string(config.max_len));
    check_ids(config, seq);
    flat.insert(flat.end(), seq.begin(), seq.end());
    for (std::size_t t = 0; t < seq.size(); ++t)
      positions.push_back(static_cast<int>(t));
    offsets.push_back(flat.size());
  }

  const bool drop = options.training && config.dropout_rate > 0;
  const auto dh = static_cast<std::size_t>(config.head_dim());
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const double neg_inf = -std::numeric_limits<double>::infinity();

  Var x = ad::add(ad::embedding_gather(P[ModelParams::kTokEmb], flat),
                  ad::embedding_gather(P[ModelParams::kPosEmb], positions));

  auto lp = [&](int layer, LayerParam which) {
    return P[ModelParams::layer_index(layer, which)];
  };

  for (int layer = 0; layer < config.n_layers; ++layer) {
    Var h = ad::layer_norm(x, lp(layer, LayerParam::kLn1Gamma),
                           lp(layer, LayerParam::kLn1Beta), kLayerNormEps);
    Var q = ad::add(ad::matmul(h, lp(layer, LayerParam::kWq)),
                    lp(layer, LayerParam::kBq));
    Var k = ad::add(ad::matmul(h, lp(layer, LayerParam::kWk)),
                    lp(layer, LayerParam::kBk));
    Var v = ad::add(ad::matmul(h, lp(layer, LayerParam::kWv)),
                    lp(layer, LayerParam::kBv));

    std::vector<Var> seq_out;
    for (std::size_t b = 0; b + 1 < offsets.size(); ++b) {
      const std::size_t r0 = offsets[b], r1 = offsets[b + 1], t = r1 - r0;
      const std::vector<std::uint8_t> mask = causal_mask(t);
      std::vector<Var> heads;
      for (int head = 0; head < config.n_heads; ++head) {
        const std::size_t c0 = head * dh, c1 = c0 + dh;
        Var qs = ad::slice(q, r0, r1, c0, c1);
        Var ks = ad::slice(k, r0, r1, c0, c1);
        Var vs = ad::slice(v, r0, r1, c0, c1);
        Var scores = ad::scale(ad::matmul(qs, ad::transpose(ks)), attn_scale);
        Var attn = ad::softmax_rows(ad::masked_fill(scores, mask, neg_inf));
        heads.push_back(ad::matmul(attn, vs));
      }
      seq_out.push_back(heads.size() == 1 ? heads[0] : ad::concat(heads, 1));
    }
    Var attended = seq_out.size() == 1 ? seq_out[0] : ad::concat(seq_out, 0);
    Var o = ad::add(ad::matmul(attended, lp(layer, LayerParam::kWo)),
                    lp(layer, LayerParam::kBo));
    if (drop)
      o = dropout(tape, o, config.dropout_rate, options.dropout_seed,
                  2 * static_cast<std::uint64_t>(layer));
    x = ad::add(x, o);

    Var h2 = ad::layer_norm(x, lp(layer, LayerParam::kLn2Gamma),
                            lp(layer, LayerParam::kLn2Beta), kLayerNormEps);
    Var ff = ad::gelu(ad::add(ad::matmul(h2, lp(layer, LayerParam::kW1)),
                              lp(layer, LayerParam::kB1)));
    ff = ad::add(ad::matmul(ff, lp(layer, LayerParam::kW2)),
                 lp(layer, LayerParam::kB2));
    if (drop)
      ff = dropout(tape, ff, config.dropout_rate, options.dropout_seed,
                   2 * static_cast<std::uint64_t>(layer) + 1);
    x = ad::add(x, ff);
  }

  x = ad::layer_norm(x, P[ModelParams::final_gamma(config)],
                     P[ModelParams::final_beta(config)], kLayerNormEps);
  return ad::add(ad::matmul(x, P[ModelParams::out_weight(config)]),
                 P[ModelParams::out_bias(config)]);
}

Var sequence_logprob_node(Tape &tape, std::span<const Var> params,
                          const ModelConfig &config,
                          const std::vector<TokenSequence> &batch,
                          bool require_eos, const ForwardOptions &options) {
  std::vector<std::vector<int>> inputs;
  std::vector<int> targets;
  std::vector<std::size_t> offsets { 0 };
  for (const TokenSequence &seq: batch) {
    const std::vector<int> &ids = seq.ids;
    if (ids.size() < 2 || ids.front() != kGoId
        || (require_eos && ids.back() != kEosId))
      throw Error(ErrorCode::kUnframedSequence,
                  "sequence must start with GO"
                      + std::string(require_eos ? " and end with EOS" : "")
                      + " and contain a target");
    if (require_eos
        && std::find(ids.begin() + 1, ids.end() - 1, kEosId) != ids.end() - 1)
      throw Error(ErrorCode::kUnframedSequence, "EOS inside sequence");
    if (ids.size() > static_cast<std::size_t>(config.max_len))
      throw Error(ErrorCode::kSequenceTooLong,
                  "framed sequence of " + std::to_string(ids.size())
                      + " tokens exceeds max_len "
                      + std::to_string(config.max_len));
    inputs.emplace_back(ids.begin(), ids.end() - 1);
    targets.insert(targets.end(), ids.begin() + 1, ids.end());
    offsets.push_back(targets.size());
  }
  Var logits = model_logits(tape, params, config, inputs, options);
  Var logp = ad::log_softmax_rows(logits);
  return ad::segment_sum(ad::pick(logp, targets), offsets);
}

NDArray forward_logits(const ModelParams &params, const ModelConfig &config,
                       const std::vector<TokenSequence> &batch) {
  Tape tape(false);
  std::vector<Var> vars = bind_params(tape, params);
  std::vector<std::vector<int>> inputs;
  std::size_t max_t = 0;
  for (const TokenSequence &seq: batch) {
    inputs.push_back(seq.ids);
    max_t = std::max(max_t, seq.ids.size());
  }
  Var logits = model_logits(tape, vars, config, inputs);
  const NDArray &packed = logits.value();
  const auto v = static_cast<std::size_t>(config.vocab_size);

  NDArray out({ batch.size(), max_t, v }, 0.0);
  std::size_t row = 0;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (std::size_t t = 0; t < inputs[b].size(); ++t, ++row)
      std::copy_n(packed.row(row), v, out.data().data() + (b * max_t + t) * v);
  }
  return out;
}

double sequence_nll(const ModelParams &params, const ModelConfig &config,
                    const std::vector<TokenSequence> &batch) {
  Tape tape(false);
  std::vector<Var> vars = bind_params(tape, params);
  Var lp = sequence_logprob_node(tape, vars, config, batch, true);
  return -ad::mean(lp).value().item();
}

double sequence_logprob(const ModelParams &params, const ModelConfig &config,
                        const TokenSequence &seq) {
  Tape tape(false);
  std::vector<Var> vars = bind_params(tape, params);
  return sequence_logprob_node(tape, vars, config, { seq }, true).value()[0];
}

double partial_logprob(const ModelParams &params, const ModelConfig &config,
                       const TokenSequence &seq) {
  Tape tape(false);
  std::vector<Var> vars = bind_params(tape, params);
  return sequence_logprob_node(tape, vars, config, { seq }, false).value()[0];
}

LossAndGrad nll_loss_and_grad(const ModelParams &params,
                              const ModelConfig &config,
                              const std::vector<TokenSequence> &batch,
                              const ForwardOptions &options) {
  Tape tape;
  std::vector<Var> vars = bind_params(tape, params);
  Var lp = sequence_logprob_node(tape, vars, config, batch, true, options);
  Var loss = ad::scale(ad::mean(lp), -1.0);
  tape.backward(loss);

  LossAndGrad out;
  out.loss = loss.value().item();
  for (std::size_t i = 0; i < lp.value().size(); ++i)
    out.per_sequence_nll.push_back(-lp.value()[i]);
  for (const Var &v: vars)
    out.grads.push_back(tape.grad(v));
  return out;
}

IncrementalDecoder::IncrementalDecoder(const ModelParams &params,
                                       const ModelConfig &config)
    : params_(params), config_(config), keys_(config.n_layers),
      values_(config.n_layers) { }

std::vector<double> IncrementalDecoder::step(int token) {
  if (position_ >= config_.max_len)
    throw Error(ErrorCode::kSequenceTooLong, "decoder exceeded max_len");
  if (token < 0 || token >= config_.vocab_size)
    throw Error(ErrorCode::kUnknownTokenId,
                "token id " + std::to_string(token) + " outside vocabulary");

  const auto d = static_cast<std::size_t>(config_.d_model);
  const auto dh = static_cast<std::size_t>(config_.head_dim());
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const auto &T = params_.tensors;
  const auto t = static_cast<std::size_t>(position_);

  std::vector<double> x(d), h(d);
  for (std::size_t c = 0; c < d; ++c)
    x[c] = T[ModelParams::kTokEmb](token, c) + T[ModelParams::kPosEmb](t, c);

  for (int layer = 0; layer < config_.n_layers; ++layer) {
    auto P = [&](LayerParam p) -> const NDArray & {
      return T[ModelParams::layer_index(layer, p)];
    };
    layer_norm_row(x.data(), P(LayerParam::kLn1Gamma), P(LayerParam::kLn1Beta),
                   d, h.data());
    std::vector<double> q = affine_row(h, P(LayerParam::kWq), P(LayerParam::kBq));
    std::vector<double> k = affine_row(h, P(LayerParam::kWk), P(LayerParam::kBk));
    std::vector<double> v = affine_row(h, P(LayerParam::kWv), P(LayerParam::kBv));
    std::vector<double> &kc = keys_[layer];
    std::vector<double> &vc = values_[layer];
    kc.insert(kc.end(), k.begin(), k.end());
    vc.insert(vc.end(), v.begin(), v.end());
    const std::size_t n = t + 1;

    std::vector<double> attended(d, 0.0), scores(n);
    for (int head = 0; head < config_.n_heads; ++head) {
      const std::size_t c0 = head * dh;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0;
        for (std::size_t p = 0; p < dh; ++p)
          acc += q[c0 + p] * kc[j * d + c0 + p];
        scores[j] = acc * attn_scale;
        mx = std::max(mx, scores[j]);
      }
      double total = 0;
      for (std::size_t j = 0; j < n; ++j) {
        scores[j] = std::exp(scores[j] - mx);
        total += scores[j];
      }
      for (std::size_t j = 0; j < n; ++j)
        scores[j] /= total;
      for (std::size_t j = 0; j < n; ++j) {
        const double a = scores[j];
        for (std::size_t p = 0; p < dh; ++p)
          attended[c0 + p] += a * vc[j * d + c0 + p];
      }
    }
    std::vector<double> o =
        affine_row(attended, P(LayerParam::kWo), P(LayerParam::kBo));
    for (std::size_t c = 0; c < d; ++c)
      x[c] += o[c];

    layer_norm_row(x.data(), P(LayerParam::kLn2Gamma), P(LayerParam::kLn2Beta),
                   d, h.data());
    std::vector<double> f = affine_row(h, P(LayerParam::kW1), P(LayerParam::kB1));
    for (double &z: f)
      z = 0.5 * z * (1.0 + std::erf(z * std::numbers::sqrt2 / 2.0));
    std::vector<double> f2 = affine_row(f, P(LayerParam::kW2), P(LayerParam::kB2));
    for (std::size_t c = 0; c < d; ++c)
      x[c] += f2[c];
  }

  layer_norm_row(x.data(), T[ModelParams::final_gamma(config_)],
                 T[ModelParams::final_beta(config_)], d, h.data());
  ++position_;
  return affine_row(h, T[ModelParams::out_weight(config_)],
                    T[ModelParams::out_bias(config_)]);
}
}  // namespace molgen
