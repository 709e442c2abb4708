//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/transformer.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "molgen/error.h"
#include "test_util.h"

namespace molgen {
namespace {
using Mat = std::vector<std::vector<double>>;

Mat to_mat(const NDArray &a) {
  Mat m(a.rows(), std::vector<double>(a.cols()));
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c)
      m[r][c] = a(r, c);
  return m;
}

Mat affine(const Mat &x, const NDArray &w, const NDArray &b) {
  Mat y(x.size(), std::vector<double>(w.cols()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double s = b[j];
      for (std::size_t k = 0; k < w.rows(); ++k)
        s += x[i][k] * w(k, j);
      y[i][j] = s;
    }
  return y;
}

Mat norm(const Mat &x, const NDArray &g, const NDArray &b) {
  Mat y = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i].size());
    double mu = 0, var = 0;
    for (double v: x[i])
      mu += v / d;
    for (double v: x[i])
      var += (v - mu) * (v - mu) / d;
    for (std::size_t j = 0; j < x[i].size(); ++j)
      y[i][j] = (x[i][j] - mu) / std::sqrt(var + 1e-5) * g[j] + b[j];
  }
  return y;
}

// Straight-line reference forward pass for one sequence.
Mat reference_logits(const ModelParams &p, const ModelConfig &c,
                     const std::vector<int> &ids) {
  const std::size_t t = ids.size(), d = c.d_model, dh = c.head_dim();
  Mat x(t, std::vector<double>(d));
  for (std::size_t i = 0; i < t; ++i)
    for (std::size_t j = 0; j < d; ++j)
      x[i][j] = p.tensors[ModelParams::kTokEmb](ids[i], j)
                + p.tensors[ModelParams::kPosEmb](i, j);
  for (int l = 0; l < c.n_layers; ++l) {
    auto P = [&](LayerParam which) -> const NDArray & {
      return p.tensors[ModelParams::layer_index(l, which)];
    };
    Mat h = norm(x, P(LayerParam::kLn1Gamma), P(LayerParam::kLn1Beta));
    Mat q = affine(h, P(LayerParam::kWq), P(LayerParam::kBq));
    Mat k = affine(h, P(LayerParam::kWk), P(LayerParam::kBk));
    Mat v = affine(h, P(LayerParam::kWv), P(LayerParam::kBv));
    Mat att(t, std::vector<double>(d, 0));
    for (int head = 0; head < c.n_heads; ++head) {
      const std::size_t o = head * dh;
      for (std::size_t i = 0; i < t; ++i) {
        std::vector<double> w(i + 1);
        double mx = -1e300;
        for (std::size_t j = 0; j <= i; ++j) {
          double s = 0;
          for (std::size_t e = 0; e < dh; ++e)
            s += q[i][o + e] * k[j][o + e];
          w[j] = s / std::sqrt(static_cast<double>(dh));
          mx = std::max(mx, w[j]);
        }
        double z = 0;
        for (double &wj: w) {
          wj = std::exp(wj - mx);
          z += wj;
        }
        for (std::size_t j = 0; j <= i; ++j)
          for (std::size_t e = 0; e < dh; ++e)
            att[i][o + e] += w[j] / z * v[j][o + e];
      }
    }
    Mat ao = affine(att, P(LayerParam::kWo), P(LayerParam::kBo));
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < d; ++j)
        x[i][j] += ao[i][j];
    Mat h2 = norm(x, P(LayerParam::kLn2Gamma), P(LayerParam::kLn2Beta));
    Mat f = affine(h2, P(LayerParam::kW1), P(LayerParam::kB1));
    for (auto &row: f)
      for (double &u: row)
        u = 0.5 * u * (1 + std::erf(u / std::sqrt(2.0)));
    Mat f2 = affine(f, P(LayerParam::kW2), P(LayerParam::kB2));
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < d; ++j)
        x[i][j] += f2[i][j];
  }
  x = norm(x, p.tensors[ModelParams::final_gamma(c)],
           p.tensors[ModelParams::final_beta(c)]);
  return affine(x, p.tensors[ModelParams::out_weight(c)],
                p.tensors[ModelParams::out_bias(c)]);
}

// Randomizes every tensor, including gammas and biases.
ModelParams random_params(const ModelConfig &c, std::uint64_t seed,
                          double scale = 0.5) {
  ModelParams p = ModelParams::zeros(c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0, scale);
  for (NDArray &t: p.tensors)
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = dist(rng);
  return p;
}

TEST(ModelConfig, Validation) {
  ModelConfig c = test::small_config(8);
  EXPECT_NO_THROW(c.validate());
  c.n_heads = 3;
  EXPECT_THROW(c.validate(), Error);
  c = test::small_config(0);
  EXPECT_THROW(c.validate(), Error);
}

TEST(ParameterLayout, CountsScalars) {
  const ModelConfig c = test::small_config(7, 4, 1, 2, 8, 5);
  const ModelParams p = ModelParams::init(c, 3);
  // tok 7*4, pos 5*4, layer (2*4 + 4*(16+4) + 2*4 + 4*8+8 + 8*4+4), final 8 + 4*7+7
  EXPECT_EQ(p.num_scalars(), 28 + 20 + (8 + 80 + 8 + 40 + 36) + 8 + 35);
  EXPECT_EQ(p.tensors.size(), 2 + 16 + 4);
}

TEST(Init, DeterministicAndNormalScale) {
  const ModelConfig c = test::small_config(10, 16, 2, 2, 32, 16);
  EXPECT_EQ(ModelParams::init(c, 5), ModelParams::init(c, 5));
  EXPECT_FALSE(ModelParams::init(c, 5) == ModelParams::init(c, 6));
  const ModelParams p = ModelParams::init(c, 5);
  const NDArray &w = p.tensors[ModelParams::layer_index(0, LayerParam::kW1)];
  double ss = 0;
  for (double v: w.data())
    ss += v * v;
  EXPECT_NEAR(std::sqrt(ss / static_cast<double>(w.size())), 0.02, 0.004);
  EXPECT_EQ(p.tensors[ModelParams::layer_index(0, LayerParam::kLn1Gamma)][0], 1.0);
  EXPECT_EQ(p.tensors[ModelParams::layer_index(0, LayerParam::kBq)][0], 0.0);
}

TEST(Forward, MatchesReferenceAtWidthFour) {
  const ModelConfig c = test::small_config(6, 4, 2, 2, 8, 8);
  const ModelParams p = random_params(c, 11);
  const std::vector<int> ids { 1, 4, 5, 4, 2 };
  Tape tape(false);
  std::vector<Var> vars = bind_params(tape, p);
  const NDArray got = model_logits(tape, vars, c, { ids }).value();
  const Mat want = reference_logits(p, c, ids);
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (int j = 0; j < c.vocab_size; ++j)
      EXPECT_NEAR(got(i, j), want[i][j], 1e-12);
}

TEST(Forward, PackedBatchEqualsSingleSequences) {
  const ModelConfig c = test::small_config(6, 8, 2, 2, 16, 8);
  const ModelParams p = random_params(c, 12);
  const std::vector<std::vector<int>> batch { { 1, 4, 5 }, { 1, 5, 5, 4, 4 } };
  Tape tape(false);
  std::vector<Var> vars = bind_params(tape, p);
  const NDArray packed = model_logits(tape, vars, c, batch).value();
  std::size_t row = 0;
  for (const auto &seq: batch) {
    const NDArray one = model_logits(tape, vars, c, { seq }).value();
    for (std::size_t i = 0; i < seq.size(); ++i, ++row)
      for (int j = 0; j < c.vocab_size; ++j)
        EXPECT_EQ(packed(row, j), one(i, j));
  }
}

TEST(Forward, PaddedLogitsShape) {
  const ModelConfig c = test::small_config(6, 8, 1, 2, 16, 8);
  const ModelParams p = random_params(c, 13);
  const std::vector<TokenSequence> batch { { { 1, 4, 2 }, true },
                                           { { 1, 4, 5, 4, 2 }, true } };
  const NDArray logits = forward_logits(p, c, batch);
  ASSERT_EQ(logits.shape(), (std::vector<std::size_t> { 2, 5, 6 }));
  for (int t: { 3, 4 })
    for (int j = 0; j < 6; ++j)
      EXPECT_EQ(logits[(0 * 5 + t) * 6 + j], 0.0);
}

TEST(Forward, Causality) {
  const ModelConfig c = test::small_config(9, 8, 2, 2, 16, 12);
  const ModelParams p = random_params(c, 14);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> ids(2 + rng() % 10);
    for (int &id: ids)
      id = static_cast<int>(rng() % 9);
    const std::size_t t = rng() % ids.size();
    std::vector<int> perturbed = ids;
    for (std::size_t i = t; i < ids.size(); ++i)
      perturbed[i] = static_cast<int>((perturbed[i] + 1 + rng() % 8) % 9);
    Tape tape(false);
    std::vector<Var> vars = bind_params(tape, p);
    const NDArray a = model_logits(tape, vars, c, { ids }).value();
    const NDArray b = model_logits(tape, vars, c, { perturbed }).value();
    for (std::size_t i = 0; i < t; ++i)
      for (int j = 0; j < 9; ++j)
        ASSERT_EQ(a(i, j), b(i, j));
  }
}

TEST(Forward, SequenceTooLongAndUnknownIds) {
  const ModelConfig c = test::small_config(6, 8, 1, 2, 16, 4);
  const ModelParams p = ModelParams::init(c, 1);
  try {
    sequence_nll(p, c, { { { 1, 4, 4, 4, 2 }, true } });
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kSequenceTooLong);
  }
  try {
    sequence_nll(p, c, { { { 1, 9, 2 }, true } });
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownTokenId);
  }
  try {
    sequence_nll(p, c, { { { 4, 4, 2 }, true } });
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnframedSequence);
  }
}

TEST(Loss, NllIsSumOfTokenLogprobs) {
  const ModelConfig c = test::small_config(6, 4, 1, 2, 8, 8);
  const ModelParams p = random_params(c, 15);
  const std::vector<int> ids { 1, 4, 5, 2 };
  const Mat logits = reference_logits(p, c, { 1, 4, 5 });
  double want = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    double mx = -1e300, z = 0;
    for (double v: logits[i])
      mx = std::max(mx, v);
    for (double v: logits[i])
      z += std::exp(v - mx);
    want += logits[i][ids[i + 1]] - mx - std::log(z);
  }
  EXPECT_NEAR(sequence_logprob(p, c, { ids, true }), want, 1e-12);
  EXPECT_NEAR(sequence_nll(p, c, { { ids, true } }), -want, 1e-12);
}

TEST(Loss, FullModelGradientMatchesFiniteDifferences) {
  const ModelConfig c = test::small_config(7, 8, 2, 2, 12, 8);
  ModelParams p = random_params(c, 16, 0.3);
  const std::vector<TokenSequence> batch { { { 1, 4, 5, 6, 2 }, true },
                                           { { 1, 6, 6, 2 }, true } };
  const LossAndGrad lg = nll_loss_and_grad(p, c, batch);
  std::vector<NDArray *> ptrs;
  for (NDArray &t: p.tensors)
    ptrs.push_back(&t);
  const double err = test::fd_relative_error(
      ptrs, lg.grads, [&]() { return sequence_nll(p, c, batch); }, 1e-5);
  EXPECT_LT(err, 1e-4);
}

TEST(Loss, DropoutOnlyInTraining) {
  ModelConfig c = test::small_config(7, 8, 2, 2, 12, 8);
  c.dropout_rate = 0.5;
  const ModelParams p = random_params(c, 17);
  const std::vector<TokenSequence> batch { { { 1, 4, 5, 2 }, true } };
  ForwardOptions train { true, 9 };
  const double eval_loss = nll_loss_and_grad(p, c, batch).loss;
  EXPECT_EQ(eval_loss, sequence_nll(p, c, batch));
  EXPECT_NE(nll_loss_and_grad(p, c, batch, train).loss, eval_loss);
  EXPECT_EQ(nll_loss_and_grad(p, c, batch, train).loss,
            nll_loss_and_grad(p, c, batch, train).loss);
}

TEST(IncrementalDecoder, MatchesFullForwardBitwise) {
  const ModelConfig c = test::small_config(7, 8, 2, 2, 12, 8);
  const ModelParams p = random_params(c, 18);
  const std::vector<int> ids { 1, 4, 6, 5, 5, 4 };
  Tape tape(false);
  std::vector<Var> vars = bind_params(tape, p);
  const NDArray full = model_logits(tape, vars, c, { ids }).value();
  IncrementalDecoder dec(p, c);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::vector<double> step = dec.step(ids[i]);
    for (int j = 0; j < c.vocab_size; ++j)
      ASSERT_EQ(step[j], full(i, j)) << "position " << i;
  }
  EXPECT_THROW(
      {
        IncrementalDecoder d(p, c);
        for (int i = 0; i <= c.max_len; ++i)
          d.step(4);
      },
      Error);
}

ModelCheckpoint sample_checkpoint() {
  ModelCheckpoint ckpt;
  ckpt.vocab = Vocabulary::from_tokens({ "C", "O" });
  ckpt.config = test::small_config(static_cast<int>(ckpt.vocab.size()), 8, 1,
                                   2, 8, 6);
  ckpt.params = ModelParams::init(ckpt.config, 4);
  ckpt.step = 17;
  return ckpt;
}

TEST(Checkpoint, RoundTrip) {
  ModelCheckpoint ckpt = sample_checkpoint();
  const std::string bytes = serialize_checkpoint(ckpt);
  const ModelCheckpoint back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back.config, ckpt.config);
  EXPECT_EQ(back.params, ckpt.params);
  EXPECT_EQ(back.vocab, ckpt.vocab);
  EXPECT_EQ(back.step, 17);
  EXPECT_FALSE(back.optimizer.has_value());
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, RoundTripWithOptimizer) {
  ModelCheckpoint ckpt = sample_checkpoint();
  AdamState adam;
  adam.learning_rate = 1e-3;
  std::vector<NDArray> grads = ckpt.params.tensors;
  adam_step(ckpt.params.tensors, grads, adam);
  ckpt.optimizer = adam;
  const ModelCheckpoint back = deserialize_checkpoint(serialize_checkpoint(ckpt));
  ASSERT_TRUE(back.optimizer.has_value());
  EXPECT_EQ(back.optimizer->m, adam.m);
  EXPECT_EQ(back.optimizer->v, adam.v);
  EXPECT_EQ(back.optimizer->step, 1);
  EXPECT_EQ(back.optimizer->learning_rate, 1e-3);
}

TEST(Checkpoint, DetectsCorruption) {
  std::string bytes = serialize_checkpoint(sample_checkpoint());
  std::string flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x40;
  try {
    deserialize_checkpoint(flipped);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kCorruptCheckpoint);
  }
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), Error);
  EXPECT_THROW(deserialize_checkpoint("nope"), Error);
}

TEST(Checkpoint, DetectsVersionMismatch) {
  std::string bytes = serialize_checkpoint(sample_checkpoint());
  bytes[4] = 9;
  try {
    deserialize_checkpoint(bytes);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
}

TEST(Checkpoint, FileRoundTrip) {
  test::TempDir dir;
  const ModelCheckpoint ckpt = sample_checkpoint();
  save_checkpoint(ckpt, dir / "m.ckpt");
  EXPECT_EQ(load_checkpoint(dir / "m.ckpt").params, ckpt.params);
  try {
    load_checkpoint(dir / "missing.ckpt");
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}
}  // namespace
}  // namespace molgen
