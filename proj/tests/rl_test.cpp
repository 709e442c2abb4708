//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/rl.h"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "molgen/error.h"
#include "molgen/generator.h"
#include "test_util.h"

namespace molgen {
namespace {
Episode make_episode(std::string key, double score) {
  Episode ep;
  ep.key = std::move(key);
  ep.smiles = ep.key;
  ep.score = score;
  ep.terminated = true;
  return ep;
}

const ModelCheckpoint &ring_prior() {
  static const ModelCheckpoint prior = [] {
    test::QuickTrain q;
    q.d_model = 16;
    q.d_ff = 32;
    q.n_heads = 2;
    q.steps = 300;
    return test::train_prior(test::data_lines("ring_corpus_1000.smi"), q);
  }();
  return prior;
}

TEST(EpisodeLoss, HandValues) {
  Episode ep;
  ep.prior_logprob = -10;
  ep.agent_logprob = -8;
  ep.score = 0.5;
  EXPECT_EQ(episode_loss(ep, 20), 64.0);
  ep.agent_logprob = -10;
  EXPECT_EQ(episode_loss(ep, 0), 0.0);
  ep.score = 0;
  EXPECT_EQ(episode_loss(ep, 60), 0.0);
}

TEST(ReplayBuffer, UniqueSortedBounded) {
  ReplayBuffer buf(3);
  buf.add(make_episode("a", 0.2));
  buf.add(make_episode("b", 0.9));
  buf.add(make_episode("a", 0.2));
  buf.add(make_episode("c", 0.5));
  buf.add(make_episode("d", 0.1));
  buf.add(make_episode("e", 0.7));
  buf.add(make_episode("", 1.0));
  ASSERT_EQ(buf.size(), 3);
  EXPECT_EQ(buf.entries()[0].key, "b");
  EXPECT_EQ(buf.entries()[1].key, "e");
  EXPECT_EQ(buf.entries()[2].key, "c");
  EXPECT_EQ(buf.top(2).size(), 2);
  EXPECT_EQ(buf.top(10).size(), 3);
}

TEST(RLConfig, Validation) {
  RLConfig cfg;
  cfg.batch_size = 2;
  cfg.replay_sample = 4;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = RLConfig {};
  cfg.sigma = -1;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_EQ(RLConfig::from_json(RLConfig {}.to_json()).to_json(),
            RLConfig {}.to_json());
}

TEST(Finetune, ZeroSigmaGradientIsExactlyZero) {
  RLConfig cfg;
  cfg.sigma = 0;
  cfg.batch_size = 16;
  cfg.max_steps = 3;
  cfg.seed = 4;
  int checked = 0;
  FinetuneHooks hooks;
  hooks.on_gradient = [&](std::int64_t, const std::vector<Episode> &,
                          const RLLossAndGrad &lg) {
    EXPECT_EQ(lg.loss, 0.0);
    for (const NDArray &g: lg.grads)
      for (double v: g.data())
        ASSERT_EQ(v, 0.0);
    ++checked;
  };
  const FinetuneResult r = finetune(ring_prior(), make_oracle("ring"), cfg, hooks);
  EXPECT_EQ(checked, 3);
  // With zero gradients Adam leaves the agent exactly at the prior.
  EXPECT_EQ(r.agent.params, ring_prior().params);
}

TEST(Finetune, PriorIsNotMutated) {
  const std::string before = serialize_checkpoint(ring_prior());
  RLConfig cfg;
  cfg.batch_size = 8;
  cfg.max_steps = 3;
  const FinetuneResult r = finetune(ring_prior(), make_oracle("ring"), cfg);
  EXPECT_EQ(serialize_checkpoint(ring_prior()), before);
  EXPECT_FALSE(r.agent.params == ring_prior().params);
}

TEST(Finetune, ReplayKeysStayUnique) {
  RLConfig cfg;
  cfg.batch_size = 16;
  cfg.max_steps = 10;
  cfg.seed = 2;
  FinetuneHooks hooks;
  hooks.on_gradient = [&](std::int64_t, const std::vector<Episode> &all,
                          const RLLossAndGrad &) {
    std::set<std::string> keys;
    for (std::size_t i = 16; i < all.size(); ++i)
      EXPECT_TRUE(keys.insert(all[i].key).second);
    for (const Episode &ep: all) {
      EXPECT_LE(ep.prior_logprob, 0.0);
      EXPECT_LE(ep.agent_logprob, 0.0);
      if (!ep.terminated || ep.key.empty())
        EXPECT_EQ(ep.score, 0.0);
    }
  };
  finetune(ring_prior(), make_oracle("ring"), cfg, hooks);
}

TEST(Finetune, BudgetStopsAfterTwoRounds) {
  RLConfig cfg;
  cfg.batch_size = 50;
  cfg.budget = 100;
  cfg.max_steps = 100;
  cfg.learning_rate = 1e-6;
  cfg.replay_sample = 0;
  const FinetuneResult r =
      finetune(test::fixed_length_prior(12), make_oracle("length_window:1:20:5"),
               cfg);
  EXPECT_EQ(r.stop, StopReason::kBudgetExhausted);
  EXPECT_EQ(r.scoring_rounds, 2);
  EXPECT_EQ(r.records.size(), 2);
  EXPECT_EQ(r.ledger.used(), 100);
  EXPECT_EQ(r.ledger.entries().back().call, 100);
}

TEST(Finetune, MidBatchExhaustionSkipsUpdate) {
  RLConfig cfg;
  cfg.batch_size = 40;
  cfg.budget = 100;
  cfg.max_steps = 100;
  cfg.replay_sample = 0;
  const FinetuneResult r =
      finetune(test::fixed_length_prior(12), make_oracle("length_window:1:20:5"),
               cfg);
  EXPECT_EQ(r.stop, StopReason::kBudgetExhausted);
  EXPECT_EQ(r.ledger.used(), 100);
  EXPECT_EQ(r.scoring_rounds, 2);
  EXPECT_EQ(r.agent.step, 2);
}

TEST(Finetune, CallbackStops) {
  RLConfig cfg;
  cfg.batch_size = 4;
  cfg.max_steps = 10;
  FinetuneHooks hooks;
  hooks.on_step = [](const RLRecord &r) { return r.step < 3; };
  const FinetuneResult r = finetune(ring_prior(), make_oracle("ring"), cfg, hooks);
  EXPECT_EQ(r.stop, StopReason::kCallback);
  EXPECT_EQ(r.records.size(), 3);
}

TEST(Finetune, RunningTopOneIsNondecreasing) {
  RLConfig cfg;
  cfg.batch_size = 16;
  cfg.max_steps = 20;
  const FinetuneResult r = finetune(ring_prior(), make_oracle("ring"), cfg);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    EXPECT_GE(r.records[i].top1, r.records[i - 1].top1);
    EXPECT_GE(r.records[i].oracle_calls, r.records[i - 1].oracle_calls);
  }
}

TEST(Finetune, Deterministic) {
  RLConfig cfg;
  cfg.batch_size = 8;
  cfg.max_steps = 5;
  cfg.seed = 12;
  const FinetuneResult a = finetune(ring_prior(), make_oracle("ring"), cfg);
  const FinetuneResult b = finetune(ring_prior(), make_oracle("ring"), cfg);
  EXPECT_EQ(a.ledger.serialize(), b.ledger.serialize());
  EXPECT_EQ(a.agent.params, b.agent.params);
}

// Directional derivative of -L along d = sum_i s_i grad(agent_logprob_i).
TEST(RLLoss, SigmaMonotoneAlongHighScoreDirection) {
  const ModelCheckpoint &prior = ring_prior();
  ModelParams agent = prior.params;
  // Move the agent off the prior so the batch has nonzero residuals.
  for (NDArray &t: agent.tensors)
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] += 1e-3 * std::sin(static_cast<double>(i));

  SampleConfig sc;
  sc.batch_size = 12;
  sc.max_len = prior.config.max_len;
  sc.seed = 77;
  const SampleBatch batch = sample(prior, sc);
  std::vector<Episode> eps;
  const OracleSpec ring = make_oracle("ring");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Episode ep;
    ep.sequence = batch.sequences[i];
    ep.terminated = batch.terminated[i];
    ep.score = ep.terminated && is_valid(batch.decoded[i])
                   ? score(ring, parse(batch.decoded[i]))
                   : 0.0;
    eps.push_back(ep);
  }
  eps[0].score = 1.0;
  eps[1].score = 0.0;
  assign_prior_logprobs(prior, eps);

  Tape tape;
  std::vector<Var> vars = bind_params(tape, agent);
  std::vector<TokenSequence> seqs;
  for (const Episode &ep: eps)
    seqs.push_back(ep.sequence);
  Var lp = sequence_logprob_node(tape, vars, prior.config, seqs, false);
  NDArray weights({ eps.size(), 1 });
  for (std::size_t i = 0; i < eps.size(); ++i)
    weights[i] = eps[i].score;
  tape.backward(ad::sum(ad::mul(lp, tape.constant(weights))));
  std::vector<NDArray> dir;
  for (const Var &v: vars)
    dir.push_back(tape.grad(v));

  double previous = -std::numeric_limits<double>::infinity();
  for (double sigma: { 0.0, 1.0, 10.0, 60.0, 100.0 }) {
    const RLLossAndGrad lg = rl_loss_and_grad(agent, prior.config, eps, sigma);
    double g = 0;
    for (std::size_t t = 0; t < dir.size(); ++t)
      for (std::size_t i = 0; i < dir[t].size(); ++i)
        g -= lg.grads[t][i] * dir[t][i];
    EXPECT_GT(g, previous) << "sigma " << sigma;
    previous = g;
  }
}
}  // namespace
}  // namespace molgen
