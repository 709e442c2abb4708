//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/rl.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "molgen/error.h"
#include "molgen/generator.h"
#include "molgen/optimizer.h"
#include "molgen/pretrainer.h"
#include "molgen/rng.h"

namespace molgen {
namespace {
bool ranks_before(const Episode &a, const Episode &b) {
  if (a.score != b.score)
    return a.score > b.score;
  return a.key < b.key;
}

double mean_top_k(std::vector<double> scores, std::size_t k) {
  if (scores.empty())
    return 0.0;
  k = std::min(k, scores.size());
  std::partial_sort(scores.begin(), scores.begin() + static_cast<long>(k),
                    scores.end(), std::greater<>());
  double sum = 0;
  for (std::size_t i = 0; i < k; ++i)
    sum += scores[i];
  return sum / static_cast<double>(k);
}

std::vector<TokenSequence> sequences_of(const std::vector<Episode> &eps) {
  std::vector<TokenSequence> out;
  out.reserve(eps.size());
  for (const Episode &ep: eps)
    out.push_back(ep.sequence);
  return out;
}
}  // namespace

void RLConfig::validate() const {
  auto bad = [](const std::string &msg) {
    throw Error(ErrorCode::kBadParameters, "rl config: " + msg);
  };
  if (!(sigma >= 0) || !std::isfinite(sigma))
    bad("sigma must be finite and >= 0");
  if (batch_size < 1)
    bad("batch_size must be >= 1");
  if (max_steps < 0)
    bad("max_steps must be >= 0");
  if (!(learning_rate > 0))
    bad("learning_rate must be > 0");
  if (replay_capacity < 0 || replay_sample < 0)
    bad("replay sizes must be >= 0");
  if (replay_sample > batch_size)
    bad("replay_sample must not exceed batch_size");
  if (replay_sample > replay_capacity)
    bad("replay_sample must not exceed replay_capacity");
  if (!(temperature > 0))
    bad("temperature must be > 0");
  if (max_len < 0 || max_len == 1)
    bad("max_len must be 0 or >= 2");
  if (budget < 0)
    bad("budget must be >= 0");
}

nlohmann::json RLConfig::to_json() const {
  return {
    {          "sigma",           sigma },
    {     "batch_size",      batch_size },
    {      "max_steps",       max_steps },
    {  "learning_rate",   learning_rate },
    {"replay_capacity", replay_capacity },
    {  "replay_sample",   replay_sample },
    {           "seed",            seed },
    {    "temperature",     temperature },
    {        "max_len",         max_len },
    {         "budget",          budget },
  };
}

RLConfig RLConfig::from_json(const nlohmann::json &j) {
  RLConfig c;
  try {
    c.sigma = j.value("sigma", c.sigma);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_steps = j.value("max_steps", c.max_steps);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
    c.replay_sample = j.value("replay_sample", c.replay_sample);
    c.seed = j.value("seed", c.seed);
    c.temperature = j.value("temperature", c.temperature);
    c.max_len = j.value("max_len", c.max_len);
    c.budget = j.value("budget", c.budget);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kBadParameters,
                std::string("rl config: ") + e.what());
  }
  c.validate();
  return c;
}

void ReplayBuffer::add(const Episode &ep) {
  if (ep.key.empty() || capacity_ == 0)
    return;
  auto same = std::find_if(entries_.begin(), entries_.end(),
                           [&](const Episode &e) { return e.key == ep.key; });
  if (same != entries_.end()) {
    if (!ranks_before(ep, *same))
      return;
    entries_.erase(same);
  }
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), ep, ranks_before);
  entries_.insert(pos, ep);
  if (entries_.size() > capacity_)
    entries_.pop_back();
}

std::vector<Episode> ReplayBuffer::top(std::size_t n) const {
  n = std::min(n, entries_.size());
  return { entries_.begin(), entries_.begin() + static_cast<long>(n) };
}

double episode_loss(const Episode &ep, double sigma) {
  const double d = ep.prior_logprob + sigma * ep.score - ep.agent_logprob;
  return d * d;
}

RLLossAndGrad rl_loss_and_grad(const ModelParams &agent,
                               const ModelConfig &config,
                               const std::vector<Episode> &episodes,
                               double sigma) {
  if (episodes.empty())
    throw Error(ErrorCode::kBadParameters, "empty episode batch");
  Tape tape;
  std::vector<Var> vars = bind_params(tape, agent);
  Var agent_lp =
      sequence_logprob_node(tape, vars, config, sequences_of(episodes), false);
  NDArray target({ episodes.size(), 1 });
  for (std::size_t i = 0; i < episodes.size(); ++i)
    target[i] = episodes[i].prior_logprob + sigma * episodes[i].score;
  Var diff = ad::sub(tape.constant(std::move(target)), agent_lp);
  Var loss = ad::mean(ad::mul(diff, diff));
  tape.backward(loss);

  RLLossAndGrad out;
  out.loss = loss.value().item();
  out.agent_logprobs.assign(agent_lp.value().data().begin(),
                            agent_lp.value().data().end());
  for (const Var &v: vars)
    out.grads.push_back(tape.grad(v));
  return out;
}

void assign_prior_logprobs(const ModelCheckpoint &prior,
                           std::vector<Episode> &episodes) {
  if (episodes.empty())
    return;
  Tape tape(false);
  std::vector<Var> vars = bind_params(tape, prior.params);
  Var lp = sequence_logprob_node(tape, vars, prior.config,
                                 sequences_of(episodes), false);
  for (std::size_t i = 0; i < episodes.size(); ++i)
    episodes[i].prior_logprob = lp.value()[i];
}

nlohmann::json RLRecord::to_json() const {
  return {
    {          "step",           step },
    {    "mean_score",     mean_score },
    {"valid_fraction", valid_fraction },
    {          "top1",           top1 },
    {         "top10",          top10 },
    {        "top100",         top100 },
    {          "loss",           loss },
    {  "oracle_calls",   oracle_calls },
    {       "wall_ms",        wall_ms },
  };
}

std::string_view stop_reason_name(StopReason reason) {
  switch (reason) {
  case StopReason::kMaxSteps:
    return "max_steps";
  case StopReason::kBudgetExhausted:
    return "budget_exhausted";
  case StopReason::kCallback:
    return "callback";
  }
  return "unknown";
}

FinetuneResult finetune(const ModelCheckpoint &prior, const OracleSpec &oracle,
                        const RLConfig &cfg, const FinetuneHooks &hooks) {
  cfg.validate();
  oracle.validate();
  prior.config.validate();

  FinetuneResult result { prior, {}, OracleLedger(oracle, cfg.budget),
                          StopReason::kMaxSteps, 0 };
  ModelCheckpoint &agent = result.agent;
  agent.step = 0;
  agent.optimizer = AdamState {};
  agent.optimizer->learning_rate = cfg.learning_rate;
  OracleLedger &ledger = result.ledger;
  ReplayBuffer replay(static_cast<std::size_t>(cfg.replay_capacity));

  SampleConfig sc;
  sc.temperature = cfg.temperature;
  sc.max_len = cfg.max_len == 0 ? prior.config.max_len : cfg.max_len;
  sc.batch_size = cfg.batch_size;

  const auto start = std::chrono::steady_clock::now();
  for (std::int64_t step = 0; step < cfg.max_steps; ++step) {
    if (ledger.exhausted()) {
      result.stop = StopReason::kBudgetExhausted;
      break;
    }
    sc.seed = derive_seed(cfg.seed, 0x7e570000ULL + static_cast<std::uint64_t>(step));
    SampleBatch batch = sample(agent, sc);

    std::vector<Episode> episodes(batch.size());
    bool exhausted = false;
    std::size_t valid = 0;
    for (std::size_t i = 0; i < batch.size() && !exhausted; ++i) {
      Episode &ep = episodes[i];
      ep.sequence = batch.sequences[i];
      ep.smiles = batch.decoded[i];
      ep.terminated = batch.terminated[i];
      if (!ep.terminated)
        continue;
      MolGraph mol;
      try {
        mol = parse(ep.smiles);
      } catch (const Error &) {
        continue;
      }
      ++valid;
      ep.key = canonical_key(mol);
      if (std::optional<double> hit = ledger.cached(ep.key)) {
        ep.score = *hit;
      } else if (ledger.exhausted()) {
        exhausted = true;
      } else {
        ep.score = score(oracle, mol);
        ledger.append(ep.key, ep.smiles, ep.score);
      }
    }
    if (exhausted) {
      result.stop = StopReason::kBudgetExhausted;
      break;
    }
    ++result.scoring_rounds;

    std::vector<Episode> all = episodes;
    for (Episode &ep: replay.top(static_cast<std::size_t>(cfg.replay_sample)))
      all.push_back(std::move(ep));
    assign_prior_logprobs(prior, all);
    RLLossAndGrad lg = rl_loss_and_grad(agent.params, agent.config, all, cfg.sigma);
    for (std::size_t i = 0; i < all.size(); ++i)
      all[i].agent_logprob = lg.agent_logprobs[i];
    if (!std::isfinite(lg.loss))
      throw DivergedLossError(step, agent);
    if (hooks.on_gradient)
      hooks.on_gradient(step, all, lg);

    adam_step(agent.params.tensors, lg.grads, *agent.optimizer);
    agent.step = step + 1;
    for (std::size_t i = 0; i < episodes.size(); ++i)
      replay.add(all[i]);

    RLRecord rec;
    rec.step = step + 1;
    double score_sum = 0;
    for (const Episode &ep: episodes)
      score_sum += ep.score;
    rec.mean_score = score_sum / static_cast<double>(episodes.size());
    rec.valid_fraction =
        static_cast<double>(valid) / static_cast<double>(episodes.size());
    const std::vector<double> seen = ledger.scores();
    rec.top1 = mean_top_k(seen, 1);
    rec.top10 = mean_top_k(seen, 10);
    rec.top100 = mean_top_k(seen, 100);
    rec.loss = lg.loss;
    rec.oracle_calls = ledger.used();
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    result.records.push_back(rec);
    if (hooks.on_step && !hooks.on_step(rec)) {
      result.stop = StopReason::kCallback;
      break;
    }
  }
  return result;
}
}  // namespace molgen
