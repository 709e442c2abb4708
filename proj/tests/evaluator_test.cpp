//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/evaluator.h"

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "molgen/error.h"
#include "test_util.h"

namespace molgen {
namespace {
OracleLedger ledger_of(const std::vector<double> &scores, std::int64_t budget) {
  OracleLedger l(make_oracle("ring"), budget);
  for (std::size_t i = 0; i < scores.size(); ++i)
    l.append("k" + std::to_string(i), "C", scores[i]);
  return l;
}

std::vector<double> random_scores(std::mt19937_64 &rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> s(n);
  for (double &x: s)
    x = u(rng);
  return s;
}

TEST(AucTopK, HandLedger) {
  const std::vector<double> s { 0.2, 0.5, 0.4, 0.9 };
  EXPECT_EQ(running_top_k(s, 1, 4), (std::vector<double> { 0.2, 0.5, 0.5, 0.9 }));
  EXPECT_EQ(auc_top_k(s, 1, 4), 0.525);
  EXPECT_EQ(auc_top_k(ledger_of(s, 4), 1), 0.525);
}

TEST(AucTopK, ConstantScores) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const double c = u(rng);
    const std::size_t n = 1 + rng() % 300;
    const std::int64_t budget = static_cast<std::int64_t>(n + rng() % 300);
    const std::vector<double> s(n, c);
    for (int k: { 1, 10, 100 })
      ASSERT_EQ(auc_top_k(s, k, budget), c) << c << " " << n << " " << budget;
  }
}

TEST(AucTopK, TailCarriedForward) {
  EXPECT_EQ(auc_top_k(std::vector<double> { 1.0 }, 1, 10000), 1.0);
  EXPECT_DOUBLE_EQ(auc_top_k(std::vector<double> { 0.0, 1.0 }, 1, 4), 0.75);
}

TEST(AucTopK, FewerThanKUsesAllCalls) {
  const std::vector<double> s { 0.9, 0.1 };
  EXPECT_EQ(running_top_k(s, 10, 2), (std::vector<double> { 0.9, 0.5 }));
}

TEST(AucTopK, Errors) {
  try {
    auc_top_k(std::vector<double> {}, 1, 10);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyLedger);
  }
  EXPECT_THROW(auc_top_k(std::vector<double> { 0.1, 0.2 }, 1, 1), Error);
  EXPECT_THROW(auc_top_k(std::vector<double> { 0.1 }, 0, 1), Error);
}

TEST(AucTopK, OrderingAcrossK) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> s = random_scores(rng, 1 + rng() % 400);
    const std::int64_t budget = static_cast<std::int64_t>(s.size() + rng() % 100);
    const double a1 = auc_top_k(s, 1, budget), a10 = auc_top_k(s, 10, budget),
                 a100 = auc_top_k(s, 100, budget);
    EXPECT_GE(a1, a10);
    EXPECT_GE(a10, a100);
    EXPECT_GE(a100, 0.0);
    EXPECT_LE(a1, 1.0);
  }
}

TEST(AucTopK, CurveNondecreasingOnceKCallsSeen) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> s = random_scores(rng, 150);
    for (int k: { 1, 10, 100 }) {
      const std::vector<double> t = running_top_k(s, k, 200);
      for (std::size_t i = static_cast<std::size_t>(k); i < t.size(); ++i)
        ASSERT_GE(t[i], t[i - 1]);
    }
  }
}

TEST(AucTopK, RaisingAScoreNeverLowersAuc) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s = random_scores(rng, 60);
    const std::size_t j = rng() % s.size();
    const double before1 = auc_top_k(s, 1, 80), before10 = auc_top_k(s, 10, 80);
    s[j] = std::min(1.0, s[j] + 0.3);
    EXPECT_GE(auc_top_k(s, 1, 80), before1);
    EXPECT_GE(auc_top_k(s, 10, 80), before10);
  }
}

double brute_force_diversity(const std::vector<std::string> &smiles) {
  double total = 0;
  int pairs = 0;
  for (std::size_t i = 0; i < smiles.size(); ++i)
    for (std::size_t j = 0; j < smiles.size(); ++j) {
      if (j <= i)
        continue;
      const Fingerprint a = fingerprint(parse(smiles[i]));
      const Fingerprint b = fingerprint(parse(smiles[j]));
      std::size_t both = 0, either = 0;
      for (std::size_t bit = 0; bit < a.width(); ++bit) {
        both += a.test(bit) && b.test(bit);
        either += a.test(bit) || b.test(bit);
      }
      total += 1.0 - (either == 0 ? 1.0 : static_cast<double>(both) / either);
      ++pairs;
    }
  return total / pairs;
}

TEST(Diversity, MatchesBruteForce) {
  const std::vector<std::string> five { "CCO", "c1ccccc1", "CC(=O)O",
                                        "C1CCNCC1", "CCN(C)C" };
  EXPECT_NEAR(internal_diversity(five), brute_force_diversity(five), 1e-12);
}

TEST(Diversity, DisjointAndIdenticalFingerprints) {
  EXPECT_EQ(internal_diversity({ "C", "O" }), 1.0);
  EXPECT_EQ(internal_diversity({ "CCO", "OCC" }), 0.0);
  try {
    internal_diversity({ "C" });
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewMolecules);
  }
}

TEST(Diversity, SymmetricUnderReordering) {
  std::vector<std::string> mols = test::data_lines("corpus_1000.smi");
  mols.resize(30);
  const double a = internal_diversity(mols);
  std::reverse(mols.begin(), mols.end());
  EXPECT_NEAR(internal_diversity(mols), a, 1e-12);
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
}

TEST(Diversity, LedgerUsesTopHundred) {
  const OracleSpec spec = make_oracle("similarity:CCO");
  OracleLedger ledger(spec, 1000);
  std::vector<std::string> mols = test::data_lines("corpus_1000.smi");
  for (const std::string &m: mols)
    if (ledger.used() < 150)
      score_budgeted(ledger, spec, m);
  std::vector<LedgerEntry> entries = ledger.entries();
  std::stable_sort(entries.begin(), entries.end(),
                   [](const LedgerEntry &a, const LedgerEntry &b) {
                     return a.score > b.score;
                   });
  std::vector<std::string> top;
  for (std::size_t i = 0; i < 100; ++i)
    top.push_back(entries[i].smiles);
  EXPECT_NEAR(diversity_top100(ledger), brute_force_diversity(top), 1e-12);
}

TEST(LengthAblation, BoundaryAndPartition) {
  std::vector<ScoredSample> samples;
  samples.push_back({ std::string(50, 'C'), 0.4 });
  LengthAblation a = length_ablation(samples, 50, 10);
  EXPECT_EQ(a.short_side.count, 1);
  EXPECT_TRUE(a.long_empty());

  samples.clear();
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i)
    samples.push_back({ std::string(1 + rng() % 90, 'C'),
                        static_cast<double>(rng() % 100) / 100 });
  a = length_ablation(samples, 50, 10);
  std::size_t total = 0;
  for (std::size_t i = 0; i < a.bins.size(); ++i) {
    total += a.bins[i].stats.count;
    EXPECT_EQ(a.bins[i].hi - a.bins[i].lo + 1, 10);
    if (i > 0)
      EXPECT_GT(a.bins[i].lo, a.bins[i - 1].hi);
    const SummaryStats &s = a.bins[i].stats;
    EXPECT_LE(s.min, s.q1);
    EXPECT_LE(s.q1, s.median);
    EXPECT_LE(s.median, s.q3);
    EXPECT_LE(s.q3, s.max);
  }
  EXPECT_EQ(total, samples.size());
  EXPECT_EQ(a.short_side.count + a.long_side.count, samples.size());
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v { 1, 2, 3, 4 };
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 4);
  const SummaryStats s = summarize({ 3, 1, 2 });
  EXPECT_EQ(s.median, 2);
  EXPECT_EQ(s.mean, 2);
}

MetricReport report_with_sum(double sum) {
  MetricReport r;
  r.auc[10] = sum;
  return r;
}

TEST(RankMethods, HigherSumRanksFirst) {
  const std::vector<MethodReports> methods {
    { "baseline", { report_with_sum(12.047) } },
    { "molgen", { report_with_sum(12.197) } },
  };
  const std::vector<RankedMethod> ranked = rank_methods(methods);
  EXPECT_EQ(ranked[0].name, "molgen");
  EXPECT_EQ(ranked[0].rank, 1);
  EXPECT_EQ(ranked[1].rank, 2);
  std::vector<MethodReports> swapped { methods[1], methods[0] };
  EXPECT_EQ(rank_methods(swapped)[0].name, "molgen");
  EXPECT_EQ(rank_methods({ methods[0] })[0].rank, 1);
}

TEST(RankMethods, SumsAcrossOraclesAndBreaksTiesByName) {
  const std::vector<MethodReports> methods {
    { "b", { report_with_sum(0.5), report_with_sum(0.25) } },
    { "a", { report_with_sum(0.25), report_with_sum(0.5) } },
    { "c", { report_with_sum(0.9) } },
  };
  const std::vector<RankedMethod> r = rank_methods(methods);
  EXPECT_EQ(r[0].name, "c");
  EXPECT_EQ(r[1].name, "a");
  EXPECT_EQ(r[2].name, "b");
  EXPECT_EQ(r[1].sum_auc_top10, 0.75);
}

TEST(Report, EvaluateLedger) {
  const OracleLedger l = ledger_of({ 0.2, 0.5, 0.4, 0.9 }, 4);
  const MetricReport r = evaluate_ledger(l);
  EXPECT_EQ(r.auc_top(1), 0.525);
  EXPECT_GE(r.auc_top(1), r.auc_top(10));
  EXPECT_GE(r.auc_top(10), r.auc_top(100));
  EXPECT_EQ(r.top_final.at(1), 0.9);
  EXPECT_EQ(r.n_calls, 4);
  const nlohmann::json j = r.to_json();
  for (const char *key: { "auc_top1", "auc_top10", "auc_top100", "top1_final",
                          "diversity_top100", "n_calls", "budget", "scaling" })
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Aggregate, MeanAndSampleStd) {
  const CurveStats s = aggregate_curves({ { 1, 2 }, { 3, 2 } });
  EXPECT_EQ(s.mean, (std::vector<double> { 2, 2 }));
  EXPECT_DOUBLE_EQ(s.stddev[0], std::sqrt(2.0));
  EXPECT_EQ(s.stddev[1], 0.0);
  EXPECT_THROW(aggregate_curves({ { 1 }, { 1, 2 } }), Error);
}
}  // namespace
}  // namespace molgen
