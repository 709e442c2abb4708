//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_EVALUATOR_H_
#define MOLGEN_EVALUATOR_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "molgen/oracle.h"

namespace molgen {
/// Running mean of the k best scores after each call, extended with the
/// last value up to `budget` entries.
std::vector<double> running_top_k(std::span<const double> scores, int k,
                                  std::int64_t budget);

double auc_top_k(std::span<const double> scores, int k, std::int64_t budget);
// budget 0 uses the ledger's budget.
double auc_top_k(const OracleLedger &ledger, int k, std::int64_t budget = 0);

double mean_top_k(std::span<const double> scores, int k);

/// Mean pairwise Tanimoto distance over the given molecules.
double internal_diversity(const std::vector<std::string> &smiles);
/// Diversity of the 100 highest-scoring molecules of the ledger.
double diversity_top100(const OracleLedger &ledger);

struct ScoredSample {
  std::string smiles;
  double score = 0;
};

struct SummaryStats {
  std::size_t count = 0;
  double mean = 0;
  double min = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  double max = 0;

  nlohmann::json to_json() const;
};

// Linear-interpolated quantile of sorted data.
double quantile(std::span<const double> sorted, double q);
SummaryStats summarize(std::vector<double> values);

struct LengthBin {
  int lo = 0;  // inclusive
  int hi = 0;  // inclusive
  SummaryStats stats;
};

struct LengthAblation {
  int threshold = 50;
  int bin_width = 10;
  std::vector<LengthBin> bins;
  // short: length <= threshold; long: length > threshold.
  SummaryStats short_side;
  SummaryStats long_side;

  bool short_empty() const { return short_side.count == 0; }
  bool long_empty() const { return long_side.count == 0; }
  nlohmann::json to_json() const;
};

LengthAblation length_ablation(const std::vector<ScoredSample> &samples,
                               int threshold = 50, int bin_width = 10);

struct MetricReport {
  std::string oracle;
  std::int64_t budget = 0;
  std::int64_t n_calls = 0;
  std::map<int, double> auc;        // k -> AUC top-k
  std::map<int, double> top_final;  // k -> final top-k mean
  std::optional<double> diversity_top100;
  std::optional<LengthAblation> length;

  double auc_top(int k) const { return auc.at(k); }
  nlohmann::json to_json() const;
};

MetricReport evaluate_ledger(const OracleLedger &ledger,
                             const std::vector<int> &ks = { 1, 10, 100 },
                             std::int64_t budget = 0);

struct MethodReports {
  std::string name;
  std::vector<MetricReport> reports;  // one per oracle
};

struct RankedMethod {
  std::string name;
  double sum_auc_top10 = 0;
  int rank = 0;
};

std::vector<RankedMethod> rank_methods(const std::vector<MethodReports> &methods);

struct CurveStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

/// Pointwise mean and sample standard deviation of equal-length curves.
CurveStats aggregate_curves(const std::vector<std::vector<double>> &curves);
}  // namespace molgen

#endif  // MOLGEN_EVALUATOR_H_
