//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/evaluator.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "molgen/error.h"
#include "molgen/smiles.h"

namespace molgen {
namespace {
class NeumaierSum {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0;
  double comp_ = 0;
};

void check_k(int k) {
  if (k < 1)
    throw Error(ErrorCode::kBadParameters, "k must be >= 1");
}

nlohmann::json optional_json(const std::optional<double> &v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
}  // namespace

std::vector<double> running_top_k(std::span<const double> scores, int k,
                                  std::int64_t budget) {
  check_k(k);
  if (scores.empty())
    throw Error(ErrorCode::kEmptyLedger, "no oracle calls to evaluate");
  if (budget < static_cast<std::int64_t>(scores.size()))
    throw Error(ErrorCode::kBadParameters,
                "ledger has more entries than the budget");
  // Min-heap of the current top k. The mean is taken relative to the heap
  // minimum, which keeps runs of equal scores exact.
  std::vector<double> best;
  best.reserve(static_cast<std::size_t>(k));
  std::vector<double> t;
  t.reserve(static_cast<std::size_t>(budget));
  double mean = 0;
  for (double s: scores) {
    bool changed = false;
    if (static_cast<int>(best.size()) < k) {
      best.push_back(s);
      std::push_heap(best.begin(), best.end(), std::greater<>());
      changed = true;
    } else if (s > best.front()) {
      std::pop_heap(best.begin(), best.end(), std::greater<>());
      best.back() = s;
      std::push_heap(best.begin(), best.end(), std::greater<>());
      changed = true;
    }
    if (changed) {
      const double lo = best.front();
      NeumaierSum acc;
      for (double x: best)
        acc.add(x - lo);
      mean = lo + acc.value() / static_cast<double>(best.size());
    }
    t.push_back(mean);
  }
  t.resize(static_cast<std::size_t>(budget), t.back());
  return t;
}

double auc_top_k(std::span<const double> scores, int k, std::int64_t budget) {
  const std::vector<double> t = running_top_k(scores, k, budget);
  // Integrate the step function run by run so constant curves are exact.
  NeumaierSum acc;
  const double n = static_cast<double>(t.size());
  std::size_t i = 0;
  while (i < t.size()) {
    std::size_t j = i;
    while (j < t.size() && t[j] == t[i])
      ++j;
    acc.add(t[i] * (static_cast<double>(j - i) / n));
    i = j;
  }
  return std::clamp(acc.value(), 0.0, 1.0);
}

double auc_top_k(const OracleLedger &ledger, int k, std::int64_t budget) {
  const std::vector<double> s = ledger.scores();
  return auc_top_k(s, k, budget == 0 ? ledger.budget() : budget);
}

double mean_top_k(std::span<const double> scores, int k) {
  check_k(k);
  if (scores.empty())
    throw Error(ErrorCode::kEmptyLedger, "no scores");
  std::vector<double> v(scores.begin(), scores.end());
  const std::size_t n = std::min(v.size(), static_cast<std::size_t>(k));
  std::partial_sort(v.begin(), v.begin() + static_cast<long>(n), v.end(),
                    std::greater<>());
  NeumaierSum acc;
  for (std::size_t i = 0; i < n; ++i)
    acc.add(v[i]);
  return acc.value() / static_cast<double>(n);
}

double internal_diversity(const std::vector<std::string> &smiles) {
  if (smiles.size() < 2)
    throw Error(ErrorCode::kTooFewMolecules,
                "diversity needs at least 2 molecules");
  std::vector<Fingerprint> fps;
  fps.reserve(smiles.size());
  for (const std::string &s: smiles)
    fps.push_back(fingerprint(parse(s)));
  NeumaierSum acc;
  for (std::size_t i = 0; i < fps.size(); ++i)
    for (std::size_t j = i + 1; j < fps.size(); ++j)
      acc.add(1.0 - tanimoto(fps[i], fps[j]));
  const double pairs =
      static_cast<double>(fps.size()) * static_cast<double>(fps.size() - 1) / 2;
  return std::clamp(acc.value() / pairs, 0.0, 1.0);
}

double diversity_top100(const OracleLedger &ledger) {
  std::vector<const LedgerEntry *> order;
  for (const LedgerEntry &e: ledger.entries())
    order.push_back(&e);
  std::stable_sort(order.begin(), order.end(),
                   [](const LedgerEntry *a, const LedgerEntry *b) {
                     return a->score > b->score;
                   });
  std::vector<std::string> top;
  for (std::size_t i = 0; i < order.size() && top.size() < 100; ++i)
    top.push_back(order[i]->smiles);
  return internal_diversity(top);
}

nlohmann::json SummaryStats::to_json() const {
  if (count == 0)
    return {
      {"count", 0 }
    };
  return {
    { "count",  count },
    {  "mean",   mean },
    {   "min",    min },
    {    "q1",     q1 },
    {"median", median },
    {    "q3",     q3 },
    {   "max",    max },
  };
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty())
    throw Error(ErrorCode::kBadParameters, "quantile of empty data");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize(std::vector<double> values) {
  SummaryStats s;
  s.count = values.size();
  if (values.empty())
    return s;
  std::sort(values.begin(), values.end());
  NeumaierSum acc;
  for (double v: values)
    acc.add(v);
  s.mean = acc.value() / static_cast<double>(values.size());
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  return s;
}

nlohmann::json LengthAblation::to_json() const {
  nlohmann::json bins_json = nlohmann::json::array();
  for (const LengthBin &b: bins) {
    nlohmann::json j = b.stats.to_json();
    j["lo"] = b.lo;
    j["hi"] = b.hi;
    bins_json.push_back(j);
  }
  nlohmann::json short_json = short_side.to_json();
  short_json["empty"] = short_empty();
  nlohmann::json long_json = long_side.to_json();
  long_json["empty"] = long_empty();
  return {
    {"threshold", threshold },
    {"bin_width", bin_width },
    {     "bins", bins_json },
    {    "short", short_json},
    {     "long", long_json },
  };
}

LengthAblation length_ablation(const std::vector<ScoredSample> &samples,
                               int threshold, int bin_width) {
  if (bin_width < 1)
    throw Error(ErrorCode::kBadParameters, "bin_width must be >= 1");
  LengthAblation out;
  out.threshold = threshold;
  out.bin_width = bin_width;
  std::map<int, std::vector<double>> by_bin;
  std::vector<double> short_scores, long_scores;
  for (const ScoredSample &s: samples) {
    const int len = static_cast<int>(s.smiles.size());
    by_bin[len / bin_width].push_back(s.score);
    (len > threshold ? long_scores : short_scores).push_back(s.score);
  }
  for (auto &[idx, scores]: by_bin)
    out.bins.push_back({ idx * bin_width, (idx + 1) * bin_width - 1,
                         summarize(std::move(scores)) });
  out.short_side = summarize(std::move(short_scores));
  out.long_side = summarize(std::move(long_scores));
  return out;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["oracle"] = oracle;
  j["budget"] = budget;
  j["n_calls"] = n_calls;
  j["scaling"] = "identity";
  for (const auto &[k, v]: auc)
    j["auc_top" + std::to_string(k)] = v;
  for (const auto &[k, v]: top_final)
    j["top" + std::to_string(k) + "_final"] = v;
  j["diversity_top100"] = optional_json(diversity_top100);
  j["length_ablation"] = length ? length->to_json() : nlohmann::json(nullptr);
  return j;
}

MetricReport evaluate_ledger(const OracleLedger &ledger,
                             const std::vector<int> &ks, std::int64_t budget) {
  MetricReport r;
  r.oracle = ledger.spec().name;
  r.budget = budget == 0 ? ledger.budget() : budget;
  r.n_calls = ledger.used();
  const std::vector<double> scores = ledger.scores();
  for (int k: ks) {
    r.auc[k] = auc_top_k(scores, k, r.budget);
    r.top_final[k] = mean_top_k(scores, k);
  }
  if (ledger.used() >= 2)
    r.diversity_top100 = diversity_top100(ledger);
  return r;
}

std::vector<RankedMethod> rank_methods(const std::vector<MethodReports> &methods) {
  std::vector<RankedMethod> out;
  for (const MethodReports &m: methods) {
    NeumaierSum acc;
    for (const MetricReport &r: m.reports)
      acc.add(r.auc_top(10));
    out.push_back({ m.name, acc.value(), 0 });
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankedMethod &a, const RankedMethod &b) {
                     if (a.sum_auc_top10 != b.sum_auc_top10)
                       return a.sum_auc_top10 > b.sum_auc_top10;
                     return a.name < b.name;
                   });
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].rank = static_cast<int>(i) + 1;
  return out;
}

CurveStats aggregate_curves(const std::vector<std::vector<double>> &curves) {
  if (curves.empty())
    throw Error(ErrorCode::kBadParameters, "no curves to aggregate");
  const std::size_t n = curves.front().size();
  for (const auto &c: curves)
    if (c.size() != n)
      throw Error(ErrorCode::kShapeMismatch, "curves differ in length");
  CurveStats out;
  out.mean.resize(n);
  out.stddev.resize(n);
  const double m = static_cast<double>(curves.size());
  for (std::size_t i = 0; i < n; ++i) {
    NeumaierSum acc;
    for (const auto &c: curves)
      acc.add(c[i]);
    const double mean = acc.value() / m;
    NeumaierSum sq;
    for (const auto &c: curves)
      sq.add((c[i] - mean) * (c[i] - mean));
    out.mean[i] = mean;
    out.stddev[i] = curves.size() > 1 ? std::sqrt(sq.value() / (m - 1)) : 0.0;
  }
  return out;
}
}  // namespace molgen
