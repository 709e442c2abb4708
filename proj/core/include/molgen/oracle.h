//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_ORACLE_H_
#define MOLGEN_ORACLE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "molgen/smiles.h"

namespace molgen {
enum class OracleKind {
  kSimilarity,
  kIsomer,
  kRingCount,
  kLengthWindow,
  kMpoProduct,
};

std::string_view oracle_kind_name(OracleKind kind);

/// Scoring function over molecules; every kind maps valid graphs to [0, 1].
struct OracleSpec {
  std::string name;
  OracleKind kind = OracleKind::kRingCount;

  // similarity
  std::string query;
  // isomer: element -> count, hydrogens included.
  std::map<std::string, int> formula;
  // ring_count; with at_least, any count >= target scores 1.
  double target = 1;
  bool at_least = false;
  // length_window, on heavy-atom count.
  int lo = 0;
  int hi = 0;
  double width = 1;
  // mpo_product
  std::vector<OracleSpec> components;
  std::vector<double> weights;

  // Throws kBadParameters.
  void validate() const;
  nlohmann::json to_json() const;
  static OracleSpec from_json(const nlohmann::json &j);
};

/// Resolves an oracle by name: "ring" (at least one ring), "ring_count:<n>", "similarity:<smiles>",
/// "isomer:<formula>", "length_window:<lo>:<hi>[:<width>]" or
/// "mpo:<name>,<name>,...". Throws kUnknownOracle / kBadParameters.
OracleSpec make_oracle(std::string_view name);

std::map<std::string, int> parse_formula(std::string_view formula);
// Element counts including implicit and explicit hydrogens.
std::map<std::string, int> element_counts(const MolGraph &mol);
int heavy_atom_count(const MolGraph &mol);

double score(const OracleSpec &spec, const MolGraph &mol);

struct LedgerEntry {
  std::int64_t call = 0;
  std::string key;
  std::string smiles;
  double score = 0;

  nlohmann::json to_json() const;
};

/// Ordered log of charged oracle calls under a fixed budget, with a cache of
/// every molecule already scored.
class OracleLedger {
public:
  OracleLedger(OracleSpec spec, std::int64_t budget);

  const OracleSpec &spec() const { return spec_; }
  std::int64_t budget() const { return budget_; }
  std::int64_t used() const { return static_cast<std::int64_t>(entries_.size()); }
  std::int64_t remaining() const { return budget_ - used(); }
  bool exhausted() const { return remaining() <= 0; }
  const std::vector<LedgerEntry> &entries() const { return entries_; }
  std::vector<double> scores() const;

  std::optional<double> cached(const std::string &key) const;
  // Appends a charged call; throws kBudgetExhausted when no budget remains.
  const LedgerEntry &append(std::string key, std::string smiles, double score);

  std::string serialize() const;
  void save(const std::filesystem::path &path) const;
  static OracleLedger parse(std::string_view text);
  static OracleLedger load(const std::filesystem::path &path);

private:
  OracleSpec spec_;
  std::int64_t budget_;
  std::vector<LedgerEntry> entries_;
  std::unordered_map<std::string, double> cache_;
};

/// Scores `smiles` against the budget. Invalid SMILES score 0 without
/// touching the ledger; molecules already seen return the cached score;
/// otherwise one call is charged.
double score_budgeted(OracleLedger &ledger, const OracleSpec &spec,
                      std::string_view smiles);
}  // namespace molgen

#endif  // MOLGEN_ORACLE_H_
