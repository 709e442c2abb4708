//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <fstream>
#include <sstream>

#include "molgen/error.h"
#include "molgen/oracle.h"
#include "molgen/run_record.h"

namespace molgen {
nlohmann::json LedgerEntry::to_json() const {
  return {
    {  "call",   call },
    {   "key",    key },
    { "score",  score },
    {"smiles", smiles },
  };
}

OracleLedger::OracleLedger(OracleSpec spec, std::int64_t budget)
    : spec_(std::move(spec)), budget_(budget) {
  if (budget_ < 0)
    throw Error(ErrorCode::kBadParameters, "oracle budget must be >= 0");
}

std::vector<double> OracleLedger::scores() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const LedgerEntry &e: entries_)
    out.push_back(e.score);
  return out;
}

std::optional<double> OracleLedger::cached(const std::string &key) const {
  auto it = cache_.find(key);
  if (it == cache_.end())
    return std::nullopt;
  return it->second;
}

const LedgerEntry &OracleLedger::append(std::string key, std::string smiles,
                                        double score) {
  if (exhausted())
    throw Error(ErrorCode::kBudgetExhausted,
                "oracle budget of " + std::to_string(budget_)
                    + " calls exhausted");
  if (cache_.count(key) != 0)
    throw Error(ErrorCode::kBadParameters,
                "molecule '" + key + "' already in ledger");
  cache_.emplace(key, score);
  entries_.push_back({ used() + 1, std::move(key), std::move(smiles), score });
  return entries_.back();
}

std::string OracleLedger::serialize() const {
  std::string out;
  out += dump_line({
      {"budget",        budget_ },
      {"oracle",     spec_.name },
      {"params", spec_.to_json()},
  });
  out += '\n';
  for (const LedgerEntry &e: entries_)
    out += dump_line(e.to_json()) + '\n';
  return out;
}

void OracleLedger::save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::kIoError, "cannot write ledger " + path.string());
  out << serialize();
  if (!out)
    throw Error(ErrorCode::kIoError, "failed writing ledger " + path.string());
}

OracleLedger OracleLedger::parse(std::string_view text) {
  std::istringstream in { std::string(text) };
  std::string line;
  std::optional<OracleLedger> ledger;
  std::size_t lineno = 0;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty())
        continue;
      nlohmann::json j = nlohmann::json::parse(line);
      if (!ledger) {
        OracleSpec spec;
        if (j.contains("params") && j["params"].is_object()
            && j["params"].contains("kind"))
          spec = OracleSpec::from_json(j["params"]);
        else
          spec = make_oracle(j.at("oracle").get<std::string>());
        spec.name = j.at("oracle").get<std::string>();
        ledger.emplace(std::move(spec), j.at("budget").get<std::int64_t>());
        continue;
      }
      const std::int64_t call = j.at("call").get<std::int64_t>();
      if (call != ledger->used() + 1)
        throw Error(ErrorCode::kBadParameters,
                    "ledger line " + std::to_string(lineno)
                        + ": call indices must increase by one");
      ledger->append(j.at("key").get<std::string>(),
                     j.value("smiles", std::string()),
                     j.at("score").get<double>());
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kBadParameters,
                "malformed ledger line " + std::to_string(lineno) + ": "
                    + e.what());
  }
  if (!ledger)
    throw Error(ErrorCode::kEmptyLedger, "ledger has no header line");
  return std::move(*ledger);
}

OracleLedger OracleLedger::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot read ledger " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

double score_budgeted(OracleLedger &ledger, const OracleSpec &spec,
                      std::string_view smiles) {
  MolGraph mol;
  try {
    mol = parse(smiles);
  } catch (const Error &) {
    return 0.0;
  }
  std::string key = canonical_key(mol);
  if (std::optional<double> hit = ledger.cached(key))
    return *hit;
  if (ledger.exhausted())
    throw Error(ErrorCode::kBudgetExhausted,
                "oracle budget of " + std::to_string(ledger.budget())
                    + " calls exhausted");
  const double s = score(spec, mol);
  ledger.append(std::move(key), std::string(smiles), s);
  return s;
}
}  // namespace molgen
