//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/oracle.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "molgen/error.h"

namespace molgen {
namespace {
[[noreturn]] void bad(const std::string &msg) {
  throw Error(ErrorCode::kBadParameters, "oracle: " + msg);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = s.find(sep, pos);
    parts.push_back(s.substr(pos, next - pos));
    if (next == std::string_view::npos)
      return parts;
    pos = next + 1;
  }
}

template <class T>
T parse_number(std::string_view text) {
  T value {};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    bad("cannot parse number '" + std::string(text) + "'");
  return value;
}

OracleKind kind_from_name(std::string_view name) {
  if (name == "similarity")
    return OracleKind::kSimilarity;
  if (name == "isomer")
    return OracleKind::kIsomer;
  if (name == "ring_count")
    return OracleKind::kRingCount;
  if (name == "length_window")
    return OracleKind::kLengthWindow;
  if (name == "mpo_product")
    return OracleKind::kMpoProduct;
  throw Error(ErrorCode::kUnknownOracle,
              "unknown oracle kind '" + std::string(name) + "'");
}

double clamp01(double x) {
  return std::clamp(x, 0.0, 1.0);
}
}  // namespace

std::string_view oracle_kind_name(OracleKind kind) {
  switch (kind) {
  case OracleKind::kSimilarity:
    return "similarity";
  case OracleKind::kIsomer:
    return "isomer";
  case OracleKind::kRingCount:
    return "ring_count";
  case OracleKind::kLengthWindow:
    return "length_window";
  case OracleKind::kMpoProduct:
    return "mpo_product";
  }
  return "unknown";
}

void OracleSpec::validate() const {
  switch (kind) {
  case OracleKind::kSimilarity:
    if (!is_valid(query))
      bad("similarity query '" + query + "' is not a valid SMILES");
    break;
  case OracleKind::kIsomer:
    if (formula.empty())
      bad("isomer oracle needs a target formula");
    break;
  case OracleKind::kRingCount:
    if (!(target >= 0))
      bad("ring_count target must be >= 0");
    break;
  case OracleKind::kLengthWindow:
    if (lo < 0 || hi < lo || !(width > 0))
      bad("length_window needs 0 <= lo <= hi and width > 0");
    break;
  case OracleKind::kMpoProduct:
    if (components.empty())
      bad("mpo_product needs at least one component");
    if (!weights.empty() && weights.size() != components.size())
      bad("mpo_product weights must match components");
    for (double w: weights)
      if (!(w > 0))
        bad("mpo_product weights must be positive");
    for (const OracleSpec &c: components)
      c.validate();
    break;
  }
}

nlohmann::json OracleSpec::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["kind"] = oracle_kind_name(kind);
  switch (kind) {
  case OracleKind::kSimilarity:
    j["query"] = query;
    break;
  case OracleKind::kIsomer:
    j["formula"] = formula;
    break;
  case OracleKind::kRingCount:
    j["target"] = target;
    j["at_least"] = at_least;
    break;
  case OracleKind::kLengthWindow:
    j["lo"] = lo;
    j["hi"] = hi;
    j["width"] = width;
    break;
  case OracleKind::kMpoProduct: {
    nlohmann::json comps = nlohmann::json::array();
    for (const OracleSpec &c: components)
      comps.push_back(c.to_json());
    j["components"] = comps;
    j["weights"] = weights;
    break;
  }
  }
  return j;
}

OracleSpec OracleSpec::from_json(const nlohmann::json &j) {
  OracleSpec s;
  try {
    s.kind = kind_from_name(j.at("kind").get<std::string>());
    s.name = j.value("name", std::string(oracle_kind_name(s.kind)));
    s.query = j.value("query", std::string());
    if (j.contains("formula")) {
      if (j["formula"].is_string())
        s.formula = parse_formula(j["formula"].get<std::string>());
      else
        s.formula = j["formula"].get<std::map<std::string, int>>();
    }
    s.target = j.value("target", s.target);
    s.at_least = j.value("at_least", s.at_least);
    s.lo = j.value("lo", s.lo);
    s.hi = j.value("hi", s.hi);
    s.width = j.value("width", s.width);
    if (j.contains("components"))
      for (const nlohmann::json &c: j["components"])
        s.components.push_back(from_json(c));
    s.weights = j.value("weights", std::vector<double> {});
  } catch (const nlohmann::json::exception &e) {
    bad(std::string("malformed oracle parameters: ") + e.what());
  }
  s.validate();
  return s;
}

std::map<std::string, int> parse_formula(std::string_view formula) {
  std::map<std::string, int> counts;
  std::size_t i = 0;
  while (i < formula.size()) {
    if (!std::isupper(static_cast<unsigned char>(formula[i])))
      bad("malformed formula '" + std::string(formula) + "'");
    std::size_t j = i + 1;
    while (j < formula.size()
           && std::islower(static_cast<unsigned char>(formula[j])))
      ++j;
    std::string elem(formula.substr(i, j - i));
    std::size_t k = j;
    while (k < formula.size()
           && std::isdigit(static_cast<unsigned char>(formula[k])))
      ++k;
    const int n = k == j ? 1 : parse_number<int>(formula.substr(j, k - j));
    counts[elem] += n;
    i = k;
  }
  if (counts.empty())
    bad("empty formula");
  return counts;
}

std::map<std::string, int> element_counts(const MolGraph &mol) {
  std::map<std::string, int> counts;
  for (const Atom &a: mol.atoms()) {
    ++counts[a.element];
    if (a.hydrogens > 0)
      counts["H"] += a.hydrogens;
  }
  return counts;
}

int heavy_atom_count(const MolGraph &mol) {
  return static_cast<int>(std::count_if(
      mol.atoms().begin(), mol.atoms().end(),
      [](const Atom &a) { return a.element != "H"; }));
}

OracleSpec make_oracle(std::string_view name) {
  OracleSpec s;
  s.name = std::string(name);
  const std::size_t colon = name.find(':');
  const std::string_view head = name.substr(0, colon);
  const std::string_view args =
      colon == std::string_view::npos ? std::string_view() : name.substr(colon + 1);

  if (head == "ring" && colon == std::string_view::npos) {
    s.kind = OracleKind::kRingCount;
    s.target = 1;
    s.at_least = true;
  } else if (head == "ring_count") {
    s.kind = OracleKind::kRingCount;
    s.target = args.empty() ? 1.0 : parse_number<double>(args);
  } else if (head == "similarity") {
    s.kind = OracleKind::kSimilarity;
    s.query = std::string(args);
  } else if (head == "isomer") {
    s.kind = OracleKind::kIsomer;
    s.formula = parse_formula(args);
  } else if (head == "length_window") {
    s.kind = OracleKind::kLengthWindow;
    std::vector<std::string_view> parts = split(args, ':');
    if (parts.size() < 2 || parts.size() > 3)
      bad("length_window expects lo:hi[:width]");
    s.lo = parse_number<int>(parts[0]);
    s.hi = parse_number<int>(parts[1]);
    s.width = parts.size() == 3 ? parse_number<double>(parts[2]) : 5.0;
  } else if (head == "mpo") {
    s.kind = OracleKind::kMpoProduct;
    for (std::string_view part: split(args, ','))
      s.components.push_back(make_oracle(part));
  } else {
    throw Error(ErrorCode::kUnknownOracle,
                "unknown oracle '" + std::string(name) + "'");
  }
  s.validate();
  return s;
}

double score(const OracleSpec &spec, const MolGraph &mol) {
  switch (spec.kind) {
  case OracleKind::kSimilarity:
    return clamp01(tanimoto(fingerprint(mol), fingerprint(parse(spec.query))));
  case OracleKind::kIsomer: {
    std::map<std::string, int> have = element_counts(mol);
    std::set<std::string> elems;
    for (const auto &[e, _]: have)
      elems.insert(e);
    for (const auto &[e, _]: spec.formula)
      elems.insert(e);
    int l1 = 0;
    for (const std::string &e: elems) {
      auto a = have.find(e);
      auto b = spec.formula.find(e);
      l1 += std::abs((a == have.end() ? 0 : a->second)
                     - (b == spec.formula.end() ? 0 : b->second));
    }
    return l1 == 0 ? 1.0 : std::exp(-static_cast<double>(l1));
  }
  case OracleKind::kRingCount: {
    const double rings = mol.num_rings();
    if (spec.at_least && rings >= spec.target)
      return 1.0;
    return clamp01(1.0 - std::abs(rings - spec.target) / std::max(spec.target, 1.0));
  }
  case OracleKind::kLengthWindow: {
    const int n = heavy_atom_count(mol);
    if (n >= spec.lo && n <= spec.hi)
      return 1.0;
    const double dist = n < spec.lo ? spec.lo - n : n - spec.hi;
    return clamp01(1.0 - dist / spec.width);
  }
  case OracleKind::kMpoProduct: {
    double log_sum = 0, weight_sum = 0;
    for (std::size_t i = 0; i < spec.components.size(); ++i) {
      const double s = score(spec.components[i], mol);
      if (s <= 0)
        return 0.0;
      const double w = spec.weights.empty() ? 1.0 : spec.weights[i];
      log_sum += w * std::log(s);
      weight_sum += w;
    }
    return clamp01(std::exp(log_sum / weight_sum));
  }
  }
  throw Error(ErrorCode::kUnknownOracle, "unhandled oracle kind");
}
}  // namespace molgen
