//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/smiles.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "molgen/error.h"

namespace molgen {
namespace {
constexpr std::array kElements {
  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
  "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
  "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
  "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
  "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
  "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
  "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
  "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu",
};

bool is_element(std::string_view sym) {
  return std::find(kElements.begin(), kElements.end(), sym) != kElements.end();
}

bool is_organic_char(char c) {
  switch (c) {
  case 'B':
  case 'C':
  case 'N':
  case 'O':
  case 'P':
  case 'S':
  case 'F':
  case 'I':
  case 'b':
  case 'c':
  case 'n':
  case 'o':
  case 'p':
  case 's':
    return true;
  default:
    return false;
  }
}

bool is_bond_char(char c) {
  return c == '-' || c == '=' || c == '#' || c == ':' || c == '/'
         || c == '\\';
}

[[noreturn]] void fail(ErrorCode code, const std::string &msg,
                       std::int64_t detail = -1) {
  throw Error(code, msg, detail);
}

BondOrder bond_from_char(char c) {
  switch (c) {
  case '=':
    return BondOrder::kDouble;
  case '#':
    return BondOrder::kTriple;
  case ':':
    return BondOrder::kAromatic;
  default:
    // '-' and the directional '/' '\' markers.
    return BondOrder::kSingle;
  }
}

std::string capitalize(std::string_view s) {
  std::string out(s);
  if (!out.empty())
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

Atom parse_bracket(std::string_view text) {
  // text includes the surrounding brackets.
  std::string_view body = text.substr(1, text.size() - 2);
  std::size_t i = 0;
  auto peek = [&]() -> char { return i < body.size() ? body[i] : '\0'; };

  while (std::isdigit(static_cast<unsigned char>(peek())))
    ++i;

  Atom atom;
  atom.bracket = true;
  char c = peek();
  if (std::islower(static_cast<unsigned char>(c))) {
    std::string_view rest = body.substr(i);
    if (rest.starts_with("se") || rest.starts_with("as")) {
      atom.element = capitalize(rest.substr(0, 2));
      i += 2;
    } else if (c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p'
               || c == 's') {
      atom.element = capitalize(rest.substr(0, 1));
      ++i;
    } else {
      fail(ErrorCode::kSmilesSyntax,
           "unknown aromatic symbol in " + std::string(text));
    }
    atom.aromatic = true;
  } else if (std::isupper(static_cast<unsigned char>(c))) {
    if (i + 1 < body.size()
        && std::islower(static_cast<unsigned char>(body[i + 1]))
        && is_element(body.substr(i, 2))) {
      atom.element = std::string(body.substr(i, 2));
      i += 2;
    } else if (is_element(body.substr(i, 1))) {
      atom.element = std::string(body.substr(i, 1));
      ++i;
    } else {
      fail(ErrorCode::kSmilesSyntax,
           "unknown element in " + std::string(text));
    }
  } else {
    fail(ErrorCode::kSmilesSyntax,
         "missing element symbol in " + std::string(text));
  }

  while (peek() == '@')
    ++i;

  if (peek() == 'H') {
    ++i;
    int h = 0;
    bool digits = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      h = h * 10 + (peek() - '0');
      digits = true;
      ++i;
    }
    atom.hydrogens = digits ? h : 1;
  }

  if (peek() == '+' || peek() == '-') {
    const char sign_char = peek();
    const int sign = sign_char == '+' ? 1 : -1;
    ++i;
    int mag = 1;
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      mag = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        mag = mag * 10 + (peek() - '0');
        ++i;
      }
    } else {
      while (peek() == sign_char) {
        ++mag;
        ++i;
      }
    }
    atom.charge = sign * mag;
  }

  if (peek() == ':') {
    ++i;
    if (!std::isdigit(static_cast<unsigned char>(peek())))
      fail(ErrorCode::kSmilesSyntax, "bad atom class in " + std::string(text));
    while (std::isdigit(static_cast<unsigned char>(peek())))
      ++i;
  }

  if (i != body.size())
    fail(ErrorCode::kSmilesSyntax,
         "unexpected characters in " + std::string(text));
  return atom;
}

// Bonds that lie on at least one cycle (not bridges).
std::vector<bool> ring_bonds(const MolGraph &mol) {
  const int n = static_cast<int>(mol.num_atoms());
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> in_ring(mol.num_bonds(), true);
  int timer = 0;

  std::function<void(int, int)> dfs = [&](int u, int parent_bond) {
    disc[u] = low[u] = timer++;
    for (int bi: mol.incident(u)) {
      if (bi == parent_bond)
        continue;
      int v = mol.other(bi, u);
      if (disc[v] < 0) {
        dfs(v, bi);
        low[u] = std::min(low[u], low[v]);
        if (low[v] > disc[u])
          in_ring[bi] = false;
      } else {
        low[u] = std::min(low[u], disc[v]);
      }
    }
  };
  for (int i = 0; i < n; ++i)
    if (disc[i] < 0)
      dfs(i, -1);
  return in_ring;
}

void assign_hydrogens_and_validate(MolGraph &mol) {
  const int n = static_cast<int>(mol.num_atoms());
  for (int i = 0; i < n; ++i) {
    Atom &atom = mol.atom(i);
    std::vector<int> allowed = allowed_valences(atom.element, atom.charge);
    if (!atom.bracket && !allowed.empty()) {
      const double sum = mol.bond_order_sum(i);
      auto it = std::find_if(allowed.begin(), allowed.end(),
                             [&](int v) { return v + 1e-9 >= sum; });
      atom.hydrogens =
          it == allowed.end() ? 0 : static_cast<int>(std::floor(*it - sum));
    }

    if (allowed.empty())
      continue;
    // Aromatic bonds are checked at their minimal Kekule contribution of 1 so
    // that pyrrole-type atoms ([nH]) are accepted.
    int kekule_min = atom.hydrogens;
    for (int bi: mol.incident(i)) {
      BondOrder order = mol.bonds()[bi].order;
      kekule_min += order == BondOrder::kAromatic ? 1 : static_cast<int>(order);
    }
    if (kekule_min > allowed.back())
      fail(ErrorCode::kValenceExceeded,
           "valence exceeded at atom " + std::to_string(i), i);
  }

  std::vector<bool> in_ring = ring_bonds(mol);
  for (int i = 0; i < n; ++i) {
    if (!mol.atoms()[i].aromatic)
      continue;
    int ring_aromatic = 0;
    for (int bi: mol.incident(i)) {
      if (in_ring[bi] && mol.bonds()[bi].order == BondOrder::kAromatic)
        ++ring_aromatic;
    }
    if (ring_aromatic < 2)
      fail(ErrorCode::kSmilesSyntax,
           "aromatic atom outside an aromatic ring at " + std::to_string(i),
           i);
  }
}
}  // namespace

std::vector<Token> tokenize(std::string_view smiles) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < smiles.size()) {
    const char c = smiles[i];
    if (c == '[') {
      std::size_t j = i + 1;
      while (j < smiles.size() && smiles[j] != ']') {
        if (smiles[j] == '[')
          fail(ErrorCode::kUnterminatedBracket,
               "nested '[' at offset " + std::to_string(j),
               static_cast<std::int64_t>(i));
        ++j;
      }
      if (j >= smiles.size())
        fail(ErrorCode::kUnterminatedBracket,
             "unterminated '[' at offset " + std::to_string(i),
             static_cast<std::int64_t>(i));
      tokens.push_back(
          { std::string(smiles.substr(i, j - i + 1)), TokenKind::kBracketAtom });
      i = j + 1;
    } else if ((c == 'C' && i + 1 < smiles.size() && smiles[i + 1] == 'l')
               || (c == 'B' && i + 1 < smiles.size() && smiles[i + 1] == 'r')) {
      tokens.push_back({ std::string(smiles.substr(i, 2)), TokenKind::kAtom });
      i += 2;
    } else if (is_organic_char(c)) {
      tokens.push_back({ std::string(1, c), TokenKind::kAtom });
      ++i;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      tokens.push_back({ std::string(1, c), TokenKind::kRingDigit });
      ++i;
    } else if (c == '%' && i + 2 < smiles.size()
               && std::isdigit(static_cast<unsigned char>(smiles[i + 1]))
               && std::isdigit(static_cast<unsigned char>(smiles[i + 2]))) {
      tokens.push_back({ std::string(smiles.substr(i, 3)), TokenKind::kRingDigit });
      i += 3;
    } else if (is_bond_char(c)) {
      tokens.push_back({ std::string(1, c), TokenKind::kBond });
      ++i;
    } else if (c == '(') {
      tokens.push_back({ "(", TokenKind::kBranchOpen });
      ++i;
    } else if (c == ')') {
      tokens.push_back({ ")", TokenKind::kBranchClose });
      ++i;
    } else {
      tokens.push_back({ std::string(1, c), TokenKind::kSpecial });
      ++i;
    }
  }
  return tokens;
}

std::string detokenize(const std::vector<Token> &tokens) {
  std::string out;
  for (const Token &t: tokens)
    out += t.text;
  return out;
}

double bond_valence(BondOrder order) {
  return order == BondOrder::kAromatic ? 1.5 : static_cast<double>(order);
}

std::vector<int> allowed_valences(std::string_view element, int charge) {
  static const std::map<std::string, std::vector<int>, std::less<>> kTable {
    { "H", { 1 } },        { "B", { 3 } },     { "C", { 4 } },
    { "N", { 3, 5 } },     { "O", { 2 } },     { "F", { 1 } },
    { "Si", { 4 } },       { "P", { 3, 5 } },  { "S", { 2, 4, 6 } },
    { "Cl", { 1 } },       { "As", { 3, 5 } }, { "Se", { 2, 4, 6 } },
    { "Br", { 1 } },       { "Te", { 2, 4, 6 } },
    { "I", { 1 } },
  };
  auto it = kTable.find(element);
  if (it == kTable.end())
    return {};

  int shift;
  if (element == "C" || element == "Si" || element == "H")
    shift = -std::abs(charge);
  else if (element == "B")
    shift = -charge;
  else
    shift = charge;

  std::vector<int> out;
  for (int v: it->second)
    if (v + shift >= 0)
      out.push_back(v + shift);
  if (out.empty())
    out.push_back(0);
  return out;
}

double MolGraph::bond_order_sum(int atom) const {
  double sum = 0;
  for (int bi: adjacency_[atom])
    sum += bond_valence(bonds_[bi].order);
  return sum;
}

int MolGraph::find_bond(int a, int b) const {
  for (int bi: adjacency_[a])
    if (other(bi, a) == b)
      return bi;
  return -1;
}

int MolGraph::add_atom(Atom atom) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return static_cast<int>(atoms_.size()) - 1;
}

void MolGraph::add_bond(int a, int b, BondOrder order) {
  const int idx = static_cast<int>(bonds_.size());
  bonds_.push_back({ a, b, order });
  adjacency_[a].push_back(idx);
  adjacency_[b].push_back(idx);
}

int MolGraph::num_components() const {
  const int n = static_cast<int>(atoms_.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i)
    parent[i] = i;
  std::function<int(int)> find = [&](int x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  int comps = n;
  for (const Bond &b: bonds_) {
    int ra = find(b.a), rb = find(b.b);
    if (ra != rb) {
      parent[ra] = rb;
      --comps;
    }
  }
  return comps;
}

int MolGraph::num_rings() const {
  return static_cast<int>(bonds_.size()) - static_cast<int>(atoms_.size())
         + num_components();
}

MolGraph parse(std::string_view smiles) {
  const std::vector<Token> tokens = tokenize(smiles);

  struct OpenRing {
    int atom;
    std::optional<BondOrder> order;
  };

  MolGraph mol;
  int prev = -1;
  std::optional<BondOrder> pending;
  std::vector<int> branches;
  std::map<std::string, OpenRing> rings;
  // Set right after '(' to reject empty branches.
  bool branch_needs_atom = false;

  auto connect = [&](int a, int b, std::optional<BondOrder> order) {
    if (a == b)
      fail(ErrorCode::kSmilesSyntax, "ring closure onto itself", a);
    if (mol.find_bond(a, b) >= 0)
      fail(ErrorCode::kSmilesSyntax, "duplicate bond", a);
    BondOrder o = order.value_or(mol.atoms()[a].aromatic
                                         && mol.atoms()[b].aromatic
                                     ? BondOrder::kAromatic
                                     : BondOrder::kSingle);
    mol.add_bond(a, b, o);
  };

  for (const Token &tok: tokens) {
    switch (tok.kind) {
    case TokenKind::kAtom:
    case TokenKind::kBracketAtom: {
      Atom atom;
      if (tok.kind == TokenKind::kBracketAtom) {
        atom = parse_bracket(tok.text);
      } else {
        atom.aromatic = std::islower(static_cast<unsigned char>(tok.text[0]));
        atom.element = capitalize(tok.text);
      }
      int idx = mol.add_atom(std::move(atom));
      if (prev >= 0)
        connect(prev, idx, pending);
      else if (pending)
        fail(ErrorCode::kSmilesSyntax, "bond without preceding atom");
      pending.reset();
      prev = idx;
      branch_needs_atom = false;
      break;
    }
    case TokenKind::kBond:
      if (prev < 0 || pending)
        fail(ErrorCode::kSmilesSyntax, "misplaced bond symbol " + tok.text);
      pending = bond_from_char(tok.text[0]);
      break;
    case TokenKind::kRingDigit: {
      if (prev < 0 || branch_needs_atom)
        fail(ErrorCode::kSmilesSyntax, "ring label without atom");
      auto it = rings.find(tok.text);
      if (it == rings.end()) {
        rings.emplace(tok.text, OpenRing { prev, pending });
      } else {
        const OpenRing open = it->second;
        if (open.order && pending && *open.order != *pending)
          fail(ErrorCode::kSmilesSyntax, "conflicting ring bond orders");
        rings.erase(it);
        connect(open.atom, prev, pending ? pending : open.order);
      }
      pending.reset();
      break;
    }
    case TokenKind::kBranchOpen:
      if (prev < 0 || pending || branch_needs_atom)
        fail(ErrorCode::kSmilesSyntax, "misplaced '('");
      branches.push_back(prev);
      branch_needs_atom = true;
      break;
    case TokenKind::kBranchClose:
      if (branches.empty())
        fail(ErrorCode::kUnbalancedBranch, "unmatched ')'");
      if (pending || branch_needs_atom)
        fail(ErrorCode::kSmilesSyntax, "empty branch or dangling bond");
      prev = branches.back();
      branches.pop_back();
      break;
    case TokenKind::kSpecial:
      if (tok.text == ".") {
        if (prev < 0 || pending || !branches.empty())
          fail(ErrorCode::kSmilesSyntax, "misplaced '.'");
        prev = -1;
        break;
      }
      fail(ErrorCode::kSmilesSyntax, "unsupported character '" + tok.text + "'");
    }
  }

  if (!rings.empty())
    fail(ErrorCode::kUnmatchedRingClosure,
         "ring label " + rings.begin()->first + " never closed",
         rings.begin()->second.atom);
  if (!branches.empty())
    fail(ErrorCode::kUnbalancedBranch, "unclosed '('");
  if (pending)
    fail(ErrorCode::kSmilesSyntax, "dangling bond at end");
  if (mol.num_atoms() == 0)
    fail(ErrorCode::kSmilesSyntax, "no atoms");

  assign_hydrogens_and_validate(mol);
  return mol;
}

bool is_valid(std::string_view smiles) noexcept {
  try {
    parse(smiles);
    return true;
  } catch (...) {
    return false;
  }
}

std::vector<std::string> read_corpus(const std::filesystem::path &path,
                                     std::vector<std::size_t> *line_numbers) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot open corpus " + path.string());
  std::vector<std::string> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    while (!line.empty()
           && std::isspace(static_cast<unsigned char>(line.back())))
      line.pop_back();
    if (line.empty() || line[0] == '#')
      continue;
    lines.push_back(line);
    if (line_numbers != nullptr)
      line_numbers->push_back(lineno);
  }
  return lines;
}
}  // namespace molgen
