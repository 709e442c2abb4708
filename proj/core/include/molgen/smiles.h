//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_SMILES_H_
#define MOLGEN_SMILES_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace molgen {
enum class TokenKind {
  kAtom,
  kBracketAtom,
  kBond,
  kRingDigit,
  kBranchOpen,
  kBranchClose,
  kSpecial,
};

struct Token {
  std::string text;
  TokenKind kind;

  bool operator==(const Token &) const = default;
};

/// Greedy longest-match SMILES segmentation. Two-letter organic atoms (Cl, Br),
/// bracket atoms and two-digit ring labels (%nn) are kept whole; every other
/// character becomes its own token. Only an unterminated (or nested) bracket
/// is rejected.
std::vector<Token> tokenize(std::string_view smiles);

std::string detokenize(const std::vector<Token> &tokens);

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

// Contribution of a bond to the valence sum; aromatic bonds count 1.5.
double bond_valence(BondOrder order);

struct Atom {
  std::string element;
  bool aromatic = false;
  int charge = 0;
  // Explicit (bracket) or implicit (organic subset) hydrogen count.
  int hydrogens = 0;
  bool bracket = false;
};

struct Bond {
  int a;
  int b;
  BondOrder order;
};

class MolGraph {
public:
  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  std::size_t num_atoms() const { return atoms_.size(); }
  std::size_t num_bonds() const { return bonds_.size(); }

  // Indices into bonds() for each atom.
  const std::vector<int> &incident(int atom) const { return adjacency_[atom]; }
  int other(int bond, int atom) const {
    const Bond &b = bonds_[bond];
    return b.a == atom ? b.b : b.a;
  }
  int degree(int atom) const {
    return static_cast<int>(adjacency_[atom].size());
  }
  double bond_order_sum(int atom) const;
  int find_bond(int a, int b) const;

  int num_components() const;
  // Cyclomatic number: bonds - atoms + connected components.
  int num_rings() const;

  int add_atom(Atom atom);
  void add_bond(int a, int b, BondOrder order);
  Atom &atom(int i) { return atoms_[i]; }

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> adjacency_;
};

/// Parse SMILES into a validated graph with implicit hydrogens assigned.
/// Throws molgen::Error with one of kUnterminatedBracket,
/// kUnmatchedRingClosure, kUnbalancedBranch, kValenceExceeded (detail = atom
/// index) or kSmilesSyntax.
MolGraph parse(std::string_view smiles);

bool is_valid(std::string_view smiles) noexcept;

// Allowed valence states for a neutral element, empty for unknown elements.
std::vector<int> allowed_valences(std::string_view element, int charge);

constexpr std::size_t kDefaultFingerprintWidth = 2048;
constexpr int kMaxPathAtoms = 7;

class Fingerprint {
public:
  Fingerprint() = default;
  explicit Fingerprint(std::size_t width);

  std::size_t width() const { return width_; }
  bool test(std::size_t bit) const;
  void set(std::size_t bit);
  std::size_t count() const;
  std::vector<std::size_t> on_bits() const;
  const std::vector<std::uint64_t> &words() const { return words_; }

  std::string source;

  bool operator==(const Fingerprint &other) const {
    return width_ == other.width_ && words_ == other.words_;
  }

private:
  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

// Canonical (orientation-free) string encoding of one linear path, given as
// atom indices. Exposed for testing.
std::string path_encoding(const MolGraph &mol, const std::vector<int> &path);

/// Hashed linear-path fingerprint: every simple path of 1..kMaxPathAtoms atoms
/// sets bit fnv1a64(encoding) % width.
Fingerprint fingerprint(const MolGraph &mol,
                        std::size_t width = kDefaultFingerprintWidth);

double tanimoto(const Fingerprint &a, const Fingerprint &b);

/// Renumbering-invariant identifier of the molecular graph.
std::string canonical_key(const MolGraph &mol);

/// Reads a one-SMILES-per-line corpus. Lines starting with '#' and blank lines
/// are skipped; trailing whitespace is stripped. `line_numbers`, when given,
/// receives the 1-based source line of each entry.
std::vector<std::string>
read_corpus(const std::filesystem::path &path,
            std::vector<std::size_t> *line_numbers = nullptr);
}  // namespace molgen

#endif  // MOLGEN_SMILES_H_
