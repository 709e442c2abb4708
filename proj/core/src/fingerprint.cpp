//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <bit>
#include <cctype>
#include <string>
#include <vector>

#include "molgen/error.h"
#include "molgen/hash.h"
#include "molgen/smiles.h"

namespace molgen {
namespace {
std::string atom_label(const Atom &atom) {
  std::string label = atom.element;
  if (atom.aromatic)
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char c) { return std::tolower(c); });
  if (atom.charge != 0)
    label = "{" + label + (atom.charge > 0 ? "+" : "")
            + std::to_string(atom.charge) + "}";
  return label;
}

char bond_label(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle:
    return '-';
  case BondOrder::kDouble:
    return '=';
  case BondOrder::kTriple:
    return '#';
  case BondOrder::kAromatic:
    return ':';
  }
  return '?';
}

std::string encode_direction(const MolGraph &mol, const std::vector<int> &path,
                             bool reverse) {
  const std::size_t n = path.size();
  auto at = [&](std::size_t i) { return reverse ? path[n - 1 - i] : path[i]; };
  std::string out = atom_label(mol.atoms()[at(0)]);
  for (std::size_t i = 1; i < n; ++i) {
    int bond = mol.find_bond(at(i - 1), at(i));
    out += bond_label(mol.bonds()[bond].order);
    out += atom_label(mol.atoms()[at(i)]);
  }
  return out;
}

void extend_paths(const MolGraph &mol, std::vector<int> &path,
                  std::vector<bool> &on_path, Fingerprint &fp) {
  const std::string enc = path_encoding(mol, path);
  fp.set(fnv1a64(enc) % fp.width());
  if (path.size() == kMaxPathAtoms)
    return;
  const int last = path.back();
  for (int bi: mol.incident(last)) {
    const int next = mol.other(bi, last);
    if (on_path[next])
      continue;
    on_path[next] = true;
    path.push_back(next);
    extend_paths(mol, path, on_path, fp);
    path.pop_back();
    on_path[next] = false;
  }
}
}  // namespace

Fingerprint::Fingerprint(std::size_t width)
    : width_(width), words_((width + 63) / 64, 0) { }

bool Fingerprint::test(std::size_t bit) const {
  return (words_[bit / 64] >> (bit % 64)) & 1U;
}

void Fingerprint::set(std::size_t bit) {
  words_[bit / 64] |= std::uint64_t { 1 } << (bit % 64);
}

std::size_t Fingerprint::count() const {
  std::size_t total = 0;
  for (std::uint64_t w: words_)
    total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::vector<std::size_t> Fingerprint::on_bits() const {
  std::vector<std::size_t> bits;
  for (std::size_t i = 0; i < width_; ++i)
    if (test(i))
      bits.push_back(i);
  return bits;
}

std::string path_encoding(const MolGraph &mol, const std::vector<int> &path) {
  std::string fwd = encode_direction(mol, path, false);
  std::string rev = encode_direction(mol, path, true);
  return std::min(fwd, rev);
}

Fingerprint fingerprint(const MolGraph &mol, std::size_t width) {
  if (width == 0)
    throw Error(ErrorCode::kBadParameters, "fingerprint width must be > 0");
  Fingerprint fp(width);
  fp.source = canonical_key(mol);
  std::vector<int> path;
  std::vector<bool> on_path(mol.num_atoms(), false);
  for (int start = 0; start < static_cast<int>(mol.num_atoms()); ++start) {
    path.assign(1, start);
    on_path[start] = true;
    extend_paths(mol, path, on_path, fp);
    on_path[start] = false;
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.width() != b.width())
    throw Error(ErrorCode::kWidthMismatch,
                "fingerprint widths differ: " + std::to_string(a.width())
                    + " vs " + std::to_string(b.width()));
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    inter += static_cast<std::size_t>(std::popcount(a.words()[i] & b.words()[i]));
    uni += static_cast<std::size_t>(std::popcount(a.words()[i] | b.words()[i]));
  }
  if (uni == 0)
    return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}
}  // namespace molgen
