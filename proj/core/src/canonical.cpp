//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "molgen/smiles.h"

namespace molgen {
namespace {
// Bound on explored tie-break leaves; beyond it only the first candidate of
// each tied class is followed.
constexpr int kMaxLeaves = 4096;

template <class T>
std::vector<int> dense_rank(const std::vector<T> &keys) {
  std::vector<T> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<int> ranks(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i)
    ranks[i] = static_cast<int>(
        std::lower_bound(sorted.begin(), sorted.end(), keys[i])
        - sorted.begin());
  return ranks;
}

int num_classes(const std::vector<int> &labels) {
  return labels.empty()
             ? 0
             : *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<int> refine(const MolGraph &mol, std::vector<int> labels) {
  const int n = static_cast<int>(mol.num_atoms());
  int classes = num_classes(labels);
  while (true) {
    using Signature = std::pair<int, std::vector<std::pair<int, int>>>;
    std::vector<Signature> sigs(n);
    for (int i = 0; i < n; ++i) {
      sigs[i].first = labels[i];
      for (int bi: mol.incident(i))
        sigs[i].second.emplace_back(labels[mol.other(bi, i)],
                                    static_cast<int>(mol.bonds()[bi].order));
      std::sort(sigs[i].second.begin(), sigs[i].second.end());
    }
    std::vector<int> next = dense_rank(sigs);
    int next_classes = num_classes(next);
    labels = std::move(next);
    if (next_classes == classes)
      return labels;
    classes = next_classes;
  }
}

std::string serialize(const MolGraph &mol, const std::vector<int> &order) {
  const int n = static_cast<int>(mol.num_atoms());
  std::vector<int> atom_at(n);
  for (int i = 0; i < n; ++i)
    atom_at[order[i]] = i;

  std::string out;
  for (int pos = 0; pos < n; ++pos) {
    const Atom &a = mol.atoms()[atom_at[pos]];
    out += a.element;
    out += a.aromatic ? 'a' : 'A';
    out += std::to_string(a.charge);
    out += 'h';
    out += std::to_string(a.hydrogens);
    out += ';';
  }
  std::vector<std::tuple<int, int, int>> edges;
  for (const Bond &b: mol.bonds()) {
    int pa = order[b.a], pb = order[b.b];
    edges.emplace_back(std::min(pa, pb), std::max(pa, pb),
                       static_cast<int>(b.order));
  }
  std::sort(edges.begin(), edges.end());
  out += '|';
  for (auto [a, b, o]: edges) {
    out += std::to_string(a);
    out += '-';
    out += std::to_string(b);
    out += ':';
    out += std::to_string(o);
    out += ';';
  }
  return out;
}

void search(const MolGraph &mol, std::vector<int> labels, int &leaves,
            std::optional<std::string> &best) {
  labels = refine(mol, std::move(labels));
  const int n = static_cast<int>(labels.size());
  if (num_classes(labels) == n) {
    ++leaves;
    std::string key = serialize(mol, labels);
    if (!best || key < *best)
      best = std::move(key);
    return;
  }

  // Smallest label shared by more than one atom.
  std::vector<int> counts(n, 0);
  for (int l: labels)
    ++counts[l];
  int tied = 0;
  while (counts[tied] < 2)
    ++tied;

  for (int i = 0; i < n; ++i) {
    if (labels[i] != tied)
      continue;
    std::vector<int> split(n);
    for (int j = 0; j < n; ++j)
      split[j] = 2 * labels[j] + (labels[j] == tied && j != i ? 1 : 0);
    search(mol, dense_rank(split), leaves, best);
    if (leaves >= kMaxLeaves)
      return;
  }
}
}  // namespace

std::string canonical_key(const MolGraph &mol) {
  const int n = static_cast<int>(mol.num_atoms());
  using Invariant = std::tuple<std::string, int, int, bool, int>;
  std::vector<Invariant> inv(n);
  for (int i = 0; i < n; ++i) {
    const Atom &a = mol.atoms()[i];
    inv[i] = { a.element, mol.degree(i), a.charge, a.aromatic, a.hydrogens };
  }
  int leaves = 0;
  std::optional<std::string> best;
  search(mol, dense_rank(inv), leaves, best);
  return best.value_or(std::string());
}
}  // namespace molgen
