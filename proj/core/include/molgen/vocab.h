//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_VOCAB_H_
#define MOLGEN_VOCAB_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace molgen {
constexpr int kPadId = 0;
constexpr int kGoId = 1;
constexpr int kEosId = 2;
constexpr int kUnkId = 3;
constexpr int kNumReserved = 4;

struct TokenSequence {
  std::vector<int> ids;
  // GO first and EOS last.
  bool framed = false;

  std::size_t size() const { return ids.size(); }
  bool operator==(const TokenSequence &) const = default;
};

/// Token <-> id table. Ids 0..3 are PAD, GO, EOS, UNK; the remaining entries
/// are sorted by token text.
class Vocabulary {
public:
  Vocabulary();
  static Vocabulary from_tokens(std::vector<std::string> observed);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string> &tokens() const { return tokens_; }
  const std::string &token(int id) const { return tokens_.at(id); }
  std::optional<int> find(std::string_view text) const;

  // Tokenizes and frames `smiles`; tokens not in the table map to UNK and are
  // counted into `unknown`.
  TokenSequence encode(std::string_view smiles,
                       std::size_t *unknown = nullptr) const;
  // Concatenates token texts, dropping a leading GO and a trailing EOS.
  std::string decode(const std::vector<int> &ids) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json &j);
  void save(const std::filesystem::path &path) const;
  static Vocabulary load(const std::filesystem::path &path);

  bool operator==(const Vocabulary &other) const {
    return tokens_ == other.tokens_;
  }

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};
}  // namespace molgen

#endif  // MOLGEN_VOCAB_H_
