//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/vocab.h"

#include <algorithm>
#include <fstream>

#include "molgen/error.h"
#include "molgen/smiles.h"

namespace molgen {
namespace {
const std::vector<std::string> kReserved { "<PAD>", "<GO>", "<EOS>", "<UNK>" };
}

Vocabulary::Vocabulary(): tokens_(kReserved) {
  for (int i = 0; i < kNumReserved; ++i)
    index_.emplace(tokens_[i], i);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> observed) {
  std::sort(observed.begin(), observed.end());
  observed.erase(std::unique(observed.begin(), observed.end()), observed.end());
  Vocabulary vocab;
  for (std::string &tok: observed) {
    if (vocab.index_.contains(tok))
      continue;
    vocab.index_.emplace(tok, static_cast<int>(vocab.tokens_.size()));
    vocab.tokens_.push_back(std::move(tok));
  }
  return vocab;
}

std::optional<int> Vocabulary::find(std::string_view text) const {
  auto it = index_.find(std::string(text));
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

TokenSequence Vocabulary::encode(std::string_view smiles,
                                 std::size_t *unknown) const {
  TokenSequence seq;
  seq.framed = true;
  seq.ids.push_back(kGoId);
  for (const Token &tok: tokenize(smiles)) {
    auto id = find(tok.text);
    if (!id || *id < kNumReserved) {
      seq.ids.push_back(kUnkId);
      if (unknown != nullptr)
        ++*unknown;
    } else {
      seq.ids.push_back(*id);
    }
  }
  seq.ids.push_back(kEosId);
  return seq;
}

std::string Vocabulary::decode(const std::vector<int> &ids) const {
  std::size_t begin = 0, end = ids.size();
  if (begin < end && ids[begin] == kGoId)
    ++begin;
  if (end > begin && ids[end - 1] == kEosId)
    --end;
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= tokens_.size())
      throw Error(ErrorCode::kUnknownTokenId,
                  "token id " + std::to_string(ids[i]) + " not in vocabulary");
    out += tokens_[ids[i]];
  }
  return out;
}

nlohmann::json Vocabulary::to_json() const {
  return { { "tokens", tokens_ } };
}

Vocabulary Vocabulary::from_json(const nlohmann::json &j) {
  std::vector<std::string> toks;
  try {
    toks = j.at("tokens").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kBadParameters,
                std::string("malformed vocabulary: ") + e.what());
  }
  if (toks.size() < kNumReserved
      || !std::equal(kReserved.begin(), kReserved.end(), toks.begin()))
    throw Error(ErrorCode::kBadParameters,
                "vocabulary must start with the reserved tokens");
  Vocabulary vocab;
  for (std::size_t i = kNumReserved; i < toks.size(); ++i) {
    if (vocab.index_.contains(toks[i]))
      throw Error(ErrorCode::kBadParameters, "duplicate token " + toks[i]);
    vocab.index_.emplace(toks[i], static_cast<int>(i));
    vocab.tokens_.push_back(toks[i]);
  }
  return vocab;
}

void Vocabulary::save(const std::filesystem::path &path) const {
  std::ofstream out(path);
  if (!out)
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kBadParameters,
                "invalid vocabulary JSON in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}
}  // namespace molgen
