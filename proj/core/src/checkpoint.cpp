//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "molgen/error.h"
#include "molgen/hash.h"
#include "molgen/transformer.h"

namespace molgen {
namespace {
constexpr std::string_view kMagic = "MFCK";

void put_u32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string &out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(std::string_view bytes, std::size_t pos) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes[pos + i]))
         << (8 * i);
  return v;
}

std::uint32_t get_u32(std::string_view bytes, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[pos + i]))
         << (8 * i);
  return v;
}

[[noreturn]] void corrupt(const std::string &msg) {
  throw Error(ErrorCode::kCorruptCheckpoint, "corrupt checkpoint: " + msg);
}

std::vector<ParamSpec> stored_layout(const ModelConfig &config,
                                     bool with_optimizer) {
  std::vector<ParamSpec> specs = parameter_layout(config);
  if (!with_optimizer)
    return specs;
  const std::size_t n = specs.size();
  for (std::size_t i = 0; i < n; ++i)
    specs.push_back({ "adam.m/" + specs[i].name, specs[i].shape });
  for (std::size_t i = 0; i < n; ++i)
    specs.push_back({ "adam.v/" + specs[i].name, specs[i].shape });
  return specs;
}
}  // namespace

std::string serialize_checkpoint(const ModelCheckpoint &ckpt) {
  ckpt.config.validate();
  if (static_cast<int>(ckpt.vocab.size()) != ckpt.config.vocab_size)
    throw Error(ErrorCode::kShapeMismatch,
                "vocabulary size does not match config.vocab_size");

  const bool with_opt = ckpt.optimizer.has_value() && !ckpt.optimizer->m.empty();
  const std::vector<ParamSpec> specs = stored_layout(ckpt.config, with_opt);

  std::vector<const NDArray *> tensors;
  for (const NDArray &t: ckpt.params.tensors)
    tensors.push_back(&t);
  if (with_opt) {
    for (const NDArray &t: ckpt.optimizer->m)
      tensors.push_back(&t);
    for (const NDArray &t: ckpt.optimizer->v)
      tensors.push_back(&t);
  }
  if (tensors.size() != specs.size())
    throw Error(ErrorCode::kShapeMismatch, "tensor count does not match layout");

  nlohmann::json header;
  header["config"] = ckpt.config.to_json();
  header["vocab"] = ckpt.vocab.tokens();
  header["step"] = ckpt.step;
  nlohmann::json tlist = nlohmann::json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (tensors[i]->shape() != specs[i].shape)
      throw Error(ErrorCode::kShapeMismatch,
                  "tensor " + specs[i].name + " has shape "
                      + shape_string(tensors[i]->shape()) + ", expected "
                      + shape_string(specs[i].shape));
    tlist.push_back({ { "name", specs[i].name }, { "shape", specs[i].shape } });
  }
  header["tensors"] = tlist;
  if (with_opt) {
    const AdamState &s = *ckpt.optimizer;
    header["optimizer"] = { { "step", s.step },
                            { "learning_rate", s.learning_rate },
                            { "beta1", s.beta1 },
                            { "beta2", s.beta2 },
                            { "epsilon", s.epsilon } };
  }
  const std::string hdr = header.dump();

  std::string out;
  out.append(kMagic);
  put_u32(out, kCheckpointVersion);
  put_u64(out, hdr.size());
  out.append(hdr);
  for (const NDArray *t: tensors)
    for (double x: t->data())
      put_u64(out, std::bit_cast<std::uint64_t>(x));
  put_u64(out, fnv1a64(std::string_view(out)));
  return out;
}

namespace {
ModelCheckpoint deserialize_impl(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 4 + 8 + 8)
    corrupt("file too short");
  if (bytes.substr(0, 4) != kMagic)
    corrupt("bad magic bytes");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kCheckpointVersion)
    throw Error(ErrorCode::kVersionMismatch,
                "checkpoint format version " + std::to_string(version)
                    + ", expected " + std::to_string(kCheckpointVersion));
  const std::size_t body = bytes.size() - 8;
  if (fnv1a64(bytes.substr(0, body)) != get_u64(bytes, body))
    corrupt("checksum mismatch");

  const std::uint64_t hdr_len = get_u64(bytes, 8);
  if (hdr_len > body - 16)
    corrupt("header length out of range");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, hdr_len));
  } catch (const nlohmann::json::exception &e) {
    corrupt(std::string("header is not JSON: ") + e.what());
  }

  ModelCheckpoint ckpt;
  try {
    ckpt.config = ModelConfig::from_json(header.at("config"));
    ckpt.vocab = Vocabulary::from_json({ { "tokens", header.at("vocab") } });
    ckpt.step = header.at("step").get<std::int64_t>();
  } catch (const nlohmann::json::exception &e) {
    corrupt(std::string("incomplete header: ") + e.what());
  }
  ckpt.config.validate();
  if (static_cast<int>(ckpt.vocab.size()) != ckpt.config.vocab_size)
    throw Error(ErrorCode::kShapeMismatch,
                "vocabulary size does not match config.vocab_size");

  const bool with_opt = header.contains("optimizer");
  const std::vector<ParamSpec> specs = stored_layout(ckpt.config, with_opt);
  const nlohmann::json &tlist = header.at("tensors");
  if (!tlist.is_array() || tlist.size() != specs.size())
    throw Error(ErrorCode::kShapeMismatch,
                "declared tensors do not match the model configuration");
  std::size_t total = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto name = tlist[i].at("name").get<std::string>();
    const auto shape = tlist[i].at("shape").get<std::vector<std::size_t>>();
    if (name != specs[i].name || shape != specs[i].shape)
      throw Error(ErrorCode::kShapeMismatch,
                  "declared tensor " + name + shape_string(shape)
                      + " does not match expected " + specs[i].name
                      + shape_string(specs[i].shape));
    std::size_t n = 1;
    for (std::size_t s: shape)
      n *= s;
    total += n;
  }
  if (16 + hdr_len + total * 8 != body)
    corrupt("payload length does not match declared tensors");

  std::size_t pos = 16 + hdr_len;
  auto read_tensor = [&](const ParamSpec &spec) {
    NDArray t(spec.shape, 0.0);
    for (double &x: t.data()) {
      x = std::bit_cast<double>(get_u64(bytes, pos));
      pos += 8;
    }
    return t;
  };
  const std::size_t np = parameter_layout(ckpt.config).size();
  for (std::size_t i = 0; i < np; ++i)
    ckpt.params.tensors.push_back(read_tensor(specs[i]));
  if (with_opt) {
    AdamState s;
    const nlohmann::json &o = header.at("optimizer");
    s.step = o.at("step").get<std::int64_t>();
    s.learning_rate = o.at("learning_rate").get<double>();
    s.beta1 = o.at("beta1").get<double>();
    s.beta2 = o.at("beta2").get<double>();
    s.epsilon = o.at("epsilon").get<double>();
    for (std::size_t i = 0; i < np; ++i)
      s.m.push_back(read_tensor(specs[np + i]));
    for (std::size_t i = 0; i < np; ++i)
      s.v.push_back(read_tensor(specs[2 * np + i]));
    ckpt.optimizer = std::move(s);
  }
  return ckpt;
}

}  // namespace

ModelCheckpoint deserialize_checkpoint(std::string_view bytes) {
  try {
    return deserialize_impl(bytes);
  } catch (const nlohmann::json::exception &e) {
    corrupt(std::string("malformed header: ") + e.what());
  }
}

void save_checkpoint(const ModelCheckpoint &ckpt,
                     const std::filesystem::path &path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

ModelCheckpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}
}  // namespace molgen
