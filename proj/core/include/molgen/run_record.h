//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLGEN_RUN_RECORD_H_
#define MOLGEN_RUN_RECORD_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace molgen {
/// One pretraining telemetry line: {step, split, nll, validity_pct, wall_ms}.
struct RunRecord {
  std::int64_t step = 0;
  std::string split;
  double nll = 0;
  double validity_pct = 0;
  double wall_ms = 0;

  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json &j);
};

/// Append-only JSONL sink; each line is flushed as it is written.
class JsonlWriter {
public:
  JsonlWriter() = default;
  explicit JsonlWriter(const std::filesystem::path &path, bool append = false);

  bool is_open() const { return out_.is_open(); }
  void write(const nlohmann::json &line);

private:
  std::ofstream out_;
};

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path &path);

// Serializes with sorted keys and shortest round-trip doubles.
std::string dump_line(const nlohmann::json &j);
}  // namespace molgen

#endif  // MOLGEN_RUN_RECORD_H_
