//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/run_record.h"

#include "molgen/error.h"

namespace molgen {
nlohmann::json RunRecord::to_json() const {
  return { { "step", step },
           { "split", split },
           { "nll", nll },
           { "validity_pct", validity_pct },
           { "wall_ms", wall_ms } };
}

RunRecord RunRecord::from_json(const nlohmann::json &j) {
  RunRecord r;
  r.step = j.at("step").get<std::int64_t>();
  r.split = j.at("split").get<std::string>();
  r.nll = j.at("nll").get<double>();
  r.validity_pct = j.at("validity_pct").get<double>();
  r.wall_ms = j.at("wall_ms").get<double>();
  return r;
}

JsonlWriter::JsonlWriter(const std::filesystem::path &path, bool append)
    : out_(path, append ? std::ios::app : std::ios::trunc) {
  if (!out_)
    throw Error(ErrorCode::kIoError, "cannot open " + path.string());
}

void JsonlWriter::write(const nlohmann::json &line) {
  out_ << dump_line(line) << '\n';
  out_.flush();
}

std::string dump_line(const nlohmann::json &j) {
  return j.dump();
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::vector<nlohmann::json> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    try {
      lines.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception &e) {
      throw Error(ErrorCode::kBadParameters,
                  path.string() + ":" + std::to_string(lineno) + ": "
                      + e.what(),
                  static_cast<std::int64_t>(lineno));
    }
  }
  return lines;
}
}  // namespace molgen
