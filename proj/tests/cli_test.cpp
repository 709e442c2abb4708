//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/cli.h"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "molgen/oracle.h"
#include "test_util.h"

namespace molgen {
namespace {
namespace fs = std::filesystem;
using json = nlohmann::json;

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int status = cli::run(args, out, err);
  return { status, out.str(), err.str() };
}

json read_json(const fs::path &p) {
  return json::parse(test::read_file(p));
}

void write(const fs::path &p, const std::string &text) {
  std::ofstream(p) << text;
}

const char *kHandLedger =
    R"({"budget":4,"oracle":"ring","params":{"at_least":true,"kind":"ring_count","name":"ring","target":1.0}})"
    "\n"
    R"({"call":1,"key":"a","score":0.2,"smiles":"CC"})"
    "\n"
    R"({"call":2,"key":"b","score":0.5,"smiles":"CCC"})"
    "\n"
    R"({"call":3,"key":"c","score":0.4,"smiles":"CCCC"})"
    "\n"
    R"({"call":4,"key":"d","score":0.9,"smiles":"C1CC1"})"
    "\n";

TEST(Cli, BuildVocabTwoLines) {
  test::TempDir dir;
  write(dir / "c.smi", "CCO\nc1ccccc1Cl\n");
  const Result r = run({ "build-vocab", "--corpus", (dir / "c.smi").string(),
                         "--out", (dir / "out").string() });
  ASSERT_EQ(r.status, 0) << r.err;
  const json vocab = read_json(dir / "out" / "vocab.json");
  EXPECT_EQ(vocab["tokens"], json({ "<PAD>", "<GO>", "<EOS>", "<UNK>", "1", "C",
                                    "Cl", "O", "c" }));
  EXPECT_TRUE(fs::exists(dir / "out" / "resolved_config.json"));
}

TEST(Cli, EvaluateHandLedger) {
  test::TempDir dir;
  write(dir / "ledger.jsonl", kHandLedger);
  const Result r = run({ "evaluate", "--ledger", (dir / "ledger.jsonl").string(),
                         "--out", (dir / "eval").string() });
  ASSERT_EQ(r.status, 0) << r.err;
  const json report = read_json(dir / "eval" / "report.json");
  EXPECT_EQ(report["auc_top1"].get<double>(), 0.525);
  EXPECT_EQ(report["scaling"], "identity");
  EXPECT_EQ(test::read_file(dir / "eval" / "curve_top1.csv"),
            "call,t\n1,0.2\n2,0.5\n3,0.5\n4,0.9\n");
  EXPECT_TRUE(fs::exists(dir / "eval" / "curve_top10.csv"));
  EXPECT_TRUE(fs::exists(dir / "eval" / "curve_top100.csv"));
}

TEST(Cli, EvaluateMultipleLedgersAndSamples) {
  test::TempDir dir;
  write(dir / "a.jsonl", kHandLedger);
  write(dir / "b.jsonl", kHandLedger);
  write(dir / "s.jsonl",
        R"({"smiles":"CCC","score":0.5})"
        "\n"
        R"({"smiles":"C1CC1"})"
        "\n");
  const Result r = run({ "evaluate", "--ledger", (dir / "a.jsonl").string(),
                         "--ledger", (dir / "b.jsonl").string(), "--samples",
                         (dir / "s.jsonl").string(), "--k", "1,10", "--out",
                         (dir / "eval").string() });
  ASSERT_EQ(r.status, 0) << r.err;
  const json report = read_json(dir / "eval" / "report.json");
  EXPECT_EQ(report["runs"].size(), 2);
  EXPECT_EQ(report["aggregate"]["auc_top1"]["mean"].get<double>(), 0.525);
  EXPECT_EQ(report["aggregate"]["auc_top1"]["std"].get<double>(), 0.0);
  EXPECT_EQ(report["length_ablation"]["short"]["count"], 2);
  EXPECT_EQ(report["length_ablation"]["short"]["mean"].get<double>(), 0.75);
  EXPECT_TRUE(fs::exists(dir / "eval" / "aggregate_top1.csv"));
  EXPECT_TRUE(fs::exists(dir / "eval" / "length_bins.csv"));
  EXPECT_FALSE(fs::exists(dir / "eval" / "curve_top100.csv"));
}

TEST(Cli, ErrorsAreSingleJsonLines) {
  Result r = run({ "frobnicate" });
  EXPECT_EQ(r.status, 2);
  ASSERT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_EQ(json::parse(r.err)["error"], "UsageError");

  test::TempDir dir;
  write(dir / "ledger.jsonl", kHandLedger);
  r = run({ "evaluate", "--out", (dir / "x").string() });
  EXPECT_EQ(json::parse(r.err)["error"], "UsageError");

  write(dir / "c.smi", "CCO\nC[NH\n");
  r = run({ "build-vocab", "--corpus", (dir / "c.smi").string(), "--out",
            (dir / "o").string() });
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(json::parse(r.err)["error"], "TokenizeError");

  write(dir / "empty.jsonl", "");
  r = run({ "evaluate", "--ledger", (dir / "empty.jsonl").string(), "--out",
            (dir / "o").string() });
  EXPECT_EQ(json::parse(r.err)["error"], "EmptyLedger");
}

TEST(Cli, FlagsOverrideConfigFile) {
  test::TempDir dir;
  write(dir / "c.smi", "CCO\nCCCO\nCO\n");
  write(dir / "cfg.json", R"({"seed": 5, "train": {"max_steps": 7, "batch_size": 2,
    "validity_samples": 2, "log_interval": 5},
    "model": {"d_model": 8, "n_heads": 2, "n_layers": 1, "d_ff": 8, "max_len": 8}})");
  const Result r = run({ "pretrain", "--corpus", (dir / "c.smi").string(),
                         "--config", (dir / "cfg.json").string(), "--max-steps",
                         "3", "--out", (dir / "pt").string() });
  ASSERT_EQ(r.status, 0) << r.err;
  const json resolved = read_json(dir / "pt" / "resolved_config.json");
  EXPECT_EQ(resolved["train"]["max_steps"], 3);
  EXPECT_EQ(resolved["train"]["batch_size"], 2);
  EXPECT_EQ(resolved["train"]["seed"], 5);
  EXPECT_EQ(resolved["model"]["d_model"], 8);
  EXPECT_EQ(read_json(dir / "pt" / "summary.json")["step"], 3);
}

TEST(Cli, OutputRootEnvironment) {
  test::TempDir dir;
  write(dir / "c.smi", "CCO\n");
  ::setenv("MOLGEN_OUTPUT_ROOT", dir.path().c_str(), 1);
  const Result r = run({ "build-vocab", "--corpus", (dir / "c.smi").string(),
                         "--out", "relative" });
  ::unsetenv("MOLGEN_OUTPUT_ROOT");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "relative" / "vocab.json"));
}

TEST(Cli, PipelineIsDeterministic) {
  test::TempDir dir;
  write(dir / "c.smi", test::read_file(test::data_path("ring_corpus_1000.smi")));
  auto pipeline = [&](const std::string &name) {
    const fs::path out = dir / name;
    const std::string seed = "11";
    EXPECT_EQ(run({ "pretrain", "--corpus", (dir / "c.smi").string(), "--seed",
                    seed, "--max-steps", "40", "--batch-size", "8", "--d-model",
                    "8", "--n-heads", "2", "--n-layers", "1", "--d-ff", "16",
                    "--max-len", "16", "--validity-samples", "4", "--out",
                    (out / "pt").string() })
                  .status,
              0);
    EXPECT_EQ(run({ "sample", "--checkpoint", (out / "pt" / "model.ckpt").string(),
                    "--seed", seed, "-n", "20", "--oracle", "ring", "--out",
                    (out / "s").string() })
                  .status,
              0);
    EXPECT_EQ(run({ "finetune", "--prior", (out / "pt" / "model.ckpt").string(),
                    "--oracle", "ring", "--seed", seed, "--max-steps", "5",
                    "--batch-size", "8", "--out", (out / "ft").string() })
                  .status,
              0);
    EXPECT_EQ(run({ "evaluate", "--ledger", (out / "ft" / "ledger.jsonl").string(),
                    "--samples", (out / "s" / "samples.jsonl").string(), "--out",
                    (out / "ev").string() })
                  .status,
              0);
    return out;
  };
  const fs::path a = pipeline("a"), b = pipeline("b");
  for (const char *file: { "pt/model.ckpt", "s/samples.jsonl", "ft/agent.ckpt",
                           "ft/ledger.jsonl", "ev/report.json",
                           "ev/curve_top10.csv", "ev/length_bins.csv" })
    EXPECT_EQ(test::read_file(a / file), test::read_file(b / file)) << file;
}
}  // namespace
}  // namespace molgen
