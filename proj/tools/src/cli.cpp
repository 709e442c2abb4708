//
// Project molgen - Copyright 2026 molgen authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molgen/cli.h"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "molgen/error.h"
#include "molgen/evaluator.h"
#include "molgen/generator.h"
#include "molgen/oracle.h"
#include "molgen/pretrainer.h"
#include "molgen/rl.h"
#include "molgen/run_record.h"
#include "molgen/smiles.h"
#include "molgen/transformer.h"
#include "molgen/vocab.h"

namespace molgen::cli {
namespace {
namespace fs = std::filesystem;
using json = nlohmann::json;

std::string fmt(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

json load_json_file(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kBadParameters,
                "invalid JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  if (!out)
    throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

void write_json(const fs::path &path, const json &j) {
  write_text(path, j.dump(2) + "\n");
}

fs::path prepare_out(const std::string &dir) {
  fs::path out = resolve_output_dir(dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec)
    throw Error(ErrorCode::kIoError,
                "cannot create output directory " + out.string());
  return out;
}

template <class T>
void put(json &j, const char *key, const std::optional<T> &v) {
  if (v)
    j[key] = *v;
}

json section(const json &cfg, const char *key) {
  if (cfg.contains(key)) {
    if (!cfg[key].is_object())
      throw Error(ErrorCode::kBadParameters,
                  std::string("config section '") + key
                      + "' must be an object");
    return cfg[key];
  }
  return json::object();
}

std::string required_path(const json &cfg, const char *key,
                          const std::optional<std::string> &flag) {
  if (flag)
    return *flag;
  if (cfg.contains(key) && cfg[key].is_string())
    return cfg[key].get<std::string>();
  throw Error(ErrorCode::kUsageError,
              std::string("missing required --") + key);
}

OracleSpec oracle_from(const json &value) {
  if (value.is_string())
    return make_oracle(value.get<std::string>());
  if (value.is_object())
    return OracleSpec::from_json(value);
  throw Error(ErrorCode::kUnknownOracle, "oracle must be a name or object");
}

// Options shared by every subcommand.
struct Common {
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;

  void add_to(CLI::App *app) {
    app->add_option("--config", config, "JSON config file");
    app->add_option("--out", out, "Output directory");
    app->add_option("--seed", seed, "Seed for all randomness");
  }

  json load() const {
    json cfg = config ? load_json_file(*config) : json::object();
    if (!cfg.is_object())
      throw Error(ErrorCode::kBadParameters, "config must be a JSON object");
    put(cfg, "out", out);
    put(cfg, "seed", seed);
    if (!cfg.contains("out"))
      cfg["out"] = ".";
    if (!cfg.contains("seed"))
      cfg["seed"] = 0;
    return cfg;
  }
};

// build-vocab ---------------------------------------------------------------

struct BuildVocabArgs {
  Common common;
  std::optional<std::string> corpus;
};

int cmd_build_vocab(const BuildVocabArgs &a, std::ostream &out) {
  json cfg = a.common.load();
  cfg["command"] = "build-vocab";
  cfg["corpus"] = required_path(cfg, "corpus", a.corpus);
  const fs::path dir = prepare_out(cfg["out"].get<std::string>());
  write_json(dir / "resolved_config.json", cfg);

  Vocabulary vocab = build_vocab(fs::path(cfg["corpus"].get<std::string>()));
  vocab.save(dir / "vocab.json");
  out << dump_line({
      {"vocab_size",                      vocab.size() },
      {     "vocab", (dir / "vocab.json").string() }
  }) << '\n';
  return 0;
}

// pretrain ------------------------------------------------------------------

struct PretrainArgs {
  Common common;
  std::optional<std::string> corpus, vocab, resume;
  std::optional<int> max_steps, batch_size, warmup, log_interval,
      checkpoint_interval, validity_samples;
  std::optional<double> lr, validation_fraction;
  std::optional<int> d_model, n_layers, n_heads, d_ff, max_len;
  std::optional<double> dropout;
};

int cmd_pretrain(const PretrainArgs &a, std::ostream &out) {
  json cfg = a.common.load();
  cfg["command"] = "pretrain";
  cfg["corpus"] = required_path(cfg, "corpus", a.corpus);
  put(cfg, "vocab", a.vocab);
  put(cfg, "resume", a.resume);

  json model = section(cfg, "model");
  put(model, "d_model", a.d_model);
  put(model, "n_layers", a.n_layers);
  put(model, "n_heads", a.n_heads);
  put(model, "d_ff", a.d_ff);
  put(model, "max_len", a.max_len);
  put(model, "dropout_rate", a.dropout);

  json train = section(cfg, "train");
  put(train, "max_steps", a.max_steps);
  put(train, "batch_size", a.batch_size);
  put(train, "warmup_steps", a.warmup);
  put(train, "log_interval", a.log_interval);
  put(train, "checkpoint_interval", a.checkpoint_interval);
  put(train, "validity_samples", a.validity_samples);
  put(train, "learning_rate", a.lr);
  put(train, "validation_fraction", a.validation_fraction);
  train["seed"] = cfg["seed"];

  std::vector<std::size_t> line_numbers;
  const std::vector<std::string> lines =
      read_corpus(cfg["corpus"].get<std::string>(), &line_numbers);

  std::optional<ModelCheckpoint> resume;
  if (cfg.contains("resume"))
    resume = load_checkpoint(cfg["resume"].get<std::string>());

  Vocabulary vocab;
  if (resume)
    vocab = resume->vocab;
  else if (cfg.contains("vocab"))
    vocab = Vocabulary::load(cfg["vocab"].get<std::string>());
  else
    vocab = build_vocab(lines, line_numbers);

  ModelConfig mc = resume ? resume->config : ModelConfig::from_json(model);
  mc.vocab_size = static_cast<int>(vocab.size());
  mc.validate();
  const TrainConfig tc = TrainConfig::from_json(train);
  cfg["model"] = mc.to_json();
  cfg["train"] = tc.to_json();

  const fs::path dir = prepare_out(cfg["out"].get<std::string>());
  write_json(dir / "resolved_config.json", cfg);
  vocab.save(dir / "vocab.json");

  JsonlWriter records(dir / "records.jsonl", resume.has_value());
  const fs::path ckpt_dir = dir / "checkpoints";
  PretrainHooks hooks;
  hooks.on_record = [&](const RunRecord &r) { records.write(r.to_json()); };
  hooks.on_checkpoint = [&](const ModelCheckpoint &c) {
    fs::create_directories(ckpt_dir);
    char name[32];
    std::snprintf(name, sizeof(name), "step_%08lld.ckpt",
                  static_cast<long long>(c.step));
    save_checkpoint(c, ckpt_dir / name);
  };

  PretrainResult result;
  try {
    result = pretrain(lines, vocab, mc, tc, resume ? &*resume : nullptr, hooks);
  } catch (const DivergedLossError &e) {
    save_checkpoint(e.last_good(), dir / "last_good.ckpt");
    throw;
  }
  save_checkpoint(result.checkpoint, dir / "model.ckpt");

  {
    std::ofstream losses(dir / "step_losses.csv",
                         resume ? std::ios::app : std::ios::trunc);
    if (!resume)
      losses << "step,loss\n";
    for (std::size_t i = 0; i < result.step_losses.size(); ++i)
      losses << result.first_step + static_cast<std::int64_t>(i) << ','
             << fmt(result.step_losses[i]) << '\n';
  }

  const json summary {
    {             "step",  result.checkpoint.step },
    {  "final_train_nll",  result.final_train_nll },
    {  "final_valid_nll",  result.final_valid_nll },
    { "dropped_too_long", result.dropped_too_long },
    {   "unknown_tokens",   result.unknown_tokens },
    {       "vocab_size",            vocab.size() },
  };
  write_json(dir / "summary.json", summary);
  out << dump_line(summary) << '\n';
  return 0;
}

// sample --------------------------------------------------------------------

struct SampleArgs {
  Common common;
  std::optional<std::string> checkpoint, oracle;
  std::optional<int> n, max_len;
  std::optional<double> temperature;
  bool greedy = false;
};

int cmd_sample(const SampleArgs &a, std::ostream &out) {
  json cfg = a.common.load();
  cfg["command"] = "sample";
  cfg["checkpoint"] = required_path(cfg, "checkpoint", a.checkpoint);
  put(cfg, "oracle", a.oracle);
  json sc_json = section(cfg, "sample");
  put(sc_json, "n", a.n);
  put(sc_json, "max_len", a.max_len);
  put(sc_json, "temperature", a.temperature);
  if (a.greedy)
    sc_json["greedy"] = true;

  const ModelCheckpoint ckpt = load_checkpoint(cfg["checkpoint"].get<std::string>());
  SampleConfig sc;
  try {
    sc.batch_size = sc_json.value("n", 100);
    sc.max_len = sc_json.value("max_len", ckpt.config.max_len);
    sc.temperature = sc_json.value("temperature", 1.0);
    sc.greedy = sc_json.value("greedy", false);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kBadParameters, std::string("sample config: ") + e.what());
  }
  sc.seed = cfg["seed"].get<std::uint64_t>();
  sc.validate(ckpt.config);
  sc_json = { { "n", sc.batch_size },
              { "max_len", sc.max_len },
              { "temperature", sc.temperature },
              { "greedy", sc.greedy } };
  cfg["sample"] = sc_json;

  std::optional<OracleSpec> oracle;
  if (cfg.contains("oracle"))
    oracle = oracle_from(cfg["oracle"]);

  const fs::path dir = prepare_out(cfg["out"].get<std::string>());
  write_json(dir / "resolved_config.json", cfg);

  const SampleBatch batch = sample_with_logprob(ckpt, sc);
  JsonlWriter lines(dir / "samples.jsonl");
  std::size_t valid = 0;
  std::set<std::string> unique;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    json line {
      {     "index",                 i },
      {    "smiles",  batch.decoded[i] },
      {"terminated", static_cast<bool>(batch.terminated[i]) },
      {   "logprob", batch.logprobs[i] },
    };
    std::optional<MolGraph> mol;
    if (batch.terminated[i]) {
      try {
        mol = parse(batch.decoded[i]);
      } catch (const Error &) {
      }
    }
    line["valid"] = mol.has_value();
    if (mol) {
      ++valid;
      unique.insert(canonical_key(*mol));
    }
    if (oracle)
      line["score"] = mol ? score(*oracle, *mol) : 0.0;
    lines.write(line);
  }
  const json summary {
    {            "n",                         batch.size() },
    { "validity_pct", 100.0 * static_cast<double>(valid)
                          / static_cast<double>(batch.size()) },
    {       "unique",                        unique.size() },
  };
  write_json(dir / "summary.json", summary);
  out << dump_line(summary) << '\n';
  return 0;
}

// finetune ------------------------------------------------------------------

struct FinetuneArgs {
  Common common;
  std::optional<std::string> prior, oracle;
  std::optional<double> sigma, lr, temperature;
  std::optional<int> batch_size, max_steps, replay_capacity, replay_sample,
      max_len;
  std::optional<std::int64_t> budget;
};

int cmd_finetune(const FinetuneArgs &a, std::ostream &out) {
  json cfg = a.common.load();
  cfg["command"] = "finetune";
  cfg["prior"] = required_path(cfg, "prior", a.prior);
  put(cfg, "oracle", a.oracle);
  if (!cfg.contains("oracle"))
    throw Error(ErrorCode::kUsageError, "missing required --oracle");

  json rl = section(cfg, "rl");
  put(rl, "sigma", a.sigma);
  put(rl, "learning_rate", a.lr);
  put(rl, "temperature", a.temperature);
  put(rl, "batch_size", a.batch_size);
  put(rl, "max_steps", a.max_steps);
  put(rl, "replay_capacity", a.replay_capacity);
  put(rl, "replay_sample", a.replay_sample);
  put(rl, "max_len", a.max_len);
  put(rl, "budget", a.budget);
  rl["seed"] = cfg["seed"];
  const RLConfig rc = RLConfig::from_json(rl);
  cfg["rl"] = rc.to_json();
  const OracleSpec oracle = oracle_from(cfg["oracle"]);

  const ModelCheckpoint prior = load_checkpoint(cfg["prior"].get<std::string>());
  const fs::path dir = prepare_out(cfg["out"].get<std::string>());
  write_json(dir / "resolved_config.json", cfg);

  JsonlWriter records(dir / "records.jsonl");
  FinetuneHooks hooks;
  hooks.on_step = [&](const RLRecord &r) {
    records.write(r.to_json());
    return true;
  };
  const FinetuneResult result = finetune(prior, oracle, rc, hooks);
  save_checkpoint(result.agent, dir / "agent.ckpt");
  result.ledger.save(dir / "ledger.jsonl");

  json summary {
    {   "stop_reason", stop_reason_name(result.stop) },
    {         "steps",            result.agent.step },
    {  "oracle_calls",          result.ledger.used() },
    {"scoring_rounds",        result.scoring_rounds },
  };
  if (!result.records.empty()) {
    summary["final_mean_score"] = result.records.back().mean_score;
    summary["top1"] = result.records.back().top1;
    summary["top10"] = result.records.back().top10;
  }
  write_json(dir / "summary.json", summary);
  out << dump_line(summary) << '\n';
  return 0;
}

// evaluate ------------------------------------------------------------------

struct EvaluateArgs {
  Common common;
  std::vector<std::string> ledgers;
  std::optional<std::string> samples;
  std::optional<std::int64_t> budget;
  std::vector<int> ks;
  std::optional<int> threshold, bin_width;
};

std::vector<ScoredSample> read_samples(const fs::path &path,
                                       const OracleSpec &fallback) {
  std::vector<ScoredSample> samples;
  for (const json &j: read_jsonl(path)) {
    ScoredSample s;
    s.smiles = j.at("smiles").get<std::string>();
    if (j.contains("score")) {
      s.score = j["score"].get<double>();
    } else {
      try {
        s.score = score(fallback, parse(s.smiles));
      } catch (const Error &) {
        s.score = 0;
      }
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

int cmd_evaluate(const EvaluateArgs &a, std::ostream &out) {
  json cfg = a.common.load();
  cfg["command"] = "evaluate";
  if (!a.ledgers.empty())
    cfg["ledgers"] = a.ledgers;
  if (!cfg.contains("ledgers") || !cfg["ledgers"].is_array()
      || cfg["ledgers"].empty())
    throw Error(ErrorCode::kUsageError, "missing required --ledger");
  put(cfg, "samples", a.samples);
  json ev = section(cfg, "eval");
  put(ev, "budget", a.budget);
  if (!a.ks.empty())
    ev["ks"] = a.ks;
  put(ev, "threshold", a.threshold);
  put(ev, "bin_width", a.bin_width);
  std::vector<int> ks;
  std::int64_t budget = 0;
  int threshold = 50, bin_width = 10;
  try {
    ks = ev.value("ks", std::vector<int> { 1, 10, 100 });
    budget = ev.value("budget", std::int64_t { 0 });
    threshold = ev.value("threshold", 50);
    bin_width = ev.value("bin_width", 10);
  } catch (const json::exception &e) {
    throw Error(ErrorCode::kBadParameters, std::string("eval config: ") + e.what());
  }
  for (int k: ks)
    if (k < 1)
      throw Error(ErrorCode::kBadParameters, "k must be >= 1");
  ev["ks"] = ks;
  ev["budget"] = budget;
  ev["threshold"] = threshold;
  ev["bin_width"] = bin_width;
  cfg["eval"] = ev;

  std::vector<OracleLedger> ledgers;
  for (const json &p: cfg["ledgers"])
    ledgers.push_back(OracleLedger::load(p.get<std::string>()));
  const std::int64_t horizon = budget == 0 ? ledgers.front().budget() : budget;
  for (const OracleLedger &l: ledgers)
    if (budget == 0 && l.budget() != horizon)
      throw Error(ErrorCode::kBadParameters,
                  "ledgers have different budgets; pass --budget");

  const fs::path dir = prepare_out(cfg["out"].get<std::string>());
  write_json(dir / "resolved_config.json", cfg);

  std::vector<MetricReport> reports;
  for (const OracleLedger &l: ledgers)
    reports.push_back(evaluate_ledger(l, ks, horizon));

  std::optional<LengthAblation> ablation;
  if (cfg.contains("samples")) {
    ablation = length_ablation(
        read_samples(cfg["samples"].get<std::string>(), ledgers.front().spec()),
        threshold, bin_width);
    reports.front().length = ablation;
  }

  json report;
  if (reports.size() == 1) {
    report = reports.front().to_json();
  } else {
    json runs = json::array();
    for (const MetricReport &r: reports)
      runs.push_back(r.to_json());
    json agg;
    for (int k: ks) {
      std::vector<std::vector<double>> v;
      for (const MetricReport &r: reports)
        v.push_back({ r.auc_top(k) });
      CurveStats s = aggregate_curves(v);
      agg["auc_top" + std::to_string(k)] = {
        { "mean",   s.mean[0] },
        {  "std", s.stddev[0] }
      };
    }
    report = {
      {     "runs",  runs },
      {"aggregate",   agg },
      {  "scaling", "identity" },
    };
    if (ablation)
      report["length_ablation"] = ablation->to_json();
  }
  write_json(dir / "report.json", report);

  for (int k: ks) {
    std::vector<std::vector<double>> curves;
    for (const OracleLedger &l: ledgers) {
      const std::vector<double> s = l.scores();
      curves.push_back(running_top_k(s, k, horizon));
    }
    std::ostringstream csv;
    csv << "call";
    if (curves.size() == 1)
      csv << ",t";
    else
      for (std::size_t r = 0; r < curves.size(); ++r)
        csv << ",run_" << r;
    csv << '\n';
    for (std::size_t i = 0; i < curves.front().size(); ++i) {
      csv << i + 1;
      for (const auto &c: curves)
        csv << ',' << fmt(c[i]);
      csv << '\n';
    }
    write_text(dir / ("curve_top" + std::to_string(k) + ".csv"), csv.str());

    if (curves.size() > 1) {
      const CurveStats s = aggregate_curves(curves);
      std::ostringstream agg;
      agg << "call,mean,std\n";
      for (std::size_t i = 0; i < s.mean.size(); ++i)
        agg << i + 1 << ',' << fmt(s.mean[i]) << ',' << fmt(s.stddev[i]) << '\n';
      write_text(dir / ("aggregate_top" + std::to_string(k) + ".csv"), agg.str());
    }
  }

  if (ablation) {
    std::ostringstream csv;
    csv << "lo,hi,count,mean,min,q1,median,q3,max\n";
    for (const LengthBin &b: ablation->bins)
      csv << b.lo << ',' << b.hi << ',' << b.stats.count << ','
          << fmt(b.stats.mean) << ',' << fmt(b.stats.min) << ','
          << fmt(b.stats.q1) << ',' << fmt(b.stats.median) << ','
          << fmt(b.stats.q3) << ',' << fmt(b.stats.max) << '\n';
    write_text(dir / "length_bins.csv", csv.str());
  }

  json brief;
  const MetricReport &first = reports.front();
  for (int k: ks)
    brief["auc_top" + std::to_string(k)] = first.auc_top(k);
  brief["report"] = (dir / "report.json").string();
  out << dump_line(brief) << '\n';
  return 0;
}

void report_error(std::ostream &err, std::string_view code,
                  const std::string &message) {
  err << dump_line({
      {  "error", code    },
      {"message", message }
  }) << '\n';
}
}  // namespace

fs::path resolve_output_dir(const fs::path &dir) {
  const char *root = std::getenv("MOLGEN_OUTPUT_ROOT");
  if (root == nullptr || *root == '\0' || dir.is_absolute())
    return dir;
  return fs::path(root) / dir;
}

int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err) {
  CLI::App app { "molgen: transformer SMILES generator with RL fine-tuning",
                 "molgen" };
  app.require_subcommand(1);

  BuildVocabArgs bv;
  CLI::App *c_bv = app.add_subcommand("build-vocab", "Build a token vocabulary");
  bv.common.add_to(c_bv);
  c_bv->add_option("--corpus", bv.corpus, "SMILES corpus, one per line");

  PretrainArgs pt;
  CLI::App *c_pt = app.add_subcommand("pretrain", "Maximum-likelihood pretraining");
  pt.common.add_to(c_pt);
  c_pt->add_option("--corpus", pt.corpus, "SMILES corpus, one per line");
  c_pt->add_option("--vocab", pt.vocab, "Vocabulary JSON");
  c_pt->add_option("--resume", pt.resume, "Checkpoint to resume from");
  c_pt->add_option("--max-steps", pt.max_steps);
  c_pt->add_option("--batch-size", pt.batch_size);
  c_pt->add_option("--warmup", pt.warmup);
  c_pt->add_option("--log-interval", pt.log_interval);
  c_pt->add_option("--checkpoint-interval", pt.checkpoint_interval);
  c_pt->add_option("--validity-samples", pt.validity_samples);
  c_pt->add_option("--lr", pt.lr);
  c_pt->add_option("--validation-fraction", pt.validation_fraction);
  c_pt->add_option("--d-model", pt.d_model);
  c_pt->add_option("--n-layers", pt.n_layers);
  c_pt->add_option("--n-heads", pt.n_heads);
  c_pt->add_option("--d-ff", pt.d_ff);
  c_pt->add_option("--max-len", pt.max_len);
  c_pt->add_option("--dropout", pt.dropout);

  SampleArgs sa;
  CLI::App *c_sa = app.add_subcommand("sample", "Sample SMILES from a checkpoint");
  sa.common.add_to(c_sa);
  c_sa->add_option("--checkpoint", sa.checkpoint, "Model checkpoint");
  c_sa->add_option("--oracle", sa.oracle, "Score samples with this oracle");
  c_sa->add_option("-n,--n", sa.n, "Number of samples");
  c_sa->add_option("--max-len", sa.max_len);
  c_sa->add_option("--temperature", sa.temperature);
  c_sa->add_flag("--greedy", sa.greedy);

  FinetuneArgs ft;
  CLI::App *c_ft = app.add_subcommand("finetune", "RL fine-tuning against an oracle");
  ft.common.add_to(c_ft);
  c_ft->add_option("--prior", ft.prior, "Prior checkpoint");
  c_ft->add_option("--oracle", ft.oracle, "Oracle name");
  c_ft->add_option("--sigma", ft.sigma);
  c_ft->add_option("--lr", ft.lr);
  c_ft->add_option("--temperature", ft.temperature);
  c_ft->add_option("--batch-size", ft.batch_size);
  c_ft->add_option("--max-steps", ft.max_steps);
  c_ft->add_option("--replay-capacity", ft.replay_capacity);
  c_ft->add_option("--replay-sample", ft.replay_sample);
  c_ft->add_option("--max-len", ft.max_len);
  c_ft->add_option("--budget", ft.budget);

  EvaluateArgs ev;
  CLI::App *c_ev = app.add_subcommand("evaluate", "Metrics from oracle ledgers");
  ev.common.add_to(c_ev);
  c_ev->add_option("--ledger", ev.ledgers, "Ledger JSONL (repeatable)");
  c_ev->add_option("--samples", ev.samples, "Scored samples JSONL");
  c_ev->add_option("--budget", ev.budget);
  c_ev->add_option("--k", ev.ks, "Top-K values")->delimiter(',');
  c_ev->add_option("--threshold", ev.threshold);
  c_ev->add_option("--bin-width", ev.bin_width);

  std::vector<const char *> argv { "molgen" };
  for (const std::string &a: args)
    argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    report_error(err, error_code_name(ErrorCode::kUsageError), e.what());
    return 2;
  }

  try {
    if (c_bv->parsed())
      return cmd_build_vocab(bv, out);
    if (c_pt->parsed())
      return cmd_pretrain(pt, out);
    if (c_sa->parsed())
      return cmd_sample(sa, out);
    if (c_ft->parsed())
      return cmd_finetune(ft, out);
    if (c_ev->parsed())
      return cmd_evaluate(ev, out);
  } catch (const Error &e) {
    report_error(err, error_code_name(e.code()), e.what());
    return e.code() == ErrorCode::kUsageError ? 2 : 1;
  } catch (const std::exception &e) {
    report_error(err, "InternalError", e.what());
    return 1;
  }
  report_error(err, error_code_name(ErrorCode::kUsageError), "no subcommand");
  return 2;
}

int run(int argc, const char *const *argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i)
    args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}
}  // namespace molgen::cli
