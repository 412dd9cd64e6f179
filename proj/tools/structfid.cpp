// Command-line front end: SCM sampling, catalog derivation, single-dataset
// evaluation and full benchmark runs.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <string>

#include "structfid/bench.hpp"
#include "structfid/ci_catalog.hpp"
#include "structfid/ci_tests.hpp"
#include "structfid/error.hpp"
#include "structfid/metrics.hpp"
#include "structfid/scm.hpp"
#include "structfid/split.hpp"
#include "structfid/table_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace structfid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitFailures = 2;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

json statements_json(const CiCatalog& catalog) {
  json out = json::array();
  for (const CiStatement& s : catalog.statements) {
    out.push_back({{"pair", {s.j, s.k}},
                   {"conditioning_set", s.conditioning_set},
                   {"kind", s.kind == CiKind::Independent ? "INDEPENDENT" : "DEPENDENT"}});
  }
  return out;
}

int cmd_sample(const std::string& spec_path, std::int64_t n, std::uint64_t seed, const std::string& out) {
  const ScmSpec spec = load_scm(spec_path);
  save_table(out, sample_scm(spec, n, seed));
  return kExitOk;
}

int cmd_derive(const std::string& spec_path, std::optional<int> max_cond_size, const std::string& out) {
  const ScmSpec spec = load_scm(spec_path);
  CatalogOptions options;
  options.max_cond_size = max_cond_size;
  const CiCatalog global = derive_ci_catalog(spec.graph, options);
  const CiCatalog local = local_filter(global, spec.target_index);
  json names = json::array();
  for (const Column& c : spec.variables) names.push_back(c.name);
  const json doc{{"variables", names},
                 {"target", spec.target_index},
                 {"max_cond_size", max_cond_size ? json(*max_cond_size) : json(nullptr)},
                 {"global", statements_json(global)},
                 {"local", statements_json(local)}};
  write_text(out, doc.dump(2) + "\n");
  return kExitOk;
}

struct EvalArgs {
  std::string ref, schema, syn, scm, test, out;
  double alpha = kDefaultAlpha;
  std::uint64_t seed = 0;
  std::vector<std::string> metrics;
};

int cmd_eval(const EvalArgs& args) {
  const Schema schema = load_schema(args.schema);
  const Table real = load_table(args.ref, schema);
  const Table syn = load_table(args.syn, schema);

  SplitTables parts;
  if (args.test.empty()) {
    parts = apply_split(real, split(real, args.seed, 0));
  } else {
    const DataSplit s = split(real, args.seed, 0, SplitFractions{0.0, 0.1});
    parts = apply_split(real, s);
    parts.test = load_table(args.test, schema);
  }

  std::optional<ScmSpec> scm;
  std::optional<CiCatalog> global;
  std::optional<CiCatalog> local;
  if (!args.scm.empty()) {
    scm = load_scm(args.scm);
    global = derive_ci_catalog(scm->graph);
    local = local_filter(*global, scm->target_index);
  }

  PredictorConfig predictors;
  MetricContext context;
  context.ref = &parts.ref;
  context.val = &parts.val;
  context.test = &parts.test;
  context.alpha = args.alpha;
  context.predictors = &predictors;
  context.utility_seed = args.seed;
  if (global) {
    context.global_catalog = &*global;
    context.local_catalog = &*local;
  }

  EvaluationReport report;
  report.master_seed = args.seed;
  report.repeats = 1;
  report.alpha = args.alpha;
  report.datasets = {fs::path(args.ref).stem().string()};
  report.generators = {std::string(kBaselineName), fs::path(args.syn).stem().string()};
  if (report.generators[1] == kBaselineName) report.generators[1] = "syn";
  if (args.metrics.empty()) {
    report.metrics.assign(kMetricNames.begin(), kMetricNames.end());
  } else {
    report.metrics = args.metrics;
  }

  for (std::size_t g = 0; g < report.generators.size(); ++g) {
    const Table& eval = g == 0 ? parts.ref : syn;
    for (const std::string& metric : report.metrics) {
      ReportRow row{report.datasets[0], report.generators[g], 0, metric, CellStatus::Ok, 0.0, ""};
      try {
        const std::optional<double> value = evaluate_metric(metric, eval, context);
        if (value) {
          row.value = *value;
        } else {
          row.status = CellStatus::Skipped;
          row.error = "no ground-truth SCM";
        }
      } catch (const Error& e) {
        row.status = CellStatus::Failed;
        row.error = e.what();
      }
      report.rows.push_back(row);
    }
  }
  summarize(report);
  write_text(args.out, render_report(report, ReportFormat::Json));
  return report.has_failures() ? kExitFailures : kExitOk;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir, std::optional<int> workers) {
  BenchmarkConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  if (workers) cfg.workers = *workers;
  const EvaluationReport report = run_benchmark(cfg);
  write_report(report, cfg.output_dir);
  std::cerr << "wrote " << (cfg.output_dir / "report.json").string() << " (" << report.rows.size() << " cells, "
            << report.failed_cells << " failed)\n";
  return report.has_failures() ? kExitFailures : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural-fidelity evaluation of synthetic tabular data"};
  app.require_subcommand(1);

  std::string spec_path, out_path;
  std::int64_t n = kDefaultFullSampleSize;
  std::uint64_t seed = 0;
  auto* sample = app.add_subcommand("sample-scm", "Forward-sample a dataset from an SCM spec");
  sample->add_option("--spec", spec_path, "SCM spec (JSON)")->required();
  sample->add_option("--n", n, "Row count")->check(CLI::PositiveNumber);
  sample->add_option("--seed", seed, "Random seed");
  sample->add_option("--out", out_path, "Output CSV")->required();

  std::optional<int> max_cond_size;
  auto* derive = app.add_subcommand("derive-ci", "Derive the CI catalog of an SCM graph");
  derive->add_option("--spec", spec_path, "SCM spec (JSON)")->required();
  derive->add_option("--max-cond-size", max_cond_size, "Largest conditioning set");
  derive->add_option("--out", out_path, "Output catalog (JSON)")->required();

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Score one synthetic dataset against real data");
  eval->add_option("--ref", eval_args.ref, "Real data CSV")->required();
  eval->add_option("--schema", eval_args.schema, "Schema of both CSVs (JSON)")->required();
  eval->add_option("--syn", eval_args.syn, "Dataset to evaluate (CSV)")->required();
  eval->add_option("--scm", eval_args.scm, "Ground-truth SCM; enables CI metrics");
  eval->add_option("--test", eval_args.test, "Held-out real test CSV; otherwise split from --ref");
  eval->add_option("--alpha", eval_args.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--seed", eval_args.seed, "Split and predictor seed");
  eval->add_option("--metrics", eval_args.metrics, "Metric subset");
  eval->add_option("--out", eval_args.out, "Output report (JSON)")->required();

  std::string config_path, out_dir;
  std::optional<int> workers;
  auto* bench = app.add_subcommand("bench", "Run a benchmark configuration");
  bench->add_option("--config", config_path, "Benchmark config (JSON)")->required();
  bench->add_option("--out-dir", out_dir, "Report directory (overrides the config)");
  bench->add_option("--workers", workers, "Worker threads (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (*sample) return cmd_sample(spec_path, n, seed, out_path);
    if (*derive) return cmd_derive(spec_path, max_cond_size, out_path);
    if (*eval) return cmd_eval(eval_args);
    if (*bench) return cmd_bench(config_path, out_dir, workers);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
