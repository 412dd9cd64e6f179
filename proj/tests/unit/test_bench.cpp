#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "structfid/bench.hpp"
#include "structfid/error.hpp"
#include "structfid/metrics.hpp"
#include "structfid/scm.hpp"
#include "structfid/table_io.hpp"

using namespace structfid;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Parse;
}

const std::string kChainScm = R"({
  "variables": [
    {"name": "a", "kind": "categorical", "categories": ["x", "y"]},
    {"name": "b", "kind": "categorical", "categories": ["x", "y"]},
    {"name": "c", "kind": "numerical"},
    {"name": "d", "kind": "numerical"}
  ],
  "edges": [[0, 1], [1, 2], [2, 3]],
  "mechanisms": {
    "a": {"cpt": [[0.5, 0.5]]},
    "b": {"cpt": [[0.85, 0.15], [0.15, 0.85]]},
    "c": {"offsets": [0.0, 2.0], "noise_std": 0.7},
    "d": {"weights": {"c": 1.0}, "noise_std": 0.5}
  },
  "target": 1
})";

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("structfid_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_json(const std::string& generators, const std::string& metrics, int repeats, int n_full = 600) {
  return R"({"datasets": [{"name": "chain", "scm": )" + kChainScm + R"(, "n_full": )" + std::to_string(n_full) +
         R"(}], "generators": )" + generators + R"(, "repeats": )" + std::to_string(repeats) +
         R"(, "metrics": )" + metrics +
         R"(, "master_seed": 5, "predictor_config": {"gbdt": {"trees": 10}}})";
}

std::map<std::tuple<std::string, std::string, int, std::string>, ReportRow> index_rows(const EvaluationReport& r) {
  std::map<std::tuple<std::string, std::string, int, std::string>, ReportRow> out;
  for (const ReportRow& row : r.rows) out[{row.dataset, row.generator, row.repeat, row.metric}] = row;
  return out;
}

}  // namespace

TEST_CASE("REFERENCE baseline scores utility 1 in every repeat") {
  const BenchmarkConfig cfg = config_from_json(config_json(R"([{"kind": "REFERENCE"}])", R"(["global_utility"])", 3), ".");
  const EvaluationReport report = run_benchmark(cfg);
  CHECK(report.generators == std::vector<std::string>{"ref", "REFERENCE"});
  int baseline = 0;
  for (const ReportRow& row : report.rows) {
    REQUIRE(row.status == CellStatus::Ok);
    CHECK(row.value == 1.0);  // REFERENCE with full size equals ref as well
    baseline += row.generator == "ref";
  }
  CHECK(baseline == 3);
}

TEST_CASE("oracle beats marginal on global CI; report blocks are consistent") {
  const BenchmarkConfig cfg = config_from_json(
      config_json(R"([{"kind": "SCM_ORACLE"}, {"kind": "MARGINAL_INDEPENDENT"}, {"kind": "NOISY_COPY", "sigma": 1.0, "name": "noisy"}])",
                  R"(["global_ci", "local_ci", "shape", "global_utility"])", 2, 1500),
      ".");
  const EvaluationReport report = run_benchmark(cfg);
  CHECK(report.failed_cells == 0);
  CHECK(report.rows.size() == 1 * 4 * 2 * 4);

  std::map<std::pair<std::string, std::string>, double> mean;
  for (const AggregateRow& a : report.aggregate) mean[{a.generator, a.metric}] = a.mean;
  CHECK(mean[{"SCM_ORACLE", "global_ci"}] > mean[{"MARGINAL_INDEPENDENT", "global_ci"}]);

  // ADTM: per metric, best generator -> 1, worst -> 0, baseline excluded.
  std::map<std::string, std::vector<double>> adtm;
  for (const AdtmRow& a : report.adtm) {
    CHECK(a.generator != "ref");
    adtm[a.metric].push_back(a.value);
  }
  for (auto& [metric, values] : adtm) {
    CAPTURE(metric);
    CHECK(values.size() == 3);
    CHECK(*std::max_element(values.begin(), values.end()) == 1.0);
    const bool all_equal = std::all_of(values.begin(), values.end(), [](double v) { return v == 1.0; });
    CHECK((all_equal || *std::min_element(values.begin(), values.end()) == 0.0));
  }
  CHECK(report.correlations.size() == 6);
  for (const CorrelationRow& c : report.correlations) CHECK(c.cells == 3);
}

TEST_CASE("CSV row count and JSON round trip") {
  const BenchmarkConfig cfg =
      config_from_json(config_json(R"([{"kind": "MARGINAL_INDEPENDENT"}, {"kind": "SMOTE"}])", R"(["shape", "trend", "dcr"])", 2), ".");
  const EvaluationReport report = run_benchmark(cfg);
  const std::string csv = render_report(report, ReportFormat::Csv);
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(lines == 1 + 1 * (2 + 1) * 2 * 3);  // header + datasets x generators(+baseline) x repeats x metrics
  CHECK(report_from_json(render_report(report, ReportFormat::Json)) == report);
  const std::string md = render_report(report, ReportFormat::Markdown);
  CHECK(md.find("±") != std::string::npos);
}

TEST_CASE("bench runs are byte-identical and independent of list order and workers") {
  const std::string gens_a = R"([{"kind": "SMOTE"}, {"kind": "NOISY_COPY", "sigma": 0.5, "name": "noisy"}])";
  const std::string gens_b = R"([{"kind": "NOISY_COPY", "sigma": 0.5, "name": "noisy"}, {"kind": "SMOTE"}])";
  const std::string metrics = R"(["global_ci", "local_utility"])";
  BenchmarkConfig a = config_from_json(config_json(gens_a, metrics, 2), ".");
  a.output_dir = scratch_dir("det_a");
  BenchmarkConfig b = a;
  b.output_dir = scratch_dir("det_b");
  b.workers = 3;
  write_report(run_benchmark(a), a.output_dir);
  write_report(run_benchmark(b), b.output_dir);
  for (const char* file : {"report.json", "report.csv", "report.md"}) {
    CHECK(read_file(a.output_dir / file) == read_file(b.output_dir / file));
  }

  const auto rows_a = index_rows(run_benchmark(a));
  const auto rows_b = index_rows(run_benchmark(config_from_json(config_json(gens_b, metrics, 2), ".")));
  CHECK(rows_a == rows_b);
}

TEST_CASE("failed cells are recorded and excluded from aggregation") {
  const fs::path dir = scratch_dir("failed");
  const ScmSpec spec = scm_from_json(kChainScm);
  save_table(dir / "data.csv", sample_scm(spec, 300, 1));
  {
    std::ofstream(dir / "data.schema.json") << schema_to_json(spec.schema());
  }
  const std::string text = R"({"datasets": [{"name": "csv", "csv": "data.csv", "schema": "data.schema.json"}],
    "generators": [{"kind": "SCM_ORACLE"}, {"kind": "MARGINAL_INDEPENDENT"}],
    "repeats": 2, "metrics": ["shape", "global_ci"], "master_seed": 1})";
  const EvaluationReport report = run_benchmark(config_from_json(text, dir));
  int failed = 0, skipped = 0;
  for (const ReportRow& row : report.rows) {
    if (row.status == CellStatus::Failed) {
      ++failed;
      CHECK(row.generator == "SCM_ORACLE");
      CHECK(row.error.find("MissingScm") != std::string::npos);
    }
    if (row.status == CellStatus::Skipped) {
      ++skipped;
      CHECK(row.metric == "global_ci");
    }
  }
  CHECK(failed == 2);   // shape, two repeats
  CHECK(skipped == 6);  // global_ci of every generator: no SCM takes precedence
  CHECK(report.failed_cells == 2);
  CHECK(report.rows.size() == 3 * 2 * 2);
  for (const AggregateRow& a : report.aggregate) {
    if (a.generator == "SCM_ORACLE" && a.metric == "shape") {
      CHECK(a.count == 0);
      CHECK(a.failed == 2);
    }
  }
}

TEST_CASE("correlation block: duplicates and negations") {
  EvaluationReport r;
  r.repeats = 1;
  r.alpha = 0.01;
  r.datasets = {"d1", "d2"};
  r.generators = {"ref", "g1", "g2"};
  r.metrics = {"shape", "trend", "dcr"};
  double value = 0.1;
  for (const auto& d : r.datasets) {
    for (const auto& g : r.generators) {
      value = value * 1.7 + 0.3;
      const double v = std::fmod(value, 1.0);
      r.rows.push_back({d, g, 0, "shape", CellStatus::Ok, v, ""});
      r.rows.push_back({d, g, 0, "trend", CellStatus::Ok, v, ""});
      r.rows.push_back({d, g, 0, "dcr", CellStatus::Ok, -v, ""});
    }
  }
  summarize(r);
  std::map<std::pair<std::string, std::string>, CorrelationRow> c;
  for (const CorrelationRow& row : r.correlations) c[{row.metric_a, row.metric_b}] = row;
  REQUIRE(c[{"shape", "trend"}].rho.has_value());
  CHECK(*c[{"shape", "trend"}].rho == doctest::Approx(1.0));
  CHECK(*c[{"shape", "dcr"}].rho == doctest::Approx(-1.0));
  CHECK(c[{"shape", "trend"}].cells == 4);

  r.datasets = {"d1"};
  std::erase_if(r.rows, [](const ReportRow& row) { return row.dataset == "d2"; });
  summarize(r);
  for (const CorrelationRow& row : r.correlations) {
    CHECK_FALSE(row.rho.has_value());
    CHECK(row.error.find("InsufficientCells") != std::string::npos);
  }
}

TEST_CASE("configuration validation") {
  CHECK(code_of([] { config_from_json(config_json("[]", R"(["shape"])", 1), "."); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([] { config_from_json(config_json(R"([{"kind": "SMOTE"}])", R"(["shape"])", 0), "."); }) ==
        ErrorCode::InvalidConfig);
  CHECK(code_of([] { config_from_json(config_json(R"([{"kind": "SMOTE", "colour": 1}])", R"(["shape"])", 1), "."); }) ==
        ErrorCode::InvalidConfig);
  CHECK(code_of([] { config_from_json(config_json(R"([{"kind": "SMOTE"}])", R"(["accuracy"])", 1), "."); }) ==
        ErrorCode::InvalidConfig);
  BenchmarkConfig cfg = config_from_json(config_json(R"([{"kind": "SMOTE"}])", R"(["shape"])", 1), ".");
  cfg.alpha = 1.0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::InvalidConfig);
}
