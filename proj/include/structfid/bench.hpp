#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "structfid/ci_catalog.hpp"
#include "structfid/generators.hpp"
#include "structfid/predictors.hpp"
#include "structfid/scm.hpp"
#include "structfid/table.hpp"

namespace structfid {

/// Name of the baseline row that evaluates the reference split itself.
inline constexpr std::string_view kBaselineName = "ref";

struct DatasetConfig {
  std::string name;
  std::shared_ptr<const ScmSpec> scm;  // ground truth; enables CI metrics
  std::shared_ptr<const Table> table;  // used instead of sampling when set
  std::int64_t n_full = kDefaultFullSampleSize;

  // Provenance kept for serialisation.
  std::string scm_path;
  std::string csv_path;
  std::string schema_path;
};

struct BenchmarkConfig {
  std::vector<DatasetConfig> datasets;
  std::vector<GeneratorSpec> generators;  // seeds are derived per cell
  int repeats = 10;
  double alpha = 0.01;
  PredictorConfig predictors;
  std::uint64_t master_seed = 0;
  std::vector<std::string> metrics;  // empty selects every metric
  std::filesystem::path output_dir = "out";
  int workers = 1;
  double cell_time_limit_seconds = 120.0;
  std::optional<int> max_cond_size;

  std::vector<std::string> selected_metrics() const;
  /// Throws InvalidConfig.
  void validate() const;
};

/// Parses the JSON configuration; relative paths resolve against base_dir and
/// datasets are loaded eagerly. Throws InvalidConfig, Parse, Io.
BenchmarkConfig config_from_json(std::string_view text, const std::filesystem::path& base_dir);
BenchmarkConfig load_config(const std::filesystem::path& path);

enum class CellStatus { Ok, Failed, Skipped };
std::string_view to_string(CellStatus status) noexcept;

struct ReportRow {
  std::string dataset;
  std::string generator;
  int repeat = 0;
  std::string metric;
  CellStatus status = CellStatus::Ok;
  double value = 0.0;  // meaningful when Ok
  std::string error;   // error code and message when Failed or Skipped
  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

struct AggregateRow {
  std::string dataset;
  std::string generator;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;  // sample std over successful repeats, 0 for one repeat
  int count = 0;        // successful repeats
  int failed = 0;       // excluded failed repeats
  friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

/// ADTM-normalised mean of one generator on one dataset (baseline excluded).
struct AdtmRow {
  std::string dataset;
  std::string generator;
  std::string metric;
  double value = 0.0;
  friend bool operator==(const AdtmRow&, const AdtmRow&) = default;
};

/// Mean and std of ADTM values across datasets.
struct NormalizedRow {
  std::string generator;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
  int datasets = 0;
  friend bool operator==(const NormalizedRow&, const NormalizedRow&) = default;
};

struct CorrelationRow {
  std::string metric_a;
  std::string metric_b;
  std::optional<double> rho;  // empty when undefined, see error
  int cells = 0;
  std::string error;
  friend bool operator==(const CorrelationRow&, const CorrelationRow&) = default;
};

struct EvaluationReport {
  std::uint64_t master_seed = 0;
  int repeats = 0;
  double alpha = 0.0;
  std::vector<std::string> datasets;
  std::vector<std::string> generators;  // baseline first
  std::vector<std::string> metrics;
  std::vector<ReportRow> rows;
  std::vector<AggregateRow> aggregate;
  std::vector<AdtmRow> adtm;
  std::vector<NormalizedRow> normalized;
  std::vector<CorrelationRow> correlations;
  int failed_cells = 0;

  bool has_failures() const noexcept { return failed_cells > 0; }
  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

/// Everything one metric evaluation may need. Catalogs are null for datasets
/// without a ground-truth SCM.
struct MetricContext {
  const Table* ref = nullptr;
  const Table* val = nullptr;
  const Table* test = nullptr;
  const CiCatalog* global_catalog = nullptr;
  const CiCatalog* local_catalog = nullptr;
  double alpha = 0.01;
  const PredictorConfig* predictors = nullptr;
  std::uint64_t utility_seed = 0;
  /// Optional cache of variable_performances(ref, val, test, predictors, utility_seed).
  const std::vector<PerfScore>* reference_scores = nullptr;
};

/// Value of one named metric for `eval`. Returns nullopt for CI metrics
/// without a catalog (skipped); other problems throw.
std::optional<double> evaluate_metric(std::string_view metric, const Table& eval, const MetricContext& context);

EvaluationReport run_benchmark(const BenchmarkConfig& cfg);

/// Rebuilds aggregate, ADTM, normalised and correlation blocks from rows.
void summarize(EvaluationReport& report);

/// Spearman correlation of every metric pair over per-(dataset, generator)
/// means, baseline excluded. Pairs with fewer than 3 cells carry
/// InsufficientCells.
std::vector<CorrelationRow> correlate_metrics(const EvaluationReport& report);

enum class ReportFormat { Json, Csv, Markdown };

std::string render_report(const EvaluationReport& report, ReportFormat format);
EvaluationReport report_from_json(std::string_view text);

/// Writes report.json, report.csv and report.md into dir.
void write_report(const EvaluationReport& report, const std::filesystem::path& dir);

}  // namespace structfid
