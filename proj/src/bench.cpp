#include "structfid/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <thread>

#include "io_util.hpp"
#include "structfid/ci_tests.hpp"
#include "structfid/error.hpp"
#include "structfid/metrics.hpp"
#include "structfid/rng.hpp"
#include "structfid/split.hpp"
#include "structfid/table_io.hpp"

namespace structfid {

using nlohmann::json;

std::string_view to_string(CellStatus status) noexcept {
  switch (status) {
    case CellStatus::Ok: return "ok";
    case CellStatus::Failed: return "failed";
    case CellStatus::Skipped: return "skipped";
  }
  return "?";
}

namespace {

CellStatus cell_status_from_string(std::string_view text) {
  if (text == "ok") return CellStatus::Ok;
  if (text == "failed") return CellStatus::Failed;
  if (text == "skipped") return CellStatus::Skipped;
  throw Error(ErrorCode::Parse, "unknown cell status '" + std::string(text) + "'");
}

bool is_ci_metric(std::string_view metric) { return metric == "local_ci" || metric == "global_ci"; }

bool is_utility_metric(std::string_view metric) { return metric == "local_utility" || metric == "global_utility"; }

}  // namespace

// Configuration ---------------------------------------------------------------

std::vector<std::string> BenchmarkConfig::selected_metrics() const {
  if (!metrics.empty()) return metrics;
  return {kMetricNames.begin(), kMetricNames.end()};
}

void BenchmarkConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (datasets.empty()) fail("at least one dataset is required");
  if (generators.empty()) fail("at least one generator is required");
  if (repeats < 1) fail("repeats must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (workers < 1) fail("workers must be >= 1");
  if (!(cell_time_limit_seconds > 0.0)) fail("cell_time_limit_seconds must be positive");
  if (max_cond_size && *max_cond_size < 0) fail("max_cond_size must be >= 0");
  predictors.validate();

  std::set<std::string> names;
  for (const DatasetConfig& d : datasets) {
    if (d.name.empty() || !names.insert(d.name).second) fail("dataset names must be unique and non-empty");
    if (!d.scm && !d.table) fail("dataset '" + d.name + "' needs an SCM or a table");
    if (!d.table && d.n_full < 10) fail("dataset '" + d.name + "' needs n_full >= 10");
  }
  names.clear();
  for (const GeneratorSpec& g : generators) {
    g.validate(false);
    const std::string name = g.display_name();
    if (name == kBaselineName) fail("generator name 'ref' is reserved for the baseline");
    if (!names.insert(name).second) fail("generator names must be unique: " + name);
  }
  names.clear();
  for (const std::string& m : metrics) {
    metric_direction(m);
    if (!names.insert(m).second) fail("metric listed twice: " + m);
  }
}

namespace {

PredictorConfig predictors_from_json(const json& j) {
  const std::string where = "predictor_config";
  detail::require_fields(j, {"roster", "knn_k", "ridge", "logistic_max_iterations", "gbdt"}, where,
                         ErrorCode::InvalidConfig);
  PredictorConfig cfg;
  if (j.contains("roster")) {
    cfg.roster.clear();
    for (const auto& name : j.at("roster")) {
      cfg.roster.push_back(model_kind_from_string(detail::get_as<std::string>(name, where, ErrorCode::InvalidConfig)));
    }
  }
  if (j.contains("knn_k")) cfg.knn_k = detail::get_as<int>(j.at("knn_k"), where, ErrorCode::InvalidConfig);
  if (j.contains("ridge")) cfg.ridge = detail::get_as<double>(j.at("ridge"), where, ErrorCode::InvalidConfig);
  if (j.contains("logistic_max_iterations")) {
    cfg.logistic_max_iterations = detail::get_as<int>(j.at("logistic_max_iterations"), where, ErrorCode::InvalidConfig);
  }
  if (j.contains("gbdt")) {
    const json& g = j.at("gbdt");
    detail::require_fields(g, {"trees", "max_depth", "learning_rate", "l2", "min_samples_leaf", "subsample"},
                           where + ".gbdt", ErrorCode::InvalidConfig);
    auto number = [&](const char* key, auto& field) {
      if (g.contains(key)) {
        field = detail::get_as<std::decay_t<decltype(field)>>(g.at(key), where + ".gbdt", ErrorCode::InvalidConfig);
      }
    };
    number("trees", cfg.gbdt.trees);
    number("max_depth", cfg.gbdt.max_depth);
    number("learning_rate", cfg.gbdt.learning_rate);
    number("l2", cfg.gbdt.l2);
    number("min_samples_leaf", cfg.gbdt.min_samples_leaf);
    number("subsample", cfg.gbdt.subsample);
  }
  return cfg;
}

GeneratorSpec generator_from_json(const json& j) {
  const std::string where = "generator";
  detail::require_fields(j, {"name", "kind", "k", "sigma", "size_fraction"}, where, ErrorCode::InvalidConfig);
  if (!j.contains("kind")) throw Error(ErrorCode::InvalidConfig, "generator needs a kind");
  GeneratorSpec g;
  g.kind = generator_kind_from_string(detail::get_as<std::string>(j.at("kind"), where, ErrorCode::InvalidConfig));
  if (j.contains("name")) g.name = detail::get_as<std::string>(j.at("name"), where, ErrorCode::InvalidConfig);
  if (j.contains("k")) g.k = detail::get_as<int>(j.at("k"), where, ErrorCode::InvalidConfig);
  if (j.contains("sigma")) g.sigma = detail::get_as<double>(j.at("sigma"), where, ErrorCode::InvalidConfig);
  if (j.contains("size_fraction")) {
    g.size_fraction = detail::get_as<double>(j.at("size_fraction"), where, ErrorCode::InvalidConfig);
  }
  return g;
}

DatasetConfig dataset_from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string where = "dataset";
  detail::require_fields(j, {"name", "scm", "csv", "schema", "n_full"}, where, ErrorCode::InvalidConfig);
  DatasetConfig d;
  if (!j.contains("name")) throw Error(ErrorCode::InvalidConfig, "dataset needs a name");
  d.name = detail::get_as<std::string>(j.at("name"), where, ErrorCode::InvalidConfig);
  if (j.contains("n_full")) d.n_full = detail::get_as<std::int64_t>(j.at("n_full"), where, ErrorCode::InvalidConfig);
  if (j.contains("scm")) {
    const json& s = j.at("scm");
    if (s.is_string()) {
      d.scm_path = s.get<std::string>();
      d.scm = std::make_shared<const ScmSpec>(load_scm(base_dir / d.scm_path));
    } else {
      d.scm = std::make_shared<const ScmSpec>(scm_from_json(s.dump()));
    }
  }
  if (j.contains("csv") != j.contains("schema")) {
    throw Error(ErrorCode::InvalidConfig, "dataset '" + d.name + "': csv and schema go together");
  }
  if (j.contains("csv")) {
    d.csv_path = detail::get_as<std::string>(j.at("csv"), where, ErrorCode::InvalidConfig);
    d.schema_path = detail::get_as<std::string>(j.at("schema"), where, ErrorCode::InvalidConfig);
    const Schema schema = load_schema(base_dir / d.schema_path);
    d.table = std::make_shared<const Table>(load_table(base_dir / d.csv_path, schema));
  }
  return d;
}

}  // namespace

BenchmarkConfig config_from_json(std::string_view text, const std::filesystem::path& base_dir) {
  const json j = detail::parse_json(text, "benchmark config");
  const std::string where = "benchmark config";
  detail::require_fields(j,
                         {"datasets", "generators", "repeats", "alpha", "predictor_config", "master_seed", "metrics",
                          "output_dir", "workers", "cell_time_limit_seconds", "max_cond_size"},
                         where, ErrorCode::InvalidConfig);
  BenchmarkConfig cfg;
  if (j.contains("datasets")) {
    for (const auto& d : j.at("datasets")) cfg.datasets.push_back(dataset_from_json(d, base_dir));
  }
  if (j.contains("generators")) {
    for (const auto& g : j.at("generators")) cfg.generators.push_back(generator_from_json(g));
  }
  if (j.contains("repeats")) cfg.repeats = detail::get_as<int>(j.at("repeats"), where, ErrorCode::InvalidConfig);
  if (j.contains("alpha")) cfg.alpha = detail::get_as<double>(j.at("alpha"), where, ErrorCode::InvalidConfig);
  if (j.contains("predictor_config")) cfg.predictors = predictors_from_json(j.at("predictor_config"));
  if (j.contains("master_seed")) {
    cfg.master_seed = detail::get_as<std::uint64_t>(j.at("master_seed"), where, ErrorCode::InvalidConfig);
  }
  if (j.contains("metrics")) {
    cfg.metrics = detail::get_as<std::vector<std::string>>(j.at("metrics"), where, ErrorCode::InvalidConfig);
  }
  if (j.contains("output_dir")) {
    cfg.output_dir = base_dir / detail::get_as<std::string>(j.at("output_dir"), where, ErrorCode::InvalidConfig);
  }
  if (j.contains("workers")) cfg.workers = detail::get_as<int>(j.at("workers"), where, ErrorCode::InvalidConfig);
  if (j.contains("cell_time_limit_seconds")) {
    cfg.cell_time_limit_seconds = detail::get_as<double>(j.at("cell_time_limit_seconds"), where, ErrorCode::InvalidConfig);
  }
  if (j.contains("max_cond_size") && !j.at("max_cond_size").is_null()) {
    cfg.max_cond_size = detail::get_as<int>(j.at("max_cond_size"), where, ErrorCode::InvalidConfig);
  }
  cfg.validate();
  return cfg;
}

BenchmarkConfig load_config(const std::filesystem::path& path) {
  return config_from_json(detail::read_file(path), path.parent_path());
}

// Metrics ---------------------------------------------------------------------

std::optional<double> evaluate_metric(std::string_view metric, const Table& eval, const MetricContext& context) {
  const Table& ref = *context.ref;
  if (metric == "shape") return shape_score(ref, eval);
  if (metric == "trend") return trend_score(ref, eval);
  if (metric == "dcr") return dcr(ref, eval);
  if (metric == "global_ci" || metric == "local_ci") {
    const CiCatalog* catalog = metric == "global_ci" ? context.global_catalog : context.local_catalog;
    if (!catalog) return std::nullopt;
    require_same_schema(ref, eval);
    return ci_score(*catalog, eval, context.alpha);
  }
  if (is_utility_metric(metric)) {
    const PredictorConfig& cfg = *context.predictors;
    const std::uint64_t seed = context.utility_seed;
    const std::vector<PerfScore>* cached = context.reference_scores;
    if (metric == "global_utility") {
      return cached ? global_utility(eval, *cached, *context.val, *context.test, cfg, seed)
                    : global_utility(eval, ref, *context.val, *context.test, cfg, seed);
    }
    const int target = ref.target_index();
    if (!cached) return local_utility(eval, ref, *context.val, *context.test, cfg, seed);
    return utility_ratio(train_eval(eval, *context.test, target, cfg, *context.val, variable_seed(seed, target)),
                         (*cached)[static_cast<std::size_t>(target)]);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown metric '" + std::string(metric) + "'");
}

// Benchmark -------------------------------------------------------------------

namespace {

std::string describe(const std::exception& e) {
  if (dynamic_cast<const Error*>(&e)) return e.what();
  return std::string("Internal: ") + e.what();
}

/// Runs f(0..count-1) on up to `workers` threads. f must not throw.
template <typename F>
void parallel_for(std::size_t count, int workers, F&& f) {
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < count; i = next++) f(i);
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (threads <= 1) {
    drain();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(drain);
}

struct PreparedDataset {
  std::optional<Table> full;
  std::string full_error;
  std::optional<CiCatalog> global;
  std::optional<CiCatalog> local;
  std::string catalog_error;
};

PreparedDataset prepare_dataset(const DatasetConfig& d, const BenchmarkConfig& cfg, bool needs_catalog) {
  PreparedDataset out;
  try {
    out.full = d.table ? *d.table
                       : sample_scm(*d.scm, d.n_full, derive_seed(cfg.master_seed, stable_hash("dataset"), stable_hash(d.name)));
  } catch (const std::exception& e) {
    out.full_error = describe(e);
  }
  if (d.scm && needs_catalog) {
    try {
      CatalogOptions options;
      options.max_cond_size = cfg.max_cond_size;
      out.global = derive_ci_catalog(d.scm->graph, options);
      out.local = local_filter(*out.global, d.scm->target_index);
    } catch (const std::exception& e) {
      out.catalog_error = describe(e);
    }
  }
  return out;
}

/// Rows of one (dataset, repeat) unit: evaluation datasets (baseline first) x metrics.
std::vector<ReportRow> run_unit(const BenchmarkConfig& cfg, const DatasetConfig& d, const PreparedDataset& prepared,
                                int repeat, const std::vector<std::string>& metrics) {
  std::vector<std::string> names{std::string(kBaselineName)};
  for (const GeneratorSpec& g : cfg.generators) names.push_back(g.display_name());

  std::vector<ReportRow> rows;
  auto emit = [&](const std::string& generator, const std::string& metric, CellStatus status, double value,
                  std::string error) {
    rows.push_back(ReportRow{d.name, generator, repeat, metric, status, value, std::move(error)});
  };
  auto fail_all = [&](const std::string& error) {
    for (const std::string& g : names) {
      for (const std::string& m : metrics) emit(g, m, CellStatus::Failed, 0.0, error);
    }
  };
  if (!prepared.full) {
    fail_all(prepared.full_error);
    return rows;
  }

  SplitTables parts;
  try {
    const DataSplit s = split(*prepared.full, derive_seed(cfg.master_seed, stable_hash("split"), stable_hash(d.name)), repeat);
    parts = apply_split(*prepared.full, s);
  } catch (const std::exception& e) {
    fail_all(describe(e));
    return rows;
  }

  MetricContext context;
  context.ref = &parts.ref;
  context.val = &parts.val;
  context.test = &parts.test;
  context.alpha = cfg.alpha;
  context.predictors = &cfg.predictors;
  context.utility_seed = derive_seed(cfg.master_seed, stable_hash("utility"), stable_hash(d.name), repeat);
  if (prepared.global) {
    context.global_catalog = &*prepared.global;
    context.local_catalog = &*prepared.local;
  }

  // Reference scores are shared by every evaluation dataset of this unit.
  std::optional<std::vector<PerfScore>> reference_scores;
  std::string reference_error;
  bool reference_attempted = false;

  for (std::size_t gi = 0; gi < names.size(); ++gi) {
    const std::string& name = names[gi];
    const auto start = std::chrono::steady_clock::now();
    std::optional<Table> generated;
    std::string generate_error;
    if (gi > 0) {
      GeneratorSpec spec = cfg.generators[gi - 1];
      spec.seed = derive_seed(cfg.master_seed, stable_hash("generator"), stable_hash(d.name), stable_hash(name), repeat);
      spec.scm = d.scm;
      try {
        const auto n = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(std::llround(spec.size_fraction * static_cast<double>(parts.ref.rows()))));
        generated = generate(spec, parts.ref, n);
      } catch (const std::exception& e) {
        generate_error = describe(e);
      }
    }
    const Table* eval = gi == 0 ? &parts.ref : (generated ? &*generated : nullptr);

    for (const std::string& metric : metrics) {
      if (is_ci_metric(metric) && !d.scm) {
        emit(name, metric, CellStatus::Skipped, 0.0, "no ground-truth SCM");
        continue;
      }
      if (!eval) {
        emit(name, metric, CellStatus::Failed, 0.0, generate_error);
        continue;
      }
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      if (elapsed.count() > cfg.cell_time_limit_seconds) {
        emit(name, metric, CellStatus::Failed, 0.0,
             Error(ErrorCode::Timeout, "cell exceeded " + std::to_string(cfg.cell_time_limit_seconds) + " s").what());
        continue;
      }
      if (is_ci_metric(metric) && !prepared.catalog_error.empty()) {
        emit(name, metric, CellStatus::Failed, 0.0, prepared.catalog_error);
        continue;
      }
      if (is_utility_metric(metric) && !reference_attempted) {
        reference_attempted = true;
        try {
          reference_scores = variable_performances(parts.ref, parts.val, parts.test, cfg.predictors, context.utility_seed);
          context.reference_scores = &*reference_scores;
        } catch (const std::exception& e) {
          reference_error = describe(e);
        }
      }
      if (is_utility_metric(metric) && !reference_scores) {
        emit(name, metric, CellStatus::Failed, 0.0, "reference: " + reference_error);
        continue;
      }
      try {
        const std::optional<double> value = evaluate_metric(metric, *eval, context);
        if (value) {
          emit(name, metric, CellStatus::Ok, *value, "");
        } else {
          emit(name, metric, CellStatus::Skipped, 0.0, "no ground-truth SCM");
        }
      } catch (const std::exception& e) {
        emit(name, metric, CellStatus::Failed, 0.0, describe(e));
      }
    }
  }
  return rows;
}

double sample_std(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

EvaluationReport run_benchmark(const BenchmarkConfig& cfg) {
  cfg.validate();
  const std::vector<std::string> metrics = cfg.selected_metrics();
  const bool needs_catalog = std::any_of(metrics.begin(), metrics.end(), [](const auto& m) { return is_ci_metric(m); });

  std::vector<PreparedDataset> prepared(cfg.datasets.size());
  parallel_for(cfg.datasets.size(), cfg.workers,
               [&](std::size_t i) { prepared[i] = prepare_dataset(cfg.datasets[i], cfg, needs_catalog); });

  const std::size_t units = cfg.datasets.size() * static_cast<std::size_t>(cfg.repeats);
  std::vector<std::vector<ReportRow>> unit_rows(units);
  parallel_for(units, cfg.workers, [&](std::size_t u) {
    const std::size_t d = u / static_cast<std::size_t>(cfg.repeats);
    const int repeat = static_cast<int>(u % static_cast<std::size_t>(cfg.repeats));
    try {
      unit_rows[u] = run_unit(cfg, cfg.datasets[d], prepared[d], repeat, metrics);
    } catch (const std::exception& e) {
      unit_rows[u].clear();
      std::vector<std::string> names{std::string(kBaselineName)};
      for (const GeneratorSpec& g : cfg.generators) names.push_back(g.display_name());
      for (const std::string& g : names) {
        for (const std::string& m : metrics) {
          unit_rows[u].push_back(ReportRow{cfg.datasets[d].name, g, repeat, m, CellStatus::Failed, 0.0, describe(e)});
        }
      }
    }
  });

  EvaluationReport report;
  report.master_seed = cfg.master_seed;
  report.repeats = cfg.repeats;
  report.alpha = cfg.alpha;
  report.metrics = metrics;
  for (const DatasetConfig& d : cfg.datasets) report.datasets.push_back(d.name);
  report.generators.emplace_back(kBaselineName);
  for (const GeneratorSpec& g : cfg.generators) report.generators.push_back(g.display_name());

  // Canonical row order: dataset, generator, repeat, metric (config order).
  for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
    for (const std::string& g : report.generators) {
      for (int r = 0; r < cfg.repeats; ++r) {
        for (const ReportRow& row : unit_rows[d * static_cast<std::size_t>(cfg.repeats) + static_cast<std::size_t>(r)]) {
          if (row.generator == g) report.rows.push_back(row);
        }
      }
    }
  }
  summarize(report);
  return report;
}

void summarize(EvaluationReport& report) {
  report.aggregate.clear();
  report.adtm.clear();
  report.normalized.clear();
  report.failed_cells = 0;

  std::map<std::tuple<std::string, std::string, std::string>, std::pair<std::vector<double>, int>> groups;
  for (const ReportRow& row : report.rows) {
    auto& [values, failed] = groups[{row.dataset, row.generator, row.metric}];
    if (row.status == CellStatus::Ok) values.push_back(row.value);
    if (row.status == CellStatus::Failed) {
      ++failed;
      ++report.failed_cells;
    }
  }
  std::map<std::tuple<std::string, std::string, std::string>, double> means;
  for (const std::string& d : report.datasets) {
    for (const std::string& g : report.generators) {
      for (const std::string& m : report.metrics) {
        const auto it = groups.find({d, g, m});
        if (it == groups.end()) continue;
        const auto& [values, failed] = it->second;
        if (values.empty() && failed == 0) continue;
        AggregateRow row{d, g, m, 0.0, 0.0, static_cast<int>(values.size()), failed};
        if (!values.empty()) {
          row.mean = mean_of(values);
          row.stddev = sample_std(values, row.mean);
          means[{d, g, m}] = row.mean;
        }
        report.aggregate.push_back(row);
      }
    }
  }

  std::map<std::pair<std::string, std::string>, std::vector<double>> normalized;
  for (const std::string& d : report.datasets) {
    for (const std::string& m : report.metrics) {
      std::vector<std::string> names;
      std::vector<double> values;
      for (const std::string& g : report.generators) {
        if (g == kBaselineName) continue;
        const auto it = means.find({d, g, m});
        if (it == means.end()) continue;
        names.push_back(g);
        values.push_back(it->second);
      }
      if (values.empty()) continue;
      const std::vector<double> scaled = adtm_normalize(values, metric_direction(m));
      for (std::size_t i = 0; i < names.size(); ++i) {
        report.adtm.push_back(AdtmRow{d, names[i], m, scaled[i]});
        normalized[{names[i], m}].push_back(scaled[i]);
      }
    }
  }
  for (const std::string& g : report.generators) {
    for (const std::string& m : report.metrics) {
      const auto it = normalized.find({g, m});
      if (it == normalized.end()) continue;
      const double mean = mean_of(it->second);
      report.normalized.push_back(
          NormalizedRow{g, m, mean, sample_std(it->second, mean), static_cast<int>(it->second.size())});
    }
  }
  report.correlations = correlate_metrics(report);
}

std::vector<CorrelationRow> correlate_metrics(const EvaluationReport& report) {
  std::map<std::tuple<std::string, std::string, std::string>, double> means;
  for (const AggregateRow& row : report.aggregate) {
    if (row.count > 0) means[{row.dataset, row.generator, row.metric}] = row.mean;
  }
  std::vector<CorrelationRow> out;
  for (std::size_t a = 0; a < report.metrics.size(); ++a) {
    for (std::size_t b = a + 1; b < report.metrics.size(); ++b) {
      CorrelationRow row{report.metrics[a], report.metrics[b], std::nullopt, 0, ""};
      std::vector<double> xs;
      std::vector<double> ys;
      for (const std::string& d : report.datasets) {
        for (const std::string& g : report.generators) {
          if (g == kBaselineName) continue;
          const auto x = means.find({d, g, row.metric_a});
          const auto y = means.find({d, g, row.metric_b});
          if (x == means.end() || y == means.end()) continue;
          xs.push_back(x->second);
          ys.push_back(y->second);
        }
      }
      row.cells = static_cast<int>(xs.size());
      if (xs.size() < 3) {
        row.error = Error(ErrorCode::InsufficientCells, "fewer than 3 (dataset, generator) cells").what();
      } else {
        try {
          row.rho = spearman(std::span<const double>(xs), std::span<const double>(ys));
        } catch (const Error& e) {
          row.error = e.what();
        }
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

// Rendering -------------------------------------------------------------------

namespace {

constexpr std::string_view kCorrelationBasis =
    "Spearman over per-(dataset, generator) means of successful repeats; baseline excluded";

json optional_number(bool present, double value) { return present ? json(value) : json(nullptr); }

std::string shortest(double v) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, v);
  return std::string(buffer, result.ptr);
}

std::string fixed3(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.3f", v);
  return buffer;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json to_json(const EvaluationReport& report) {
  json j;
  j["master_seed"] = report.master_seed;
  j["repeats"] = report.repeats;
  j["alpha"] = report.alpha;
  j["datasets"] = report.datasets;
  j["generators"] = report.generators;
  j["metrics"] = report.metrics;
  j["failed_cells"] = report.failed_cells;
  j["correlation_basis"] = kCorrelationBasis;
  j["rows"] = json::array();
  for (const ReportRow& r : report.rows) {
    j["rows"].push_back({{"dataset", r.dataset},
                         {"generator", r.generator},
                         {"repeat", r.repeat},
                         {"metric", r.metric},
                         {"status", to_string(r.status)},
                         {"value", optional_number(r.status == CellStatus::Ok, r.value)},
                         {"error", r.error}});
  }
  j["aggregate"] = json::array();
  for (const AggregateRow& r : report.aggregate) {
    j["aggregate"].push_back({{"dataset", r.dataset},
                              {"generator", r.generator},
                              {"metric", r.metric},
                              {"mean", optional_number(r.count > 0, r.mean)},
                              {"std", optional_number(r.count > 0, r.stddev)},
                              {"count", r.count},
                              {"failed", r.failed}});
  }
  j["adtm"] = json::array();
  for (const AdtmRow& r : report.adtm) {
    j["adtm"].push_back({{"dataset", r.dataset}, {"generator", r.generator}, {"metric", r.metric}, {"value", r.value}});
  }
  j["normalized"] = json::array();
  for (const NormalizedRow& r : report.normalized) {
    j["normalized"].push_back({{"generator", r.generator},
                               {"metric", r.metric},
                               {"mean", r.mean},
                               {"std", r.stddev},
                               {"datasets", r.datasets}});
  }
  j["correlations"] = json::array();
  for (const CorrelationRow& r : report.correlations) {
    j["correlations"].push_back({{"metric_a", r.metric_a},
                                 {"metric_b", r.metric_b},
                                 {"rho", r.rho ? json(*r.rho) : json(nullptr)},
                                 {"cells", r.cells},
                                 {"error", r.error}});
  }
  return j;
}

std::string render_markdown(const EvaluationReport& report) {
  std::string out = "# Benchmark report\n\n";
  out += "master seed " + std::to_string(report.master_seed) + ", " + std::to_string(report.repeats) +
         " repeats, alpha " + shortest(report.alpha) + ", failed cells " + std::to_string(report.failed_cells) + "\n\n";

  std::map<std::pair<std::string, std::string>, const NormalizedRow*> normalized;
  for (const NormalizedRow& r : report.normalized) normalized[{r.generator, r.metric}] = &r;
  std::string header = "| generator |";
  std::string rule = "|---|";
  for (const std::string& m : report.metrics) {
    header += " " + m + " |";
    rule += "---|";
  }

  out += "## Reference baseline (raw mean over datasets)\n\n" + header + "\n" + rule + "\n| " +
         std::string(kBaselineName) + " |";
  for (const std::string& m : report.metrics) {
    std::vector<double> values;
    for (const AggregateRow& r : report.aggregate) {
      if (r.generator == kBaselineName && r.metric == m && r.count > 0) values.push_back(r.mean);
    }
    out += values.empty() ? " n/a |" : " " + fixed3(mean_of(values)) + " |";
  }
  out += "\n\n## ADTM-normalised mean ± std across datasets\n\n" + header + "\n" + rule + "\n";
  for (const std::string& g : report.generators) {
    if (g == kBaselineName) continue;
    out += "| " + g + " |";
    for (const std::string& m : report.metrics) {
      const auto it = normalized.find({g, m});
      out += it == normalized.end() ? " n/a |" : " " + fixed3(it->second->mean) + " ± " + fixed3(it->second->stddev) + " |";
    }
    out += "\n";
  }
  out += "\n## Metric correlations\n\n" + std::string(kCorrelationBasis) + ".\n\n| metric | metric | rho | cells |\n|---|---|---|---|\n";
  for (const CorrelationRow& r : report.correlations) {
    out += "| " + r.metric_a + " | " + r.metric_b + " | " + (r.rho ? fixed3(*r.rho) : std::string("n/a")) + " | " +
           std::to_string(r.cells) + " |\n";
  }
  return out;
}

}  // namespace

std::string render_report(const EvaluationReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json:
      return to_json(report).dump(2) + "\n";
    case ReportFormat::Csv: {
      std::string out = "dataset,generator,repeat,metric,status,value,error\n";
      for (const ReportRow& r : report.rows) {
        out += csv_field(r.dataset) + "," + csv_field(r.generator) + "," + std::to_string(r.repeat) + "," +
               csv_field(r.metric) + "," + std::string(to_string(r.status)) + "," +
               (r.status == CellStatus::Ok ? shortest(r.value) : std::string()) + "," + csv_field(r.error) + "\n";
      }
      return out;
    }
    case ReportFormat::Markdown:
      return render_markdown(report);
  }
  return {};
}

EvaluationReport report_from_json(std::string_view text) {
  const json j = detail::parse_json(text, "report");
  auto number_or_zero = [](const json& v) { return v.is_null() ? 0.0 : v.get<double>(); };
  EvaluationReport report;
  try {
    report.master_seed = j.at("master_seed").get<std::uint64_t>();
    report.repeats = j.at("repeats").get<int>();
    report.alpha = j.at("alpha").get<double>();
    report.datasets = j.at("datasets").get<std::vector<std::string>>();
    report.generators = j.at("generators").get<std::vector<std::string>>();
    report.metrics = j.at("metrics").get<std::vector<std::string>>();
    report.failed_cells = j.at("failed_cells").get<int>();
    for (const json& r : j.at("rows")) {
      report.rows.push_back(ReportRow{r.at("dataset").get<std::string>(), r.at("generator").get<std::string>(),
                                      r.at("repeat").get<int>(), r.at("metric").get<std::string>(),
                                      cell_status_from_string(r.at("status").get<std::string>()),
                                      number_or_zero(r.at("value")), r.at("error").get<std::string>()});
    }
    for (const json& r : j.at("aggregate")) {
      report.aggregate.push_back(AggregateRow{r.at("dataset").get<std::string>(), r.at("generator").get<std::string>(),
                                              r.at("metric").get<std::string>(), number_or_zero(r.at("mean")),
                                              number_or_zero(r.at("std")), r.at("count").get<int>(),
                                              r.at("failed").get<int>()});
    }
    for (const json& r : j.at("adtm")) {
      report.adtm.push_back(AdtmRow{r.at("dataset").get<std::string>(), r.at("generator").get<std::string>(),
                                    r.at("metric").get<std::string>(), r.at("value").get<double>()});
    }
    for (const json& r : j.at("normalized")) {
      report.normalized.push_back(NormalizedRow{r.at("generator").get<std::string>(), r.at("metric").get<std::string>(),
                                                r.at("mean").get<double>(), r.at("std").get<double>(),
                                                r.at("datasets").get<int>()});
    }
    for (const json& r : j.at("correlations")) {
      CorrelationRow row{r.at("metric_a").get<std::string>(), r.at("metric_b").get<std::string>(), std::nullopt,
                         r.at("cells").get<int>(), r.at("error").get<std::string>()};
      if (!r.at("rho").is_null()) row.rho = r.at("rho").get<double>();
      report.correlations.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("report: ") + e.what());
  }
  return report;
}

void write_report(const EvaluationReport& report, const std::filesystem::path& dir) {
  detail::write_file(dir / "report.json", render_report(report, ReportFormat::Json));
  detail::write_file(dir / "report.csv", render_report(report, ReportFormat::Csv));
  detail::write_file(dir / "report.md", render_report(report, ReportFormat::Markdown));
}

}  // namespace structfid
