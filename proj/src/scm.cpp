#include "structfid/scm.hpp"

#include <cmath>
#include <string>

#include "io_util.hpp"
#include "structfid/error.hpp"
#include "structfid/rng.hpp"

namespace structfid {

using nlohmann::json;

Schema ScmSpec::schema() const { return Schema{variables, target_index}; }

std::vector<int> ScmSpec::categorical_parents(int node) const {
  std::vector<int> out;
  for (int p : graph.parents(node)) {
    if (variables[static_cast<std::size_t>(p)].categorical()) out.push_back(p);
  }
  return out;
}

std::vector<int> ScmSpec::numerical_parents(int node) const {
  std::vector<int> out;
  for (int p : graph.parents(node)) {
    if (!variables[static_cast<std::size_t>(p)].categorical()) out.push_back(p);
  }
  return out;
}

std::size_t ScmSpec::configuration_count(int node) const {
  std::size_t count = 1;
  for (int p : categorical_parents(node)) count *= static_cast<std::size_t>(variables[static_cast<std::size_t>(p)].category_count());
  return count;
}

void ScmSpec::validate() const {
  const int n = node_count();
  auto fail = [](const std::string& message) { throw Error(ErrorCode::InvalidSpec, message); };
  if (n < 2) fail("an SCM needs at least two variables");
  if (graph.node_count() != n) fail("graph and variable list disagree on node count");
  if (static_cast<int>(mechanisms.size()) != n) fail("mechanisms missing for some nodes");
  if (target_index < 0 || target_index >= n) fail("target index out of range");

  for (int v = 0; v < n; ++v) {
    const Column& variable = variables[static_cast<std::size_t>(v)];
    const Mechanism& mechanism = mechanisms[static_cast<std::size_t>(v)];
    const std::string where = "node '" + variable.name + "'";
    const std::size_t configs = configuration_count(v);
    if (variable.categorical()) {
      if (variable.categories.empty()) fail(where + " has no categories");
      const auto* cpt = std::get_if<CategoricalMechanism>(&mechanism);
      if (cpt == nullptr) fail(where + " is categorical but has a numerical mechanism");
      if (!numerical_parents(v).empty()) fail(where + " is categorical and cannot have numerical parents");
      if (cpt->cpt.size() != configs) fail(where + " CPT must have " + std::to_string(configs) + " rows");
      for (const auto& row : cpt->cpt) {
        if (row.size() != variable.categories.size()) fail(where + " CPT row width differs from category count");
        double total = 0.0;
        for (double p : row) {
          if (!(p >= 0.0) || !std::isfinite(p)) fail(where + " CPT has a negative or non-finite entry");
          total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) fail(where + " CPT row does not sum to 1");
      }
    } else {
      const auto* lin = std::get_if<NumericalMechanism>(&mechanism);
      if (lin == nullptr) fail(where + " is numerical but has a CPT");
      if (lin->weights.size() != numerical_parents(v).size()) fail(where + " needs one weight per numerical parent");
      if (lin->offsets.size() != configs) fail(where + " needs one offset per categorical-parent configuration");
      if (!(lin->noise_std > 0.0) || !std::isfinite(lin->noise_std)) fail(where + " noise std must be positive");
      if (!std::isfinite(lin->intercept)) fail(where + " intercept not finite");
      for (double w : lin->weights) {
        if (!std::isfinite(w)) fail(where + " weight not finite");
      }
      for (double o : lin->offsets) {
        if (!std::isfinite(o)) fail(where + " offset not finite");
      }
    }
  }
}

namespace {

std::size_t configuration_index(const ScmSpec& spec, const std::vector<int>& categorical_parents,
                                const double* row) {
  std::size_t index = 0;
  for (int p : categorical_parents) {
    index = index * static_cast<std::size_t>(spec.variables[static_cast<std::size_t>(p)].category_count()) +
            static_cast<std::size_t>(row[p]);
  }
  return index;
}

}  // namespace

Table sample_scm(const ScmSpec& spec, std::int64_t n, std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw Error(ErrorCode::InvalidSpec, "sample size must be positive");
  const std::vector<int> order = topological_order(spec.graph);
  const int nodes = spec.node_count();

  std::vector<std::vector<int>> categorical(static_cast<std::size_t>(nodes));
  std::vector<std::vector<int>> numerical(static_cast<std::size_t>(nodes));
  for (int v = 0; v < nodes; ++v) {
    categorical[v] = spec.categorical_parents(v);
    numerical[v] = spec.numerical_parents(v);
  }

  // Row-major scratch so each sample is contiguous; copied into the table at the end.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> data(n, nodes);
  Rng rng(seed);
  for (std::int64_t i = 0; i < n; ++i) {
    double* row = data.row(i).data();
    for (int v : order) {
      const std::size_t config = configuration_index(spec, categorical[v], row);
      if (const auto* cpt = std::get_if<CategoricalMechanism>(&spec.mechanisms[v])) {
        row[v] = static_cast<double>(rng.categorical(cpt->cpt[config]));
      } else {
        const auto& lin = std::get<NumericalMechanism>(spec.mechanisms[v]);
        double signal = lin.intercept + lin.offsets[config];
        for (std::size_t w = 0; w < lin.weights.size(); ++w) signal += lin.weights[w] * row[numerical[v][w]];
        if (lin.nonlinearity == Nonlinearity::Tanh) signal = std::tanh(signal);
        row[v] = signal + lin.noise_std * rng.normal();
      }
    }
  }
  return Table(spec.schema(), Eigen::MatrixXd(data));
}

// JSON ----------------------------------------------------------------------

namespace {

constexpr ErrorCode kSpecError = ErrorCode::InvalidSpec;

Column parse_variable(const json& item, std::size_t index) {
  const std::string where = "variables[" + std::to_string(index) + "]";
  detail::require_fields(item, {"name", "kind", "categories"}, where, kSpecError);
  if (!item.contains("name") || !item.contains("kind")) throw Error(kSpecError, where + " needs name and kind");
  Column column;
  column.name = detail::get_as<std::string>(item["name"], where + ".name", kSpecError);
  const auto kind = detail::get_as<std::string>(item["kind"], where + ".kind", kSpecError);
  if (kind == "categorical") {
    column.kind = ColumnKind::Categorical;
    if (!item.contains("categories")) throw Error(kSpecError, where + " categorical variable needs categories");
    column.categories = detail::get_as<std::vector<std::string>>(item["categories"], where + ".categories", kSpecError);
  } else if (kind == "numerical") {
    column.kind = ColumnKind::Numerical;
    if (item.contains("categories")) throw Error(kSpecError, where + " numerical variable cannot list categories");
  } else {
    throw Error(kSpecError, where + ".kind must be 'categorical' or 'numerical'");
  }
  return column;
}

}  // namespace

ScmSpec scm_from_json(std::string_view text) {
  const json doc = detail::parse_json(text, "SCM spec");
  detail::require_fields(doc, {"variables", "edges", "mechanisms", "target"}, "SCM spec", kSpecError);
  for (const char* field : {"variables", "edges", "mechanisms", "target"}) {
    if (!doc.contains(field)) throw Error(kSpecError, std::string("SCM spec missing '") + field + "'");
  }

  ScmSpec spec;
  const json& variables = doc["variables"];
  if (!variables.is_array()) throw Error(kSpecError, "variables must be an array");
  for (std::size_t i = 0; i < variables.size(); ++i) spec.variables.push_back(parse_variable(variables[i], i));
  const int n = spec.node_count();

  const auto edges = detail::get_as<std::vector<std::pair<int, int>>>(doc["edges"], "edges", kSpecError);
  spec.graph = CausalGraph::from_edges(n, edges);
  spec.target_index = detail::get_as<int>(doc["target"], "target", kSpecError);

  const json& mechanisms = doc["mechanisms"];
  if (!mechanisms.is_object()) throw Error(kSpecError, "mechanisms must be an object keyed by variable name");
  for (const auto& item : mechanisms.items()) {
    bool known = false;
    for (const Column& v : spec.variables) known = known || v.name == item.key();
    if (!known) throw Error(kSpecError, "mechanism for unknown variable '" + item.key() + "'");
  }

  for (int v = 0; v < n; ++v) {
    const Column& variable = spec.variables[static_cast<std::size_t>(v)];
    const std::string where = "mechanisms." + variable.name;
    if (!mechanisms.contains(variable.name)) throw Error(kSpecError, "mechanism missing for '" + variable.name + "'");
    const json& m = mechanisms[variable.name];
    if (variable.categorical()) {
      detail::require_fields(m, {"cpt"}, where, kSpecError);
      if (!m.contains("cpt")) throw Error(kSpecError, where + " needs a cpt");
      spec.mechanisms.emplace_back(
          CategoricalMechanism{detail::get_as<std::vector<std::vector<double>>>(m["cpt"], where + ".cpt", kSpecError)});
    } else {
      detail::require_fields(m, {"intercept", "weights", "offsets", "noise_std", "nonlinearity"}, where, kSpecError);
      NumericalMechanism lin;
      lin.intercept = m.contains("intercept") ? detail::get_as<double>(m["intercept"], where, kSpecError) : 0.0;
      if (!m.contains("noise_std")) throw Error(kSpecError, where + " needs noise_std");
      lin.noise_std = detail::get_as<double>(m["noise_std"], where + ".noise_std", kSpecError);

      const json weights = m.value("weights", json::object());
      if (!weights.is_object()) throw Error(kSpecError, where + ".weights must map parent names to weights");
      const std::vector<int> numeric_parents = spec.numerical_parents(v);
      for (int p : numeric_parents) {
        const std::string& parent = spec.variables[static_cast<std::size_t>(p)].name;
        if (!weights.contains(parent)) throw Error(kSpecError, where + " missing weight for parent '" + parent + "'");
        lin.weights.push_back(detail::get_as<double>(weights[parent], where + ".weights", kSpecError));
      }
      if (weights.size() != numeric_parents.size()) {
        throw Error(kSpecError, where + ".weights names a variable that is not a numerical parent");
      }

      if (m.contains("offsets")) {
        lin.offsets = detail::get_as<std::vector<double>>(m["offsets"], where + ".offsets", kSpecError);
      } else {
        lin.offsets.assign(spec.configuration_count(v), 0.0);
      }
      const std::string g = m.value("nonlinearity", std::string("identity"));
      if (g == "identity") {
        lin.nonlinearity = Nonlinearity::Identity;
      } else if (g == "tanh") {
        lin.nonlinearity = Nonlinearity::Tanh;
      } else {
        throw Error(kSpecError, where + ".nonlinearity must be 'identity' or 'tanh'");
      }
      spec.mechanisms.emplace_back(std::move(lin));
    }
  }
  spec.validate();
  return spec;
}

std::string scm_to_json(const ScmSpec& spec) {
  json doc;
  doc["variables"] = json::array();
  for (const Column& v : spec.variables) {
    json item{{"name", v.name}, {"kind", v.categorical() ? "categorical" : "numerical"}};
    if (v.categorical()) item["categories"] = v.categories;
    doc["variables"].push_back(item);
  }
  doc["edges"] = json::array();
  for (const auto& [parent, child] : spec.graph.edges()) doc["edges"].push_back({parent, child});
  doc["mechanisms"] = json::object();
  for (int v = 0; v < spec.node_count(); ++v) {
    const std::string& name = spec.variables[static_cast<std::size_t>(v)].name;
    if (const auto* cpt = std::get_if<CategoricalMechanism>(&spec.mechanisms[v])) {
      doc["mechanisms"][name] = {{"cpt", cpt->cpt}};
    } else {
      const auto& lin = std::get<NumericalMechanism>(spec.mechanisms[v]);
      json weights = json::object();
      const std::vector<int> parents = spec.numerical_parents(v);
      for (std::size_t w = 0; w < parents.size(); ++w) {
        weights[spec.variables[static_cast<std::size_t>(parents[w])].name] = lin.weights[w];
      }
      doc["mechanisms"][name] = {{"intercept", lin.intercept},
                                 {"weights", weights},
                                 {"offsets", lin.offsets},
                                 {"noise_std", lin.noise_std},
                                 {"nonlinearity", lin.nonlinearity == Nonlinearity::Tanh ? "tanh" : "identity"}};
    }
  }
  doc["target"] = spec.target_index;
  return doc.dump(2) + "\n";
}

ScmSpec load_scm(const std::filesystem::path& path) { return scm_from_json(detail::read_file(path)); }

}  // namespace structfid
