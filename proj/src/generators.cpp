#include "structfid/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "structfid/error.hpp"
#include "structfid/preprocess.hpp"
#include "structfid/rng.hpp"
#include "structfid/split.hpp"

namespace structfid {

std::string_view to_string(GeneratorKind kind) noexcept {
  switch (kind) {
    case GeneratorKind::Reference: return "REFERENCE";
    case GeneratorKind::Smote: return "SMOTE";
    case GeneratorKind::MarginalIndependent: return "MARGINAL_INDEPENDENT";
    case GeneratorKind::ScmOracle: return "SCM_ORACLE";
    case GeneratorKind::NoisyCopy: return "NOISY_COPY";
  }
  return "?";
}

GeneratorKind generator_kind_from_string(std::string_view name) {
  for (GeneratorKind kind : {GeneratorKind::Reference, GeneratorKind::Smote, GeneratorKind::MarginalIndependent,
                             GeneratorKind::ScmOracle, GeneratorKind::NoisyCopy}) {
    if (name == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown generator kind '" + std::string(name) + "'");
}

void GeneratorSpec::validate(bool require_scm) const {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "SMOTE k must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidConfig, "sigma must be >= 0");
  if (!(size_fraction > 0.0) || !std::isfinite(size_fraction)) {
    throw Error(ErrorCode::InvalidConfig, "size_fraction must be positive");
  }
  if (kind == GeneratorKind::Reference && size_fraction > 1.0) {
    throw Error(ErrorCode::InvalidConfig, "REFERENCE size_fraction must be <= 1");
  }
  if (require_scm && kind == GeneratorKind::ScmOracle && !scm) throw Error(ErrorCode::MissingScm, "SCM_ORACLE needs an SCM");
}

namespace {

Table smote(const GeneratorSpec& spec, const Table& ref, std::int64_t n) {
  const Preprocessor p = fit_preprocessor(ref);
  const Table z = apply_preprocessor(p, ref);
  const int target = ref.target_index();
  const bool classification = ref.is_categorical(target);

  std::vector<int> numerical;
  for (int c = 0; c < ref.cols(); ++c) {
    if (!ref.is_categorical(c)) numerical.push_back(c);
  }
  Eigen::MatrixXd coords(z.rows(), static_cast<Eigen::Index>(numerical.size()));
  for (std::size_t i = 0; i < numerical.size(); ++i) coords.col(static_cast<Eigen::Index>(i)) = z.col(numerical[i]);

  std::vector<std::vector<Eigen::Index>> groups(classification ? static_cast<std::size_t>(ref.column(target).category_count()) : 1);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    groups[classification ? static_cast<std::size_t>(z(r, target)) : 0].push_back(r);
  }
  std::vector<std::int64_t> sizes;
  for (const auto& g : groups) {
    if (g.size() == 1) throw Error(ErrorCode::ClassTooSmall, "SMOTE needs at least 2 rows per class");
    sizes.push_back(static_cast<std::int64_t>(g.size()));
  }
  const std::vector<std::int64_t> counts = apportion(n, sizes);

  Rng rng(derive_seed(spec.seed, stable_hash("smote")));
  Eigen::MatrixXd out(n, ref.cols());
  Eigen::Index next = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& members = groups[g];
    if (counts[g] == 0) continue;
    const auto m = static_cast<Eigen::Index>(members.size());
    const Eigen::Index k = std::min<Eigen::Index>(spec.k, m - 1);
    std::vector<std::optional<std::vector<Eigen::Index>>> neighbours(members.size());
    std::vector<Eigen::Index> order(members.size());
    for (std::int64_t i = 0; i < counts[g]; ++i) {
      const auto base = static_cast<std::size_t>(rng.uniform_index(members.size()));
      if (!neighbours[base]) {
        const Eigen::RowVectorXd origin = coords.row(members[base]);
        Eigen::VectorXd distance(m);
        for (Eigen::Index q = 0; q < m; ++q) distance(q) = (coords.row(members[static_cast<std::size_t>(q)]) - origin).squaredNorm();
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::erase(order, static_cast<Eigen::Index>(base));
        std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
          return distance(a) < distance(b) || (distance(a) == distance(b) && a < b);
        });
        std::vector<Eigen::Index> list(order.begin(), order.begin() + k);
        for (Eigen::Index& q : list) q = members[static_cast<std::size_t>(q)];
        neighbours[base] = std::move(list);
        order.resize(members.size());
      }
      const Eigen::Index base_row = members[base];
      const auto& list = *neighbours[base];
      const Eigen::Index neighbour = list[rng.uniform_index(list.size())];
      const double u = rng.uniform();
      out.row(next) = z.values().row(base_row);
      for (int c : numerical) out(next, c) = z(base_row, c) + u * (z(neighbour, c) - z(base_row, c));
      ++next;
    }
  }
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  rng.shuffle(std::span<Eigen::Index>(rows));
  return invert_preprocessor(p, z.with_values(out).select_rows(rows));
}

Table marginal_independent(const GeneratorSpec& spec, const Table& ref, std::int64_t n) {
  Rng rng(derive_seed(spec.seed, stable_hash("marginal")));
  Eigen::MatrixXd out(n, ref.cols());
  const auto size = static_cast<std::uint64_t>(ref.rows());
  for (int c = 0; c < ref.cols(); ++c) {
    for (Eigen::Index r = 0; r < n; ++r) out(r, c) = ref(static_cast<Eigen::Index>(rng.uniform_index(size)), c);
  }
  return ref.with_values(std::move(out));
}

Table noisy_copy(const GeneratorSpec& spec, const Table& ref, std::int64_t n) {
  const Preprocessor p = fit_preprocessor(ref);
  Rng rng(derive_seed(spec.seed, stable_hash("noisy_copy")));
  const double flip = std::min(spec.sigma, 1.0);
  const auto size = static_cast<std::uint64_t>(ref.rows());
  Eigen::MatrixXd out(n, ref.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto source = static_cast<Eigen::Index>(rng.uniform_index(size));
    for (int c = 0; c < ref.cols(); ++c) {
      const double v = ref(source, c);
      if (ref.is_categorical(c)) {
        const bool redraw = rng.uniform() < flip;
        const auto category = static_cast<double>(rng.uniform_index(static_cast<std::uint64_t>(ref.column(c).category_count())));
        out(r, c) = std::isnan(v) || !redraw ? v : category;
      } else {
        const double noise = rng.normal();
        out(r, c) = v + spec.sigma * p.stddev(c) * noise;
      }
    }
  }
  return ref.with_values(std::move(out));
}

}  // namespace

Table generate(const GeneratorSpec& spec, const Table& ref, std::int64_t n) {
  spec.validate();
  if (ref.rows() == 0) throw Error(ErrorCode::EmptyTable, "reference table is empty");
  if (n < 1) throw Error(ErrorCode::NotEnoughRows, "generated row count must be >= 1");
  switch (spec.kind) {
    case GeneratorKind::Reference:
      if (n > ref.rows()) throw Error(ErrorCode::NotEnoughRows, "REFERENCE cannot emit more rows than ref has");
      return ref.head(n);
    case GeneratorKind::Smote:
      return smote(spec, ref, n);
    case GeneratorKind::MarginalIndependent:
      return marginal_independent(spec, ref, n);
    case GeneratorKind::ScmOracle: {
      Table sampled = sample_scm(*spec.scm, n, derive_seed(spec.seed, stable_hash("scm_oracle")));
      require_same_schema(sampled, ref);
      return sampled;
    }
    case GeneratorKind::NoisyCopy:
      return noisy_copy(spec, ref, n);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown generator kind");
}

}  // namespace structfid
