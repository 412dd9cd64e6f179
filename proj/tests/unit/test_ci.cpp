#include <doctest.h>

#include <cmath>
#include <vector>

#include "structfid/ci_tests.hpp"
#include "structfid/error.hpp"
#include "structfid/rng.hpp"
#include "structfid/scm.hpp"

using namespace structfid;

namespace {

// Reference values computed with 40-digit arbitrary precision arithmetic.
struct ChiPoint {
  double x, dof, sf;
};
constexpr ChiPoint kChiSquare[] = {
    {0.5, 1.0, 0.47950012218695346},
    {3.841458820694124, 1.0, 0.050000000000000057},
    {6.634896601021214, 1.0, 0.010000000000000009},
    {10, 1.0, 0.0015654022580025497},
    {40, 1.0, 2.539628589470865e-10},
    {1, 2.0, 0.60653065971263342},
    {9.21, 2.0, 0.010001702004705478},
    {2.5, 3.0, 0.47529108334302059},
    {11.34, 3.0, 0.010022517616912462},
    {0.1, 5.0, 0.99983768338807738},
    {15.09, 5.0, 0.0099846249580604095},
    {7, 10.0, 0.72544495330960461},
    {23.2, 10.0, 0.010031938382424134},
    {50, 10.0, 2.6690834249044956e-7},
    {25, 30.0, 0.72503188418060004},
    {50.9, 30.0, 0.0099809930703860784},
    {80, 30.0, 1.9756232434910639e-6},
    {100, 100.0, 0.48119168452795672},
    {135.8, 100.0, 0.010010357614346739},
    {300, 100.0, 7.4121008573228768e-22},
};
constexpr std::pair<double, double> kNormalSf[] = {
    {-3.0, 0.99865010196836991}, {-1.0, 0.84134474606854295}, {0.0, 0.5},
    {0.5, 0.3085375387259869},   {1.96, 0.024997895148220436}, {2.576, 0.0049975323157350174},
    {5.0, 2.8665157187919391e-7}, {8.0, 6.2209605742717841e-16}, {12.0, 1.776482112077679e-33},
    {20.0, 2.7536241186062337e-89},
};

Schema make_schema(std::vector<Column> columns) {
  Schema s;
  s.columns = std::move(columns);
  s.target_index = 0;
  return s;
}

const Column kBinary{"b", ColumnKind::Categorical, {"0", "1"}};
const Column kNum{"x", ColumnKind::Numerical, {}};

Column named(Column c, std::string name) {
  c.name = std::move(name);
  return c;
}

const char* kStrongChain = R"({
  "variables": [
    {"name": "X", "kind": "categorical", "categories": ["a", "b", "c"]},
    {"name": "Z", "kind": "categorical", "categories": ["a", "b", "c"]},
    {"name": "Y", "kind": "categorical", "categories": ["a", "b", "c"]}
  ],
  "edges": [[0, 1], [1, 2]],
  "mechanisms": {
    "X": {"cpt": [[0.34, 0.33, 0.33]]},
    "Z": {"cpt": [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]]},
    "Y": {"cpt": [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1], [0.1, 0.1, 0.8]]}
  },
  "target": 2
})";

const char* kMixedFork = R"({
  "variables": [
    {"name": "C", "kind": "categorical", "categories": ["a", "b", "c"]},
    {"name": "X", "kind": "numerical"},
    {"name": "Y", "kind": "numerical"}
  ],
  "edges": [[0, 1], [0, 2]],
  "mechanisms": {
    "C": {"cpt": [[0.34, 0.33, 0.33]]},
    "X": {"offsets": [0.0, 2.0, 4.0], "noise_std": 1.0},
    "Y": {"offsets": [0.0, -2.0, 1.0], "noise_std": 1.0}
  },
  "target": 0
})";

const std::vector<int> kNone;

}  // namespace

TEST_CASE("chi-square survival function matches high-precision values") {
  for (const ChiPoint& p : kChiSquare) {
    CAPTURE(p.x);
    CAPTURE(p.dof);
    CHECK(std::abs(chi_square_sf(p.x, p.dof) - p.sf) <= 1e-10 * p.sf);
  }
  CHECK(chi_square_sf(3.0, 0.0) == 1.0);
  CHECK(chi_square_sf(0.0, 4.0) == 1.0);
}

TEST_CASE("normal tails match high-precision values") {
  for (auto [z, sf] : kNormalSf) {
    CAPTURE(z);
    CHECK(std::abs(normal_sf(z) - sf) <= 1e-10 * sf);
    CHECK(std::abs(normal_cdf(-z) - sf) <= 1e-10 * sf + 1e-16);
  }
}

TEST_CASE("chi-square test: calibration under independence") {
  int rejections = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    Eigen::MatrixXd v(5000, 2);
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      v(r, 0) = static_cast<double>(rng.uniform_index(2));
      v(r, 1) = static_cast<double>(rng.uniform_index(2));
    }
    rejections += chi_square_ci(Table(make_schema({named(kBinary, "j"), named(kBinary, "k")}), v), 0, 1, kNone).rejected;
  }
  CHECK(rejections <= 5);
}

TEST_CASE("chi-square test: identical columns") {
  Rng rng(1);
  Eigen::MatrixXd v(1000, 2);
  for (Eigen::Index r = 0; r < v.rows(); ++r) v(r, 0) = v(r, 1) = static_cast<double>(rng.uniform_index(2));
  const CiTestResult res = chi_square_ci(Table(make_schema({named(kBinary, "j"), named(kBinary, "k")}), v), 0, 1, kNone);
  CHECK(res.dof == 1.0);
  CHECK(res.statistic == doctest::Approx(1000.0).epsilon(1e-9));
  CHECK(res.p_value < 1e-6);
  CHECK(res.rejected);
}

TEST_CASE("chi-square test: chain X -> Z -> Y") {
  const ScmSpec spec = scm_from_json(kStrongChain);
  const std::vector<int> z{1};
  int accepted = 0, marginal_rejected = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const Table t = sample_scm(spec, 5000, static_cast<std::uint64_t>(seed));
    accepted += !chi_square_ci(t, 0, 2, z).rejected;
    marginal_rejected += chi_square_ci(t, 0, 2, kNone).rejected;
  }
  CHECK(accepted >= 90);
  CHECK(marginal_rejected == 100);
}

TEST_CASE("chi-square test requires categorical columns") {
  const Table t(make_schema({kNum, named(kBinary, "k")}), Eigen::MatrixXd::Zero(10, 2));
  CHECK_THROWS_AS(chi_square_ci(t, 0, 1, kNone), Error);
}

TEST_CASE("partial correlation: exact zero and perfect correlation") {
  Eigen::MatrixXd v(8, 2);
  v.col(0) << 1, -1, 1, -1, 1, -1, 1, -1;
  v.col(1) << 1, 1, -1, -1, 1, 1, -1, -1;
  const Table orthogonal(make_schema({named(kNum, "a"), named(kNum, "b")}), v);
  const CiTestResult zero = partial_corr_ci(orthogonal, 0, 1, kNone);
  CHECK(zero.statistic == doctest::Approx(0.0));
  CHECK(zero.p_value == doctest::Approx(1.0));
  CHECK_FALSE(zero.rejected);

  Eigen::MatrixXd same(50, 2);
  for (Eigen::Index r = 0; r < 50; ++r) same(r, 0) = same(r, 1) = std::sin(static_cast<double>(r));
  CHECK(partial_corr_ci(Table(make_schema({named(kNum, "a"), named(kNum, "b")}), same), 0, 1, kNone).rejected);
}

TEST_CASE("partial correlation: linear chain") {
  int accepted = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed) + 500);
    Eigen::MatrixXd v(5000, 3);
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      v(r, 0) = rng.normal();
      v(r, 1) = v(r, 0) + rng.normal();
      v(r, 2) = v(r, 1) + rng.normal();
    }
    const Table t(make_schema({named(kNum, "X"), named(kNum, "Z"), named(kNum, "Y")}), v);
    const std::vector<int> z{1};
    const CiTestResult res = partial_corr_ci(t, 0, 2, z);
    const double r_hat = std::tanh(res.statistic / std::sqrt(5000.0 - 1 - 3));
    CHECK(std::abs(r_hat) < 0.05);
    accepted += !res.rejected;
  }
  CHECK(accepted >= 90);
}

TEST_CASE("residual test reduces to partial correlation without categoricals") {
  Rng rng(3);
  Eigen::MatrixXd v(300, 3);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    v(r, 0) = rng.normal();
    v(r, 1) = 0.2 * v(r, 0) + rng.normal();
    v(r, 2) = rng.normal() + v(r, 1);
  }
  const Table t(make_schema({named(kNum, "a"), named(kNum, "b"), named(kNum, "c")}), v);
  const CiTestResult a = residual_ci(t, 0, 1, kNone);
  const CiTestResult b = partial_corr_ci(t, 0, 1, kNone);
  CHECK(a.p_value == doctest::Approx(b.p_value).epsilon(1e-12));
  CHECK(a.rejected == b.rejected);
}

TEST_CASE("residual test: binary determined by a numerical column") {
  Rng rng(4);
  Eigen::MatrixXd v(2000, 2);
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    v(r, 1) = rng.normal();
    v(r, 0) = v(r, 1) > 0.0 ? 1.0 : 0.0;
  }
  const Table t(make_schema({named(kBinary, "j"), named(kNum, "k")}), v);
  const CiTestResult res = residual_ci(t, 0, 1, kNone);
  // Brute-force residual correlation with an empty conditioning set.
  Eigen::VectorXd a = v.col(0).array() - v.col(0).mean();
  Eigen::VectorXd b = v.col(1).array() - v.col(1).mean();
  const double r_direct = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
  CHECK(r_direct > 0.7);
  CHECK(res.rejected);
}

TEST_CASE("residual test: fork through a categorical parent") {
  const ScmSpec spec = scm_from_json(kMixedFork);
  const std::vector<int> c{0};
  int accepted = 0, rejected = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const Table t = sample_scm(spec, 2000, static_cast<std::uint64_t>(seed));
    accepted += !residual_ci(t, 1, 2, c).rejected;
    rejected += residual_ci(t, 1, 2, kNone).rejected;
  }
  CHECK(accepted >= 90);
  CHECK(rejected >= 90);
}

TEST_CASE("CI score") {
  const ScmSpec spec = scm_from_json(kStrongChain);
  const CiCatalog catalog{{{0, 2, {}, CiKind::Dependent}, {0, 2, {1}, CiKind::Independent}}};

  int exact_half = 0, exact_one = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const Table t = sample_scm(spec, 3000, static_cast<std::uint64_t>(seed) + 1000);
    exact_one += ci_score(catalog, t) == 1.0;
    // Shuffle every column independently: dependence is destroyed.
    Rng rng(static_cast<std::uint64_t>(seed));
    Eigen::MatrixXd v = t.values();
    for (int c = 0; c < 3; ++c) {
      std::vector<double> col(v.col(c).begin(), v.col(c).end());
      rng.shuffle(std::span<double>(col));
      v.col(c) = Eigen::Map<Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(col.size()));
    }
    exact_half += ci_score(catalog, t.with_values(v)) == 0.5;
  }
  CHECK(exact_one >= 90);
  CHECK(exact_half >= 90);
  CHECK_THROWS_AS(ci_score(CiCatalog{}, sample_scm(spec, 100, 1)), Error);
  try {
    ci_score(CiCatalog{}, sample_scm(spec, 100, 1));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCatalog);
  }
}

TEST_CASE("statement_holds dispatches by variable kinds") {
  const ScmSpec spec = scm_from_json(kMixedFork);
  const Table t = sample_scm(spec, 3000, 2);
  CHECK(statement_holds({1, 2, {0}, CiKind::Independent}, t));
  CHECK(statement_holds({1, 2, {}, CiKind::Dependent}, t));
  CHECK_FALSE(statement_holds({1, 2, {}, CiKind::Independent}, t));
  CHECK(statement_holds({0, 1, {}, CiKind::Dependent}, t));
}

TEST_CASE("residualize removes the linear span of the design") {
  Rng rng(12);
  Eigen::MatrixXd design(100, 2), y(100, 1);
  for (Eigen::Index r = 0; r < 100; ++r) {
    design(r, 0) = rng.normal();
    design(r, 1) = rng.normal();
    y(r, 0) = 3.0 + 2.0 * design(r, 0) - design(r, 1) + 0.1 * rng.normal();
  }
  const Eigen::MatrixXd res = residualize(y, design);
  CHECK(std::abs(res.col(0).sum()) < 1e-8);
  CHECK((design.transpose() * res).cwiseAbs().maxCoeff() < 1e-8);
  // Duplicated column: rank deficient but still solvable.
  Eigen::MatrixXd twice(100, 2);
  twice << design.col(0), design.col(0);
  CHECK(residualize(y, twice).allFinite());
}
