#include "hddiff/error.hpp"
#include "hddiff/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace hddiff;

namespace {

SimSpec regression_spec(int l, Hypothesis h, std::uint64_t seed) {
  SimSpec s;
  s.dim = l;
  s.n = 50;
  s.hypothesis = h;
  s.seed = seed;
  return s;
}

SimSpec ggm_spec(int k, Hypothesis h, double alpha, std::uint64_t seed) {
  SimSpec s;
  s.setting = Setting::Ggm;
  s.dim = k;
  s.n = 50;
  s.alpha = alpha;
  s.hypothesis = h;
  s.seed = seed;
  return s;
}

double ar1_quadratic(const Vector& beta, double rho) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    for (Eigen::Index jp = 0; jp < beta.size(); ++jp)
      s += beta(j) * beta(jp) * std::pow(rho, static_cast<double>(std::abs(j - jp)));
  return s;
}

int count_nonzero(const Vector& v) { return static_cast<int>((v.array() != 0.0).count()); }

}  // namespace

TEST_CASE("AR(1) covariance") {
  const Matrix s = ar1_covariance(4, 0.5);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(0, 3) == doctest::Approx(0.125));
  CHECK(s(2, 1) == doctest::Approx(0.5));
}

TEST_CASE("regression null") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SimData d = gen_regression(regression_spec(30, Hypothesis::H0, seed));
    const auto& bu = std::get<RegressionParams>(d.truth.phi_u);
    const auto& bv = std::get<RegressionParams>(d.truth.phi_v);
    CHECK(bu.beta == bv.beta);
    CHECK(count_nonzero(bu.beta) == 5);
    CHECK((bu.beta.array() == 0.0 || bu.beta.array() == 1.0).all());
    CHECK(bu.sigma2 == doctest::Approx(ar1_quadratic(bu.beta, 0.5) / 10.0).epsilon(1e-12));
    CHECK(d.truth.identical);
    CHECK(d.u.n() == 50);
    CHECK(d.u.l() == 30);
  }
}

TEST_CASE("noise variance for adjacent ones") {
  Vector beta = Vector::Zero(10);
  beta.head(5).setOnes();
  // 5 + 2 (4 * 0.5 + 3 * 0.25 + 2 * 0.125 + 1 * 0.0625)
  CHECK(ar1_quadratic(beta, 0.5) == doctest::Approx(11.125));
}

TEST_CASE("regression alternative") {
  const SimData d = gen_regression(regression_spec(30, Hypothesis::HA, 4));
  const auto& bu = std::get<RegressionParams>(d.truth.phi_u).beta;
  const auto& bv = std::get<RegressionParams>(d.truth.phi_v).beta;
  CHECK(count_nonzero(bu) == 5);
  CHECK(count_nonzero(bv) == 5);
  int shared = 0;
  for (Eigen::Index j = 0; j < bu.size(); ++j) shared += bu(j) == 1.0 && bv(j) == 1.0;
  CHECK(shared == 3);
  CHECK((bu.array() == 0.5).count() == 2);
  CHECK((bv.array() == 0.5).count() == 2);
  CHECK(((bu.array() == 0.5) && (bv.array() != 0.0)).count() == 0);
  CHECK(!d.truth.identical);
  // seven coefficients plus the variance
  CHECK(d.truth.support.support_uv.size() == 8);
}

TEST_CASE("generation is seeded") {
  const SimData a = gen_regression(regression_spec(30, Hypothesis::H0, 8));
  const SimData b = gen_regression(regression_spec(30, Hypothesis::H0, 8));
  const SimData c = gen_regression(regression_spec(30, Hypothesis::H0, 9));
  CHECK(a.u.y() == b.u.y());
  CHECK(a.v.x() == b.v.x());
  CHECK(a.u.y() != c.u.y());
}

TEST_CASE("precision construction") {
  const Matrix om = build_precision(6, {{1, 0}, {2, 1}, {3, 2}, {4, 3}, {5, 4}, {5, 0}}, 0.5);
  CHECK(om.diagonal().isOnes(1e-12));
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(om).eigenvalues().minCoeff() >= 0.1 - 1e-12);
  CHECK(om(1, 0) != 0.0);
  CHECK(om(3, 0) == 0.0);
}

TEST_CASE("graphical settings") {
  for (int k : {5, 8, 12}) {
    const SimData h0 = gen_ggm(ggm_spec(k, Hypothesis::H0, 0.5, static_cast<std::uint64_t>(k)));
    const auto& gu = std::get<GgmParams>(h0.truth.phi_u);
    CHECK(gu.omega == std::get<GgmParams>(h0.truth.phi_v).omega);
    CHECK(gu.omega.diagonal().isOnes(1e-12));
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(gu.omega).eigenvalues().minCoeff() >= 0.1 - 1e-12);
    // k off-diagonal pairs plus k diagonal entries
    CHECK(h0.truth.support.support_u.size() == static_cast<std::size_t>(2 * k));

    const SimData ha = gen_ggm(ggm_spec(k, Hypothesis::HA, 0.5, static_cast<std::uint64_t>(k)));
    const IndexSet& su = ha.truth.support.support_u;
    const IndexSet& sv = ha.truth.support.support_v;
    CHECK(set_intersection(su, sv).size() == static_cast<std::size_t>(k + (k + 1) / 2));
    CHECK(!ha.truth.identical);
  }
  const SimData full = gen_ggm(ggm_spec(6, Hypothesis::HA, 1.0, 3));
  CHECK(full.truth.identical);
}

TEST_CASE("external design") {
  SimSpec s = regression_spec(10, Hypothesis::H0, 1);
  s.setting = Setting::RegExternal;
  CHECK_THROWS_AS(s.validate(), InputError);
  Matrix x = Matrix::Random(120, 10);
  s.external_x = std::make_shared<const Matrix>(x);
  const SimData d = gen_regression(s);
  CHECK(d.u.n() == 50);
  CHECK(d.v.n() == 50);
  CHECK(d.u.l() == 10);
  s.n = 70;
  CHECK_THROWS_AS(s.validate(), InputError);
}

TEST_CASE("specification checks") {
  CHECK_THROWS_AS(gen_regression(regression_spec(6, Hypothesis::H0, 1)), InputError);
  CHECK_THROWS_AS(gen_ggm(ggm_spec(4, Hypothesis::H0, 0.5, 1)), InputError);
  CHECK_THROWS_AS(gen_ggm(ggm_spec(6, Hypothesis::HA, 0.0, 1)), InputError);
  SimSpec s = regression_spec(10, Hypothesis::H0, 1);
  s.snr = 0.0;
  CHECK_THROWS_AS(s.validate(), InputError);
  CHECK(parse_method("multi-split") == Method::MultiSplit);
  CHECK(std::string(to_string(Method::OrdinaryLrt)) == "ordinary-lrt");
  CHECK_THROWS_AS(parse_method("bogus"), InputError);
}

TEST_CASE("ordinary likelihood ratio") {
  const SimData small = gen_regression(regression_spec(60, Hypothesis::H0, 2));
  CHECK(!ordinary_lrt(small.u, small.v).has_value());
  SimSpec s = regression_spec(10, Hypothesis::H0, 2);
  s.n = 400;
  const SimData big = gen_regression(s);
  const auto r = ordinary_lrt(big.u, big.v);
  REQUIRE(r.has_value());
  CHECK(r->first >= 0.0);
  CHECK(r->second > 0.0);
  CHECK(r->second <= 1.0);
}

TEST_CASE("experiment runner") {
  SimSpec s = regression_spec(10, Hypothesis::H0, 11);
  s.n = 60;
  ExperimentConfig cfg;
  cfg.runs = 4;
  cfg.methods = {Method::OrdinaryLrt, Method::SingleSplit, Method::MultiSplit, Method::Permutation};
  cfg.test.k_splits = 3;
  cfg.perm.n_perm = 9;
  cfg.threads = 1;
  const std::vector<CellResult> a = run_experiment({s}, cfg);
  cfg.threads = 2;
  const std::vector<CellResult> b = run_experiment({s}, cfg);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].records.size() == 4);
    CHECK(a[i].n_ok + a[i].n_error + a[i].n_not_applicable == 4);
    if (a[i].n_ok > 0) CHECK(a[i].rate == doctest::Approx(static_cast<double>(a[i].rejections) / a[i].n_ok));
    for (std::size_t r = 0; r < 4; ++r) CHECK(a[i].records[r].pvalue == b[i].records[r].pvalue);
  }
}
