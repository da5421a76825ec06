#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "empiproc/limit.hpp"
#include "empiproc/stats.hpp"

using namespace empiproc;
using core::DistributionModel;
using core::EvaluationGrid;
using namespace empiproc::limit;

namespace {

std::vector<generators::SamplePath> iid_ensemble(std::size_t reps, std::size_t n,
                                                 std::uint64_t seed, std::size_t d = 1) {
  std::vector<generators::SamplePath> e(reps);
  for (std::size_t r = 0; r < reps; ++r) e[r] = generators::simulate_iid_uniform(d, n, seed, r);
  return e;
}

}  // namespace

TEST_CASE("gamma of the iid interval is F(min) - F(s) F(t)") {
  auto grid = std::make_shared<EvaluationGrid>(std::vector<std::vector<Real>>{{0.3, 0.6}});
  auto ensemble = iid_ensemble(200, 1024, 61);
  auto model = estimate_gamma(ensemble, grid, 2);

  std::size_t s = grid->flat_index({1});  // 0.3
  std::size_t t = grid->flat_index({2});  // 0.6
  CHECK(std::abs(model.at(s, s) - 0.21) < 0.01);  // 0.3 (1 - 0.3)
  CHECK(std::abs(model.at(t, t) - 0.24) < 0.01);
  CHECK(std::abs(model.at(s, t) - 0.12) < 0.01);  // 0.3 - 0.18

  // sentinel vertices carry constant indicators: rows vanish identically
  std::size_t lo = grid->flat_index({0});
  std::size_t hi = grid->flat_index({3});
  for (std::size_t v = 0; v < grid->vertex_count(); ++v) {
    CHECK(model.at(lo, v) == 0.0);
    CHECK(model.at(hi, v) == 0.0);
  }

  // symmetry and positive semidefiniteness after the repair
  for (std::size_t a = 0; a < grid->vertex_count(); ++a)
    for (std::size_t b = 0; b < grid->vertex_count(); ++b)
      CHECK(model.at(a, b) == model.at(b, a));
  CHECK(model.min_eigen_pre > -1e-8);

  // the factor reproduces gamma
  std::size_t V = grid->vertex_count();
  for (std::size_t a = 0; a < V; ++a)
    for (std::size_t b = 0; b < V; ++b) {
      Real acc = 0.0;
      for (std::size_t k = 0; k < V; ++k)
        acc += model.factor[a * V + k] * model.factor[b * V + k];
      CHECK(acc == doctest::Approx(model.at(a, b)).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("lag terms stay at noise level for independent data") {
  auto grid = std::make_shared<EvaluationGrid>(std::vector<std::vector<Real>>{{0.25, 0.5, 0.75}});
  auto ensemble = iid_ensemble(300, 512, 71);
  auto lag0 = estimate_gamma(ensemble, grid, 0, Taper::Flat);
  auto lag3 = estimate_gamma(ensemble, grid, 3, Taper::Bartlett);
  for (std::size_t a = 0; a < grid->vertex_count(); ++a)
    for (std::size_t b = 0; b < grid->vertex_count(); ++b)
      CHECK(std::abs(lag3.at(a, b) - lag0.at(a, b)) < 0.01);
}

TEST_CASE("a coarse grid restricts the fine-grid estimate") {
  auto fine = std::make_shared<EvaluationGrid>(std::vector<std::vector<Real>>{{0.2, 0.4, 0.6, 0.8}});
  auto coarse = std::make_shared<EvaluationGrid>(std::vector<std::vector<Real>>{{0.4, 0.8}});
  auto ensemble = iid_ensemble(60, 256, 83);
  auto mf = estimate_gamma(ensemble, fine, 0, Taper::Flat);
  auto mc = estimate_gamma(ensemble, coarse, 0, Taper::Flat);
  CHECK(mf.psd_clip == 0.0);
  CHECK(mc.psd_clip == 0.0);

  // map coarse vertices into the fine grid: -inf, 0.4, 0.8, +inf
  std::vector<std::size_t> into{0, 2, 4, 5};
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b)
      CHECK(mc.at(a, b) == mf.at(into[a], into[b]));
}

TEST_CASE("default lag") {
  CHECK(default_lag(1000, 0.5) == 40);
  CHECK(default_lag(100, 0.5) == 10);   // capped at n / 10
  CHECK(default_lag(2, 0.9) == 1);      // floor of 1
  CHECK_THROWS_AS((void)default_lag(100, 1.5), std::invalid_argument);
}

TEST_CASE("sampled fields follow the prescribed covariance") {
  auto grid = std::make_shared<EvaluationGrid>(std::vector<std::vector<Real>>{{0.5}});
  LimitModel unit;
  unit.grid = grid;
  unit.gamma.assign(9, 0.0);
  unit.factor.assign(9, 0.0);
  unit.gamma[4] = 1.0;   // interior vertex
  unit.factor[4] = 1.0;

  auto fields = sample_W(unit, 4000, 19);
  std::vector<Real> mid(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    REQUIRE(fields[i].values.size() == 3);
    mid[i] = fields[i].values[1];
    CHECK(fields[i].values[0] == 0.0);  // degenerate coordinates stay put
    CHECK(fields[i].values[2] == 0.0);
  }
  auto ks = stats::ks_test(mid, [](Real x) { return stats::normal_cdf(x); });
  CHECK(ks.p_value > 0.01);

  CHECK(sample_W(unit, 3, 19)[2].values == sample_W(unit, 3, 19)[2].values);  // reproducible

  LimitModel zero = unit;
  zero.gamma.assign(9, 0.0);
  zero.factor.assign(9, 0.0);
  for (const auto& f : sample_W(zero, 5, 3))
    for (Real v : f.values) CHECK(v == 0.0);
}

TEST_CASE("sample_W covariance matches the estimated gamma") {
  auto grid = std::make_shared<EvaluationGrid>(std::vector<std::vector<Real>>{{0.25, 0.5, 0.75}});
  auto ensemble = iid_ensemble(200, 512, 91);
  auto model = estimate_gamma(ensemble, grid, 1);

  std::size_t V = grid->vertex_count();
  auto fields = sample_W(model, 6000, 29);
  for (std::size_t a = 0; a < V; ++a)
    for (std::size_t b = a; b < V; ++b) {
      Real acc = 0.0;
      for (const auto& f : fields) acc += f.values[a] * f.values[b];
      acc /= static_cast<Real>(fields.size());
      CHECK(std::abs(acc - model.at(a, b)) < 0.02);
    }
}

TEST_CASE("projected empirical processes pass normality checks in the iid case") {
  auto modelD = DistributionModel::uniform_cube(1);
  auto ensemble = iid_ensemble(400, 2048, 97);
  std::vector<Point> points{{0.5}, {0.25}};
  std::vector<std::vector<Real>> dirs{{1.0, 0.0}, {1.0, -1.0}, {0.0, 0.0}};
  // exact iid targets: Var U(0.5) = 0.25, Var U(0.25) = 0.1875, Cov = 0.125
  std::vector<Real> gamma{0.25, 0.125, 0.125, 0.1875};

  auto rep = fidi_normality(ensemble, modelD, points, dirs, gamma);
  REQUIRE(rep.tests.size() == 3);
  CHECK(rep.replicates == 400);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& t = rep.tests[i];
    CHECK_FALSE(t.skipped);
    CHECK(t.variance_ratio > 0.85);
    CHECK(t.variance_ratio < 1.15);
    CHECK(t.ad_pvalue > 0.001);
    CHECK(t.ks_pvalue > 0.001);
  }
  CHECK(rep.tests[2].skipped);

  CHECK_THROWS_AS(
      (void)fidi_normality(ensemble, modelD, points, {{1.0}}, gamma), std::invalid_argument);
}
