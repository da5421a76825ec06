#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "empiproc/empirical.hpp"
#include "empiproc/stats.hpp"

using namespace empiproc;
using core::DistributionModel;
using core::EvaluationGrid;
using namespace empiproc::empirical;

namespace {

generators::SamplePath tiny_path() {
  generators::SamplePath p;
  p.n = 2;
  p.d = 2;
  p.values = {0.2, 0.3, 0.6, 0.1};
  return p;
}

}  // namespace

TEST_CASE("empirical cdf counts dominated points") {
  auto grid = std::make_shared<EvaluationGrid>(std::vector<std::vector<Real>>{{0.5}, {0.5}});
  auto fn = empirical_cdf(tiny_path(), grid);
  // vertices per axis: -inf, 0.5, +inf
  CHECK(fn.at(grid->flat_index({1, 1})) == doctest::Approx(0.5));  // (0.5, 0.5)
  CHECK(fn.at(grid->flat_index({2, 2})) == 1.0);                   // all +inf
  CHECK(fn.at(grid->flat_index({0, 2})) == 0.0);                   // -inf coordinate
  CHECK_THROWS_AS((void)empirical_cdf(generators::SamplePath{}, grid), std::invalid_argument);
}

TEST_CASE("empirical process values") {
  auto grid = std::make_shared<EvaluationGrid>(std::vector<std::vector<Real>>{{0.5}, {0.5}});
  auto model = DistributionModel::uniform_cube(2);
  auto field = empirical_process(tiny_path(), grid, model);
  CHECK(field.Un.at(grid->flat_index({1, 1})) ==
        doctest::Approx(std::sqrt(2.0) * 0.25));  // sqrt(2) (0.5 - 0.25)
  CHECK(field.Un.at(grid->flat_index({2, 2})) == 0.0);
  CHECK(field.Un.at(grid->flat_index({0, 1})) == 0.0);
}

TEST_CASE("count_dominated agrees with the direct scan in every dimension") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<Real> u(0.0, 1.0);
  for (std::size_t d : {1u, 2u, 3u}) {
    generators::SamplePath path;
    path.n = 400;
    path.d = d;
    for (std::size_t i = 0; i < path.n * d; ++i) path.values.push_back(u(rng));
    std::vector<Point> queries;
    for (int q = 0; q < 100; ++q) {
      Point t(d);
      for (auto& v : t) v = u(rng);
      queries.push_back(t);
    }
    auto fast = count_dominated(path, queries);
    for (std::size_t q = 0; q < queries.size(); ++q) {
      std::size_t direct = 0;
      for (std::size_t k = 0; k < path.n; ++k) direct += leq(path.point(k), queries[q]);
      CHECK(fast[q] == direct);
    }
  }
}

TEST_CASE("build_partition lays out regular quantile breakpoints") {
  auto model = std::make_shared<DistributionModel>(DistributionModel::uniform_cube(1));
  auto part = build_partition(model, 4);
  CHECK(part.h == doctest::Approx(0.25));
  CHECK(part.t_points[0][0] == doctest::Approx(0.0));
  CHECK(part.t_points[0][1] == doctest::Approx(0.25));
  CHECK(part.t_points[0][2] == doctest::Approx(0.5));
  CHECK(part.t_points[0][3] == doctest::Approx(0.75));
  CHECK(part.t_points[0][4] == kInf);

  auto part2 = build_partition(model, 2);
  CHECK(part2.t_points[0].size() == 3);
  CHECK_THROWS_AS((void)build_partition(model, 1), std::invalid_argument);

  auto emp = std::make_shared<DistributionModel>(
      DistributionModel::empirical({0.1, 0.4, 0.9}, 1));
  auto parte = build_partition(emp, 3);
  // sup-quantiles of the 3-point step cdf at r = 0, 1/3, 2/3, 1
  CHECK(parte.t_points[0][0] == doctest::Approx(0.1));
  CHECK(parte.t_points[0][1] == doctest::Approx(0.4));
  CHECK(parte.t_points[0][2] == doctest::Approx(0.9));
  CHECK(parte.t_points[0][3] == kInf);
}

TEST_CASE("cell kernels vanish on outer cells and U_n^(m) is piecewise constant") {
  auto model = std::make_shared<DistributionModel>(DistributionModel::uniform_cube(2));
  auto part = build_partition(model, 4);
  auto path = generators::simulate_iid_uniform(2, 200, 42);
  auto approx = approx_process(path, part, model);

  CHECK(cell_kernel(part, {1, 3}, {0.1, 0.6}) == 0.0);
  CHECK(approx.fnm({0.1, 0.1}) == 0.0);  // lowest rectangle, phi_j identically 0

  // two points of one cell see the same value, exactly
  CHECK(approx.unm({0.30, 0.30}) == approx.unm({0.49, 0.26}));
  CHECK(approx.fnm({0.80, 0.60}) == approx.fnm({0.99, 0.74}));

  generators::SamplePath single;
  single.n = 1;
  single.d = 2;
  single.values = {0.4, 0.4};
  auto one = approx_process(single, part, model);
  auto j = part.locate_cell({0.6, 0.6});
  REQUIRE(j.has_value());
  CHECK(one.fnm({0.6, 0.6}) == doctest::Approx(cell_kernel(part, *j, {0.4, 0.4})));

  auto other = std::make_shared<DistributionModel>(DistributionModel::uniform_cube(2));
  CHECK_THROWS_AS((void)approx_process(path, part, other), std::invalid_argument);
}

TEST_CASE("F_n^(m) is sandwiched between F_n at neighboring breakpoints") {
  auto model = std::make_shared<DistributionModel>(DistributionModel::uniform_cube(2));
  auto part = build_partition(model, 4);
  auto path = generators::simulate_iid_uniform(2, 512, 3);
  auto approx = approx_process(path, part, model);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<Real> u(0.0, 1.0);
  std::vector<Point> ts, lows, highs;
  for (int i = 0; i < 500; ++i) {
    Point t{u(rng), u(rng)};
    auto j = part.locate_cell(t);
    REQUIRE(j.has_value());
    Point lo(2), hi(2);
    for (std::size_t ax = 0; ax < 2; ++ax) {
      hi[ax] = part.t_points[ax][(*j)[ax] - 1];
      lo[ax] = (*j)[ax] >= 2 ? part.t_points[ax][(*j)[ax] - 2] : -kInf;
    }
    ts.push_back(t);
    lows.push_back(lo);
    highs.push_back(hi);
  }
  auto clo = count_dominated(path, lows);
  auto chi = count_dominated(path, highs);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    Real fnm = approx.fnm(ts[i]);
    CHECK(static_cast<Real>(clo[i]) / 512.0 <= fnm);
    CHECK(fnm <= static_cast<Real>(chi[i]) / 512.0);
  }
}

TEST_CASE("replicate variance of U_n matches F(1-F) for the iid cube") {
  auto model = DistributionModel::uniform_cube(2);
  Point t{0.5, 0.5};
  std::size_t n = 1024, reps = 400;
  std::vector<Real> un(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    auto path = generators::simulate_iid_uniform(2, n, 99, r);
    std::size_t c = count_dominated(path, {t})[0];
    un[r] = std::sqrt(static_cast<Real>(n)) *
            (static_cast<Real>(c) / static_cast<Real>(n) - model.cdf(t));
  }
  Real var = stats::sample_variance(un);
  Real truth = 0.25 * (1.0 - 0.25);
  Real se = truth * std::sqrt(2.0 / (static_cast<Real>(reps) - 1.0));
  CHECK(std::abs(var - truth) <= 3.0 * se);
}

TEST_CASE("sup gap evaluation covers breakpoints and sample points") {
  auto model = std::make_shared<DistributionModel>(DistributionModel::uniform_cube(1));
  auto path = generators::simulate_iid_uniform(1, 256, 12);
  Real prev = kInf;
  std::size_t decreases = 0;
  for (std::size_t m : {4u, 16u, 64u}) {
    auto part = build_partition(model, m);
    auto approx = approx_process(path, part, model);
    Real gap = sup_abs_process_gap(path, approx, *model);
    if (gap < prev) ++decreases;
    prev = gap;
  }
  CHECK(decreases >= 2);
}
