#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "empiproc/core.hpp"

using namespace empiproc;
using core::DistributionModel;
using core::EvaluationGrid;
using core::GridFunction;

TEST_CASE("compactify maps the extended line onto [0,1]") {
  CHECK(core::compactify(0.0) == doctest::Approx(0.5));
  CHECK(core::compactify(-kInf) == 0.0);
  CHECK(core::compactify(kInf) == 1.0);
  CHECK(core::compactify(1.0) == doctest::Approx(0.75));
}

TEST_CASE("compactify is strictly monotone and invertible") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<Real> u(-50.0, 50.0);
  for (int i = 0; i < 2000; ++i) {
    Real t = u(rng), s = u(rng);
    if (t == s) continue;
    if (t > s) std::swap(t, s);
    CHECK(core::compactify(t) < core::compactify(s));
    Real back = core::compactify_inverse(core::compactify(t));
    CHECK(back == doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("uniform cube cdf") {
  auto model = DistributionModel::uniform_cube(2);
  CHECK(model.cdf({0.5, 0.5}) == doctest::Approx(0.25));
  CHECK(model.cdf({-kInf, 0.7}) == 0.0);
  CHECK(model.cdf({kInf, 0.3}) == doctest::Approx(0.3));
  CHECK(model.cdf({kInf, kInf}) == 1.0);
  CHECK_THROWS_AS((void)model.cdf({0.5}), std::invalid_argument);
}

TEST_CASE("cdf is coordinate-wise monotone") {
  auto model = DistributionModel::uniform_cube(3);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<Real> u(-0.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    Point t(3), s(3);
    for (int j = 0; j < 3; ++j) {
      Real a = u(rng), b = u(rng);
      t[j] = std::min(a, b);
      s[j] = std::max(a, b);
    }
    CHECK(model.cdf(t) <= model.cdf(s));
  }
}

TEST_CASE("quantile follows the sup definition") {
  auto model = DistributionModel::uniform_cube(1);
  CHECK(model.quantile(0, 0.25) == doctest::Approx(0.25));
  CHECK(model.quantile(0, 1.0) == kInf);
  CHECK_THROWS_AS((void)model.quantile(0, 1.5), std::invalid_argument);

  auto emp = DistributionModel::empirical({0.1, 0.4, 0.9}, 1);
  CHECK(emp.quantile(0, 0.5) == doctest::Approx(0.4));
}

TEST_CASE("quantile and cdf satisfy the Galois relation") {
  auto emp = DistributionModel::empirical({0.05, 0.2, 0.2, 0.55, 0.8, 0.97}, 1);
  for (int i = 0; i <= 40; ++i) {
    Real r = i / 40.0;
    Real q = emp.quantile(0, r);
    if (std::isfinite(q)) CHECK(emp.marginal_cdf(0, q) >= r);
    if (std::isfinite(q)) {
      Real below = q - 1e-9;
      CHECK(emp.marginal_cdf(0, below) <= r + 1e-12);
    }
  }
}

TEST_CASE("holder norm on closed forms") {
  auto ident = [](const Point& x) { return x[0]; };
  CHECK(core::holder_norm(ident, {0.0}, {1.0}, 512, 1.0) == doctest::Approx(2.0).epsilon(1e-2));

  auto constant = [](const Point&) { return -3.5; };
  CHECK(core::holder_norm(constant, {0.0}, {1.0}, 64, 0.5) == doctest::Approx(3.5));

  // the base chaining kernel: sup 1, slope 1 on (-1, 0]
  auto kernel = [](const Point& x) {
    Real v = x[0];
    if (v <= -1.0) return 1.0;
    if (v <= 0.0) return -v;
    return 0.0;
  };
  CHECK(core::holder_norm(kernel, {-2.0}, {1.0}, 1536, 1.0) == doctest::Approx(2.0).epsilon(1e-2));
}

TEST_CASE("holder norm is subadditive and homogeneous on grid functions") {
  auto grid = std::make_shared<EvaluationGrid>(
      std::vector<std::vector<Real>>{{0.1, 0.3, 0.6, 0.9}, {0.2, 0.5, 0.8}});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<Real> u(-1.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    GridFunction f{grid, {}}, g{grid, {}}, sum{grid, {}}, scaled{grid, {}};
    for (std::size_t v = 0; v < grid->vertex_count(); ++v) {
      f.values.push_back(u(rng));
      g.values.push_back(u(rng));
      sum.values.push_back(f.values.back() + g.values.back());
      scaled.values.push_back(2.5 * f.values.back());
    }
    Real alpha = 0.7;
    CHECK(core::holder_norm(sum, alpha) <=
          core::holder_norm(f, alpha) + core::holder_norm(g, alpha) + 1e-12);
    CHECK(core::holder_norm(scaled, alpha) ==
          doctest::Approx(2.5 * core::holder_norm(f, alpha)));
  }
}

TEST_CASE("modulus of continuity estimates") {
  auto m1 = DistributionModel::uniform_cube(1);
  auto est1 = core::modulus_of_continuity(m1, {0.1});
  CHECK(est1[0].second == doctest::Approx(0.1).epsilon(0.02));

  auto m2 = DistributionModel::uniform_cube(2);
  auto est2 = core::modulus_of_continuity(m2, {0.1});
  CHECK(est2[0].second == doctest::Approx(0.19).epsilon(0.03));  // 2 delta - delta^2

  auto m3 = DistributionModel::uniform_cube(2);
  std::vector<Real> deltas{0.01, 0.02, 0.05, 0.1, 0.2, 0.4};
  auto est3 = core::modulus_of_continuity(m3, deltas);
  for (std::size_t i = 1; i < est3.size(); ++i) CHECK(est3[i].second >= est3[i - 1].second);
  CHECK(m3.gamma_estimate().has_value());
  CHECK(m3.modulus_scale_estimate().has_value());
  CHECK_THROWS_AS((void)core::modulus_of_continuity(m3, {}), std::invalid_argument);
}

TEST_CASE("evaluation grids carry sentinels and index consistently") {
  EvaluationGrid grid({{0.25, 0.5, 0.75}, {0.5}});
  CHECK(grid.dimension() == 2);
  CHECK(grid.axis_size(0) == 5);
  CHECK(grid.axis_size(1) == 3);
  CHECK(grid.vertex_count() == 15);
  CHECK(grid.axis(0).front() == -kInf);
  CHECK(grid.axis(0).back() == kInf);
  for (std::size_t flat = 0; flat < grid.vertex_count(); ++flat)
    CHECK(grid.flat_index(grid.multi_index(flat)) == flat);
}
