#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "empiproc/generators.hpp"
#include "empiproc/stats.hpp"

using namespace empiproc;
using namespace empiproc::generators;

namespace {
const std::vector<std::vector<long long>> kCat{{2, 1}, {1, 1}};
}

TEST_CASE("validate_torus classifies the cat map") {
  auto aut = validate_torus(kCat);
  CHECK(aut.is_ergodic);
  CHECK(aut.is_hyperbolic);
  CHECK(aut.jordan_exponent == 0);
  // roots of x^2 - 3x + 1
  Real golden = (3.0 + std::sqrt(5.0)) / 2.0;
  CHECK(aut.eigen_moduli[0] == doctest::Approx(golden).epsilon(1e-9));
  CHECK(aut.eigen_moduli[1] == doctest::Approx(1.0 / golden).epsilon(1e-9));
  CHECK(aut.expansion_rate == doctest::Approx(golden).epsilon(1e-9));
}

TEST_CASE("validate_torus rejects and flags degenerate matrices") {
  CHECK_FALSE(validate_torus({{0, -1}, {1, 0}}).is_ergodic);  // char poly is x^2 + 1
  CHECK_FALSE(validate_torus({{1, 0}, {0, 1}}).is_ergodic);
  CHECK_THROWS_AS((void)validate_torus({{2, 0}, {0, 1}}), std::invalid_argument);
  CHECK_THROWS_AS((void)validate_torus({{1, 2, 3}, {4, 5, 6}}), std::invalid_argument);
}

TEST_CASE("the shipped quasi-hyperbolic example is ergodic with a neutral part") {
  auto aut = quasi_hyperbolic_example();
  CHECK(aut.is_ergodic);
  CHECK_FALSE(aut.is_hyperbolic);
  CHECK(aut.jordan_exponent >= 1);
  bool has_unit = false;
  for (Real m : aut.eigen_moduli)
    if (std::abs(m - 1.0) < 1e-6) has_unit = true;
  CHECK(has_unit);
}

TEST_CASE("torus orbits from explicit start points") {
  auto aut = validate_torus(kCat);
  auto zero = simulate_torus_from(aut, 5, {0.0, 0.0});
  for (Real v : zero.values) CHECK(v == 0.0);

  auto half = simulate_torus_from(aut, 1, {0.5, 0.5});
  CHECK(half.at(0, 0) == 0.5);  // (3/2, 1) mod 1
  CHECK(half.at(0, 1) == 0.0);
}

TEST_CASE("torus paths are reproducible and stable under extra precision") {
  auto aut = validate_torus(kCat);
  auto a = simulate_torus(aut, 200, 99, 3);
  auto b = simulate_torus(aut, 200, 99, 3);
  CHECK(a.values == b.values);

  TorusOptions doubled;
  doubled.precision_factor = 2;
  auto c = simulate_torus(aut, 200, 99, 3, doubled);
  CHECK(a.values == c.values);

  auto other = simulate_torus(aut, 200, 99, 4);
  CHECK(a.values != other.values);

  TorusOptions tight;
  tight.precision_cap_bits = 128;
  CHECK_THROWS_AS((void)simulate_torus(aut, 200, 99, 0, tight), std::invalid_argument);
  CHECK(simulate_torus(aut, 1, 5).n == 1);
}

TEST_CASE("torus orbit matches Lebesgue measure on a doubling schedule") {
  auto aut = validate_torus(kCat);
  auto cdf = [](Real x) { return std::clamp(x, 0.0, 1.0); };
  Real prev = 1.0;
  std::size_t improvements = 0;
  for (std::size_t n : {512u, 2048u, 8192u}) {
    auto path = simulate_torus(aut, n, 2024);
    std::vector<Real> first(n);
    for (std::size_t k = 0; k < n; ++k) first[k] = path.at(k, 0);
    auto ks = stats::ks_test(first, cdf);
    if (ks.statistic < prev) ++improvements;
    prev = ks.statistic;
  }
  CHECK(improvements >= 2);
}

TEST_CASE("linear process basics") {
  auto zero = LinearProcessModel::make(1, {{0.0}, {0.0}}, 0.5);
  auto zpath = simulate_linear(zero, 50, 1);
  for (Real v : zpath.values) CHECK(v == 0.0);

  auto pass = LinearProcessModel::make(2, {{1.0, 0.0, 0.0, 1.0}}, 0.5);
  auto ppath = simulate_linear(pass, 300, 7);
  for (Real v : ppath.values) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }

  CHECK_THROWS_AS((void)LinearProcessModel::make(1, {{1.0}, {0.9}}, 0.5), std::invalid_argument);
}

TEST_CASE("geometric linear process has the series variance") {
  auto model = LinearProcessModel::geometric(1, 0.5);
  std::vector<Real> vars;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    auto path = simulate_linear(model, 256, 31, rep);
    vars.push_back(stats::sample_variance(path.values));
  }
  auto ms = stats::mean_stderr(vars);
  // innovations uniform on [-1,1]: Var = (1/3) / (1 - 0.25)
  CHECK(std::abs(ms.mean - (1.0 / 3.0) / 0.75) < 5.0 * ms.stderr_ + 0.01);
  bool found = false;
  for (const auto& [k, v] : simulate_linear(model, 4, 1).metadata)
    if (k == "truncation_error_bound") {
      found = true;
      CHECK(v < 1e-11);
    }
  CHECK(found);
}

TEST_CASE("lipschitz iteration model") {
  auto iid = LipschitzIterationModel::make(
      1, [](const std::vector<Real>&, Real y) { return std::vector<Real>{y}; },
      [](std::mt19937_64& rng) { return std::uniform_real_distribution<Real>(0.0, 1.0)(rng); },
      [](Real) { return 0.0; }, 2.0, 100);
  auto path = simulate_lipschitz(iid, 500, 3);
  for (Real v : path.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  auto def = LipschitzIterationModel::contraction_default(1);
  std::vector<Real> means;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    auto p = simulate_lipschitz(def, 400, 17, rep);
    means.push_back(stats::mean_stderr(p.values).mean);
  }
  auto ms = stats::mean_stderr(means);
  CHECK(std::abs(ms.mean - 1.0) < 5.0 * ms.stderr_ + 0.01);  // E X = 0.5 E X + 0.5

  CHECK_THROWS_AS((void)LipschitzIterationModel::make(
                      1, [](const std::vector<Real>& x, Real) { return x; },
                      [](std::mt19937_64& rng) {
                        return std::uniform_real_distribution<Real>(0.0, 1.0)(rng);
                      },
                      [](Real) { return 1.0; }, 2.0, 10),
                  std::invalid_argument);
}

TEST_CASE("finite markov chains") {
  auto two = FiniteMarkovModel::two_state(0.25);
  CHECK(two.stationary[0] == doctest::Approx(0.5));
  CHECK(two.stationary[1] == doctest::Approx(0.5));
  CHECK(two.second_modulus == doctest::Approx(0.5));

  auto frozen = FiniteMarkovModel::make({"a", "b"}, {1, 0, 0, 1}, {0.0, 1.0}, 1);
  auto path = simulate_markov(frozen, 64, 9);
  for (std::size_t k = 1; k < path.n; ++k) CHECK(path.at(k, 0) == path.at(0, 0));

  CHECK_THROWS_AS((void)FiniteMarkovModel::make({"a", "b"}, {0, 0, 0.5, 0.5}, {0.0, 1.0}, 1),
                  std::invalid_argument);
}

TEST_CASE("every generator is reproducible and roughly stationary") {
  auto aut = validate_torus(kCat);
  auto lin = LinearProcessModel::geometric(2, 0.5);
  auto lip = LipschitzIterationModel::contraction_default(1);
  auto mkv = FiniteMarkovModel::two_state(0.25);

  std::vector<std::function<SamplePath(std::uint64_t)>> gens{
      [&](std::uint64_t r) { return simulate_iid_uniform(2, 128, 5, r); },
      [&](std::uint64_t r) { return simulate_torus(aut, 128, 5, r); },
      [&](std::uint64_t r) { return simulate_linear(lin, 128, 5, r); },
      [&](std::uint64_t r) { return simulate_lipschitz(lip, 128, 5, r); },
      [&](std::uint64_t r) { return simulate_markov(mkv, 128, 5, r); }};

  for (auto& gen : gens) {
    CHECK(gen(2).values == gen(2).values);
    std::vector<Real> head, tail;
    for (std::uint64_t r = 0; r < 400; ++r) {
      auto p = gen(r);
      head.push_back(p.at(0, 0));
      tail.push_back(p.at(p.n - 1, 0));
    }
    auto mh = stats::mean_stderr(head);
    auto mt = stats::mean_stderr(tail);
    Real se = std::sqrt(mh.stderr_ * mh.stderr_ + mt.stderr_ * mt.stderr_);
    CHECK(std::abs(mh.mean - mt.mean) <= 3.5 * se + 1e-9);
  }
}

TEST_CASE("degenerate linear process matches the iid baseline in law") {
  auto pass = LinearProcessModel::make(3, {std::vector<Real>{1, 0, 0, 0, 1, 0, 0, 0, 1}}, 0.9);
  std::size_t n = 10000;
  auto lp = simulate_linear(pass, n, 77);
  auto base = simulate_iid_uniform(3, n, 78301);
  int passes = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    std::vector<Real> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
      a[k] = lp.at(k, i);
      b[k] = (base.at(k, i) * 2.0) - 1.0;  // baseline is on [0,1], innovations on [-1,1]
    }
    auto ks = stats::ks_two_sample(a, b);
    if (ks.p_value > 0.01) ++passes;
  }
  CHECK(passes == 3);
}
