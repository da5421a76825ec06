#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "empiproc/common.hpp"

namespace empiproc::generators {

// --- sample paths -----------------------------------------------------------

/// One realization (X_1, ..., X_n) of an R^d-valued process, row-major.
struct SamplePath {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<Real> values;
  std::string generator_id;
  std::uint64_t seed = 0;
  std::uint64_t replicate_id = 0;
  /// Generator-specific diagnostics (truncation error, contraction average, ...).
  std::vector<std::pair<std::string, Real>> metadata;

  Real at(std::size_t k, std::size_t i) const { return values[k * d + i]; }
  Point point(std::size_t k) const { return Point(values.begin() + k * d, values.begin() + (k + 1) * d); }
};

// --- torus automorphisms -------------------------------------------------------

struct TorusAutomorphism {
  std::vector<std::vector<long long>> matrix;
  int det_sign = 1;
  std::vector<Real> eigen_moduli;
  bool is_ergodic = false;
  bool is_hyperbolic = false;
  /// Size of the biggest Jordan block on the unit-modulus eigenspace
  /// (0 when hyperbolic).
  int jordan_exponent = 0;
  bool jordan_exponent_numerical = false;
  /// min over expanding |lambda| and reciprocal contracting |lambda|.
  Real expansion_rate = 0.0;

  std::size_t dimension() const { return matrix.size(); }
};

/// Exact integer classification: |det| = 1 check, cyclotomic-factor test for
/// ergodicity, hyperbolic vs quasi-hyperbolic split, Jordan exponent.
/// Throws if |det M| != 1; a cyclotomic factor yields is_ergodic = false.
TorusAutomorphism validate_torus(const std::vector<std::vector<long long>>& matrix);

/// Searches companion matrices of degree-4 palindromic integer polynomials for
/// an ergodic automorphism with unit-modulus eigenvalues.
TorusAutomorphism quasi_hyperbolic_example();

struct TorusOptions {
  std::uint64_t precision_cap_bits = 1u << 20;
  /// Extra multiplier on the precision budget (2 doubles it).
  unsigned precision_factor = 1;
};

/// Iterates X_{k+1} = M X_k mod 1 in exact fixed-point arithmetic with
/// denominator 2^p, p = ceil(n log2 max_row_sum(|M|)) + 64, from a uniform
/// dyadic X_0. Emitted doubles are the truncated top 53 bits of the state.
SamplePath simulate_torus(const TorusAutomorphism& aut, std::size_t n, std::uint64_t seed,
                          std::uint64_t replicate_id = 0, const TorusOptions& opts = {});

/// Same iteration from an explicit dyadic start point (coordinates must be
/// exactly representable in 53 bits).
SamplePath simulate_torus_from(const TorusAutomorphism& aut, std::size_t n,
                               const std::vector<Real>& x0, const TorusOptions& opts = {});

// --- linear processes ------------------------------------------------------------

/// X_k = sum_{i=0}^{L_max} a_i xi_{k-i} with bounded i.i.d. innovations
/// (uniform on [-1,1]^d) and operator max-norms ||a_i|| <= theta^i.
struct LinearProcessModel {
  std::size_t d = 0;
  std::vector<std::vector<Real>> coefficients;  // L_max+1 matrices, row-major d x d
  Real theta = 0.5;
  std::size_t truncation_lag = 0;

  /// Checks the coefficient decay; throws on violation.
  static LinearProcessModel make(std::size_t d, std::vector<std::vector<Real>> coefficients,
                                 Real theta);
  /// Scalar AR-style default: a_i = theta^i * I, lag picked so the truncation
  /// tail is below double-precision noise.
  static LinearProcessModel geometric(std::size_t d, Real theta);
};

SamplePath simulate_linear(const LinearProcessModel& model, std::size_t n, std::uint64_t seed,
                           std::uint64_t replicate_id = 0);

// --- random iterative Lipschitz models ----------------------------------------------

struct LipschitzIterationModel {
  std::size_t d = 0;
  /// x, y -> g(x, y)
  std::function<std::vector<Real>(const std::vector<Real>&, Real)> g;
  /// noise draw
  std::function<Real(std::mt19937_64&)> noise;
  /// per-draw Lipschitz constant of g(., y)
  std::function<Real(Real)> lipschitz_constant;
  Real gamma0 = 2.0;
  std::size_t burn_in = 10000;

  /// Monte Carlo check of the contraction and moment conditions; throws when
  /// E[K max(K,1)^{2 gamma0}] >= 1.
  static LipschitzIterationModel make(std::size_t d,
                                      std::function<std::vector<Real>(const std::vector<Real>&, Real)> g,
                                      std::function<Real(std::mt19937_64&)> noise,
                                      std::function<Real(Real)> lipschitz_constant, Real gamma0,
                                      std::size_t burn_in = 10000);
  /// g(x, y) = 0.5 x + y 1 with Y uniform on [0,1].
  static LipschitzIterationModel contraction_default(std::size_t d);
};

SamplePath simulate_lipschitz(const LipschitzIterationModel& model, std::size_t n,
                              std::uint64_t seed, std::uint64_t replicate_id = 0);

// --- finite-state Markov chains ------------------------------------------------------

struct FiniteMarkovModel {
  std::vector<std::string> states;
  std::vector<Real> transition;  // row-major S x S, row-stochastic
  std::vector<Real> stationary;  // nu with nu P = nu
  Real second_modulus = 0.0;     // |lambda_2|
  std::vector<Real> embedding;   // row-major S x d
  std::size_t d = 0;

  std::size_t size() const { return states.size(); }
  Real p(std::size_t i, std::size_t j) const { return transition[i * states.size() + j]; }

  /// Validates stochasticity, computes nu and |lambda_2|.
  static FiniteMarkovModel make(std::vector<std::string> states, std::vector<Real> transition,
                                std::vector<Real> embedding, std::size_t d);
  /// Two states at -1/+1 with stay probability 1 - flip.
  static FiniteMarkovModel two_state(Real flip);
};

SamplePath simulate_markov(const FiniteMarkovModel& model, std::size_t n, std::uint64_t seed,
                           std::uint64_t replicate_id = 0);

// --- i.i.d. baseline ----------------------------------------------------------------

SamplePath simulate_iid_uniform(std::size_t d, std::size_t n, std::uint64_t seed,
                                std::uint64_t replicate_id = 0);

}  // namespace empiproc::generators
