#include "empiproc/generators.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>

namespace empiproc::generators {

using boost::multiprecision::cpp_int;

// --- exact integer polynomial machinery ------------------------------------------

namespace {

// ascending coefficients, normalized so the leading entry is nonzero
using Poly = std::vector<cpp_int>;

void trim(Poly& p) {
  while (p.size() > 1 && p.back() == 0) p.pop_back();
}

/// char(x) = det(xI - M) via Faddeev-LeVerrier; all divisions are exact.
Poly char_poly(const std::vector<std::vector<cpp_int>>& m) {
  std::size_t d = m.size();
  std::vector<std::vector<cpp_int>> nk(d, std::vector<cpp_int>(d, 0));
  Poly c(d + 1, 0);
  c[d] = 1;
  std::vector<std::vector<cpp_int>> acc(d, std::vector<cpp_int>(d, 0));
  for (std::size_t i = 0; i < d; ++i) acc[i][i] = 1;  // M^0
  for (std::size_t k = 1; k <= d; ++k) {
    // nk = M * (prev + c_{k-1} I)
    std::vector<std::vector<cpp_int>> tmp = acc;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        cpp_int s = 0;
        for (std::size_t l = 0; l < d; ++l) s += m[i][l] * tmp[l][j];
        nk[i][j] = s;
      }
    cpp_int tr = 0;
    for (std::size_t i = 0; i < d; ++i) tr += nk[i][i];
    cpp_int ck = -tr / static_cast<long long>(k);
    c[d - k] = ck;
    acc = nk;
    for (std::size_t i = 0; i < d; ++i) acc[i][i] += ck;
  }
  return c;
}

/// Exact division by a monic divisor; returns false when the remainder is nonzero.
bool monic_divides(const Poly& p, const Poly& q) {
  Poly r = p;
  trim(r);
  std::size_t dq = q.size() - 1;
  if (r.size() - 1 < dq) return false;
  while (r.size() - 1 >= dq && !(r.size() == 1 && r[0] == 0)) {
    cpp_int lead = r.back();
    std::size_t shift = r.size() - 1 - dq;
    for (std::size_t i = 0; i < q.size(); ++i) r[shift + i] -= lead * q[i];
    trim(r);
    if (r.size() - 1 < dq) break;
  }
  for (const auto& coef : r)
    if (coef != 0) return false;
  return true;
}

Poly monic_quotient(const Poly& p, const Poly& q) {
  Poly r = p;
  trim(r);
  std::size_t dq = q.size() - 1;
  Poly quot(r.size() - dq, 0);
  while (r.size() - 1 >= dq) {
    cpp_int lead = r.back();
    if (lead == 0 && r.size() == 1) break;
    std::size_t shift = r.size() - 1 - dq;
    quot[shift] = lead;
    for (std::size_t i = 0; i < q.size(); ++i) r[shift + i] -= lead * q[i];
    trim(r);
    if (r.size() - 1 < dq) break;
    if (r.size() == 1 && r[0] == 0) break;
  }
  return quot;
}

std::size_t totient(std::size_t k) {
  std::size_t result = k, n = k;
  for (std::size_t p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  if (n > 1) result -= result / n;
  return result;
}

const Poly& cyclotomic(std::size_t k) {
  static std::map<std::size_t, Poly> cache;
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;
  Poly xk_minus_1(k + 1, 0);
  xk_minus_1[0] = -1;
  xk_minus_1[k] = 1;
  Poly phi = xk_minus_1;
  for (std::size_t j = 1; j < k; ++j)
    if (k % j == 0) phi = monic_quotient(phi, cyclotomic(j));
  return cache.emplace(k, std::move(phi)).first->second;
}

Poly derivative(const Poly& p) {
  Poly d(p.size() - 1);
  for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<long long>(i);
  trim(d);
  return d;
}

/// Fraction-free (Bareiss) determinant.
cpp_int bareiss_det(std::vector<std::vector<cpp_int>> a) {
  std::size_t n = a.size();
  cpp_int prev = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && a[swap_row][k] == 0) ++swap_row;
      if (swap_row == n) return 0;
      std::swap(a[k], a[swap_row]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

/// Resultant(p, q) via the Sylvester matrix; nonzero disc <=> square-free.
cpp_int resultant(const Poly& p, const Poly& q) {
  std::size_t m = p.size() - 1, n = q.size() - 1;
  if (m == 0 || n == 0) return 1;
  std::size_t size = m + n;
  std::vector<std::vector<cpp_int>> s(size, std::vector<cpp_int>(size, 0));
  for (std::size_t row = 0; row < n; ++row)
    for (std::size_t i = 0; i <= m; ++i) s[row][row + i] = p[m - i];
  for (std::size_t row = 0; row < m; ++row)
    for (std::size_t i = 0; i <= n; ++i) s[n + row][row + i] = q[n - i];
  return bareiss_det(std::move(s));
}

}  // namespace

// --- validate_torus ------------------------------------------------------------------

TorusAutomorphism validate_torus(const std::vector<std::vector<long long>>& matrix) {
  std::size_t d = matrix.size();
  if (d == 0) throw std::invalid_argument("validate_torus: empty matrix");
  for (const auto& row : matrix)
    if (row.size() != d) throw std::invalid_argument("validate_torus: matrix must be square");

  std::vector<std::vector<cpp_int>> m(d, std::vector<cpp_int>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m[i][j] = matrix[i][j];

  Poly chi = char_poly(m);
  // char(0) = det(-M) = (-1)^d det(M)
  cpp_int det = (d % 2 == 0) ? chi[0] : -chi[0];
  if (det != 1 && det != -1)
    throw std::invalid_argument("validate_torus: |det M| != 1, not an invertible measure-preserving automorphism");

  TorusAutomorphism aut;
  aut.matrix = matrix;
  aut.det_sign = det == 1 ? 1 : -1;

  // exact ergodicity test: no cyclotomic factor in the characteristic polynomial
  bool cyclotomic_factor = false;
  for (std::size_t k = 1; k <= 4 * d * d + 6 && !cyclotomic_factor; ++k) {
    if (totient(k) > d) continue;
    if (monic_divides(chi, cyclotomic(k))) cyclotomic_factor = true;
  }
  aut.is_ergodic = !cyclotomic_factor;

  Eigen::MatrixXd md(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) md(i, j) = static_cast<double>(matrix[i][j]);
  Eigen::EigenSolver<Eigen::MatrixXd> solver(md);
  std::vector<std::complex<double>> eig(d);
  aut.eigen_moduli.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    eig[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
    aut.eigen_moduli[i] = std::abs(eig[i]);
  }
  std::sort(aut.eigen_moduli.begin(), aut.eigen_moduli.end(), std::greater<>());

  constexpr double kUnitTol = 1e-8;
  bool has_unit = false;
  double min_expanding = kInf, max_contracting = 0.0;
  for (double mod : aut.eigen_moduli) {
    if (std::abs(mod - 1.0) < kUnitTol)
      has_unit = true;
    else if (mod > 1.0)
      min_expanding = std::min(min_expanding, mod);
    else
      max_contracting = std::max(max_contracting, mod);
  }
  aut.is_hyperbolic = !has_unit;
  double rate = kInf;
  if (min_expanding < kInf) rate = min_expanding;
  if (max_contracting > 0.0) rate = std::min(rate, 1.0 / max_contracting);
  aut.expansion_rate = std::isfinite(rate) ? rate : 1.0;

  if (!has_unit) {
    aut.jordan_exponent = 0;
  } else if (resultant(chi, derivative(chi)) != 0) {
    // square-free characteristic polynomial: every Jordan block is trivial
    aut.jordan_exponent = 1;
  } else {
    aut.jordan_exponent_numerical = true;
    int r = 1;
    Eigen::MatrixXcd mc = md.cast<std::complex<double>>();
    for (std::size_t i = 0; i < d; ++i) {
      if (std::abs(std::abs(eig[i]) - 1.0) >= kUnitTol) continue;
      Eigen::MatrixXcd a = mc - eig[i] * Eigen::MatrixXcd::Identity(d, d);
      Eigen::MatrixXcd power = a;
      Eigen::Index prev_rank = -1;
      for (int j = 1; j <= static_cast<int>(d); ++j) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(power);
        qr.setThreshold(1e-8);
        Eigen::Index rank = qr.rank();
        if (rank == prev_rank) break;
        prev_rank = rank;
        r = std::max(r, j);
        power = power * a;
      }
    }
    aut.jordan_exponent = r;
  }
  return aut;
}

TorusAutomorphism quasi_hyperbolic_example() {
  // companion matrices of palindromic quartics x^4 + a x^3 + b x^2 + a x + 1
  for (long long a = -6; a <= 6; ++a)
    for (long long b = -6; b <= 6; ++b) {
      std::vector<std::vector<long long>> m = {
          {0, 0, 0, -1}, {1, 0, 0, -a}, {0, 1, 0, -b}, {0, 0, 1, -a}};
      TorusAutomorphism aut;
      try {
        aut = validate_torus(m);
      } catch (const std::invalid_argument&) {
        continue;
      }
      if (aut.is_ergodic && !aut.is_hyperbolic) return aut;
    }
  throw std::runtime_error("quasi_hyperbolic_example: search exhausted");
}

// --- simulate_torus -------------------------------------------------------------------

namespace {

std::uint64_t torus_precision(const TorusAutomorphism& aut, std::size_t n,
                              const TorusOptions& opts) {
  long long max_row_sum = 1;
  for (const auto& row : aut.matrix) {
    long long s = 0;
    for (long long v : row) s += std::llabs(v);
    max_row_sum = std::max(max_row_sum, s);
  }
  double bits_per_step = std::log2(static_cast<double>(max_row_sum));
  std::uint64_t p_bits =
      (static_cast<std::uint64_t>(std::ceil(static_cast<double>(n) * bits_per_step)) + 64) *
      std::max(1u, opts.precision_factor);
  if (p_bits > opts.precision_cap_bits)
    throw std::invalid_argument(
        "simulate_torus: required precision " + std::to_string(p_bits) +
        " bits exceeds the cap; lower n or raise TorusOptions::precision_cap_bits");
  return p_bits;
}

SamplePath run_torus(const TorusAutomorphism& aut, std::size_t n, std::uint64_t p_bits,
                     std::vector<cpp_int> state) {
  std::size_t d = aut.dimension();
  cpp_int modulus = cpp_int(1) << p_bits;

  SamplePath path;
  path.n = n;
  path.d = d;
  path.values.resize(n * d);
  path.generator_id = "torus";
  path.metadata.emplace_back("precision_bits", static_cast<Real>(p_bits));

  std::vector<cpp_int> next(d);
  const double inv53 = 1.0 / 9007199254740992.0;  // 2^-53
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      cpp_int s = 0;
      for (std::size_t j = 0; j < d; ++j) s += cpp_int(aut.matrix[i][j]) * state[j];
      s %= modulus;
      if (s < 0) s += modulus;
      next[i] = std::move(s);
    }
    state.swap(next);
    for (std::size_t i = 0; i < d; ++i) {
      // truncate, never round: emitted doubles agree across precision budgets
      cpp_int top = state[i] >> (p_bits - 53);
      path.values[k * d + i] = static_cast<double>(top.convert_to<std::uint64_t>()) * inv53;
    }
  }
  return path;
}

}  // namespace

SamplePath simulate_torus(const TorusAutomorphism& aut, std::size_t n, std::uint64_t seed,
                          std::uint64_t replicate_id, const TorusOptions& opts) {
  if (!aut.is_ergodic) throw std::invalid_argument("simulate_torus: automorphism is not ergodic");
  if (n == 0) throw std::invalid_argument("simulate_torus: n must be >= 1");
  std::size_t d = aut.dimension();
  std::uint64_t p_bits = torus_precision(aut, n, opts);

  auto rng = make_rng(seed, replicate_id);
  // uniform dyadic X_0 with the base number of random bits regardless of the
  // precision factor; extra precision only zero-pads below, so the fixed-point
  // orbit is exact and identical across budgets
  TorusOptions base = opts;
  base.precision_factor = 1;
  std::uint64_t base_bits = torus_precision(aut, n, base);
  std::size_t chunks = (base_bits + 63) / 64;
  std::vector<cpp_int> state(d);
  for (std::size_t i = 0; i < d; ++i) {
    cpp_int acc = 0;
    for (std::size_t c = 0; c < chunks; ++c) acc = (acc << 64) | cpp_int(rng());
    state[i] = (acc >> (64 * chunks - base_bits)) << (p_bits - base_bits);
  }

  SamplePath path = run_torus(aut, n, p_bits, std::move(state));
  path.seed = seed;
  path.replicate_id = replicate_id;
  return path;
}

SamplePath simulate_torus_from(const TorusAutomorphism& aut, std::size_t n,
                               const std::vector<Real>& x0, const TorusOptions& opts) {
  if (!aut.is_ergodic) throw std::invalid_argument("simulate_torus: automorphism is not ergodic");
  if (n == 0) throw std::invalid_argument("simulate_torus: n must be >= 1");
  std::size_t d = aut.dimension();
  if (x0.size() != d) throw std::invalid_argument("simulate_torus: start point dimension mismatch");
  std::uint64_t p_bits = torus_precision(aut, n, opts);

  std::vector<cpp_int> state(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!(x0[i] >= 0.0 && x0[i] < 1.0))
      throw std::invalid_argument("simulate_torus: start point must lie in [0,1)");
    double scaled = x0[i] * 9007199254740992.0;  // exact for dyadics of <= 53 bits
    if (scaled != std::floor(scaled))
      throw std::invalid_argument("simulate_torus: start coordinates must be 53-bit dyadics");
    state[i] = cpp_int(static_cast<std::uint64_t>(scaled)) << (p_bits - 53);
  }
  return run_torus(aut, n, p_bits, std::move(state));
}

// --- linear processes --------------------------------------------------------------------

LinearProcessModel LinearProcessModel::make(std::size_t d, std::vector<std::vector<Real>> coefficients,
                                            Real theta) {
  if (d == 0 || coefficients.empty()) throw std::invalid_argument("LinearProcessModel: empty");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("LinearProcessModel: theta outside (0,1)");
  Real power = 1.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    if (coefficients[i].size() != d * d)
      throw std::invalid_argument("LinearProcessModel: coefficient matrices must be d x d");
    Real norm = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      Real row = 0.0;
      for (std::size_t c = 0; c < d; ++c) row += std::abs(coefficients[i][r * d + c]);
      norm = std::max(norm, row);
    }
    if (norm > power + 1e-12)
      throw std::invalid_argument("LinearProcessModel: coefficient decay ||a_i|| <= theta^i violated at i=" +
                                  std::to_string(i));
    power *= theta;
  }
  LinearProcessModel m;
  m.d = d;
  m.coefficients = std::move(coefficients);
  m.theta = theta;
  m.truncation_lag = m.coefficients.size() - 1;
  return m;
}

LinearProcessModel LinearProcessModel::geometric(std::size_t d, Real theta) {
  auto lag = static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(theta)));
  std::vector<std::vector<Real>> coef(lag + 1, std::vector<Real>(d * d, 0.0));
  Real power = 1.0;
  for (std::size_t i = 0; i <= lag; ++i) {
    for (std::size_t k = 0; k < d; ++k) coef[i][k * d + k] = power;
    power *= theta;
  }
  return make(d, std::move(coef), theta);
}

SamplePath simulate_linear(const LinearProcessModel& model, std::size_t n, std::uint64_t seed,
                           std::uint64_t replicate_id) {
  if (n == 0) throw std::invalid_argument("simulate_linear: n must be >= 1");
  std::size_t d = model.d, lag = model.truncation_lag;
  auto rng = make_rng(seed, replicate_id);
  std::uniform_real_distribution<Real> u(-1.0, 1.0);
  std::vector<Real> xi((n + lag) * d);
  for (Real& v : xi) v = u(rng);

  SamplePath path;
  path.n = n;
  path.d = d;
  path.values.assign(n * d, 0.0);
  path.generator_id = "linear";
  path.seed = seed;
  path.replicate_id = replicate_id;
  path.metadata.emplace_back("truncation_error_bound",
                             std::pow(model.theta, static_cast<Real>(lag + 1)) / (1.0 - model.theta));

  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i <= lag; ++i) {
      const Real* innov = &xi[(k + lag - i) * d];
      const auto& a = model.coefficients[i];
      for (std::size_t r = 0; r < d; ++r) {
        Real s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += a[r * d + c] * innov[c];
        path.values[k * d + r] += s;
      }
    }
  return path;
}

// --- Lipschitz iterations ---------------------------------------------------------------------

LipschitzIterationModel LipschitzIterationModel::make(
    std::size_t d, std::function<std::vector<Real>(const std::vector<Real>&, Real)> g,
    std::function<Real(std::mt19937_64&)> noise, std::function<Real(Real)> lipschitz_constant,
    Real gamma0, std::size_t burn_in) {
  if (d == 0 || !g || !noise || !lipschitz_constant)
    throw std::invalid_argument("LipschitzIterationModel: incomplete model");
  if (!(gamma0 > 1.0)) throw std::invalid_argument("LipschitzIterationModel: gamma0 must exceed 1");

  // Monte Carlo check of the contraction and moment conditions
  auto rng = make_rng(0xC0FFEEULL);
  std::vector<Real> zero(d, 0.0);
  const std::size_t draws = 20000;
  Real contraction = 0.0, moment = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    Real y = noise(rng);
    Real k = lipschitz_constant(y);
    std::vector<Real> g0 = g(zero, y);
    Real g0_norm = 0.0;
    for (Real v : g0) g0_norm = std::max(g0_norm, std::abs(v));
    contraction += k * std::pow(std::max(k, 1.0), 2.0 * gamma0);
    moment += std::pow(1.0 + k + g0_norm, gamma0 + 1.0) * (1.0 + k);
  }
  contraction /= draws;
  moment /= draws;
  if (!std::isfinite(moment))
    throw std::invalid_argument("LipschitzIterationModel: moment condition fails");
  if (contraction >= 1.0 - 1e-9)
    throw std::invalid_argument("LipschitzIterationModel: contraction condition E[K max(K,1)^{2 gamma0}] < 1 fails");

  LipschitzIterationModel m;
  m.d = d;
  m.g = std::move(g);
  m.noise = std::move(noise);
  m.lipschitz_constant = std::move(lipschitz_constant);
  m.gamma0 = gamma0;
  m.burn_in = burn_in;
  return m;
}

LipschitzIterationModel LipschitzIterationModel::contraction_default(std::size_t d) {
  return make(
      d,
      [](const std::vector<Real>& x, Real y) {
        std::vector<Real> out(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = 0.5 * x[i] + y;
        return out;
      },
      [](std::mt19937_64& rng) { return std::uniform_real_distribution<Real>(0.0, 1.0)(rng); },
      [](Real) { return 0.5; }, 2.0);
}

SamplePath simulate_lipschitz(const LipschitzIterationModel& model, std::size_t n,
                              std::uint64_t seed, std::uint64_t replicate_id) {
  if (n == 0) throw std::invalid_argument("simulate_lipschitz: n must be >= 1");
  auto rng = make_rng(seed, replicate_id);
  std::vector<Real> x(model.d, 0.0);
  Real k_sum = 0.0;
  std::size_t k_count = 0;
  auto step = [&] {
    Real y = model.noise(rng);
    x = model.g(x, y);
    k_sum += model.lipschitz_constant(y);
    ++k_count;
    for (Real v : x)
      if (!(std::abs(v) <= 1e12))
        throw std::runtime_error("simulate_lipschitz: path diverged (|X_k| > 1e12)");
  };
  for (std::size_t i = 0; i < model.burn_in; ++i) step();

  SamplePath path;
  path.n = n;
  path.d = model.d;
  path.values.resize(n * model.d);
  path.generator_id = "lipschitz";
  path.seed = seed;
  path.replicate_id = replicate_id;
  for (std::size_t k = 0; k < n; ++k) {
    step();
    std::copy(x.begin(), x.end(), path.values.begin() + k * model.d);
  }
  path.metadata.emplace_back("contraction_average", k_sum / static_cast<Real>(k_count));
  return path;
}

// --- finite Markov chains ----------------------------------------------------------------------

FiniteMarkovModel FiniteMarkovModel::make(std::vector<std::string> states,
                                          std::vector<Real> transition,
                                          std::vector<Real> embedding, std::size_t d) {
  std::size_t s = states.size();
  if (s == 0 || transition.size() != s * s || d == 0 || embedding.size() != s * d)
    throw std::invalid_argument("FiniteMarkovModel: inconsistent sizes");
  for (std::size_t i = 0; i < s; ++i) {
    Real row = 0.0;
    for (std::size_t j = 0; j < s; ++j) {
      if (transition[i * s + j] < 0.0)
        throw std::invalid_argument("FiniteMarkovModel: negative transition probability");
      row += transition[i * s + j];
    }
    if (std::abs(row - 1.0) > 1e-12)
      throw std::invalid_argument("FiniteMarkovModel: row " + std::to_string(i) + " does not sum to 1");
  }

  Eigen::MatrixXd p(s, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) p(i, j) = transition[i * s + j];

  // stationary distribution: (P^T - I) nu = 0 with sum(nu) = 1
  Eigen::MatrixXd a = p.transpose() - Eigen::MatrixXd::Identity(s, s);
  a.row(s - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s);
  b(s - 1) = 1.0;
  Eigen::VectorXd nu = a.fullPivLu().solve(b);

  Eigen::RowVectorXd check = nu.transpose() * p;
  for (std::size_t j = 0; j < s; ++j)
    if (std::abs(check(j) - nu(j)) > 1e-10)
      throw std::invalid_argument("FiniteMarkovModel: stationary vector failed nu P = nu");

  Eigen::VectorXcd eig = Eigen::EigenSolver<Eigen::MatrixXd>(p).eigenvalues();
  std::vector<Real> moduli(s);
  for (std::size_t i = 0; i < s; ++i) moduli[i] = std::abs(eig(static_cast<Eigen::Index>(i)));
  std::sort(moduli.begin(), moduli.end(), std::greater<>());

  FiniteMarkovModel m;
  m.states = std::move(states);
  m.transition = std::move(transition);
  m.stationary.assign(nu.data(), nu.data() + s);
  m.second_modulus = s > 1 ? moduli[1] : 0.0;
  m.embedding = std::move(embedding);
  m.d = d;
  return m;
}

FiniteMarkovModel FiniteMarkovModel::two_state(Real flip) {
  if (!(flip >= 0.0 && flip <= 1.0)) throw std::invalid_argument("two_state: flip outside [0,1]");
  return make({"a", "b"}, {1.0 - flip, flip, flip, 1.0 - flip}, {-1.0, 1.0}, 1);
}

SamplePath simulate_markov(const FiniteMarkovModel& model, std::size_t n, std::uint64_t seed,
                           std::uint64_t replicate_id) {
  if (n == 0) throw std::invalid_argument("simulate_markov: n must be >= 1");
  auto rng = make_rng(seed, replicate_id);
  std::uniform_real_distribution<Real> u(0.0, 1.0);
  std::size_t s = model.size();

  auto draw = [&](const Real* weights) {
    Real r = u(rng), acc = 0.0;
    for (std::size_t j = 0; j + 1 < s; ++j) {
      acc += weights[j];
      if (r < acc) return j;
    }
    return s - 1;
  };

  std::size_t state = draw(model.stationary.data());
  SamplePath path;
  path.n = n;
  path.d = model.d;
  path.values.resize(n * model.d);
  path.generator_id = "markov";
  path.seed = seed;
  path.replicate_id = replicate_id;
  for (std::size_t k = 0; k < n; ++k) {
    state = draw(&model.transition[state * s]);
    for (std::size_t i = 0; i < model.d; ++i)
      path.values[k * model.d + i] = model.embedding[state * model.d + i];
  }
  return path;
}

// --- i.i.d. baseline ---------------------------------------------------------------------------

SamplePath simulate_iid_uniform(std::size_t d, std::size_t n, std::uint64_t seed,
                                std::uint64_t replicate_id) {
  if (d == 0 || n == 0) throw std::invalid_argument("simulate_iid_uniform: need d >= 1 and n >= 1");
  auto rng = make_rng(seed, replicate_id);
  std::uniform_real_distribution<Real> u(0.0, 1.0);
  SamplePath path;
  path.n = n;
  path.d = d;
  path.values.resize(n * d);
  for (Real& v : path.values) v = u(rng);
  path.generator_id = "iid-uniform";
  path.seed = seed;
  path.replicate_id = replicate_id;
  return path;
}

}  // namespace empiproc::generators
