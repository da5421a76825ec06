#pragma once

#include <cstdint>
#include <vector>

#include "empiproc/common.hpp"
#include "empiproc/empirical.hpp"

namespace empiproc::chaining {

using empirical::PartitionSystem;
using generators::SamplePath;

/// The base kernel: 1 on (-inf,-1], -x on (-1,0], 0 on (0,inf).
inline Real phi(Real x) {
  if (x <= -1.0) return 1.0;
  if (x <= 0.0) return -x;
  return 0.0;
}

// --- schedules ------------------------------------------------------------------

struct Schedule {
  int K = 1;
  std::vector<Real> epsilon_k;  // epsilon_k = epsilon / (4 k (k+1)), k = 1..K
  bool window_checked = true;   // false when K was clamped (d sqrt(n) h < epsilon regime)
  bool window_ok = true;        // epsilon/2^4 <= d sqrt(n) h / 2^K <= epsilon/2^3
  Real window_value = 0.0;      // d sqrt(n) h / 2^K
};

/// K = 4 + floor(log(d sqrt(n) h / epsilon) / log 2), clamped to >= 1.
Schedule schedule(std::size_t n, Real h, Real epsilon, std::size_t d);

// --- the chaining system ----------------------------------------------------------

/// Dyadic quantile refinements s^(k)_{i,j,l} = F_i^{-1}(r_{j-1} + l h / 2^k)
/// for l in {-1, ..., 2^k+1}, with the boundary points stitched from the
/// neighboring cells, plus the K / epsilon_k schedules.
class ChainingSystem {
 public:
  ChainingSystem(PartitionSystem partition, Real alpha, Real epsilon, std::size_t n);

  const PartitionSystem& partition() const { return partition_; }
  Real alpha() const { return alpha_; }
  Real epsilon() const { return epsilon_; }
  std::size_t sample_size() const { return n_; }
  const Schedule& levels() const { return schedule_; }
  int depth() const { return schedule_.K; }
  std::size_t dimension() const { return partition_.dimension(); }

  /// s^(k)_{i,j,l}; j is the 1-based cell, l ranges over -1..2^k+1.
  Real s_point(int k, std::size_t axis, std::size_t j, long l) const;

 private:
  PartitionSystem partition_;
  Real alpha_;
  Real epsilon_;
  std::size_t n_;
  Schedule schedule_;
  // refinements_[k][axis][j-1] holds 2^k + 3 points for l = -1..2^k+1
  std::vector<std::vector<std::vector<std::vector<Real>>>> refinements_;
};

// --- chain indices ------------------------------------------------------------------

struct ChainIndices {
  std::vector<std::size_t> cell;       // 1-based cell j containing t
  std::vector<std::vector<long>> l;    // l[k], k = 0..K
};

/// l_i(k, t) = max{l : s^(k)_{i,j_i,l} <= t_i}; rejects t outside the
/// covered region.
ChainIndices chain_index(const ChainingSystem& system, const Point& t);

/// psi^(k)_l on cell j: the product of the printed per-coordinate cases
/// (0 on the lowest cell at l = 0, 1 on the top cell for l >= 2^k, a scaled
/// base kernel otherwise; 1/inf = 0).
Real psi(const ChainingSystem& system, const std::vector<std::size_t>& cell_j, int k,
         const std::vector<long>& l, const Point& x);

// --- checks -------------------------------------------------------------------------

struct SandwichReport {
  std::size_t checks = 0;
  std::size_t violations = 0;
  Real worst_slack = 0.0;  // most negative margin seen (0 when clean)
};

/// Verifies phi_j <= psi^(1) <= ... <= psi^(K) <= 1_(-inf,t] <= psi^(K)_{l+2}
/// (and psi^(0) = phi_j exactly) at every sample point, for every queried t.
SandwichReport verify_sandwich(const ChainingSystem& system, const SamplePath& path,
                               const std::vector<Point>& t_queries);

struct IncrementNormReport {
  Real estimate = 0.0;      // r-norm estimate
  Real bound = 0.0;         // (3 d h / 2^k)^{1/r}
  Real estimate_pow = 0.0;  // E |increment|^r
  Real bound_pow = 0.0;
  Real mc_stderr = 0.0;     // stderr of estimate_pow
  std::size_t draws = 0;
};

/// Monte Carlo check of ||psi^(k)_l(X_0) - psi^(k-1)_{floor(l/2)}(X_0)||_r
/// against (3dh/2^k)^{1/r}; with top_variant the level-K pair (l+2, l).
IncrementNormReport increment_norm_check(const ChainingSystem& system,
                                         const std::vector<std::size_t>& cell_j, int k,
                                         const std::vector<long>& l, Real r, std::size_t draws,
                                         std::uint64_t seed, bool top_variant = false);

struct HolderGrowthReport {
  Real norm = 0.0;      // 1 + d max_i gap_i^-alpha from the breakpoint gaps
  Real envelope = 0.0;  // exp(alpha (D 2^k / h)^{1/gamma}) from the fitted modulus
  Real fitted_b = 0.0;  // norm / envelope
};

HolderGrowthReport holder_growth_check(const ChainingSystem& system,
                                       const std::vector<std::size_t>& cell_j, int k,
                                       const std::vector<long>& l);

/// Smallest integer p with p > d r gamma / (gamma - r); requires gamma > r.
int min_moment_order(std::size_t d, Real r, Real gamma);

}  // namespace empiproc::chaining
