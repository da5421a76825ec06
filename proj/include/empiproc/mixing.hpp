#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "empiproc/common.hpp"
#include "empiproc/core.hpp"
#include "empiproc/generators.hpp"

namespace empiproc::mixing {

using core::DistributionModel;
using generators::FiniteMarkovModel;
using generators::SamplePath;

// --- observables -----------------------------------------------------------------

/// A centered scalar observable with sup norm rescaled to <= 1.
struct Observable {
  std::function<Real(const Point&)> raw;
  std::string name;
  Real center = 0.0;
  Real scale = 1.0;       // divides raw - center; chosen so sup|f| <= 1
  Real alpha = 1.0;
  Real holder_norm = 1.0; // of the rescaled observable

  Real operator()(const Point& x) const { return (raw(x) - center) / scale; }

  /// Monte Carlo centering under the model; sup_bound is the caller's bound on
  /// sup |raw - center|.
  static Observable calibrate(std::function<Real(const Point&)> raw, std::string name,
                              const DistributionModel& model, Real alpha, Real sup_bound,
                              Real holder_seminorm, std::size_t draws = 100000,
                              std::uint64_t seed = 0xb5e7);
  /// cos(2 pi x_axis): exactly centered under any law that is uniform in that
  /// coordinate.
  static Observable cosine(std::size_t axis);
};

/// Evaluates f along a path.
std::vector<Real> evaluate(const Observable& f, const SamplePath& path);

// --- block covariances ---------------------------------------------------------------

struct CovarianceEstimate {
  Real estimate = 0.0;
  Real stderr_ = 0.0;
  std::size_t replicates = 0;
};

/// Cross-replicate estimate of
///   Cov(f(X_0) f(X_{i_1*}) ... f(X_{i_{q-1}*}),  f(X_{i_q*}) ... f(X_{i_p*}))
/// at cumulative indices i_k* = i_1 + ... + i_k; gaps are (left..., gap, right...).
/// Windows are shifted along each path (stationarity) and averaged per replicate.
CovarianceEstimate block_covariance(const std::vector<SamplePath>& ensemble, const Observable& f,
                                    const std::vector<std::size_t>& left_gaps, std::size_t gap,
                                    const std::vector<std::size_t>& right_gaps);

// --- geometric-envelope fits -----------------------------------------------------------

enum class FitStatus { Fitted, BelowNoiseFloor };

struct MixingReport {
  std::vector<std::size_t> gaps;
  std::vector<Real> covariances;
  std::vector<Real> stderrs;
  FitStatus status = FitStatus::BelowNoiseFloor;
  Real log_c = 0.0;
  Real theta_hat = 0.0;
  Real theta_ci_low = 0.0;   // 95% interval for theta
  Real theta_ci_high = 0.0;
  int degree = 0;            // log-polynomial correction degree
  Real residual_rms = 0.0;
  std::size_t used_points = 0;
};

/// Fits log|cov_k| = log C + degree log k + k log theta. With no degree given,
/// degrees {0,1,2} compete on residual RMS. Needs >= 6 gaps; reports
/// BelowNoiseFloor when no covariance clears 3 standard errors.
MixingReport fit_mixing_envelope(const std::vector<std::size_t>& gaps,
                                 const std::vector<Real>& covariances,
                                 const std::vector<Real>& stderrs,
                                 std::optional<int> degree = std::nullopt);

// --- moment sums -----------------------------------------------------------------------

struct MomentSumEstimate {
  Real estimate = 0.0;
  Real stderr_ = 0.0;  // conservative: sum of per-term standard errors
  std::size_t terms = 0;
};

/// I_n(p) = sum over 0 <= i_1..i_p <= n-1, i_p* <= n-1 of
/// |E(f(X_0) f(X_{i_1*}) ... f(X_{i_p*}))|; I_n(0) = 0. Exact tuple
/// enumeration, Monte Carlo expectation per tuple; rejects budgets over
/// term_cap.
MomentSumEstimate moment_sum_In(const std::vector<SamplePath>& ensemble, const Observable& f,
                                std::size_t n, int p, std::size_t term_cap = 200000);

/// J_n(p,q): i_q ranges over 0..n-1, the remaining indices over 0..i_q,
/// still with i_p* <= n-1.
MomentSumEstimate moment_sum_Jn(const std::vector<SamplePath>& ensemble, const Observable& f,
                                std::size_t n, int p, int q, std::size_t term_cap = 200000);

// --- partial-sum moments -----------------------------------------------------------------

struct MomentReport {
  int p = 1;
  std::vector<std::size_t> n_grid;
  std::vector<Real> even_moment;  // E[S_n^{2p}]
  std::vector<Real> even_stderr;
  std::vector<Real> odd_moment;   // E[S_n^{2p+1}], signed
  std::vector<Real> odd_stderr;
  Real slope = 0.0;  // of log E[S_n^{2p}] against log n
  Real slope_stderr = 0.0;
  Real fitted_k = 0.0;       // smallest K making the bound hold at the smallest n
  std::vector<Real> bound;   // K sum_i n^i ||f(X_0)||_r^i log^{2p-i}(||f|| + 1/theta)
};

/// Estimates E[S_n^{2p}] and E[S_n^{2p+1}] over the n grid, R replicates each,
/// fits the growth slope, and evaluates the bound shape with a descriptive K.
MomentReport partial_sum_moments(
    const std::function<SamplePath(std::size_t n, std::uint64_t replicate)>& generate,
    const Observable& f, const std::vector<std::size_t>& n_grid, int p, std::size_t replicates,
    Real r_norm, Real theta);

/// The unique integer in (log(||f|| + 1/theta) / (-log theta), that + 1];
/// satisfies theta^{n_0} ||f|| <= 1 and n_0 >= 2.
int cutoff_n0(Real f_norm, Real theta);

// --- spectral gaps ------------------------------------------------------------------------

struct SpectralGapReport {
  bool has_gap = false;
  Real lambda2 = 1.0;
  Real kappa_hat = 0.0;
  Real theta_hat = 1.0;
  bool theta_matches_lambda2 = false;  // within 0.05
  std::size_t envelope_checks = 0;
  std::size_t envelope_violations = 0;
  std::size_t mc_checks = 0;
  std::size_t mc_violations = 0;  // Monte Carlo vs exact covariance beyond 3 stderr
};

/// Exact matrix powering of ||P^n f - Pi f||_inf over the test functions,
/// a geometric fit of (kappa, theta) checked against |lambda_2|, then the
/// lag-k covariance envelope |Cov(f(X_0), f(X_k))| <= kappa theta^k ||f||
/// verified on the embedded chain (exact covariances as the oracle for the
/// Monte Carlo estimates).
SpectralGapReport spectral_gap_check(const FiniteMarkovModel& model,
                                     const std::vector<std::vector<Real>>& test_functions,
                                     std::size_t n_max = 30, std::size_t replicates = 400,
                                     std::size_t path_length = 64, std::uint64_t seed = 1);

}  // namespace empiproc::mixing
