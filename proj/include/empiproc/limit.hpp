#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "empiproc/common.hpp"
#include "empiproc/core.hpp"
#include "empiproc/generators.hpp"

namespace empiproc::limit {

using core::DistributionModel;
using core::EvaluationGrid;
using core::GridFunction;
using generators::SamplePath;

enum class Taper { Flat, Bartlett };

/// Long-run covariance of the limiting field on a grid, with a PSD repair and
/// a lower-triangular factor for sampling.
struct LimitModel {
  std::shared_ptr<const EvaluationGrid> grid;
  std::vector<Real> gamma;   // V x V row-major, symmetric, post-repair
  std::vector<Real> factor;  // lower triangular, factor factor^T = gamma
  std::size_t lag = 0;
  Taper taper = Taper::Bartlett;
  Real min_eigen_pre = 0.0;  // smallest eigenvalue before clipping
  Real psd_clip = 0.0;       // total magnitude clipped away

  Real at(std::size_t s, std::size_t t) const { return gamma[s * grid->vertex_count() + t]; }
};

/// Plug-in truncated series gamma(s,t) = c_0(s,t) + sum_k w_k (c_k(s,t) + c_k(t,s))
/// from lag-k indicator covariances, averaged over replicates and window
/// offsets; then symmetric eigenvalue clipping at 0 and a triangular
/// factorization of the repaired matrix.
LimitModel estimate_gamma(const std::vector<SamplePath>& ensemble,
                          std::shared_ptr<const EvaluationGrid> grid, std::size_t lag,
                          Taper taper = Taper::Bartlett);

/// L = ceil(4 log n / |log theta|), capped at n/10 and at least 1.
std::size_t default_lag(std::size_t n, Real theta);

/// count independent draws of factor * z, z standard normal.
std::vector<GridFunction> sample_W(const LimitModel& model, std::size_t count, std::uint64_t seed);

// --- finite-dimensional normality --------------------------------------------------

struct DirectionTest {
  std::vector<Real> direction;
  bool skipped = false;       // degenerate target variance
  Real variance_target = 0.0;
  Real variance_sample = 0.0;
  Real variance_ratio = 0.0;
  Real ad_statistic = 0.0;
  Real ad_pvalue = 0.0;
  Real ks_statistic = 0.0;
  Real ks_pvalue = 0.0;
};

struct FidiReport {
  std::vector<Point> points;
  std::vector<DirectionTest> tests;
  std::size_t replicates = 0;
};

/// Cramer-Wold projections a . (U_n(t_1),...,U_n(t_k)) across replicates,
/// tested for normality with mean 0 and variance a^T Gamma a; gamma_matrix is
/// the k x k target covariance at the query points (row-major).
FidiReport fidi_normality(const std::vector<SamplePath>& ensemble, const DistributionModel& model,
                          const std::vector<Point>& points,
                          const std::vector<std::vector<Real>>& directions,
                          const std::vector<Real>& gamma_matrix);

}  // namespace empiproc::limit
