#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "empiproc/common.hpp"

namespace empiproc::core {

// --- compactification of [-inf, inf] ---------------------------------------

/// Strictly increasing homeomorphism [-inf, inf] -> [0, 1],
/// t |-> 1/2 + arctan(t)/pi.
Real compactify(Real t);
Real compactify_inverse(Real u);

// --- evaluation grids --------------------------------------------------------

/// A finite product grid on [-inf, inf]^d. Every axis is strictly increasing
/// and carries -inf and +inf sentinels at its ends.
class EvaluationGrid {
 public:
  /// Builds the grid from per-axis finite breakpoints; sentinels are added.
  explicit EvaluationGrid(std::vector<std::vector<Real>> finite_axes);

  std::size_t dimension() const { return axes_.size(); }
  const std::vector<Real>& axis(std::size_t i) const { return axes_[i]; }
  std::size_t axis_size(std::size_t i) const { return axes_[i].size(); }
  std::size_t interior_count(std::size_t i) const { return axes_[i].size() - 2; }
  std::size_t vertex_count() const { return vertex_count_; }

  /// Row-major linearization of a multi-index (last axis fastest).
  std::size_t flat_index(const std::vector<std::size_t>& idx) const;
  std::vector<std::size_t> multi_index(std::size_t flat) const;
  Point vertex(std::size_t flat) const;

 private:
  std::vector<std::vector<Real>> axes_;
  std::size_t vertex_count_ = 0;
};

/// One finite value per grid vertex.
struct GridFunction {
  std::shared_ptr<const EvaluationGrid> grid;
  std::vector<Real> values;  // indexed by flat vertex index

  Real at(std::size_t flat) const { return values[flat]; }
};

// --- distribution models ------------------------------------------------------

enum class ModelKind { UniformCube, AnalyticProduct, Empirical };

/// A multivariate distribution with coordinate-wise marginals, evaluable cdf
/// and sup-definition quantiles. Immutable once the modulus fit has been run.
class DistributionModel {
 public:
  static DistributionModel uniform_cube(std::size_t d);
  /// Independent uniform marginals on per-axis intervals.
  static DistributionModel analytic_product(std::vector<std::pair<Real, Real>> intervals);
  /// Plug-in model built from a calibration sample (row-major n x d).
  static DistributionModel empirical(std::vector<Real> calibration, std::size_t d);

  std::size_t dimension() const { return dimension_; }
  ModelKind kind() const { return kind_; }

  /// Joint cdf F(t) = P(X <= t).
  Real cdf(const Point& t) const;
  Real marginal_cdf(std::size_t axis, Real x) const;

  /// F_i^{-1}(r) = sup{s : F_i(s) <= r}, with F_i^{-1}(1) = +inf.
  Real quantile(std::size_t axis, Real r) const;

  /// Mean of a per-axis integrand under the marginal law; analytic for the
  /// analytic kinds, calibration average for the empirical kind. The
  /// integrand must be piecewise linear of the kernel form
  /// phi((x - a) / w) (see chaining::phi).
  Real marginal_kernel_mean(std::size_t axis, Real a, Real w) const;

  Point sample(std::mt19937_64& rng) const;

  std::optional<Real> gamma_estimate() const { return gamma_estimate_; }
  std::optional<Real> modulus_scale_estimate() const { return modulus_scale_estimate_; }
  void set_modulus_fit(Real scale, Real gamma) {
    modulus_scale_estimate_ = scale;
    gamma_estimate_ = gamma;
  }

  const std::vector<Real>& calibration() const { return calibration_; }

 private:
  DistributionModel() = default;

  ModelKind kind_ = ModelKind::UniformCube;
  std::size_t dimension_ = 0;
  std::vector<std::pair<Real, Real>> intervals_;      // AnalyticProduct
  std::vector<Real> calibration_;                     // Empirical, row-major
  std::vector<std::vector<Real>> sorted_marginals_;   // Empirical
  std::optional<Real> gamma_estimate_;
  std::optional<Real> modulus_scale_estimate_;
};

// --- norms and moduli ---------------------------------------------------------

/// sup|f| plus the alpha-Hoelder quotient maximized over grid vertex pairs
/// (max-norm distances). A lower bound to the continuum norm; callers that
/// report it label it as such.
Real holder_norm(const GridFunction& f, Real alpha);

/// Same, for a closed form sampled on a dense box grid.
Real holder_norm(const std::function<Real(const Point&)>& f, const Point& lo, const Point& hi,
                 std::size_t pts_per_axis, Real alpha);

/// Grid-search estimates of omega_F(delta) = sup{|F(s)-F(t)| : |s-t| < delta}
/// for each requested delta; also fits omega(delta) ~ scale * |log delta|^-gamma
/// on the 10 smallest deltas and stores (scale, gamma) in the model.
std::vector<std::pair<Real, Real>> modulus_of_continuity(DistributionModel& model,
                                                         std::vector<Real> deltas,
                                                         std::size_t probe_resolution = 256);

}  // namespace empiproc::core
