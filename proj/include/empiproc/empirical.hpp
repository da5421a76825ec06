#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "empiproc/common.hpp"
#include "empiproc/core.hpp"
#include "empiproc/generators.hpp"

namespace empiproc::empirical {

using core::DistributionModel;
using core::EvaluationGrid;
using core::GridFunction;
using generators::SamplePath;

// --- empirical process fields ------------------------------------------------

struct EmpiricalProcessField {
  std::shared_ptr<const EvaluationGrid> grid;
  GridFunction Fn;  // empirical cdf at grid vertices
  GridFunction F;   // model cdf at grid vertices
  GridFunction Un;  // sqrt(n) (Fn - F)
  std::size_t n = 0;
};

/// Exact count-based F_n on a product grid (per-axis rank precomputation,
/// then a d-dimensional prefix sum).
GridFunction empirical_cdf(const SamplePath& path, std::shared_ptr<const EvaluationGrid> grid);

EmpiricalProcessField empirical_process(const SamplePath& path,
                                        std::shared_ptr<const EvaluationGrid> grid,
                                        const DistributionModel& model);

/// #{i : X_i <= q} for a batch of query points (sorted scan for d=1, sweep
/// with a Fenwick tree for d=2, direct scan otherwise).
std::vector<std::size_t> count_dominated(const SamplePath& path, const std::vector<Point>& queries);

// --- quantile partitions --------------------------------------------------------

/// Regular probability partition r_j = j/m with per-axis quantile breakpoints
/// t_{i,j} = F_i^{-1}(r_j); t_{i,m} = +inf.
struct PartitionSystem {
  std::shared_ptr<const DistributionModel> model;
  std::size_t m = 0;
  Real h = 0.0;
  std::vector<Real> r;                      // m+1 regular probability levels
  std::vector<std::vector<Real>> t_points;  // d x (m+1)

  std::size_t dimension() const { return t_points.size(); }
  /// 1-based cell index j with t in [t_{j-1}, t_j), or nullopt outside.
  std::optional<std::vector<std::size_t>> locate_cell(const Point& t) const;
};

PartitionSystem build_partition(std::shared_ptr<const DistributionModel> model, std::size_t m);

/// phi_j of the partition: the Hoelder approximation to 1_{(-inf, t_{j-1}]},
/// identically 0 unless (2,...,2) <= j. Cells are 1-based.
Real cell_kernel(const PartitionSystem& partition, const std::vector<std::size_t>& j, const Point& x);

// --- piecewise-constant approximation --------------------------------------------

struct ApproxProcessField {
  PartitionSystem partition;
  std::size_t n = 0;
  std::vector<Real> cell_mean;    // (1/n) sum_i phi_j(X_i), m^d cells
  std::vector<Real> cell_expect;  // E phi_j(X_0)

  Real fnm(const Point& t) const;  // F_n^(m)(t)
  Real fm(const Point& t) const;   // F^(m)(t)
  Real unm(const Point& t) const;  // sqrt(n) (F_n^(m) - F^(m))(t)

  std::size_t cell_flat(const std::vector<std::size_t>& j) const;
};

/// F_n^(m), F^(m) = E F_n^(m) (analytic for product models, calibration
/// average otherwise) and U_n^(m). Rejects a partition built from another
/// model instance.
ApproxProcessField approx_process(const SamplePath& path, const PartitionSystem& partition,
                                  const std::shared_ptr<const DistributionModel>& model);

/// sup over grid vertices, sample points and partition breakpoints of
/// |U_n - U_n^(m)| (the extrema of the step-function difference live there).
Real sup_abs_process_gap(const SamplePath& path, const ApproxProcessField& approx,
                         const DistributionModel& model,
                         const EvaluationGrid* grid = nullptr);

}  // namespace empiproc::empirical
