#include "empiproc/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "empiproc/chaining.hpp"

namespace empiproc::empirical {

// --- empirical cdf on product grids ---------------------------------------------

GridFunction empirical_cdf(const SamplePath& path, std::shared_ptr<const EvaluationGrid> grid) {
  if (path.n == 0) throw std::invalid_argument("empirical_cdf: empty path");
  if (path.d != grid->dimension()) throw std::invalid_argument("empirical_cdf: dimension mismatch");
  std::size_t d = path.d;

  std::vector<Real> counts(grid->vertex_count(), 0.0);
  std::vector<std::size_t> idx(d);
  for (std::size_t k = 0; k < path.n; ++k) {
    for (std::size_t i = 0; i < d; ++i) {
      const auto& ax = grid->axis(i);
      // smallest vertex coordinate >= x: the point is counted from there on
      idx[i] = static_cast<std::size_t>(
          std::lower_bound(ax.begin(), ax.end(), path.at(k, i)) - ax.begin());
    }
    counts[grid->flat_index(idx)] += 1.0;
  }

  // d-dimensional prefix sum
  std::size_t v = grid->vertex_count();
  for (std::size_t a = d; a-- > 0;) {
    std::size_t stride = 1;
    for (std::size_t b = a + 1; b < d; ++b) stride *= grid->axis_size(b);
    std::size_t len = grid->axis_size(a);
    for (std::size_t flat = 0; flat < v; ++flat) {
      std::size_t pos = (flat / stride) % len;
      if (pos > 0) counts[flat] += counts[flat - stride];
    }
  }

  GridFunction fn{std::move(grid), std::move(counts)};
  Real inv = 1.0 / static_cast<Real>(path.n);
  for (Real& c : fn.values) c *= inv;
  return fn;
}

EmpiricalProcessField empirical_process(const SamplePath& path,
                                        std::shared_ptr<const EvaluationGrid> grid,
                                        const DistributionModel& model) {
  if (model.dimension() != grid->dimension())
    throw std::invalid_argument("empirical_process: model/grid dimension mismatch");
  EmpiricalProcessField field;
  field.grid = grid;
  field.n = path.n;
  field.Fn = empirical_cdf(path, grid);
  field.F = GridFunction{grid, std::vector<Real>(grid->vertex_count())};
  field.Un = GridFunction{grid, std::vector<Real>(grid->vertex_count())};
  Real root_n = std::sqrt(static_cast<Real>(path.n));
  for (std::size_t i = 0; i < grid->vertex_count(); ++i) {
    field.F.values[i] = model.cdf(grid->vertex(i));
    field.Un.values[i] = root_n * (field.Fn.values[i] - field.F.values[i]);
  }
  return field;
}

// --- batched dominance counting ----------------------------------------------------

namespace {

struct Fenwick {
  std::vector<std::size_t> tree;
  explicit Fenwick(std::size_t n) : tree(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < tree.size(); i += i & (~i + 1)) ++tree[i];
  }
  std::size_t prefix(std::size_t count) const {  // sum of first `count` slots
    std::size_t s = 0;
    for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += tree[i];
    return s;
  }
};

}  // namespace

std::vector<std::size_t> count_dominated(const SamplePath& path, const std::vector<Point>& queries) {
  std::size_t d = path.d;
  std::vector<std::size_t> out(queries.size(), 0);
  if (d == 1) {
    std::vector<Real> xs(path.values);
    std::sort(xs.begin(), xs.end());
    for (std::size_t q = 0; q < queries.size(); ++q)
      out[q] = static_cast<std::size_t>(
          std::upper_bound(xs.begin(), xs.end(), queries[q][0]) - xs.begin());
    return out;
  }
  if (d == 2) {
    std::vector<Real> ys(path.n);
    for (std::size_t k = 0; k < path.n; ++k) ys[k] = path.at(k, 1);
    std::vector<Real> sorted_y = ys;
    std::sort(sorted_y.begin(), sorted_y.end());
    sorted_y.erase(std::unique(sorted_y.begin(), sorted_y.end()), sorted_y.end());

    std::vector<std::size_t> porder(path.n), qorder(queries.size());
    std::iota(porder.begin(), porder.end(), 0);
    std::iota(qorder.begin(), qorder.end(), 0);
    std::sort(porder.begin(), porder.end(),
              [&](std::size_t a, std::size_t b) { return path.at(a, 0) < path.at(b, 0); });
    std::sort(qorder.begin(), qorder.end(),
              [&](std::size_t a, std::size_t b) { return queries[a][0] < queries[b][0]; });

    Fenwick bit(sorted_y.size());
    std::size_t next = 0;
    for (std::size_t q : qorder) {
      while (next < path.n && path.at(porder[next], 0) <= queries[q][0]) {
        std::size_t rank = static_cast<std::size_t>(
            std::lower_bound(sorted_y.begin(), sorted_y.end(), ys[porder[next]]) - sorted_y.begin());
        bit.add(rank);
        ++next;
      }
      std::size_t yrank = static_cast<std::size_t>(
          std::upper_bound(sorted_y.begin(), sorted_y.end(), queries[q][1]) - sorted_y.begin());
      out[q] = bit.prefix(yrank);
    }
    return out;
  }
  for (std::size_t q = 0; q < queries.size(); ++q) {
    std::size_t c = 0;
    for (std::size_t k = 0; k < path.n; ++k) {
      bool below = true;
      for (std::size_t i = 0; i < d; ++i)
        if (!(path.at(k, i) <= queries[q][i])) {
          below = false;
          break;
        }
      c += below;
    }
    out[q] = c;
  }
  return out;
}

// --- quantile partitions -------------------------------------------------------------

PartitionSystem build_partition(std::shared_ptr<const DistributionModel> model, std::size_t m) {
  if (!model) throw std::invalid_argument("build_partition: null model");
  if (m < 2) throw std::invalid_argument("build_partition: m must be >= 2");
  PartitionSystem part;
  part.model = model;
  part.m = m;
  part.h = 1.0 / static_cast<Real>(m);
  part.r.resize(m + 1);
  for (std::size_t j = 0; j <= m; ++j) part.r[j] = static_cast<Real>(j) / static_cast<Real>(m);
  std::size_t d = model->dimension();
  part.t_points.assign(d, std::vector<Real>(m + 1));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= m; ++j) part.t_points[i][j] = model->quantile(i, part.r[j]);
  return part;
}

std::optional<std::vector<std::size_t>> PartitionSystem::locate_cell(const Point& t) const {
  std::size_t d = dimension();
  if (t.size() != d) throw std::invalid_argument("locate_cell: dimension mismatch");
  std::vector<std::size_t> j(d);
  for (std::size_t i = 0; i < d; ++i) {
    const auto& tp = t_points[i];
    auto it = std::upper_bound(tp.begin(), tp.end(), t[i]);
    std::size_t cell = static_cast<std::size_t>(it - tp.begin());
    if (cell == 0 || cell > m) return std::nullopt;
    j[i] = cell;
  }
  return j;
}

Real cell_kernel(const PartitionSystem& partition, const std::vector<std::size_t>& j,
                 const Point& x) {
  std::size_t d = partition.dimension();
  if (j.size() != d || x.size() != d) throw std::invalid_argument("cell_kernel: dimension mismatch");
  for (std::size_t i = 0; i < d; ++i) {
    if (j[i] < 1 || j[i] > partition.m) throw std::invalid_argument("cell_kernel: cell out of range");
    if (j[i] < 2) return 0.0;  // nonzero only when (2,...,2) <= j
  }
  Real value = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    Real a = partition.t_points[i][j[i] - 1];
    Real w = std::abs(a - partition.t_points[i][j[i] - 2]);
    if (!std::isfinite(a) || !std::isfinite(w)) return 0.0;  // 1/inf = 0 convention
    value *= chaining::phi((x[i] - a) / w);
    if (value == 0.0) return 0.0;
  }
  return value;
}

// --- piecewise-constant approximation -------------------------------------------------

std::size_t ApproxProcessField::cell_flat(const std::vector<std::size_t>& j) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < j.size(); ++i) flat = flat * partition.m + (j[i] - 1);
  return flat;
}

Real ApproxProcessField::fnm(const Point& t) const {
  auto j = partition.locate_cell(t);
  if (!j) return 0.0;  // empty sum outside the covered cells
  return cell_mean[cell_flat(*j)];
}

Real ApproxProcessField::fm(const Point& t) const {
  auto j = partition.locate_cell(t);
  if (!j) return 0.0;
  return cell_expect[cell_flat(*j)];
}

Real ApproxProcessField::unm(const Point& t) const {
  auto j = partition.locate_cell(t);
  if (!j) return 0.0;
  std::size_t flat = cell_flat(*j);
  return std::sqrt(static_cast<Real>(n)) * (cell_mean[flat] - cell_expect[flat]);
}

namespace {

/// Per-axis kernel factor of phi_j: phi((x - t_{i,j-1}) / |t_{i,j-1} - t_{i,j-2}|),
/// 0 for j = 1.
Real axis_factor(const PartitionSystem& part, std::size_t axis, std::size_t j, Real x) {
  if (j < 2) return 0.0;
  Real a = part.t_points[axis][j - 1];
  Real w = std::abs(a - part.t_points[axis][j - 2]);
  if (!std::isfinite(a) || !std::isfinite(w)) return 0.0;
  return chaining::phi((x - a) / w);
}

}  // namespace

ApproxProcessField approx_process(const SamplePath& path, const PartitionSystem& partition,
                                  const std::shared_ptr<const DistributionModel>& model) {
  if (path.n == 0) throw std::invalid_argument("approx_process: empty path");
  if (model != partition.model)
    throw std::invalid_argument("approx_process: partition was built from a different model");
  std::size_t d = partition.dimension();
  if (path.d != d) throw std::invalid_argument("approx_process: dimension mismatch");
  std::size_t m = partition.m;
  std::size_t cells = 1;
  for (std::size_t i = 0; i < d; ++i) cells *= m;

  ApproxProcessField field;
  field.partition = partition;
  field.n = path.n;
  field.cell_mean.assign(cells, 0.0);
  field.cell_expect.assign(cells, 0.0);

  // accumulate phi_j(X_i) for every cell via per-axis factor tables
  std::vector<Real> factors(d * m);
  auto accumulate = [&](const Real* x, std::vector<Real>& target, Real weight) {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 1; j <= m; ++j) factors[i * m + (j - 1)] = axis_factor(partition, i, j, x[i]);
    for (std::size_t flat = 0; flat < cells; ++flat) {
      Real prod = 1.0;
      std::size_t rest = flat;
      for (std::size_t i = d; i-- > 0;) {
        prod *= factors[i * m + rest % m];
        rest /= m;
        if (prod == 0.0) break;
      }
      if (prod != 0.0) target[flat] += weight * prod;
    }
  };

  Real inv_n = 1.0 / static_cast<Real>(path.n);
  for (std::size_t k = 0; k < path.n; ++k) accumulate(&path.values[k * d], field.cell_mean, inv_n);

  if (model->kind() == core::ModelKind::Empirical) {
    const auto& cal = model->calibration();
    std::size_t rows = cal.size() / d;
    Real w = 1.0 / static_cast<Real>(rows);
    for (std::size_t k = 0; k < rows; ++k) accumulate(&cal[k * d], field.cell_expect, w);
  } else {
    // independent marginals: E phi_j factorizes
    std::vector<Real> means(d * m, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 2; j <= m; ++j) {
        Real a = partition.t_points[i][j - 1];
        Real w = std::abs(a - partition.t_points[i][j - 2]);
        means[i * m + (j - 1)] =
            (std::isfinite(a) && std::isfinite(w)) ? model->marginal_kernel_mean(i, a, w) : 0.0;
      }
    for (std::size_t flat = 0; flat < cells; ++flat) {
      Real prod = 1.0;
      std::size_t rest = flat;
      for (std::size_t i = d; i-- > 0;) {
        prod *= means[i * m + rest % m];
        rest /= m;
      }
      field.cell_expect[flat] = prod;
    }
  }
  return field;
}

Real sup_abs_process_gap(const SamplePath& path, const ApproxProcessField& approx,
                         const DistributionModel& model, const EvaluationGrid* grid) {
  std::vector<Point> queries;
  queries.reserve(path.n + 64);
  for (std::size_t k = 0; k < path.n; ++k) queries.push_back(path.point(k));

  const auto& part = approx.partition;
  std::size_t d = part.dimension();
  std::size_t combos = 1;
  for (std::size_t i = 0; i < d; ++i) combos *= part.t_points[i].size();
  for (std::size_t flat = 0; flat < combos; ++flat) {
    Point p(d);
    std::size_t rest = flat;
    for (std::size_t i = d; i-- > 0;) {
      p[i] = part.t_points[i][rest % part.t_points[i].size()];
      rest /= part.t_points[i].size();
    }
    queries.push_back(std::move(p));
  }
  if (grid)
    for (std::size_t v = 0; v < grid->vertex_count(); ++v) queries.push_back(grid->vertex(v));

  auto counts = count_dominated(path, queries);
  Real root_n = std::sqrt(static_cast<Real>(path.n));
  Real sup = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    Real un = root_n * (static_cast<Real>(counts[q]) / static_cast<Real>(path.n) -
                        model.cdf(queries[q]));
    sup = std::max(sup, std::abs(un - approx.unm(queries[q])));
  }
  return sup;
}

}  // namespace empiproc::empirical
