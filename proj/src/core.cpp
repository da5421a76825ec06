#include "empiproc/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "empiproc/stats.hpp"

namespace empiproc::core {

Real compactify(Real t) {
  if (t == -kInf) return 0.0;
  if (t == kInf) return 1.0;
  return 0.5 + std::atan(t) / std::numbers::pi;
}

Real compactify_inverse(Real u) {
  if (u < 0.0 || u > 1.0) throw std::invalid_argument("compactify_inverse: u outside [0,1]");
  if (u == 0.0) return -kInf;
  if (u == 1.0) return kInf;
  return std::tan(std::numbers::pi * (u - 0.5));
}

// --- EvaluationGrid -----------------------------------------------------------

EvaluationGrid::EvaluationGrid(std::vector<std::vector<Real>> finite_axes) {
  if (finite_axes.empty()) throw std::invalid_argument("EvaluationGrid: dimension must be >= 1");
  axes_.reserve(finite_axes.size());
  for (auto& ax : finite_axes) {
    std::vector<Real> full;
    full.reserve(ax.size() + 2);
    full.push_back(-kInf);
    for (Real v : ax) {
      if (!std::isfinite(v)) throw std::invalid_argument("EvaluationGrid: interior breakpoints must be finite");
      full.push_back(v);
    }
    full.push_back(kInf);
    for (std::size_t i = 1; i < full.size(); ++i)
      if (!(full[i - 1] < full[i]))
        throw std::invalid_argument("EvaluationGrid: axis breakpoints must be strictly increasing");
    axes_.push_back(std::move(full));
  }
  vertex_count_ = 1;
  for (const auto& ax : axes_) vertex_count_ *= ax.size();
}

std::size_t EvaluationGrid::flat_index(const std::vector<std::size_t>& idx) const {
  std::size_t flat = 0;
  for (std::size_t i = 0; i < axes_.size(); ++i) flat = flat * axes_[i].size() + idx[i];
  return flat;
}

std::vector<std::size_t> EvaluationGrid::multi_index(std::size_t flat) const {
  std::vector<std::size_t> idx(axes_.size());
  for (std::size_t i = axes_.size(); i-- > 0;) {
    idx[i] = flat % axes_[i].size();
    flat /= axes_[i].size();
  }
  return idx;
}

Point EvaluationGrid::vertex(std::size_t flat) const {
  auto idx = multi_index(flat);
  Point p(axes_.size());
  for (std::size_t i = 0; i < axes_.size(); ++i) p[i] = axes_[i][idx[i]];
  return p;
}

// --- DistributionModel ---------------------------------------------------------

DistributionModel DistributionModel::uniform_cube(std::size_t d) {
  if (d == 0) throw std::invalid_argument("uniform_cube: dimension must be >= 1");
  DistributionModel m;
  m.kind_ = ModelKind::UniformCube;
  m.dimension_ = d;
  m.intervals_.assign(d, {0.0, 1.0});
  return m;
}

DistributionModel DistributionModel::analytic_product(std::vector<std::pair<Real, Real>> intervals) {
  if (intervals.empty()) throw std::invalid_argument("analytic_product: dimension must be >= 1");
  for (auto& [lo, hi] : intervals)
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("analytic_product: intervals must be finite and nonempty");
  DistributionModel m;
  m.kind_ = ModelKind::AnalyticProduct;
  m.dimension_ = intervals.size();
  m.intervals_ = std::move(intervals);
  return m;
}

DistributionModel DistributionModel::empirical(std::vector<Real> calibration, std::size_t d) {
  if (d == 0 || calibration.empty() || calibration.size() % d != 0)
    throw std::invalid_argument("empirical: calibration must be a nonempty n x d table");
  DistributionModel m;
  m.kind_ = ModelKind::Empirical;
  m.dimension_ = d;
  m.calibration_ = std::move(calibration);
  std::size_t n = m.calibration_.size() / d;
  m.sorted_marginals_.assign(d, {});
  for (std::size_t i = 0; i < d; ++i) {
    auto& col = m.sorted_marginals_[i];
    col.reserve(n);
    for (std::size_t k = 0; k < n; ++k) col.push_back(m.calibration_[k * d + i]);
    std::sort(col.begin(), col.end());
  }
  return m;
}

Real DistributionModel::cdf(const Point& t) const {
  if (t.size() != dimension_) throw std::invalid_argument("cdf: dimension mismatch");
  for (Real v : t)
    if (v == -kInf) return 0.0;
  switch (kind_) {
    case ModelKind::UniformCube:
    case ModelKind::AnalyticProduct: {
      Real f = 1.0;
      for (std::size_t i = 0; i < dimension_; ++i) f *= marginal_cdf(i, t[i]);
      return f;
    }
    case ModelKind::Empirical: {
      std::size_t n = calibration_.size() / dimension_;
      std::size_t count = 0;
      for (std::size_t k = 0; k < n; ++k) {
        bool below = true;
        for (std::size_t i = 0; i < dimension_; ++i)
          if (!(calibration_[k * dimension_ + i] <= t[i])) {
            below = false;
            break;
          }
        count += below;
      }
      return static_cast<Real>(count) / static_cast<Real>(n);
    }
  }
  return 0.0;
}

Real DistributionModel::marginal_cdf(std::size_t axis, Real x) const {
  if (axis >= dimension_) throw std::invalid_argument("marginal_cdf: axis out of range");
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  switch (kind_) {
    case ModelKind::UniformCube:
    case ModelKind::AnalyticProduct: {
      auto [lo, hi] = intervals_[axis];
      return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
    }
    case ModelKind::Empirical: {
      const auto& col = sorted_marginals_[axis];
      auto it = std::upper_bound(col.begin(), col.end(), x);
      return static_cast<Real>(it - col.begin()) / static_cast<Real>(col.size());
    }
  }
  return 0.0;
}

Real DistributionModel::quantile(std::size_t axis, Real r) const {
  if (axis >= dimension_) throw std::invalid_argument("quantile: axis out of range");
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("quantile: r outside [0,1]");
  if (r == 1.0) return kInf;
  switch (kind_) {
    case ModelKind::UniformCube:
    case ModelKind::AnalyticProduct: {
      auto [lo, hi] = intervals_[axis];
      return lo + r * (hi - lo);
    }
    case ModelKind::Empirical: {
      // sup{s : F_i(s) <= r} on the step cdf: the (floor(rN)+1)-th order statistic.
      const auto& col = sorted_marginals_[axis];
      auto k = static_cast<std::size_t>(std::floor(r * static_cast<Real>(col.size())));
      if (k >= col.size()) return kInf;
      return col[k];
    }
  }
  return 0.0;
}

Real DistributionModel::marginal_kernel_mean(std::size_t axis, Real a, Real w) const {
  if (axis >= dimension_) throw std::invalid_argument("marginal_kernel_mean: axis out of range");
  if (a == -kInf || w == kInf) return 0.0;  // 1/inf = 0 convention: phi(0) = 0
  if (!(w > 0.0)) throw std::invalid_argument("marginal_kernel_mean: width must be positive");
  switch (kind_) {
    case ModelKind::UniformCube:
    case ModelKind::AnalyticProduct: {
      auto [lo, hi] = intervals_[axis];
      Real len = hi - lo;
      // phi((x-a)/w) is 1 on (-inf, a-w], (a-x)/w on (a-w, a], 0 beyond.
      Real flat = std::clamp(a - w, lo, hi) - lo;
      Real u = std::max(lo, a - w), v = std::min(hi, a);
      Real ramp = 0.0;
      if (v > u) ramp = (a * (v - u) - 0.5 * (v * v - u * u)) / w;
      return (flat + ramp) / len;
    }
    case ModelKind::Empirical: {
      const auto& col = sorted_marginals_[axis];
      Real s = 0.0;
      for (Real x : col) {
        Real u = (x - a) / w;
        if (u <= -1.0)
          s += 1.0;
        else if (u <= 0.0)
          s += -u;
      }
      return s / static_cast<Real>(col.size());
    }
  }
  return 0.0;
}

Point DistributionModel::sample(std::mt19937_64& rng) const {
  Point p(dimension_);
  switch (kind_) {
    case ModelKind::UniformCube:
    case ModelKind::AnalyticProduct: {
      std::uniform_real_distribution<Real> u(0.0, 1.0);
      for (std::size_t i = 0; i < dimension_; ++i) {
        auto [lo, hi] = intervals_[i];
        p[i] = lo + u(rng) * (hi - lo);
      }
      return p;
    }
    case ModelKind::Empirical: {
      std::size_t n = calibration_.size() / dimension_;
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      std::size_t k = pick(rng);
      for (std::size_t i = 0; i < dimension_; ++i) p[i] = calibration_[k * dimension_ + i];
      return p;
    }
  }
  return p;
}

// --- Hoelder norms ---------------------------------------------------------------

namespace {

Real max_norm_distance(const Point& x, const Point& y) {
  Real d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Real a = x[i], b = y[i];
    if (a == b) continue;  // covers equal infinities
    d = std::max(d, std::abs(a - b));
  }
  return d;
}

}  // namespace

Real holder_norm(const GridFunction& f, Real alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("holder_norm: alpha outside (0,1]");
  const auto& grid = *f.grid;
  for (std::size_t i = 0; i < grid.dimension(); ++i)
    if (grid.axis_size(i) < 2) throw std::invalid_argument("holder_norm: degenerate axis");
  std::size_t v = grid.vertex_count();
  Real sup = 0.0;
  for (Real val : f.values) sup = std::max(sup, std::abs(val));
  Real semi = 0.0;
  std::vector<Point> pts(v);
  for (std::size_t i = 0; i < v; ++i) pts[i] = grid.vertex(i);
  for (std::size_t i = 0; i < v; ++i)
    for (std::size_t j = i + 1; j < v; ++j) {
      Real dist = max_norm_distance(pts[i], pts[j]);
      if (dist == 0.0 || dist == kInf) continue;
      semi = std::max(semi, std::abs(f.values[i] - f.values[j]) / std::pow(dist, alpha));
    }
  return sup + semi;
}

Real holder_norm(const std::function<Real(const Point&)>& f, const Point& lo, const Point& hi,
                 std::size_t pts_per_axis, Real alpha) {
  if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("holder_norm: bad box");
  if (pts_per_axis < 2) throw std::invalid_argument("holder_norm: need >= 2 points per axis");
  std::size_t d = lo.size();
  std::vector<std::vector<Real>> axes(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < pts_per_axis; ++k)
      axes[i].push_back(lo[i] + (hi[i] - lo[i]) * static_cast<Real>(k) / (pts_per_axis - 1));
  auto grid = std::make_shared<EvaluationGrid>(axes);
  GridFunction g{grid, {}};
  g.values.resize(grid->vertex_count());
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    Point p = grid->vertex(i);
    bool boundary = false;
    for (Real c : p)
      if (!std::isfinite(c)) boundary = true;
    // skip the sentinel shell: clamp to the box so values stay finite
    if (boundary)
      for (std::size_t k = 0; k < d; ++k) p[k] = std::clamp(p[k], lo[k], hi[k]);
    g.values[i] = f(p);
  }
  // dedup of clamped shell points is unnecessary for the sup/seminorm
  return holder_norm(g, alpha);
}

// --- modulus of continuity ---------------------------------------------------------

std::vector<std::pair<Real, Real>> modulus_of_continuity(DistributionModel& model,
                                                         std::vector<Real> deltas,
                                                         std::size_t probe_resolution) {
  if (deltas.empty()) throw std::invalid_argument("modulus_of_continuity: empty deltas");
  for (Real d : deltas)
    if (!(d > 0.0) || !std::isfinite(d))
      throw std::invalid_argument("modulus_of_continuity: deltas must be positive and finite");

  std::size_t d = model.dimension();
  std::size_t g = std::max<std::size_t>(probe_resolution, 8);
  // probe points on a quantile lattice; F is nondecreasing so the sup over
  // |s-t| < delta is attained on diagonal displacements s -> s + delta * 1.
  std::vector<std::vector<Real>> levels(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k <= g; ++k) {
      Real q = model.quantile(i, static_cast<Real>(k) / static_cast<Real>(g));
      if (std::isfinite(q)) levels[i].push_back(q);
    }
  std::vector<std::size_t> sizes(d);
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    sizes[i] = levels[i].size();
    total *= sizes[i];
  }

  std::sort(deltas.begin(), deltas.end());
  std::vector<std::pair<Real, Real>> out;
  out.reserve(deltas.size());
  for (Real delta : deltas) {
    Real step = delta * (1.0 - 1e-9);
    Real best = 0.0;
    Point s(d), t(d);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rest = flat;
      for (std::size_t i = d; i-- > 0;) {
        s[i] = levels[i][rest % sizes[i]];
        rest /= sizes[i];
        t[i] = s[i] + step;
      }
      best = std::max(best, model.cdf(t) - model.cdf(s));
    }
    out.emplace_back(delta, best);
  }

  // fit omega(delta) = scale * |log delta|^-gamma on the smallest deltas
  std::vector<Real> xs, ys;
  for (const auto& [delta, omega] : out) {
    if (xs.size() >= 10) break;
    if (omega > 0.0 && delta < 1.0) {
      xs.push_back(std::log(std::abs(std::log(delta))));
      ys.push_back(std::log(omega));
    }
  }
  if (xs.size() >= 2) {
    auto fit = stats::ols(xs, ys);
    model.set_modulus_fit(std::exp(fit.intercept), -fit.slope);
  }
  return out;
}

}  // namespace empiproc::core
