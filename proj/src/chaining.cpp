#include "empiproc/chaining.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace empiproc::chaining {

// --- schedules --------------------------------------------------------------------

Schedule schedule(std::size_t n, Real h, Real epsilon, std::size_t d) {
  if (n == 0 || d == 0) throw std::invalid_argument("schedule: n and d must be positive");
  if (!(h > 0.0) || !(epsilon > 0.0))
    throw std::invalid_argument("schedule: h and epsilon must be positive");
  Real g = static_cast<Real>(d) * std::sqrt(static_cast<Real>(n)) * h / epsilon;
  Schedule sch;
  int k_raw = 4 + static_cast<int>(std::floor(std::log2(g)));
  if (k_raw < 1) {
    sch.K = 1;
    sch.window_checked = false;
  } else {
    sch.K = k_raw;
  }
  sch.window_value = static_cast<Real>(d) * std::sqrt(static_cast<Real>(n)) * h /
                     std::ldexp(1.0, sch.K);
  if (sch.window_checked) {
    sch.window_ok = sch.window_value >= epsilon / 16.0 * (1.0 - 1e-12) &&
                    sch.window_value <= epsilon / 8.0 * (1.0 + 1e-12);
  } else {
    sch.window_ok = false;
  }
  sch.epsilon_k.resize(static_cast<std::size_t>(sch.K) + 1, 0.0);
  for (int k = 1; k <= sch.K; ++k)
    sch.epsilon_k[static_cast<std::size_t>(k)] =
        epsilon / (4.0 * static_cast<Real>(k) * static_cast<Real>(k + 1));
  return sch;
}

// --- the chaining system ----------------------------------------------------------

ChainingSystem::ChainingSystem(PartitionSystem partition, Real alpha, Real epsilon, std::size_t n)
    : partition_(std::move(partition)), alpha_(alpha), epsilon_(epsilon), n_(n) {
  if (!partition_.model) throw std::invalid_argument("ChainingSystem: partition has no model");
  if (!(alpha_ > 0.0) || alpha_ > 1.0)
    throw std::invalid_argument("ChainingSystem: alpha must lie in (0, 1]");
  schedule_ = chaining::schedule(n_, partition_.h, epsilon_, partition_.dimension());

  const auto& model = *partition_.model;
  std::size_t d = partition_.dimension();
  std::size_t m = partition_.m;
  refinements_.resize(static_cast<std::size_t>(schedule_.K) + 1);
  for (int k = 0; k <= schedule_.K; ++k) {
    long half = 1L << k;
    auto& level = refinements_[static_cast<std::size_t>(k)];
    level.assign(d, std::vector<std::vector<Real>>(m));
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 1; j <= m; ++j) {
        auto& pts = level[i][j - 1];
        pts.resize(static_cast<std::size_t>(half) + 3);
        for (long l = -1; l <= half + 1; ++l) {
          // exact rational quantile level ((j-1) 2^k + l) / (m 2^k)
          long num = static_cast<long>(j - 1) * half + l;
          long den = static_cast<long>(m) * half;
          Real& slot = pts[static_cast<std::size_t>(l + 1)];
          if (num < 0 || num > den) {
            slot = std::numeric_limits<Real>::quiet_NaN();  // no neighbor to stitch from
          } else {
            slot = model.quantile(i, static_cast<Real>(num) / static_cast<Real>(den));
          }
        }
        for (std::size_t l = 1; l < pts.size(); ++l) {
          if (std::isfinite(pts[l - 1]) && std::isfinite(pts[l]) && pts[l - 1] == pts[l])
            throw std::invalid_argument(
                "ChainingSystem: duplicate quantile breakpoints (marginal too coarse for this "
                "refinement depth)");
        }
      }
    }
  }
}

Real ChainingSystem::s_point(int k, std::size_t axis, std::size_t j, long l) const {
  if (k < 0 || k > schedule_.K) throw std::out_of_range("s_point: level out of range");
  if (axis >= dimension()) throw std::out_of_range("s_point: axis out of range");
  if (j < 1 || j > partition_.m) throw std::out_of_range("s_point: cell out of range");
  long half = 1L << k;
  if (l < -1 || l > half + 1) throw std::out_of_range("s_point: l out of range");
  return refinements_[static_cast<std::size_t>(k)][axis][j - 1][static_cast<std::size_t>(l + 1)];
}

// --- chain indices ------------------------------------------------------------------

ChainIndices chain_index(const ChainingSystem& system, const Point& t) {
  auto cell = system.partition().locate_cell(t);
  if (!cell) throw std::invalid_argument("chain_index: t outside the covered cells");
  std::size_t d = system.dimension();
  ChainIndices idx;
  idx.cell = *cell;
  idx.l.resize(static_cast<std::size_t>(system.depth()) + 1, std::vector<long>(d));
  for (int k = 0; k <= system.depth(); ++k) {
    long half = 1L << k;
    for (std::size_t i = 0; i < d; ++i) {
      long lo = 0;  // s_0 = t_{j-1} <= t_i inside the cell
      long hi = half;
      while (lo < hi) {
        long mid = lo + (hi - lo + 1) / 2;
        if (system.s_point(k, i, idx.cell[i], mid) <= t[i])
          lo = mid;
        else
          hi = mid - 1;
      }
      idx.l[static_cast<std::size_t>(k)][i] = lo;
    }
  }
  return idx;
}

Real psi(const ChainingSystem& system, const std::vector<std::size_t>& cell_j, int k,
         const std::vector<long>& l, const Point& x) {
  std::size_t d = system.dimension();
  if (cell_j.size() != d || l.size() != d || x.size() != d)
    throw std::invalid_argument("psi: dimension mismatch");
  long half = 1L << k;
  std::size_t m = system.partition().m;
  Real value = 1.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (cell_j[i] == 1 && l[i] == 0) return 0.0;
    if (cell_j[i] == m && l[i] >= half) continue;  // factor 1
    Real s = system.s_point(k, i, cell_j[i], l[i]);
    Real prev = system.s_point(k, i, cell_j[i], l[i] - 1);
    Real w = std::abs(s - prev);
    // 1/inf = 0: an infinite width sends the argument to 0 and the factor to 0
    value *= phi((x[i] - s) / w);
    if (value == 0.0) return 0.0;
  }
  return value;
}

// --- checks -------------------------------------------------------------------------

SandwichReport verify_sandwich(const ChainingSystem& system, const SamplePath& path,
                               const std::vector<Point>& t_queries) {
  std::size_t d = system.dimension();
  if (path.d != d) throw std::invalid_argument("verify_sandwich: dimension mismatch");
  int K = system.depth();
  std::vector<Point> pts(path.n);
  for (std::size_t p = 0; p < path.n; ++p) pts[p] = path.point(p);

  std::vector<SandwichReport> partial(t_queries.size());
  parallel_for(t_queries.size(), [&](std::size_t qi) {
    SandwichReport rep;
    auto note = [&rep](Real margin) {
      ++rep.checks;
      if (margin < 0.0) {
        ++rep.violations;
        rep.worst_slack = std::min(rep.worst_slack, margin);
      }
    };
    const Point& t = t_queries[qi];
    ChainIndices idx = chain_index(system, t);
    std::vector<long> top_shift(d);
    for (std::size_t i = 0; i < d; ++i) top_shift[i] = idx.l[static_cast<std::size_t>(K)][i] + 2;
    for (const Point& x : pts) {
      Real base = empirical::cell_kernel(system.partition(), idx.cell, x);
      Real prev = psi(system, idx.cell, 0, idx.l[0], x);
      note(base == prev ? 0.0 : -std::abs(base - prev));  // psi^(0) must equal phi_j exactly
      for (int k = 1; k <= K; ++k) {
        Real cur = psi(system, idx.cell, k, idx.l[static_cast<std::size_t>(k)], x);
        note(cur - prev);
        prev = cur;
      }
      Real indicator = leq(x, t) ? 1.0 : 0.0;
      note(indicator - prev);
      Real upper = psi(system, idx.cell, K, top_shift, x);
      note(upper - indicator);
    }
    partial[qi] = rep;
  });

  SandwichReport rep;
  for (const auto& p : partial) {
    rep.checks += p.checks;
    rep.violations += p.violations;
    rep.worst_slack = std::min(rep.worst_slack, p.worst_slack);
  }
  return rep;
}

IncrementNormReport increment_norm_check(const ChainingSystem& system,
                                         const std::vector<std::size_t>& cell_j, int k,
                                         const std::vector<long>& l, Real r, std::size_t draws,
                                         std::uint64_t seed, bool top_variant) {
  if (!(r >= 1.0)) throw std::invalid_argument("increment_norm_check: r must be >= 1");
  if (draws == 0) throw std::invalid_argument("increment_norm_check: draws must be positive");
  if (!top_variant && k < 1)
    throw std::invalid_argument("increment_norm_check: consecutive-level pair needs k >= 1");
  std::size_t d = system.dimension();
  std::vector<long> other(d);
  for (std::size_t i = 0; i < d; ++i) other[i] = top_variant ? l[i] + 2 : l[i] / 2;
  int other_k = top_variant ? k : k - 1;

  auto rng = make_rng(seed);
  const auto& model = *system.partition().model;
  Real sum = 0.0, sumsq = 0.0;
  for (std::size_t q = 0; q < draws; ++q) {
    Point x = model.sample(rng);
    Real hi = psi(system, cell_j, k, top_variant ? other : l, x);
    Real lo = psi(system, cell_j, other_k, top_variant ? l : other, x);
    Real term = std::pow(std::abs(hi - lo), r);
    sum += term;
    sumsq += term * term;
  }
  IncrementNormReport rep;
  rep.draws = draws;
  rep.estimate_pow = sum / static_cast<Real>(draws);
  Real var = std::max(0.0, sumsq / static_cast<Real>(draws) - rep.estimate_pow * rep.estimate_pow);
  rep.mc_stderr = std::sqrt(var / static_cast<Real>(draws));
  rep.bound_pow = 3.0 * static_cast<Real>(d) * system.partition().h / std::ldexp(1.0, k);
  rep.estimate = std::pow(rep.estimate_pow, 1.0 / r);
  rep.bound = std::pow(rep.bound_pow, 1.0 / r);
  return rep;
}

HolderGrowthReport holder_growth_check(const ChainingSystem& system,
                                       const std::vector<std::size_t>& cell_j, int k,
                                       const std::vector<long>& l) {
  std::size_t d = system.dimension();
  if (cell_j.size() != d || l.size() != d)
    throw std::invalid_argument("holder_growth_check: dimension mismatch");
  const auto& model = *system.partition().model;
  if (!model.gamma_estimate() || !model.modulus_scale_estimate())
    throw std::logic_error("holder_growth_check: fit the continuity modulus first");
  long half = 1L << k;
  std::size_t m = system.partition().m;

  Real worst = 0.0;  // max_i gap_i^-alpha over the non-constant factors
  for (std::size_t i = 0; i < d; ++i) {
    if (cell_j[i] == 1 && l[i] == 0) continue;
    if (cell_j[i] == m && l[i] >= half) continue;
    Real w = std::abs(system.s_point(k, i, cell_j[i], l[i]) -
                      system.s_point(k, i, cell_j[i], l[i] - 1));
    if (std::isfinite(w) && w > 0.0) worst = std::max(worst, std::pow(w, -system.alpha()));
  }
  HolderGrowthReport rep;
  rep.norm = 1.0 + static_cast<Real>(d) * worst;
  Real gamma = *model.gamma_estimate();
  Real scale = *model.modulus_scale_estimate();
  rep.envelope = std::exp(system.alpha() * std::pow(scale * std::ldexp(1.0, k) /
                                                        system.partition().h,
                                                    1.0 / gamma));
  rep.fitted_b = rep.norm / rep.envelope;
  return rep;
}

int min_moment_order(std::size_t d, Real r, Real gamma) {
  if (!(r >= 1.0)) throw std::invalid_argument("min_moment_order: r must be >= 1");
  if (!(gamma > r)) throw std::invalid_argument("min_moment_order: gamma must exceed r");
  Real threshold = static_cast<Real>(d) * r * gamma / (gamma - r);
  return static_cast<int>(std::floor(threshold)) + 1;
}

}  // namespace empiproc::chaining
