#include "empiproc/limit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "empiproc/empirical.hpp"
#include "empiproc/stats.hpp"

namespace empiproc::limit {

LimitModel estimate_gamma(const std::vector<SamplePath>& ensemble,
                          std::shared_ptr<const EvaluationGrid> grid, std::size_t lag,
                          Taper taper) {
  if (ensemble.empty()) throw std::invalid_argument("estimate_gamma: empty ensemble");
  std::size_t n = ensemble.front().n;
  std::size_t d = ensemble.front().d;
  if (lag >= n) throw std::invalid_argument("estimate_gamma: lag must be below the path length");
  if (grid->dimension() != d) throw std::invalid_argument("estimate_gamma: dimension mismatch");
  std::size_t v = grid->vertex_count();
  std::size_t rr = ensemble.size();

  // indicator tables 1(X_u <= t) per replicate, n x V
  std::vector<std::vector<Real>> ind(rr);
  parallel_for(rr, [&](std::size_t rep) {
    const SamplePath& path = ensemble[rep];
    std::vector<Real>& tab = ind[rep];
    tab.assign(n * v, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
      Point x = path.point(u);
      for (std::size_t t = 0; t < v; ++t)
        if (leq(x, grid->vertex(t))) tab[u * v + t] = 1.0;
    }
  });

  std::vector<Real> mean(v, 0.0);
  for (std::size_t rep = 0; rep < rr; ++rep)
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t t = 0; t < v; ++t) mean[t] += ind[rep][u * v + t];
  for (std::size_t t = 0; t < v; ++t) mean[t] /= static_cast<Real>(rr * n);

  // center in place: constant indicators become exact zeros, so degenerate
  // vertices cannot pick up window-edge noise from the lag terms
  parallel_for(rr, [&](std::size_t rep) {
    for (std::size_t u = 0; u < n; ++u)
      for (std::size_t t = 0; t < v; ++t) ind[rep][u * v + t] -= mean[t];
  });

  // lag-k products of centered indicators, averaged over replicates and offsets
  auto cross = [&](std::size_t k) {
    std::vector<Real> c(v * v, 0.0);
    std::vector<std::vector<Real>> partial(rr);
    parallel_for(rr, [&](std::size_t rep) {
      std::vector<Real>& p = partial[rep];
      p.assign(v * v, 0.0);
      const std::vector<Real>& tab = ind[rep];
      for (std::size_t u = 0; u + k < n; ++u)
        for (std::size_t s = 0; s < v; ++s) {
          Real x = tab[u * v + s];
          if (x == 0.0) continue;
          const Real* row = &tab[(u + k) * v];
          Real* out = &p[s * v];
          for (std::size_t t = 0; t < v; ++t) out[t] += x * row[t];
        }
    });
    Real denom = static_cast<Real>(rr * (n - k));
    for (std::size_t rep = 0; rep < rr; ++rep)
      for (std::size_t i = 0; i < v * v; ++i) c[i] += partial[rep][i];
    for (std::size_t i = 0; i < v * v; ++i) c[i] /= denom;
    return c;
  };

  LimitModel model;
  model.grid = grid;
  model.lag = lag;
  model.taper = taper;
  model.gamma = cross(0);
  for (std::size_t k = 1; k <= lag; ++k) {
    Real w = taper == Taper::Bartlett
                 ? 1.0 - static_cast<Real>(k) / static_cast<Real>(lag + 1)
                 : 1.0;
    std::vector<Real> ck = cross(k);
    for (std::size_t s = 0; s < v; ++s)
      for (std::size_t t = 0; t < v; ++t)
        model.gamma[s * v + t] += w * (ck[s * v + t] + ck[t * v + s]);
  }
  // exact symmetry despite accumulated rounding
  for (std::size_t s = 0; s < v; ++s)
    for (std::size_t t = s + 1; t < v; ++t) {
      Real avg = 0.5 * (model.gamma[s * v + t] + model.gamma[t * v + s]);
      model.gamma[s * v + t] = avg;
      model.gamma[t * v + s] = avg;
    }

  Eigen::MatrixXd g(v, v);
  for (std::size_t s = 0; s < v; ++s)
    for (std::size_t t = 0; t < v; ++t) g(s, t) = model.gamma[s * v + t];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  Eigen::VectorXd lam = es.eigenvalues();
  model.min_eigen_pre = lam.minCoeff();
  Real clip_tol = 1e-12 * std::max(1.0, lam.maxCoeff());
  Real clipped = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i)
    if (lam(i) < 0.0) {
      clipped += -lam(i);
      lam(i) = 0.0;
    }
  if (model.min_eigen_pre < -clip_tol) {
    model.psd_clip = clipped;
    Eigen::MatrixXd repaired =
        es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    // the reconstruction smears mass onto degenerate vertices (constant
    // indicators); their variance is 0, so PSD forces the whole row to 0
    for (std::size_t s = 0; s < v; ++s)
      if (g(s, s) == 0.0) {
        repaired.row(s).setZero();
        repaired.col(s).setZero();
      }
    for (std::size_t s = 0; s < v; ++s)
      for (std::size_t t = 0; t <= s; ++t) {
        Real avg = 0.5 * (repaired(s, t) + repaired(t, s));
        model.gamma[s * v + t] = avg;
        model.gamma[t * v + s] = avg;
      }
  }

  // gamma = A A^T with A = V sqrt(lam); QR of A^T gives the triangular factor
  Eigen::MatrixXd a = es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a.transpose());
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  Eigen::MatrixXd l = r.transpose();
  for (Eigen::Index j = 0; j < l.cols(); ++j)
    if (l(j, j) < 0.0) l.col(j) = -l.col(j);
  model.factor.assign(v * v, 0.0);
  for (std::size_t s = 0; s < v; ++s)
    for (std::size_t t = 0; t <= s; ++t) model.factor[s * v + t] = l(s, t);
  return model;
}

std::size_t default_lag(std::size_t n, Real theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("default_lag: theta must lie in (0,1)");
  Real raw = std::ceil(4.0 * std::log(static_cast<Real>(n)) / std::abs(std::log(theta)));
  std::size_t cap = std::max<std::size_t>(1, n / 10);
  return std::max<std::size_t>(1, std::min<std::size_t>(static_cast<std::size_t>(raw), cap));
}

std::vector<GridFunction> sample_W(const LimitModel& model, std::size_t count, std::uint64_t seed) {
  std::size_t v = model.grid->vertex_count();
  std::vector<GridFunction> fields(count);
  parallel_for(count, [&](std::size_t i) {
    auto rng = make_rng(seed, i);
    std::normal_distribution<Real> normal(0.0, 1.0);
    std::vector<Real> z(v);
    for (std::size_t t = 0; t < v; ++t) z[t] = normal(rng);
    GridFunction f{model.grid, std::vector<Real>(v, 0.0)};
    for (std::size_t s = 0; s < v; ++s)
      for (std::size_t t = 0; t <= s; ++t) f.values[s] += model.factor[s * v + t] * z[t];
    fields[i] = std::move(f);
  });
  return fields;
}

FidiReport fidi_normality(const std::vector<SamplePath>& ensemble, const DistributionModel& model,
                          const std::vector<Point>& points,
                          const std::vector<std::vector<Real>>& directions,
                          const std::vector<Real>& gamma_matrix) {
  std::size_t k = points.size();
  if (k == 0) throw std::invalid_argument("fidi_normality: no points");
  if (gamma_matrix.size() != k * k)
    throw std::invalid_argument("fidi_normality: gamma matrix must be k x k");
  std::size_t rr = ensemble.size();
  if (rr < 2) throw std::invalid_argument("fidi_normality: need >= 2 replicates");

  std::vector<Real> un(rr * k);  // U_n at the query points, per replicate
  parallel_for(rr, [&](std::size_t rep) {
    const SamplePath& path = ensemble[rep];
    auto counts = empirical::count_dominated(path, points);
    Real root_n = std::sqrt(static_cast<Real>(path.n));
    for (std::size_t j = 0; j < k; ++j)
      un[rep * k + j] = root_n * (static_cast<Real>(counts[j]) / static_cast<Real>(path.n) -
                                  model.cdf(points[j]));
  });

  FidiReport report;
  report.points = points;
  report.replicates = rr;
  for (const auto& a : directions) {
    if (a.size() != k) throw std::invalid_argument("fidi_normality: direction length mismatch");
    DirectionTest test;
    test.direction = a;
    Real target = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) target += a[i] * gamma_matrix[i * k + j] * a[j];
    test.variance_target = target;
    if (target <= 1e-12) {
      test.skipped = true;
      report.tests.push_back(std::move(test));
      continue;
    }
    std::vector<Real> proj(rr);
    for (std::size_t rep = 0; rep < rr; ++rep) {
      Real s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += a[j] * un[rep * k + j];
      proj[rep] = s;
    }
    test.variance_sample = stats::sample_variance(proj);
    test.variance_ratio = test.variance_sample / target;
    Real sd = std::sqrt(target);
    auto cdf = [sd](Real x) { return stats::normal_cdf(x / sd); };
    auto ad = stats::anderson_darling_test(proj, cdf);
    auto ks = stats::ks_test(proj, cdf);
    test.ad_statistic = ad.statistic;
    test.ad_pvalue = ad.p_value;
    test.ks_statistic = ks.statistic;
    test.ks_pvalue = ks.p_value;
    report.tests.push_back(std::move(test));
  }
  return report;
}

}  // namespace empiproc::limit
