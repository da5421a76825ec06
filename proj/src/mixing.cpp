#include "empiproc/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "empiproc/stats.hpp"

namespace empiproc::mixing {

// --- observables -----------------------------------------------------------------

Observable Observable::calibrate(std::function<Real(const Point&)> raw, std::string name,
                                 const DistributionModel& model, Real alpha, Real sup_bound,
                                 Real holder_seminorm, std::size_t draws, std::uint64_t seed) {
  if (!(sup_bound > 0.0)) throw std::invalid_argument("Observable: sup bound must be positive");
  auto rng = make_rng(seed);
  Real sum = 0.0;
  for (std::size_t i = 0; i < draws; ++i) sum += raw(model.sample(rng));
  Observable f;
  f.raw = std::move(raw);
  f.name = std::move(name);
  f.center = sum / static_cast<Real>(draws);
  f.scale = sup_bound;
  f.alpha = alpha;
  f.holder_norm = 1.0 + holder_seminorm / sup_bound;
  return f;
}

Observable Observable::cosine(std::size_t axis) {
  Observable f;
  f.raw = [axis](const Point& x) { return std::cos(2.0 * M_PI * x[axis]); };
  f.name = "cos2pi_x" + std::to_string(axis + 1);
  f.center = 0.0;
  f.scale = 1.0;
  f.alpha = 1.0;
  f.holder_norm = 1.0 + 2.0 * M_PI;  // Lipschitz constant of cos(2 pi x)
  return f;
}

std::vector<Real> evaluate(const Observable& f, const SamplePath& path) {
  std::vector<Real> out(path.n);
  for (std::size_t k = 0; k < path.n; ++k) out[k] = f(path.point(k));
  return out;
}

// --- block covariances ---------------------------------------------------------------

CovarianceEstimate block_covariance(const std::vector<SamplePath>& ensemble, const Observable& f,
                                    const std::vector<std::size_t>& left_gaps, std::size_t gap,
                                    const std::vector<std::size_t>& right_gaps) {
  if (ensemble.size() < 2) throw std::invalid_argument("block_covariance: need >= 2 replicates");
  std::vector<std::size_t> cum;  // cumulative indices, starting with X_0
  cum.push_back(0);
  std::size_t acc = 0;
  for (std::size_t g : left_gaps) cum.push_back(acc += g);
  std::size_t split = cum.size();  // left block is cum[0..split)
  cum.push_back(acc += gap);
  for (std::size_t g : right_gaps) cum.push_back(acc += g);
  std::size_t n = ensemble.front().n;
  if (acc >= n) throw std::invalid_argument("block_covariance: cumulative index exceeds path length");

  std::size_t rr = ensemble.size();
  std::vector<Real> a(rr), b(rr), g(rr);
  parallel_for(rr, [&](std::size_t rep) {
    const SamplePath& path = ensemble[rep];
    std::vector<Real> v = evaluate(f, path);
    std::size_t offsets = path.n - acc;
    Real sa = 0.0, sb = 0.0, sg = 0.0;
    for (std::size_t s = 0; s < offsets; ++s) {
      Real left = 1.0, right = 1.0;
      for (std::size_t j = 0; j < split; ++j) left *= v[s + cum[j]];
      for (std::size_t j = split; j < cum.size(); ++j) right *= v[s + cum[j]];
      sa += left;
      sb += right;
      sg += left * right;
    }
    a[rep] = sa / static_cast<Real>(offsets);
    b[rep] = sb / static_cast<Real>(offsets);
    g[rep] = sg / static_cast<Real>(offsets);
  });

  Real ma = 0.0, mb = 0.0, mg = 0.0;
  for (std::size_t rep = 0; rep < rr; ++rep) {
    ma += a[rep];
    mb += b[rep];
    mg += g[rep];
  }
  ma /= static_cast<Real>(rr);
  mb /= static_cast<Real>(rr);
  mg /= static_cast<Real>(rr);

  // influence-function linearization of cov = E[AB] - E[A]E[B]
  std::vector<Real> u(rr);
  for (std::size_t rep = 0; rep < rr; ++rep) u[rep] = g[rep] - mb * a[rep] - ma * b[rep];
  auto ms = stats::mean_stderr(u);
  CovarianceEstimate est;
  est.estimate = mg - ma * mb;
  est.stderr_ = ms.stderr_;
  est.replicates = rr;
  return est;
}

// --- geometric-envelope fits -----------------------------------------------------------

MixingReport fit_mixing_envelope(const std::vector<std::size_t>& gaps,
                                 const std::vector<Real>& covariances,
                                 const std::vector<Real>& stderrs, std::optional<int> degree) {
  if (gaps.size() != covariances.size() || gaps.size() != stderrs.size())
    throw std::invalid_argument("fit_mixing_envelope: length mismatch");
  if (gaps.size() < 6) throw std::invalid_argument("fit_mixing_envelope: need >= 6 gaps");
  MixingReport rep;
  rep.gaps = gaps;
  rep.covariances = covariances;
  rep.stderrs = stderrs;

  std::vector<std::size_t> usable;
  bool any_signal = false;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (std::abs(covariances[i]) > 3.0 * stderrs[i]) any_signal = true;
    if (gaps[i] >= 1 && std::abs(covariances[i]) > std::max(stderrs[i], 1e-300))
      usable.push_back(i);
  }
  if (!any_signal || usable.size() < 4) {
    rep.status = FitStatus::BelowNoiseFloor;
    return rep;
  }

  std::vector<int> candidates = degree ? std::vector<int>{*degree} : std::vector<int>{0, 1, 2};
  Real best_rms = kInf;
  for (int deg : candidates) {
    std::vector<Real> xs, ys;
    for (std::size_t i : usable) {
      xs.push_back(static_cast<Real>(gaps[i]));
      ys.push_back(std::log(std::abs(covariances[i])) -
                   static_cast<Real>(deg) * std::log(static_cast<Real>(gaps[i])));
    }
    auto fit = stats::ols(xs, ys);
    if (fit.residual_rms < best_rms) {
      best_rms = fit.residual_rms;
      rep.degree = deg;
      rep.log_c = fit.intercept;
      rep.theta_hat = std::exp(fit.slope);
      rep.theta_ci_low = std::exp(fit.slope - 1.96 * fit.slope_stderr);
      rep.theta_ci_high = std::exp(fit.slope + 1.96 * fit.slope_stderr);
      rep.residual_rms = fit.residual_rms;
    }
  }
  rep.status = FitStatus::Fitted;
  rep.used_points = usable.size();
  return rep;
}

// --- moment sums -----------------------------------------------------------------------

namespace {

void enumerate_tuples(std::size_t n, int p, std::optional<int> q_outer,
                      const std::function<void(const std::vector<std::size_t>&)>& emit) {
  std::vector<std::size_t> gaps(static_cast<std::size_t>(p));
  std::function<void(int, std::size_t)> rec = [&](int pos, std::size_t used) {
    if (pos == p) {
      if (!q_outer) {
        emit(gaps);
        return;
      }
      std::size_t outer = gaps[static_cast<std::size_t>(*q_outer - 1)];
      for (int j = 0; j < p; ++j)
        if (j != *q_outer - 1 && gaps[static_cast<std::size_t>(j)] > outer) return;
      emit(gaps);
      return;
    }
    for (std::size_t g = 0; used + g <= n - 1; ++g) {
      gaps[static_cast<std::size_t>(pos)] = g;
      rec(pos + 1, used + g);
    }
  };
  rec(0, 0);
}

MomentSumEstimate moment_sum_impl(const std::vector<SamplePath>& ensemble, const Observable& f,
                                  std::size_t n, int p, std::optional<int> q,
                                  std::size_t term_cap) {
  if (p < 0 || p > 3) throw std::invalid_argument("moment sums: p must lie in 0..3");
  if (n < 1 || n > 64) throw std::invalid_argument("moment sums: n must lie in 1..64");
  if (p == 0) return {0.0, 0.0, 0};
  if (ensemble.size() < 2) throw std::invalid_argument("moment sums: need >= 2 replicates");
  for (const auto& path : ensemble)
    if (path.n < n) throw std::invalid_argument("moment sums: paths shorter than n");

  std::size_t terms = 0;
  enumerate_tuples(n, p, q, [&](const std::vector<std::size_t>&) { ++terms; });
  if (terms > term_cap)
    throw std::invalid_argument("moment sums: budget exceeded, would need " +
                                std::to_string(terms) + " terms (cap " +
                                std::to_string(term_cap) + ")");

  std::vector<std::vector<std::size_t>> cums;
  cums.reserve(terms);
  enumerate_tuples(n, p, q, [&](const std::vector<std::size_t>& gaps) {
    std::vector<std::size_t> cum(gaps.size() + 1, 0);
    for (std::size_t j = 0; j < gaps.size(); ++j) cum[j + 1] = cum[j] + gaps[j];
    cums.push_back(std::move(cum));
  });

  std::size_t rr = ensemble.size();
  std::vector<std::vector<Real>> values(rr);
  for (std::size_t rep = 0; rep < rr; ++rep) values[rep] = evaluate(f, ensemble[rep]);

  std::vector<Real> abs_means(terms), term_stderrs(terms);
  parallel_for(terms, [&](std::size_t t) {
    const auto& cum = cums[t];
    std::vector<Real> per_rep(rr);
    for (std::size_t rep = 0; rep < rr; ++rep) {
      const auto& v = values[rep];
      std::size_t offsets = v.size() - cum.back();
      Real s = 0.0;
      for (std::size_t off = 0; off < offsets; ++off) {
        Real prod = 1.0;
        for (std::size_t c : cum) prod *= v[off + c];
        s += prod;
      }
      per_rep[rep] = s / static_cast<Real>(offsets);
    }
    auto ms = stats::mean_stderr(per_rep);
    abs_means[t] = std::abs(ms.mean);
    term_stderrs[t] = ms.stderr_;
  });

  MomentSumEstimate est;
  est.terms = terms;
  for (std::size_t t = 0; t < terms; ++t) {
    est.estimate += abs_means[t];
    est.stderr_ += term_stderrs[t];
  }
  return est;
}

}  // namespace

MomentSumEstimate moment_sum_In(const std::vector<SamplePath>& ensemble, const Observable& f,
                                std::size_t n, int p, std::size_t term_cap) {
  return moment_sum_impl(ensemble, f, n, p, std::nullopt, term_cap);
}

MomentSumEstimate moment_sum_Jn(const std::vector<SamplePath>& ensemble, const Observable& f,
                                std::size_t n, int p, int q, std::size_t term_cap) {
  if (p < 1) throw std::invalid_argument("moment_sum_Jn: p must be >= 1");
  if (q < 1 || q > p) throw std::invalid_argument("moment_sum_Jn: q must lie in 1..p");
  return moment_sum_impl(ensemble, f, n, p, q, term_cap);
}

// --- partial-sum moments ------------------------------------------------------------------

MomentReport partial_sum_moments(
    const std::function<SamplePath(std::size_t n, std::uint64_t replicate)>& generate,
    const Observable& f, const std::vector<std::size_t>& n_grid, int p, std::size_t replicates,
    Real r_norm, Real theta) {
  if (p < 1) throw std::invalid_argument("partial_sum_moments: p must be >= 1");
  if (n_grid.empty()) throw std::invalid_argument("partial_sum_moments: empty n grid");
  if (replicates < 2) throw std::invalid_argument("partial_sum_moments: need >= 2 replicates");
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("partial_sum_moments: theta must lie in (0,1)");

  MomentReport rep;
  rep.p = p;
  rep.n_grid = n_grid;
  for (std::size_t n : n_grid) {
    std::vector<Real> even(replicates), odd(replicates);
    parallel_for(replicates, [&](std::size_t r) {
      SamplePath path = generate(n, r);
      Real s = 0.0;
      for (std::size_t k = 0; k < path.n; ++k) s += f(path.point(k));
      Real pw = 1.0;
      for (int i = 0; i < 2 * p; ++i) pw *= s;
      even[r] = pw;
      odd[r] = pw * s;
    });
    auto me = stats::mean_stderr(even);
    auto mo = stats::mean_stderr(odd);
    rep.even_moment.push_back(me.mean);
    rep.even_stderr.push_back(me.stderr_);
    rep.odd_moment.push_back(mo.mean);
    rep.odd_stderr.push_back(mo.stderr_);
  }

  std::vector<Real> xs, ys;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (rep.even_moment[i] > 0.0) {
      xs.push_back(std::log(static_cast<Real>(n_grid[i])));
      ys.push_back(std::log(rep.even_moment[i]));
    }
  }
  if (xs.size() >= 2) {
    auto fit = stats::ols(xs, ys);
    rep.slope = fit.slope;
    rep.slope_stderr = fit.slope_stderr;
  }

  Real big_l = std::log(f.holder_norm + 1.0 / theta);
  auto bound_shape = [&](std::size_t n) {
    Real b = 0.0;
    for (int i = 1; i <= p; ++i)
      b += std::pow(static_cast<Real>(n), i) * std::pow(r_norm, i) *
           std::pow(big_l, 2 * p - i);
    return b;
  };
  Real b0 = bound_shape(n_grid.front());
  rep.fitted_k = b0 > 0.0 ? rep.even_moment.front() / b0 : 0.0;
  for (std::size_t n : n_grid) rep.bound.push_back(rep.fitted_k * bound_shape(n));
  return rep;
}

int cutoff_n0(Real f_norm, Real theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("cutoff_n0: theta must lie in (0,1)");
  if (!(f_norm > 0.0) || !std::isfinite(f_norm))
    throw std::invalid_argument("cutoff_n0: norm must be positive and finite");
  Real window = std::log(f_norm + 1.0 / theta) / (-std::log(theta));
  return static_cast<int>(std::floor(window)) + 1;
}

// --- spectral gaps ------------------------------------------------------------------------

SpectralGapReport spectral_gap_check(const FiniteMarkovModel& model,
                                     const std::vector<std::vector<Real>>& test_functions,
                                     std::size_t n_max, std::size_t replicates,
                                     std::size_t path_length, std::uint64_t seed) {
  std::size_t s = model.size();
  if (s == 0) throw std::invalid_argument("spectral_gap_check: empty chain");
  for (const auto& f : test_functions)
    if (f.size() != s) throw std::invalid_argument("spectral_gap_check: test function size mismatch");

  SpectralGapReport rep;
  rep.lambda2 = model.second_modulus;
  rep.has_gap = rep.lambda2 < 1.0 - 1e-9;

  // center the test functions and record their sup norms
  std::vector<std::vector<Real>> centered;
  std::vector<Real> sups;
  for (const auto& f : test_functions) {
    Real mean = 0.0;
    for (std::size_t i = 0; i < s; ++i) mean += model.stationary[i] * f[i];
    std::vector<Real> c(s);
    Real sup = 0.0;
    for (std::size_t i = 0; i < s; ++i) {
      c[i] = f[i] - mean;
      sup = std::max(sup, std::abs(c[i]));
    }
    if (sup > 0.0) {
      centered.push_back(std::move(c));
      sups.push_back(sup);
    }
  }
  if (centered.empty()) return rep;  // only constants: P^n f - Pi f is identically 0

  // exact matrix powering: decay(n) = max_f ||P^n f - Pi f||_inf / ||f||_inf
  std::vector<std::vector<Real>> iter = centered;
  std::vector<Real> xs, ys;
  for (std::size_t n = 1; n <= n_max; ++n) {
    Real decay = 0.0;
    for (std::size_t t = 0; t < iter.size(); ++t) {
      std::vector<Real> next(s, 0.0);
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) next[i] += model.p(i, j) * iter[t][j];
      iter[t] = std::move(next);
      for (std::size_t i = 0; i < s; ++i) decay = std::max(decay, std::abs(iter[t][i]) / sups[t]);
    }
    if (decay < 1e-13) break;
    xs.push_back(static_cast<Real>(n));
    ys.push_back(std::log(decay));
  }
  if (xs.size() >= 2) {
    auto fit = stats::ols(xs, ys);
    rep.theta_hat = std::exp(fit.slope);
    rep.kappa_hat = std::exp(fit.intercept);
    rep.theta_matches_lambda2 = std::abs(rep.theta_hat - rep.lambda2) <= 0.05;
  }
  if (!rep.has_gap) return rep;

  // Monte Carlo covariances of the embedded chain against the exact values
  // and the geometric envelope kappa theta^k ||f||_inf ||f(X_0)||_1
  std::vector<SamplePath> ensemble(replicates);
  for (std::size_t r = 0; r < replicates; ++r)
    ensemble[r] = generators::simulate_markov(model, path_length, seed, r);

  for (std::size_t t = 0; t < centered.size(); ++t) {
    const auto& c = centered[t];
    Real scale = sups[t];
    Observable obs;
    obs.raw = [&model, c](const Point& x) {
      for (std::size_t i = 0; i < model.size(); ++i) {
        bool match = true;
        for (std::size_t dd = 0; dd < model.d; ++dd)
          if (std::abs(x[dd] - model.embedding[i * model.d + dd]) > 1e-12) {
            match = false;
            break;
          }
        if (match) return c[i];
      }
      throw std::logic_error("spectral_gap_check: point is not an embedded state");
    };
    obs.name = "markov_test_" + std::to_string(t);
    obs.scale = scale;

    Real l1 = 0.0;  // ||f(X_0)||_1 of the rescaled observable
    for (std::size_t i = 0; i < s; ++i) l1 += model.stationary[i] * std::abs(c[i]) / scale;

    std::vector<Real> powk(s);
    for (std::size_t i = 0; i < s; ++i) powk[i] = c[i] / scale;
    for (std::size_t k = 1; k <= 8 && k < path_length; ++k) {
      std::vector<Real> next(s, 0.0);
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) next[i] += model.p(i, j) * powk[j];
      powk = std::move(next);
      Real exact = 0.0;
      for (std::size_t i = 0; i < s; ++i) exact += model.stationary[i] * (c[i] / scale) * powk[i];

      auto mc = block_covariance(ensemble, obs, {}, k, {});
      ++rep.mc_checks;
      if (std::abs(mc.estimate - exact) > 3.0 * mc.stderr_) ++rep.mc_violations;
      Real envelope = rep.kappa_hat * std::pow(rep.theta_hat, static_cast<Real>(k)) * l1;
      ++rep.envelope_checks;
      if (std::abs(mc.estimate) > envelope + 3.0 * mc.stderr_) ++rep.envelope_violations;
    }
  }
  return rep;
}

}  // namespace empiproc::mixing
