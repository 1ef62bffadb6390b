#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "greyshill/error.hpp"
#include "greyshill/random.hpp"

namespace greyshill {

struct EmConfig {
  std::size_t components = 2;  // fixed
  std::size_t max_iterations = 500;
  double tolerance = 1e-6;  // absolute log-likelihood improvement
  double variance_floor = 1e-6;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;

  void validate() const {
    if (components != 2) throw DataError("EM supports exactly 2 components");
    if (!(tolerance > 0)) throw DataError("EM tolerance must be positive");
    if (!(variance_floor > 0)) throw DataError("EM variance floor must be positive");
    if (restarts < 1) throw DataError("EM needs at least one restart");
    if (max_iterations < 1) throw DataError("EM needs at least one iteration");
  }
};

struct EmRun {
  std::vector<double> log_likelihood;  // one entry per E-step
  bool converged = false;
};

struct EmResult {
  std::vector<int> assignment;  // 0 or 1 per point
  std::array<std::size_t, 2> sizes{};
  // Mean distance of each cluster's members from the global centroid in the
  // standardised space (Mahalanobis under the global diagonal covariance).
  std::array<double, 2> mean_distance{};
  double log_likelihood = 0;
  std::size_t iterations = 0;
  std::size_t best_restart = 0;
  std::vector<EmRun> runs;
  std::vector<std::size_t> kept_dimensions;
};

namespace detail {

struct DiagonalMixture {
  std::array<double, 2> weight{};
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> var;
};

// Fills responsibilities and returns the total log-likelihood. Accumulates
// in long double so that round-off at a fixed point cannot show up as a
// spurious decrease between iterations.
inline double e_step(const std::vector<std::vector<double>>& z, const DiagonalMixture& g,
                     std::vector<std::array<double, 2>>& resp) {
  using Real = long double;
  constexpr Real log_2pi = 1.837877066409345483560659472811235L;
  const std::size_t d = z.empty() ? 0 : z[0].size();
  std::array<Real, 2> norm{};
  for (int k = 0; k < 2; ++k) {
    Real s = 0;
    for (std::size_t j = 0; j < d; ++j) s += log_2pi + std::log(static_cast<Real>(g.var[k][j]));
    norm[k] = (g.weight[k] > 0 ? std::log(static_cast<Real>(g.weight[k])) : -std::numeric_limits<Real>::infinity()) -
              0.5L * s;
  }
  Real ll = 0;
  for (std::size_t n = 0; n < z.size(); ++n) {
    std::array<Real, 2> lp{};
    for (int k = 0; k < 2; ++k) {
      if (g.weight[k] <= 0) {
        lp[k] = -std::numeric_limits<Real>::infinity();
        continue;
      }
      Real q = 0;
      for (std::size_t j = 0; j < d; ++j) {
        const Real diff = static_cast<Real>(z[n][j]) - g.mean[k][j];
        q += diff * diff / g.var[k][j];
      }
      lp[k] = norm[k] - 0.5L * q;
    }
    const Real mx = std::max(lp[0], lp[1]);
    const Real lse = mx + std::log(std::exp(lp[0] - mx) + std::exp(lp[1] - mx));
    resp[n] = {static_cast<double>(std::exp(lp[0] - lse)), static_cast<double>(std::exp(lp[1] - lse))};
    ll += lse;
  }
  return static_cast<double>(ll);
}

inline void m_step(const std::vector<std::vector<double>>& z,
                   const std::vector<std::array<double, 2>>& resp, double floor,
                   DiagonalMixture& g) {
  const std::size_t d = z[0].size();
  const double n = static_cast<double>(z.size());
  for (int k = 0; k < 2; ++k) {
    double nk = 0;
    for (const auto& r : resp) nk += r[k];
    g.weight[k] = nk / n;
    if (nk <= 0) continue;  // collapsed component keeps its parameters
    std::vector<double> mu(d, 0.0);
    for (std::size_t i = 0; i < z.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) mu[j] += resp[i][k] * z[i][j];
    for (auto& v : mu) v /= nk;
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < z.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = z[i][j] - mu[j];
        var[j] += resp[i][k] * diff * diff;
      }
    for (auto& v : var) v = std::max(v / nk, floor);
    g.mean[k] = std::move(mu);
    g.var[k] = std::move(var);
  }
}

inline double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

}  // namespace detail

// Two-component diagonal Gaussian mixture with hard MAP assignment.
// Features are z-scored per dimension and constant dimensions dropped first;
// when nothing informative remains every point lands in cluster 0.
// Seeding is k-means++ style; the best of cfg.restarts runs by final
// log-likelihood wins.
inline EmResult em_fit(std::span<const std::vector<double>> points, const EmConfig& cfg,
                       std::span<const std::string> ids = {}) {
  cfg.validate();
  if (points.size() < 2) throw DataError("EM needs at least 2 points");
  const std::size_t n = points.size();
  const std::size_t dim = points[0].size();
  for (std::size_t i = 0; i < n; ++i) {
    if (points[i].size() != dim) throw DataError("EM points have inconsistent dimension");
    for (double v : points[i])
      if (!std::isfinite(v))
        throw DataError("non-finite feature value for user " +
                        (i < ids.size() ? ids[i] : std::to_string(i)));
  }

  EmResult res;
  std::vector<double> mu(dim, 0.0), sd(dim, 0.0);
  for (const auto& p : points)
    for (std::size_t j = 0; j < dim; ++j) mu[j] += p[j];
  for (auto& v : mu) v /= static_cast<double>(n);
  for (const auto& p : points)
    for (std::size_t j = 0; j < dim; ++j) sd[j] += (p[j] - mu[j]) * (p[j] - mu[j]);
  for (std::size_t j = 0; j < dim; ++j) {
    sd[j] = std::sqrt(sd[j] / static_cast<double>(n));
    if (sd[j] > 1e-12 * std::max(1.0, std::abs(mu[j]))) res.kept_dimensions.push_back(j);
  }
  const std::size_t d = res.kept_dimensions.size();

  std::vector<std::vector<double>> z(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) {
      const auto j = res.kept_dimensions[c];
      z[i][c] = (points[i][j] - mu[j]) / sd[j];
    }

  res.assignment.assign(n, 0);
  if (d == 0) {
    res.sizes = {n, 0};
    return res;
  }

  std::vector<std::array<double, 2>> resp(n), best_resp;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    Rng rng(derive_seed(cfg.seed, "em-restart", r));
    const std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    std::vector<double> d2(n);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) total += d2[i] = detail::sq_dist(z[i], z[first]);
    std::size_t second = first;
    if (total > 0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0) continue;
        second = i;
        if ((u -= d2[i]) < 0) break;
      }
    }

    detail::DiagonalMixture g;
    g.weight = {0.5, 0.5};
    g.mean = {z[first], z[second]};
    const std::vector<double> unit(d, std::max(1.0, cfg.variance_floor));
    g.var = {unit, unit};

    EmRun run;
    while (true) {
      const double ll = detail::e_step(z, g, resp);
      run.log_likelihood.push_back(ll);
      const std::size_t it = run.log_likelihood.size();
      if (it > 1 && ll - run.log_likelihood[it - 2] < cfg.tolerance) {
        run.converged = true;
        break;
      }
      if (it >= cfg.max_iterations) break;
      detail::m_step(z, resp, cfg.variance_floor, g);
    }
    const double final_ll = run.log_likelihood.back();
    if (final_ll > best_ll) {
      best_ll = final_ll;
      best_resp = resp;
      res.best_restart = r;
      res.iterations = run.log_likelihood.size();
    }
    res.runs.push_back(std::move(run));
  }

  res.log_likelihood = best_ll;
  std::array<double, 2> dist_sum{};
  for (std::size_t i = 0; i < n; ++i) {
    const int k = best_resp[i][1] > best_resp[i][0] ? 1 : 0;
    res.assignment[i] = k;
    ++res.sizes[k];
    double s = 0;
    for (double v : z[i]) s += v * v;
    dist_sum[k] += std::sqrt(s);
  }
  for (int k = 0; k < 2; ++k)
    res.mean_distance[k] = res.sizes[k] ? dist_sum[k] / static_cast<double>(res.sizes[k]) : 0.0;
  return res;
}

}  // namespace greyshill
