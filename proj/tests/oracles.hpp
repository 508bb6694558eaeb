#pragma once

// Brute-force reference implementations shared by the unit tests and the
// acceptance binary. Each one enumerates the whole search space instead of
// using dynamic programming.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "wmfcc/hmm.hpp"

namespace oracle {

using wmfcc::Index;
using wmfcc::MatrixXd;
using wmfcc::VectorXd;

// Minimum over every monotone, continuous, boundary-anchored warp path.
inline double dtw(const MatrixXd& x, const MatrixXd& y) {
  const Index n = x.rows(), m = y.rows();
  double best = std::numeric_limits<double>::infinity();
  std::function<void(Index, Index, double)> walk = [&](Index i, Index j, double acc) {
    acc += (x.row(i) - y.row(j)).norm();
    if (i == n - 1 && j == m - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < n) walk(i + 1, j, acc);
    if (j + 1 < m) walk(i, j + 1, acc);
    if (i + 1 < n && j + 1 < m) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

// Mixture density evaluated in the linear domain, then logged.
inline double gmm_log_pdf(const wmfcc::GaussianMixture<double>& mix, const VectorXd& o) {
  double p = 0;
  for (Index m = 0; m < mix.components(); ++m) {
    double g = mix.weights[m];
    for (Index d = 0; d < o.size(); ++d) {
      const double v = mix.variances(m, d);
      const double z = o[d] - mix.means(m, d);
      g *= std::exp(-0.5 * z * z / v) / std::sqrt(2 * std::numbers::pi * v);
    }
    p += g;
  }
  return std::log(p);
}

struct PathSearch {
  double total = -std::numeric_limits<double>::infinity();  // log sum over paths
  double best = -std::numeric_limits<double>::infinity();   // log max over paths
  std::vector<int> best_path;
};

// Visits all N^T state sequences.
inline PathSearch enumerate_paths(const wmfcc::Hmm<double>& model, const MatrixXd& obs) {
  const Index n = model.states();
  const Index t_len = obs.rows();
  MatrixXd log_b(t_len, n);
  for (Index t = 0; t < t_len; ++t)
    for (Index j = 0; j < n; ++j)
      log_b(t, j) = gmm_log_pdf(model.emissions[static_cast<std::size_t>(j)], obs.row(t).transpose());

  PathSearch out;
  double shift = -std::numeric_limits<double>::infinity();
  std::vector<int> path(static_cast<std::size_t>(t_len), 0);
  std::vector<double> scores;
  while (true) {
    double lp = std::log(model.initial[path[0]]) + log_b(0, path[0]);
    for (Index t = 1; t < t_len; ++t)
      lp += std::log(model.transitions(path[t - 1], path[t])) + log_b(t, path[t]);
    const bool ends_ok = model.termination == wmfcc::Termination::AnyState || path.back() == n - 1;
    if (ends_ok && lp > -std::numeric_limits<double>::infinity()) {
      scores.push_back(lp);
      shift = std::max(shift, lp);
      if (lp > out.best) {
        out.best = lp;
        out.best_path = path;
      }
    }
    Index k = 0;
    while (k < t_len && ++path[static_cast<std::size_t>(k)] == n) path[static_cast<std::size_t>(k++)] = 0;
    if (k == t_len) break;
  }
  if (!scores.empty()) {
    double s = 0;
    for (double lp : scores) s += std::exp(lp - shift);
    out.total = shift + std::log(s);
  }
  return out;
}

// Random model with N <= max_n states, M <= max_m components, D <= max_d. Half
// the models are left-to-right with a random band, the rest ergodic.
inline wmfcc::Hmm<double> random_hmm(std::mt19937_64& gen, int max_n, int max_m, int max_d) {
  std::uniform_int_distribution<int> pick_n(1, max_n), pick_m(1, max_m), pick_d(1, max_d);
  std::uniform_real_distribution<double> u(0.05, 1.0), mean(-2.0, 2.0), var(0.2, 2.0);
  const int n = pick_n(gen), m = pick_m(gen), d = pick_d(gen);
  wmfcc::Hmm<double> h;
  const bool ltr = gen() % 2 == 0;
  h.max_jump = ltr ? 1 + static_cast<int>(gen() % 2) : wmfcc::kErgodic;
  h.termination = gen() % 3 == 0 ? wmfcc::Termination::FinalState : wmfcc::Termination::AnyState;
  h.initial = VectorXd::Zero(n);
  if (ltr) {
    h.initial[0] = 1;
  } else {
    for (int i = 0; i < n; ++i) h.initial[i] = u(gen);
    h.initial /= h.initial.sum();
  }
  h.transitions = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (h.in_band(i, j)) h.transitions(i, j) = u(gen);
    h.transitions.row(i) /= h.transitions.row(i).sum();
  }
  for (int j = 0; j < n; ++j) {
    wmfcc::GaussianMixture<double> g;
    g.weights = VectorXd(m);
    for (int k = 0; k < m; ++k) g.weights[k] = u(gen);
    g.weights /= g.weights.sum();
    g.means = MatrixXd(m, d);
    g.variances = MatrixXd(m, d);
    for (Index k = 0; k < g.means.size(); ++k) {
      g.means.data()[k] = mean(gen);
      g.variances.data()[k] = var(gen);
    }
    h.emissions.push_back(g);
  }
  return h;
}

inline MatrixXd random_obs(std::mt19937_64& gen, Index t_len, Index dim) {
  std::normal_distribution<double> g(0.0, 1.5);
  MatrixXd o(t_len, dim);
  for (Index k = 0; k < o.size(); ++k) o.data()[k] = g(gen);
  return o;
}

}  // namespace oracle
