#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include "wmfcc/error.hpp"
#include "wmfcc/hmm.hpp"
#include "wmfcc/random.hpp"

namespace wmfcc {

struct HmmTrainConfig {
  int n_states = 4;
  int n_mix = 8;
  int max_jump = 1;
  double self_loop = 0.8;
  int max_iters = 50;
  double tol = 1e-4;                   // absolute total log-likelihood improvement
  double variance_floor_ratio = 1e-3;  // times the pooled per-dimension variance
  double variance_floor_min = 1e-6;
  Termination termination = Termination::AnyState;
  int kmeans_iters = 50;
};

template <typename Scalar>
struct TrainTrace {
  // Total log-likelihood of the training set under the model entering each
  // iteration, followed by that of the returned model.
  std::vector<Scalar> log_likelihood;
  int iterations = 0;  // re-estimation steps applied
  bool converged = false;
  // States that received zero occupancy in some iteration (kept at their
  // previous parameters), in order of occurrence.
  std::vector<int> collapsed_states;
};

template <typename Scalar>
Matrix<Scalar> stack_rows(const std::vector<Matrix<Scalar>>& parts) {
  Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Matrix<Scalar> out(rows, parts.empty() ? 0 : parts.front().cols());
  Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p;
    at += p.rows();
  }
  return out;
}

// Per-dimension mean and (biased) variance of rows, summed in row order.
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> row_moments(const Matrix<Scalar>& x) {
  Vector<Scalar> mean = Vector<Scalar>::Zero(x.cols());
  for (Index t = 0; t < x.rows(); ++t) mean += x.row(t).transpose();
  mean /= Scalar(x.rows());
  Vector<Scalar> var = Vector<Scalar>::Zero(x.cols());
  for (Index t = 0; t < x.rows(); ++t) var += (x.row(t).transpose() - mean).array().square().matrix();
  var /= Scalar(x.rows());
  return {mean, var};
}

template <typename Scalar>
Vector<Scalar> variance_floor_for(const Matrix<Scalar>& pool, const HmmTrainConfig& config) {
  const Vector<Scalar> var = row_moments(pool).second;
  return (var * Scalar(config.variance_floor_ratio))
      .cwiseMax(Scalar(config.variance_floor_min));
}

template <typename Scalar>
struct KMeansResult {
  Matrix<Scalar> centroids;  // k x D
  std::vector<int> assignment;
};

// Lloyd's algorithm from k distinct seeded rows. Empty clusters are refilled
// with the point farthest from its centroid. k is clamped to the row count.
template <typename Scalar>
KMeansResult<Scalar> kmeans(const Matrix<Scalar>& points, int k, Rng& rng, int max_iters) {
  const Index n = points.rows();
  k = static_cast<int>(std::min<Index>(k, n));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (int c = 0; c < k; ++c) {
    const auto pick = c + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - c)));
    std::swap(order[static_cast<std::size_t>(c)], order[static_cast<std::size_t>(pick)]);
  }
  KMeansResult<Scalar> out;
  out.centroids.resize(k, points.cols());
  for (int c = 0; c < k; ++c) out.centroids.row(c) = points.row(order[static_cast<std::size_t>(c)]);
  out.assignment.assign(static_cast<std::size_t>(n), -1);

  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    std::vector<Scalar> dist(static_cast<std::size_t>(n));
    for (Index t = 0; t < n; ++t) {
      int best = 0;
      Scalar best_d = (points.row(t) - out.centroids.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const Scalar d = (points.row(t) - out.centroids.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      dist[static_cast<std::size_t>(t)] = best_d;
      if (out.assignment[static_cast<std::size_t>(t)] != best) changed = true;
      out.assignment[static_cast<std::size_t>(t)] = best;
    }
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (int a : out.assignment) ++counts[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Index far = 0;
      for (Index t = 1; t < n; ++t)
        if (dist[static_cast<std::size_t>(t)] > dist[static_cast<std::size_t>(far)]) far = t;
      if (counts[static_cast<std::size_t>(out.assignment[static_cast<std::size_t>(far)])] <= 1) continue;
      --counts[static_cast<std::size_t>(out.assignment[static_cast<std::size_t>(far)])];
      out.assignment[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      dist[static_cast<std::size_t>(far)] = 0;
      changed = true;
    }
    out.centroids.setZero();
    for (Index t = 0; t < n; ++t) out.centroids.row(out.assignment[static_cast<std::size_t>(t)]) += points.row(t);
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0) out.centroids.row(c) /= Scalar(counts[static_cast<std::size_t>(c)]);
    if (!changed) break;
  }
  return out;
}

// Uniform segmentation of each sequence into n_states contiguous blocks,
// k-means mixtures per state, and a band-limited transition matrix.
template <typename Scalar>
Hmm<Scalar> init_hmm(const std::vector<Matrix<Scalar>>& sequences, const HmmTrainConfig& config,
                     std::uint64_t seed) {
  if (sequences.empty()) fail(ErrorCode::EmptyTrainingSet, "no training sequences");
  if (config.n_states < 1 || config.n_mix < 1)
    fail(ErrorCode::BadParams, "n_states and n_mix must be >= 1");
  const Index n = config.n_states;
  const Index dim = sequences.front().cols();
  for (const auto& s : sequences) {
    if (s.cols() != dim) fail(ErrorCode::DimensionMismatch, "training sequences differ in dimension");
    if (s.rows() < n)
      fail(ErrorCode::SequenceTooShort, "sequence of " + std::to_string(s.rows()) +
                                            " frames cannot fill " + std::to_string(n) + " states");
  }

  Hmm<Scalar> model;
  model.max_jump = config.max_jump;
  model.termination = config.termination;
  model.variance_floor = variance_floor_for(stack_rows(sequences), config);
  model.initial = Vector<Scalar>::Zero(n);
  model.initial[0] = 1;
  model.transitions = config.max_jump == kErgodic
                          ? Matrix<Scalar>::Constant(n, n, Scalar(1) / Scalar(n))
                          : left_to_right_transitions<Scalar>(n, config.max_jump, Scalar(config.self_loop));
  if (config.max_jump == kErgodic) model.initial.setConstant(Scalar(1) / Scalar(n));

  for (Index j = 0; j < n; ++j) {
    std::vector<Matrix<Scalar>> blocks;
    for (const auto& s : sequences) {
      const Index begin = j * s.rows() / n;
      const Index end = (j + 1) * s.rows() / n;
      blocks.push_back(s.middleRows(begin, end - begin));
    }
    const Matrix<Scalar> pool = stack_rows(blocks);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j)));
    const KMeansResult<Scalar> km = kmeans(pool, config.n_mix, rng, config.kmeans_iters);
    const Index k = km.centroids.rows();

    GaussianMixture<Scalar> mix;
    mix.weights = Vector<Scalar>::Zero(k);
    mix.means = km.centroids;
    mix.variances = Matrix<Scalar>::Zero(k, dim);
    for (Index t = 0; t < pool.rows(); ++t) {
      const int c = km.assignment[static_cast<std::size_t>(t)];
      mix.weights[c] += 1;
      mix.variances.row(c) += (pool.row(t) - mix.means.row(c)).array().square().matrix();
    }
    for (Index c = 0; c < k; ++c) {
      if (mix.weights[c] > 0) mix.variances.row(c) /= mix.weights[c];
      mix.variances.row(c) = mix.variances.row(c).cwiseMax(model.variance_floor.transpose());
    }
    mix.weights /= Scalar(pool.rows());
    model.emissions.push_back(std::move(mix));
  }
  return model;
}

template <typename Scalar>
Hmm<Scalar> init_hmm(const std::vector<Matrix<Scalar>>& sequences, int n_states, int n_mix,
                     std::uint64_t seed) {
  HmmTrainConfig config;
  config.n_states = n_states;
  config.n_mix = n_mix;
  return init_hmm(sequences, config, seed);
}

namespace detail {

// Posterior statistics of one sequence under the current model.
template <typename Scalar>
struct SequenceStats {
  Scalar log_likelihood = 0;
  Vector<Scalar> initial_post;                     // gamma_0(j)
  Matrix<Scalar> transition_post;                  // sum_t xi_t(i, j)
  std::vector<Matrix<Scalar>> mixture_post;        // per state: T x M_j responsibilities
};

template <typename Scalar>
SequenceStats<Scalar> posterior_stats(const Hmm<Scalar>& model, const Matrix<Scalar>& seq) {
  const Index n = model.states();
  const Index frames = seq.rows();
  const Matrix<Scalar> log_a = log_transitions(model);

  std::vector<Matrix<Scalar>> comp(static_cast<std::size_t>(n));
  Matrix<Scalar> log_b(frames, n);
  for (Index j = 0; j < n; ++j) {
    const auto& mix = model.emissions[static_cast<std::size_t>(j)];
    comp[static_cast<std::size_t>(j)].resize(frames, mix.components());
    for (Index t = 0; t < frames; ++t) {
      const Vector<Scalar> c = component_log_densities(mix, seq.row(t));
      comp[static_cast<std::size_t>(j)].row(t) = c.transpose();
      log_b(t, j) = log_sum_exp(c);
    }
  }

  const Matrix<Scalar> alpha = forward_variables(model, log_b);
  Matrix<Scalar> beta(frames, n);
  for (Index j = 0; j < n; ++j)
    beta(frames - 1, j) = (model.termination == Termination::AnyState || j == n - 1)
                              ? Scalar(0)
                              : log_zero<Scalar>();
  Vector<Scalar> terms(n);
  for (Index t = frames - 2; t >= 0; --t) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) terms[j] = log_a(i, j) + log_b(t + 1, j) + beta(t + 1, j);
      beta(t, i) = log_sum_exp(terms);
    }
  }

  SequenceStats<Scalar> out;
  out.log_likelihood = terminate_forward(model, alpha);
  out.transition_post = Matrix<Scalar>::Zero(n, n);
  out.mixture_post.resize(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j)
    out.mixture_post[static_cast<std::size_t>(j)].resize(frames, comp[static_cast<std::size_t>(j)].cols());

  // State posteriors normalized per frame, mixture responsibilities per
  // (frame, state); with one state or one component these are exactly 1.
  for (Index t = 0; t < frames; ++t) {
    const Vector<Scalar> post = (alpha.row(t) + beta.row(t)).transpose();
    const Scalar norm = log_sum_exp(post);
    for (Index j = 0; j < n; ++j) {
      const Scalar log_gamma = post[j] - norm;
      auto& r = out.mixture_post[static_cast<std::size_t>(j)];
      const auto& c = comp[static_cast<std::size_t>(j)];
      for (Index m = 0; m < c.cols(); ++m)
        r(t, m) = post[j] == log_zero<Scalar>() ? Scalar(0) : std::exp(log_gamma + c(t, m) - log_b(t, j));
    }
    if (t == 0) {
      out.initial_post.resize(n);
      for (Index j = 0; j < n; ++j) out.initial_post[j] = std::exp(post[j] - norm);
    }
  }
  for (Index t = 0; t + 1 < frames; ++t)
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        const Scalar lx = alpha(t, i) + log_a(i, j) + log_b(t + 1, j) + beta(t + 1, j) - out.log_likelihood;
        if (lx != log_zero<Scalar>()) out.transition_post(i, j) += std::exp(lx);
      }
  return out;
}

}  // namespace detail

// Total log-likelihood of a set of sequences.
template <typename Scalar>
Scalar total_log_likelihood(const Hmm<Scalar>& model, const std::vector<Matrix<Scalar>>& sequences) {
  Scalar total = 0;
  for (const auto& s : sequences) total += forward_log_likelihood(model, s);
  return total;
}

// One EM re-estimation of pi, A (inside the band), mixture weights, means and
// floored diagonal variances from all sequences. Returns the log-likelihood
// of the input model; appends zero-occupancy states to collapsed.
template <typename Scalar>
Scalar baum_welch_step(Hmm<Scalar>& model, const std::vector<Matrix<Scalar>>& sequences,
                       std::vector<int>* collapsed = nullptr) {
  const Index n = model.states();
  const Index dim = model.dim();

  std::vector<detail::SequenceStats<Scalar>> stats;
  stats.reserve(sequences.size());
  Scalar total = 0;
  for (const auto& s : sequences) {
    stats.push_back(detail::posterior_stats(model, s));
    total += stats.back().log_likelihood;
  }

  Vector<Scalar> initial = Vector<Scalar>::Zero(n);
  Matrix<Scalar> trans = Matrix<Scalar>::Zero(n, n);
  for (const auto& st : stats) {
    initial += st.initial_post;
    trans += st.transition_post;
  }
  model.initial = initial / Scalar(stats.size());

  for (Index i = 0; i < n; ++i) {
    const Scalar row = trans.row(i).sum();
    if (row > 0) model.transitions.row(i) = trans.row(i) / row;
  }

  for (Index j = 0; j < n; ++j) {
    auto& mix = model.emissions[static_cast<std::size_t>(j)];
    const Index comps = mix.components();
    Vector<Scalar> occ = Vector<Scalar>::Zero(comps);
    Matrix<Scalar> first = Matrix<Scalar>::Zero(comps, dim);
    for (std::size_t s = 0; s < sequences.size(); ++s) {
      const auto& r = stats[s].mixture_post[static_cast<std::size_t>(j)];
      const auto& x = sequences[s];
      for (Index t = 0; t < x.rows(); ++t)
        for (Index m = 0; m < comps; ++m) {
          occ[m] += r(t, m);
          first.row(m) += r(t, m) * x.row(t);
        }
    }
    const Scalar state_occ = occ.sum();
    if (!(state_occ > 0)) {
      if (collapsed) collapsed->push_back(static_cast<int>(j));
      continue;
    }
    Matrix<Scalar> means = mix.means;
    for (Index m = 0; m < comps; ++m)
      if (occ[m] > 0) means.row(m) = first.row(m) / occ[m];

    Matrix<Scalar> second = Matrix<Scalar>::Zero(comps, dim);
    for (std::size_t s = 0; s < sequences.size(); ++s) {
      const auto& r = stats[s].mixture_post[static_cast<std::size_t>(j)];
      const auto& x = sequences[s];
      for (Index t = 0; t < x.rows(); ++t)
        for (Index m = 0; m < comps; ++m)
          second.row(m) += r(t, m) * (x.row(t) - means.row(m)).array().square().matrix();
    }
    for (Index m = 0; m < comps; ++m) {
      if (!(occ[m] > 0)) continue;
      RowVector<Scalar> var = second.row(m) / occ[m];
      if (model.variance_floor.size() == dim) var = var.cwiseMax(model.variance_floor.transpose());
      mix.variances.row(m) = var;
      mix.means.row(m) = means.row(m);
    }
    mix.weights = occ / state_occ;
  }
  return total;
}

// Baum-Welch over multiple sequences. Stops when an iteration improves the
// total log-likelihood by less than tol, or after max_iters re-estimations.
template <typename Scalar>
std::pair<Hmm<Scalar>, TrainTrace<Scalar>> baum_welch(Hmm<Scalar> model,
                                                      const std::vector<Matrix<Scalar>>& sequences,
                                                      int max_iters, Scalar tol) {
  if (sequences.empty()) fail(ErrorCode::EmptyTrainingSet, "no training sequences");
  for (const auto& s : sequences) {
    if (s.rows() == 0) fail(ErrorCode::EmptySequence, "empty training sequence");
    if (s.cols() != model.dim())
      fail(ErrorCode::DimensionMismatch, "training sequence dimension does not match the model");
    if (model.termination == Termination::FinalState && model.max_jump != kErgodic &&
        s.rows() * std::max(model.max_jump, 1) < model.states())
      fail(ErrorCode::SequenceTooShort, "sequence cannot reach the final state");
  }

  TrainTrace<Scalar> trace;
  for (int iter = 0; iter < max_iters; ++iter) {
    Hmm<Scalar> next = model;
    const Scalar ll = baum_welch_step(next, sequences, &trace.collapsed_states);
    if (!trace.log_likelihood.empty() && ll - trace.log_likelihood.back() < tol) {
      trace.log_likelihood.push_back(ll);
      trace.converged = true;
      return {std::move(model), std::move(trace)};
    }
    trace.log_likelihood.push_back(ll);
    model = std::move(next);
    ++trace.iterations;
  }
  trace.log_likelihood.push_back(total_log_likelihood(model, sequences));
  if (trace.log_likelihood.size() >= 2 &&
      trace.log_likelihood.back() - trace.log_likelihood[trace.log_likelihood.size() - 2] < tol)
    trace.converged = true;
  return {std::move(model), std::move(trace)};
}

}  // namespace wmfcc
