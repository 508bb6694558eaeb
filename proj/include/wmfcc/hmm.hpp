#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "wmfcc/error.hpp"
#include "wmfcc/gmm.hpp"
#include "wmfcc/log_math.hpp"
#include "wmfcc/types.hpp"

// Continuous-density HMMs with Gaussian-mixture emissions. Every
// recursion runs in the natural-log domain.

namespace wmfcc {

// Which states may end an observation sequence.
enum class Termination { AnyState, FinalState };

constexpr std::string_view to_string(Termination t) {
  return t == Termination::AnyState ? "any_state" : "final_state";
}

inline Termination parse_termination(std::string_view text) {
  if (text == "any_state") return Termination::AnyState;
  if (text == "final_state") return Termination::FinalState;
  fail(ErrorCode::BadConfig, "unknown termination '" + std::string(text) + "'");
}

// max_jump for a model without the left-to-right band constraint.
inline constexpr int kErgodic = -1;

template <typename Scalar>
struct Hmm {
  Vector<Scalar> initial;                       // pi, N
  Matrix<Scalar> transitions;                   // A, N x N
  std::vector<GaussianMixture<Scalar>> emissions;
  int max_jump = 1;                             // kErgodic disables the band
  Vector<Scalar> variance_floor;                // D; empty means no floor
  Termination termination = Termination::AnyState;

  Index states() const { return initial.size(); }
  Index dim() const { return emissions.empty() ? 0 : emissions.front().dim(); }

  bool in_band(Index from, Index to) const {
    return max_jump == kErgodic || (to >= from && to <= from + max_jump);
  }

  // Empty when the stochastic and topology constraints hold to tol.
  std::string check(Scalar tol = Scalar(1e-9)) const {
    const Index n = states();
    if (n < 1 || transitions.rows() != n || transitions.cols() != n ||
        static_cast<Index>(emissions.size()) != n)
      return "inconsistent state count";
    if (std::abs(initial.sum() - Scalar(1)) > tol) return "initial distribution does not sum to 1";
    for (Index i = 0; i < n; ++i) {
      if (std::abs(transitions.row(i).sum() - Scalar(1)) > tol)
        return "transition row " + std::to_string(i) + " does not sum to 1";
      for (Index j = 0; j < n; ++j) {
        if (transitions(i, j) < 0) return "negative transition probability";
        if (!in_band(i, j) && transitions(i, j) != 0)
          return "transition " + std::to_string(i) + "->" + std::to_string(j) + " outside the band";
      }
      const auto& mix = emissions[static_cast<std::size_t>(i)];
      if (mix.dim() != dim()) return "emission dimensions differ";
      if (std::abs(mix.weights.sum() - Scalar(1)) > tol)
        return "mixture weights of state " + std::to_string(i) + " do not sum to 1";
      if (variance_floor.size() == dim()) {
        for (Index m = 0; m < mix.components(); ++m)
          for (Index d = 0; d < dim(); ++d)
            if (mix.variances(m, d) < variance_floor[d]) return "variance below floor";
      }
    }
    if (max_jump != kErgodic)
      for (Index i = 1; i < n; ++i)
        if (initial[i] != 0) return "left-to-right model must start in state 0";
    return {};
  }
};

// Band-limited transitions: self-loop probability self_loop, the rest split
// evenly over the forward jumps 1..max_jump that stay inside the model. The
// last state is absorbing.
template <typename Scalar = double>
Matrix<Scalar> left_to_right_transitions(Index n_states, int max_jump, Scalar self_loop) {
  Matrix<Scalar> a = Matrix<Scalar>::Zero(n_states, n_states);
  for (Index i = 0; i < n_states; ++i) {
    const Index jumps = std::min<Index>(max_jump, n_states - 1 - i);
    if (jumps == 0) {
      a(i, i) = 1;
      continue;
    }
    a(i, i) = self_loop;
    for (Index k = 1; k <= jumps; ++k) a(i, i + k) = (Scalar(1) - self_loop) / Scalar(jumps);
  }
  return a;
}

// log b_j(o_t), T x N.
template <typename Scalar, typename Derived>
Matrix<Scalar> emission_log_likelihoods(const Hmm<Scalar>& model,
                                        const Eigen::MatrixBase<Derived>& seq) {
  if (seq.rows() == 0) fail(ErrorCode::EmptySequence, "empty observation sequence");
  if (seq.cols() != model.dim())
    fail(ErrorCode::DimensionMismatch, "sequence dimension " + std::to_string(seq.cols()) +
                                           " vs model dimension " + std::to_string(model.dim()));
  Matrix<Scalar> log_b(seq.rows(), model.states());
  for (Index t = 0; t < seq.rows(); ++t)
    for (Index j = 0; j < model.states(); ++j)
      log_b(t, j) = log_gmm_pdf(model.emissions[static_cast<std::size_t>(j)], seq.row(t));
  return log_b;
}

template <typename Scalar>
Matrix<Scalar> log_transitions(const Hmm<Scalar>& model) {
  return model.transitions.unaryExpr([](Scalar p) { return safe_log(p); });
}

// Forward variables log alpha_t(j), T x N, for given emission log-likelihoods.
template <typename Scalar>
Matrix<Scalar> forward_variables(const Hmm<Scalar>& model, const Matrix<Scalar>& log_b) {
  const Index n = model.states();
  const Index frames = log_b.rows();
  const Matrix<Scalar> log_a = log_transitions(model);
  Matrix<Scalar> alpha(frames, n);
  for (Index j = 0; j < n; ++j) alpha(0, j) = safe_log(model.initial[j]) + log_b(0, j);
  Vector<Scalar> terms(n);
  for (Index t = 1; t < frames; ++t) {
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) terms[i] = alpha(t - 1, i) + log_a(i, j);
      alpha(t, j) = log_sum_exp(terms) + log_b(t, j);
    }
  }
  return alpha;
}

template <typename Scalar>
Scalar terminate_forward(const Hmm<Scalar>& model, const Matrix<Scalar>& alpha) {
  const Index last = alpha.rows() - 1;
  if (model.termination == Termination::FinalState) return alpha(last, model.states() - 1);
  return log_sum_exp(alpha.row(last));
}

// log P(O | model) from precomputed emission log-likelihoods.
template <typename Scalar>
Scalar forward_from_emissions(const Hmm<Scalar>& model, const Matrix<Scalar>& log_b) {
  if (log_b.rows() == 0) fail(ErrorCode::EmptySequence, "empty observation sequence");
  if (log_b.cols() != model.states())
    fail(ErrorCode::DimensionMismatch, "emission matrix does not match the state count");
  return terminate_forward(model, forward_variables(model, log_b));
}

template <typename Scalar, typename Derived>
Scalar forward_log_likelihood(const Hmm<Scalar>& model, const Eigen::MatrixBase<Derived>& seq) {
  return forward_from_emissions(model, emission_log_likelihoods(model, seq));
}

template <typename Scalar>
struct ViterbiResult {
  std::vector<int> states;  // 0-based state per frame
  Scalar log_prob = 0;
};

// Most likely state path. Ties go to the lower state index, both for the
// predecessor at each step and for the final state.
template <typename Scalar>
ViterbiResult<Scalar> viterbi_from_emissions(const Hmm<Scalar>& model,
                                             const Matrix<Scalar>& log_b) {
  const Index n = model.states();
  const Index frames = log_b.rows();
  if (frames == 0) fail(ErrorCode::EmptySequence, "empty observation sequence");
  if (log_b.cols() != n)
    fail(ErrorCode::DimensionMismatch, "emission matrix does not match the state count");
  const Matrix<Scalar> log_a = log_transitions(model);

  Matrix<Scalar> delta(frames, n);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> back(frames, n);
  for (Index j = 0; j < n; ++j) {
    delta(0, j) = safe_log(model.initial[j]) + log_b(0, j);
    back(0, j) = 0;
  }
  for (Index t = 1; t < frames; ++t) {
    for (Index j = 0; j < n; ++j) {
      Index arg = 0;
      Scalar best = delta(t - 1, 0) + log_a(0, j);
      for (Index i = 1; i < n; ++i) {
        const Scalar v = delta(t - 1, i) + log_a(i, j);
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      delta(t, j) = best + log_b(t, j);
      back(t, j) = static_cast<int>(arg);
    }
  }

  ViterbiResult<Scalar> out;
  Index state = 0;
  if (model.termination == Termination::FinalState) {
    state = n - 1;
  } else {
    for (Index j = 1; j < n; ++j)
      if (delta(frames - 1, j) > delta(frames - 1, state)) state = j;
  }
  out.log_prob = delta(frames - 1, state);
  out.states.resize(static_cast<std::size_t>(frames));
  for (Index t = frames - 1; t >= 0; --t) {
    out.states[static_cast<std::size_t>(t)] = static_cast<int>(state);
    if (t > 0) state = back(t, state);
  }
  return out;
}

template <typename Scalar, typename Derived>
ViterbiResult<Scalar> viterbi(const Hmm<Scalar>& model, const Eigen::MatrixBase<Derived>& seq) {
  return viterbi_from_emissions(model, emission_log_likelihoods(model, seq));
}

}  // namespace wmfcc
