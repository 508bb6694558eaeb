#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace wmfcc {

template <typename Scalar>
constexpr Scalar log_zero() {
  return -std::numeric_limits<Scalar>::infinity();
}

// log(exp(a) + exp(b)) without overflow; log_zero() is the additive identity.
template <typename Scalar>
Scalar log_add(Scalar a, Scalar b) {
  if (a < b) std::swap(a, b);
  if (b == log_zero<Scalar>()) return a;
  return a + std::log1p(std::exp(b - a));
}

// log(sum_i exp(v_i)). Returns log_zero() for an empty or all -inf input.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  if (v.size() == 0) return log_zero<Scalar>();
  const Scalar peak = v.maxCoeff();
  if (peak == log_zero<Scalar>()) return peak;
  Scalar sum = 0;
  for (Eigen::Index r = 0; r < v.rows(); ++r)
    for (Eigen::Index c = 0; c < v.cols(); ++c) sum += std::exp(v(r, c) - peak);
  return peak + std::log(sum);
}

// Natural log with log(0) mapped to -inf rather than a domain error.
template <typename Scalar>
Scalar safe_log(Scalar x) {
  return x > 0 ? std::log(x) : log_zero<Scalar>();
}

}  // namespace wmfcc
