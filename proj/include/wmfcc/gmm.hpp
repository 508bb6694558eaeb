#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "wmfcc/error.hpp"
#include "wmfcc/log_math.hpp"
#include "wmfcc/types.hpp"

namespace wmfcc {

// Diagonal-covariance Gaussian mixture: sum_m c_m N(o; mu_m, diag(var_m)).
template <typename Scalar>
struct GaussianMixture {
  Vector<Scalar> weights;   // M
  Matrix<Scalar> means;     // M x D
  Matrix<Scalar> variances; // M x D, diagonal covariances

  Index components() const { return weights.size(); }
  Index dim() const { return means.cols(); }

  static GaussianMixture single(const Vector<Scalar>& mean, const Vector<Scalar>& variance) {
    GaussianMixture g;
    g.weights = Vector<Scalar>::Ones(1);
    g.means = mean.transpose();
    g.variances = variance.transpose();
    return g;
  }
};

// log c_m + log N(obs; mu_m, var_m) for each component m.
template <typename Scalar, typename Derived>
Vector<Scalar> component_log_densities(const GaussianMixture<Scalar>& mix,
                                       const Eigen::MatrixBase<Derived>& obs) {
  const Index dim = mix.dim();
  if (obs.size() != dim)
    fail(ErrorCode::DimensionMismatch, "observation of dimension " + std::to_string(obs.size()) +
                                           " against a " + std::to_string(dim) + "-dim mixture");
  const Scalar log_two_pi = std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  Vector<Scalar> out(mix.components());
  for (Index m = 0; m < mix.components(); ++m) {
    Scalar quad = 0;
    Scalar log_det = 0;
    for (Index d = 0; d < dim; ++d) {
      const Scalar var = mix.variances(m, d);
      const Scalar diff = obs(d) - mix.means(m, d);
      quad += diff * diff / var;
      log_det += std::log(var);
    }
    out[m] = safe_log(mix.weights[m]) -
             Scalar(0.5) * (Scalar(dim) * log_two_pi + log_det + quad);
  }
  return out;
}

template <typename Scalar, typename Derived>
Scalar log_gmm_pdf(const GaussianMixture<Scalar>& mix, const Eigen::MatrixBase<Derived>& obs) {
  return log_sum_exp(component_log_densities(mix, obs));
}

}  // namespace wmfcc
