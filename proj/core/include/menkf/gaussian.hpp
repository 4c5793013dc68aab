/*
 * Copyright 2026 The menkf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Exact finite-dimensional Gaussian machinery: joint construction,
// conditioning, the Kalman gain, seeded sampling and the exact pathwise
// (Matheron) update x + C_xy C_yy^{-1} (y* - y).

#include "menkf/linalg.hpp"
#include "menkf/random.hpp"

#include <utility>
#include <vector>

namespace menkf {

struct GaussianBelief {
  Vector mean;
  Matrix cov;

  Index dim() const { return mean.size(); }

  /// Shape, symmetry (1e-12 relative) and PSD (1e-10 relative) checks.
  bool is_valid() const;
};

/// Block Gaussian law of (x, y). The cross block C_yx is not stored; it is
/// the transpose of C_xy.
struct JointGaussian {
  Vector mean_x;
  Vector mean_y;
  Matrix cov_xx;
  Matrix cov_xy;
  Matrix cov_yy;

  Index dim_x() const { return mean_x.size(); }
  Index dim_y() const { return mean_y.size(); }
  auto cov_yx() const { return cov_xy.transpose(); }

  /// The full (D_x + D_y) square covariance.
  Matrix block_cov() const;
  Vector block_mean() const;
};

/// y = H x + e with e ~ N(0, rho^2 I).
///
/// Only the isotropic noise model is represented; a general diagonal or full
/// R would replace `rho` here and the `rho^2 I` terms in make_joint and
/// kalman_gain.
struct LinearObservation {
  Matrix H;
  double rho = 0.0;
  Vector y_star;

  Index dim_x() const { return H.cols(); }
  Index dim_y() const { return H.rows(); }
  double noise_variance() const { return rho * rho; }

  /// Throws ContractViolation if H, y_star and rho are inconsistent.
  void check() const;
};

/// Rows of the identity selecting `indices` out of `dim` state entries.
Matrix selection_matrix(Index dim, const std::vector<Index>& indices);

JointGaussian make_joint(const GaussianBelief& prior, const LinearObservation& obs);

/// Law of x | y = y_star. The returned covariance is symmetrized.
GaussianBelief condition(const JointGaussian& joint, const Vector& y_star,
                         JitterPolicy policy = {});

/// K = C H^T (H C H^T + rho^2 I)^{-1}, D_x x D_y.
Matrix kalman_gain(const Matrix& prior_cov, const LinearObservation& obs,
                   JitterPolicy policy = {});

/// Mean m + K (y* - H m) and covariance C - K H C, via kalman_gain.
GaussianBelief kalman_update(const GaussianBelief& prior, const LinearObservation& obs,
                             JitterPolicy policy = {});

/// Square-root factor of a belief's covariance, computed once and reused
/// for any number of draws.
///
/// Uses a pivoted LDL^T square root so that semidefinite covariances are
/// sampled exactly; diagonal jitter is only added (and escalated per
/// `policy`) when the factorization exposes negative pivots.
class GaussianSampler {
public:
  explicit GaussianSampler(const GaussianBelief& belief,
                           JitterPolicy policy = JitterPolicy::on_failure());

  Index dim() const { return mean_.size(); }
  double jitter() const { return jitter_; }

  /// dim x count, columns iid. Consumes dim * count normals from rng.
  Matrix draw(Index count, Rng& rng) const;

private:
  Vector mean_;
  Eigen::LDLT<Matrix> ldlt_;
  Vector root_d_;
  double jitter_ = 0.0;
};

/// `count` iid draws from `belief` as the columns of a D x count matrix;
/// deterministic given the generator state. See GaussianSampler.
Matrix sample(const GaussianBelief& belief, Index count, Rng& rng,
              JitterPolicy policy = JitterPolicy::on_failure());

/// Paired draws (x, y) from the joint law, as (D_x x count, D_y x count).
std::pair<Matrix, Matrix> sample_joint(const JointGaussian& joint, Index count, Rng& rng);

/// x + C_xy C_yy^{-1} (y_star - y) for one paired draw (x, y).
Vector matheron_exact(const JointGaussian& joint, const Vector& x, const Vector& y,
                      const Vector& y_star, JitterPolicy policy = {});

/// Column-wise version; C_yy is factorized once.
Matrix matheron_exact(const JointGaussian& joint, const Matrix& xs, const Matrix& ys,
                      const Vector& y_star, JitterPolicy policy = {});

}  // namespace menkf
