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

#include "menkf/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace menkf {

bool GaussianBelief::is_valid() const {
  return cov.rows() == mean.size() && cov.cols() == mean.size() && is_symmetric(cov) &&
         is_psd(cov);
}

Matrix JointGaussian::block_cov() const {
  const Index dx = dim_x();
  const Index dy = dim_y();
  Matrix full(dx + dy, dx + dy);
  full.topLeftCorner(dx, dx) = cov_xx;
  full.topRightCorner(dx, dy) = cov_xy;
  full.bottomLeftCorner(dy, dx) = cov_xy.transpose();
  full.bottomRightCorner(dy, dy) = cov_yy;
  return full;
}

Vector JointGaussian::block_mean() const {
  Vector full(dim_x() + dim_y());
  full << mean_x, mean_y;
  return full;
}

void LinearObservation::check() const {
  if (!(rho >= 0.0)) {
    std::ostringstream msg;
    msg << "observation noise std must be >= 0, got " << rho;
    throw ContractViolation(msg.str());
  }
  if (y_star.size() != H.rows()) {
    std::ostringstream msg;
    msg << "observation has " << H.rows() << " rows in H but y_star of length " << y_star.size();
    throw ContractViolation(msg.str());
  }
}

Matrix selection_matrix(Index dim, const std::vector<Index>& indices) {
  Matrix h = Matrix::Zero(static_cast<Index>(indices.size()), dim);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] < 0 || indices[k] >= dim) {
      std::ostringstream msg;
      msg << "selection index " << indices[k] << " outside [0, " << dim << ")";
      throw ContractViolation(msg.str());
    }
    h(static_cast<Index>(k), indices[k]) = 1.0;
  }
  return h;
}

JointGaussian make_joint(const GaussianBelief& prior, const LinearObservation& obs) {
  obs.check();
  const Index dx = prior.dim();
  if (prior.cov.rows() != dx || prior.cov.cols() != dx) {
    std::ostringstream msg;
    msg << "prior mean has dimension " << dx << " but covariance is " << prior.cov.rows() << "x"
        << prior.cov.cols();
    throw ContractViolation(msg.str());
  }
  if (obs.dim_x() != dx) {
    std::ostringstream msg;
    msg << "observation matrix H is " << obs.H.rows() << "x" << obs.H.cols()
        << " but the prior state dimension is " << dx;
    throw ContractViolation(msg.str());
  }
  JointGaussian joint;
  joint.mean_x = prior.mean;
  joint.mean_y = obs.H * prior.mean;
  joint.cov_xx = prior.cov;
  joint.cov_xy = prior.cov * obs.H.transpose();
  joint.cov_yy = symmetrized(obs.H * joint.cov_xy);
  joint.cov_yy.diagonal().array() += obs.noise_variance();
  return joint;
}

GaussianBelief condition(const JointGaussian& joint, const Vector& y_star, JitterPolicy policy) {
  const Index dx = joint.dim_x();
  const Index dy = joint.dim_y();
  require_shape(joint.cov_xx, dx, dx, "cov_xx");
  require_shape(joint.cov_xy, dx, dy, "cov_xy");
  require_shape(joint.cov_yy, dy, dy, "cov_yy");
  require_size(y_star, dy, "y_star");
  if (dy == 0) {
    return {joint.mean_x, symmetrized(joint.cov_xx)};
  }
  const SpdFactor cyy(joint.cov_yy, policy);
  GaussianBelief post;
  post.mean = joint.mean_x + joint.cov_xy * cyy.solve(Vector(y_star - joint.mean_y));
  const Matrix half = cyy.half_solve(joint.cov_yx());
  post.cov = joint.cov_xx;
  post.cov.noalias() -= half.transpose() * half;
  post.cov = symmetrized(post.cov);
  return post;
}

Matrix kalman_gain(const Matrix& prior_cov, const LinearObservation& obs, JitterPolicy policy) {
  obs.check();
  require_shape(prior_cov, obs.dim_x(), obs.dim_x(), "prior covariance");
  const Matrix hc = obs.H * prior_cov;
  Matrix innovation = symmetrized(hc * obs.H.transpose());
  innovation.diagonal().array() += obs.noise_variance();
  const SpdFactor s(innovation, policy);
  // K = C H^T S^{-1} = (S^{-1} H C)^T for symmetric C and S.
  return s.solve(hc).transpose();
}

GaussianBelief kalman_update(const GaussianBelief& prior, const LinearObservation& obs,
                             JitterPolicy policy) {
  const Matrix gain = kalman_gain(prior.cov, obs, policy);
  GaussianBelief post;
  post.mean = prior.mean + gain * (obs.y_star - obs.H * prior.mean);
  post.cov = symmetrized(prior.cov - gain * (obs.H * prior.cov));
  return post;
}

GaussianSampler::GaussianSampler(const GaussianBelief& belief, JitterPolicy policy)
    : mean_(belief.mean) {
  const Index dim = belief.dim();
  require_shape(belief.cov, dim, dim, "belief covariance");
  if (dim == 0) {
    return;
  }
  const double tolerance = 1e-10 * belief.cov.norm();

  double jitter = policy.initial;
  Matrix loaded = symmetrized(belief.cov);
  const Vector diagonal = loaded.diagonal();
  for (;;) {
    loaded.diagonal() = diagonal.array() + jitter;
    ldlt_.compute(loaded);
    if (ldlt_.vectorD().minCoeff() >= -tolerance) {
      // Eigen flags an exact zero pivot followed by a round-off pivot as a
      // failure; the factors are still usable when they reproduce the input.
      if (ldlt_.info() == Eigen::Success ||
          (ldlt_.reconstructedMatrix() - loaded).cwiseAbs().maxCoeff() <= tolerance) {
        break;
      }
    }
    const double next = policy.next(jitter);
    if (next < 0.0) {
      const double pivot = ldlt_.vectorD().minCoeff();
      std::ostringstream msg;
      msg << "sample: covariance of size " << dim << " is not positive semidefinite after jitter "
          << jitter << " (smallest pivot " << pivot << ")";
      throw SingularCovariance(msg.str(), pivot);
    }
    jitter = next;
  }
  jitter_ = jitter;
  root_d_ = ldlt_.vectorD().cwiseMax(0.0).cwiseSqrt();
}

Matrix GaussianSampler::draw(Index count, Rng& rng) const {
  if (count < 1) {
    throw ContractViolation("sample: count must be >= 1");
  }
  const Index dim = this->dim();
  if (dim == 0) {
    return Matrix(0, count);
  }
  const Matrix z = rng.standard_normal(dim, count);
  Matrix draws = ldlt_.matrixL() * (root_d_.asDiagonal() * z);
  draws = ldlt_.transpositionsP().transpose() * draws;
  draws.colwise() += mean_;
  return draws;
}

Matrix sample(const GaussianBelief& belief, Index count, Rng& rng, JitterPolicy policy) {
  if (count < 1) {
    throw ContractViolation("sample: count must be >= 1");
  }
  return GaussianSampler(belief, policy).draw(count, rng);
}

std::pair<Matrix, Matrix> sample_joint(const JointGaussian& joint, Index count, Rng& rng) {
  const GaussianBelief full{joint.block_mean(), joint.block_cov()};
  const Matrix draws = sample(full, count, rng);
  return {draws.topRows(joint.dim_x()), draws.bottomRows(joint.dim_y())};
}

Vector matheron_exact(const JointGaussian& joint, const Vector& x, const Vector& y,
                      const Vector& y_star, JitterPolicy policy) {
  require_size(x, joint.dim_x(), "x draw");
  require_size(y, joint.dim_y(), "y draw");
  require_size(y_star, joint.dim_y(), "y_star");
  if (joint.dim_y() == 0) {
    return x;
  }
  const SpdFactor cyy(joint.cov_yy, policy);
  return x + joint.cov_xy * cyy.solve(Vector(y_star - y));
}

Matrix matheron_exact(const JointGaussian& joint, const Matrix& xs, const Matrix& ys,
                      const Vector& y_star, JitterPolicy policy) {
  require_shape(xs, joint.dim_x(), xs.cols(), "x draws");
  require_shape(ys, joint.dim_y(), xs.cols(), "y draws");
  require_size(y_star, joint.dim_y(), "y_star");
  if (joint.dim_y() == 0) {
    return xs;
  }
  const SpdFactor cyy(joint.cov_yy, policy);
  Matrix residual = (-ys).colwise() + y_star;
  return xs + joint.cov_xy * cyy.solve(residual);
}

}  // namespace menkf
