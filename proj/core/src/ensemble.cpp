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

#include "menkf/ensemble.hpp"

#include <cmath>
#include <sstream>

namespace menkf {

namespace {

void check_observation(const Ensemble& ens, const LinearObservation& obs, const EnkfConfig& cfg) {
  obs.check();
  cfg.check();
  if (obs.dim_x() != ens.dim()) {
    std::ostringstream msg;
    msg << "observation matrix H is " << obs.H.rows() << "x" << obs.H.cols()
        << " but ensemble members have dimension " << ens.dim();
    throw ContractViolation(msg.str());
  }
  if (obs.rho != cfg.rho) {
    std::ostringstream msg;
    msg << "observation noise std " << obs.rho << " disagrees with analysis config rho "
        << cfg.rho;
    throw ContractViolation(msg.str());
  }
}

Matrix observation_noise(Index dy, Index n, double rho, Rng* rng) {
  if (rng == nullptr) {
    throw ContractViolation("perturbed observations requested without a random generator");
  }
  return rho * rng->standard_normal(dy, n);
}

}  // namespace

Ensemble::Ensemble(Matrix members) : members_(std::move(members)) {
  if (members_.cols() < 2) {
    std::ostringstream msg;
    msg << "an ensemble needs at least 2 members, got " << members_.cols();
    throw ContractViolation(msg.str());
  }
}

Matrix EnsembleMoments::covariance() const {
  Matrix cov = deviations * deviations.transpose();
  cov.diagonal().array() += xi * xi;
  return cov;
}

Vector EnsembleMoments::variances() const {
  return deviations.rowwise().squaredNorm().array() + xi * xi;
}

void EnkfConfig::check() const {
  if (!(xi >= 0.0) || !(upsilon >= 0.0) || !(rho >= 0.0)) {
    std::ostringstream msg;
    msg << "analysis regularizers must be >= 0 (xi=" << xi << ", upsilon=" << upsilon
        << ", rho=" << rho << ")";
    throw ContractViolation(msg.str());
  }
}

EnsembleMoments moments(const Ensemble& ens, double xi) {
  if (!(xi >= 0.0)) {
    throw ContractViolation("moments: xi must be >= 0");
  }
  const auto n = static_cast<double>(ens.size());
  EnsembleMoments out;
  out.mean = ens.mean();
  out.deviations = (ens.members().colwise() - out.mean) / std::sqrt(n - 1.0);
  out.xi = xi;
  return out;
}

Ensemble apply_observation(const Ensemble& ens, const LinearObservation& obs,
                           const EnkfConfig& cfg, Rng* rng) {
  check_observation(ens, obs, cfg);
  Matrix y = obs.H * ens.members();
  if (cfg.perturb_observations && cfg.rho > 0.0) {
    y += observation_noise(y.rows(), y.cols(), cfg.rho, rng);
  }
  return Ensemble(std::move(y));
}

Matrix ensemble_gain(const EnsembleMoments& mx, const EnsembleMoments& my, const EnkfConfig& cfg,
                     GainForm form) {
  cfg.check();
  const Matrix& xd = mx.deviations;
  const Matrix& yd = my.deviations;
  if (xd.cols() != yd.cols()) {
    throw ContractViolation("ensemble_gain: state and observation ensembles differ in size");
  }
  const Index dx = xd.rows();
  const Index dy = yd.rows();
  const Index n = xd.cols();
  if (dy == 0 || xd.isZero(0.0) || yd.isZero(0.0)) {
    return Matrix::Zero(dx, dy);
  }
  const double g2 = cfg.gamma2();
  if (form == GainForm::automatic) {
    form = dy > 2 * n ? GainForm::dual : GainForm::primal;
  }
  if (form == GainForm::primal) {
    Matrix innovation = yd * yd.transpose();
    innovation.diagonal().array() += g2;
    const SpdFactor s(innovation, JitterPolicy::on_failure());
    // K = (S^{-1} Y~ X~^T)^T
    return s.solve(Matrix(yd * xd.transpose())).transpose();
  }
  Matrix small = yd.transpose() * yd;
  small.diagonal().array() += g2;
  const SpdFactor s(small, JitterPolicy::on_failure());
  return xd * s.solve(Matrix(yd.transpose()));
}

Ensemble enkf_analysis(const Ensemble& ens, const LinearObservation& obs, const EnkfConfig& cfg,
                       Rng* rng, GainForm form) {
  check_observation(ens, obs, cfg);
  if (obs.dim_y() == 0) {
    return ens;
  }
  const EnsembleMoments mx = moments(ens, cfg.xi);
  const Ensemble predicted(obs.H * ens.members());
  const EnsembleMoments my = moments(predicted, 0.0);
  const Matrix gain = ensemble_gain(mx, my, cfg, form);

  // Y* - Y, with Y perturbed when requested.
  Matrix innovations = (-predicted.members()).colwise() + obs.y_star;
  if (cfg.perturb_observations && cfg.rho > 0.0) {
    innovations -= observation_noise(obs.dim_y(), ens.size(), cfg.rho, rng);
  }
  Matrix updated = ens.members();
  updated.noalias() += gain * innovations;
  return Ensemble(std::move(updated));
}

Ensemble empirical_matheron(const Ensemble& ens, const LinearObservation& obs,
                            const EnkfConfig& cfg, Rng* rng) {
  check_observation(ens, obs, cfg);
  const Matrix& xs = ens.members();
  const Index n = xs.cols();
  const Index dy = obs.dim_y();
  if (dy == 0) {
    return ens;
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n) - 1.0);

  // Empirical joint of (x, y = H x), one member per column.
  const Matrix ys = obs.H * xs;
  Vector x_bar = Vector::Zero(xs.rows());
  Vector y_bar = Vector::Zero(dy);
  for (Index i = 0; i < n; ++i) {
    x_bar += xs.col(i);
    y_bar += ys.col(i);
  }
  x_bar /= static_cast<double>(n);
  y_bar /= static_cast<double>(n);
  const Matrix x_dev = scale * (xs.colwise() - x_bar);
  const Matrix y_dev = scale * (ys.colwise() - y_bar);

  const Matrix c_xy = x_dev * y_dev.transpose();
  if (c_xy.isZero(0.0)) {
    return ens;
  }
  Matrix c_yy = y_dev * y_dev.transpose();
  c_yy.diagonal().array() += cfg.gamma2();

  Matrix draws_y = ys;
  if (cfg.perturb_observations && cfg.rho > 0.0) {
    draws_y += observation_noise(dy, n, cfg.rho, rng);
  }

  const JitterPolicy policy = JitterPolicy::on_failure();
  double jitter = policy.initial;
  Eigen::LDLT<Matrix> ldlt;
  for (;;) {
    Matrix loaded = c_yy;
    loaded.diagonal().array() += jitter;
    ldlt.compute(loaded);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.vectorD().minCoeff() > 0.0) {
      break;
    }
    const double next = policy.next(jitter);
    if (next < 0.0) {
      const double pivot = ldlt.vectorD().minCoeff();
      std::ostringstream msg;
      msg << "empirical Matheron: observation covariance is singular (smallest pivot " << pivot
          << ")";
      throw SingularCovariance(msg.str(), pivot);
    }
    jitter = next;
  }

  Matrix updated(xs.rows(), n);
  for (Index i = 0; i < n; ++i) {
    const Vector residual = obs.y_star - draws_y.col(i);
    updated.col(i) = xs.col(i) + c_xy * ldlt.solve(residual);
  }
  return Ensemble(std::move(updated));
}

double equivalence_report(const Ensemble& ens, const LinearObservation& obs,
                          const EnkfConfig& cfg, const EnkfConfig& matheron_cfg,
                          std::uint64_t seed) {
  Rng kalman_rng(seed);
  Rng matheron_rng(seed);
  LinearObservation matheron_obs = obs;
  matheron_obs.rho = matheron_cfg.rho;
  const Ensemble a = enkf_analysis(ens, obs, cfg, &kalman_rng);
  const Ensemble b = empirical_matheron(ens, matheron_obs, matheron_cfg, &matheron_rng);
  return max_relative_difference(a.members(), b.members());
}

}  // namespace menkf
