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

// Ensemble representation, regularized empirical moments and two
// independently coded analysis steps: the stochastic EnKF update
// X' = X + K (Y* - Y) and the empirical Matheron update, which plugs
// ensemble moments into x + C_xy C_yy^{-1} (y* - y) member by member.

#include "menkf/gaussian.hpp"
#include "menkf/linalg.hpp"
#include "menkf/random.hpp"

namespace menkf {

/// D x N matrix whose columns are ensemble members, N >= 2.
class Ensemble {
public:
  explicit Ensemble(Matrix members);

  const Matrix& members() const { return members_; }
  Index dim() const { return members_.rows(); }
  Index size() const { return members_.cols(); }

  Vector mean() const { return members_.rowwise().mean(); }

private:
  Matrix members_;
};

struct EnsembleMoments {
  Vector mean;
  /// (X - mean 1^T) / sqrt(N - 1)
  Matrix deviations;
  /// State regularizer; covariance() adds xi^2 I.
  double xi = 0.0;

  Matrix covariance() const;
  /// Diagonal of covariance() without forming it.
  Vector variances() const;
};

struct EnkfConfig {
  double xi = 0.0;
  double upsilon = 0.0;
  double rho = 0.0;
  /// Add N(0, rho^2 I) noise to each predicted observation before the
  /// innovation is formed. Off reproduces the unperturbed update.
  bool perturb_observations = false;

  /// upsilon^2 + rho^2
  double gamma2() const { return upsilon * upsilon + rho * rho; }

  void check() const;
};

enum class GainForm {
  automatic,  ///< dual when D_y > 2N, primal otherwise
  primal,     ///< X~ Y~^T (Y~ Y~^T + g^2 I)^{-1}, a D_y x D_y solve
  dual,       ///< X~ (Y~^T Y~ + g^2 I)^{-1} Y~^T, an N x N solve
};

EnsembleMoments moments(const Ensemble& ens, double xi = 0.0);

/// Y = H X column by column, plus N(0, rho^2 I) per column when
/// cfg.perturb_observations is set (rng must then be non-null).
Ensemble apply_observation(const Ensemble& ens, const LinearObservation& obs,
                           const EnkfConfig& cfg, Rng* rng = nullptr);

/// Ensemble Kalman gain from state and predicted-observation moments.
/// Returns zero when either deviation matrix vanishes.
Matrix ensemble_gain(const EnsembleMoments& mx, const EnsembleMoments& my, const EnkfConfig& cfg,
                     GainForm form = GainForm::automatic);

/// Stochastic EnKF analysis. The gain is built from the unperturbed
/// predicted observations H X; with perturbation on, only the innovations
/// y* - (H x + e) see the noise.
Ensemble enkf_analysis(const Ensemble& ens, const LinearObservation& obs, const EnkfConfig& cfg,
                       Rng* rng = nullptr, GainForm form = GainForm::automatic);

/// Per-member Matheron update with m_x -> X bar, C_xy -> X~ Y~^T and
/// C_yy -> Y~ Y~^T + gamma^2 I. Shares no gain routine with enkf_analysis.
Ensemble empirical_matheron(const Ensemble& ens, const LinearObservation& obs,
                            const EnkfConfig& cfg, Rng* rng = nullptr);

/// Runs enkf_analysis(cfg) and empirical_matheron(matheron_cfg) on identical
/// inputs (and identical perturbation streams derived from `seed`) and
/// returns the max elementwise relative difference.
double equivalence_report(const Ensemble& ens, const LinearObservation& obs,
                          const EnkfConfig& cfg, const EnkfConfig& matheron_cfg,
                          std::uint64_t seed = 0);

inline double equivalence_report(const Ensemble& ens, const LinearObservation& obs,
                                 const EnkfConfig& cfg, std::uint64_t seed = 0) {
  return equivalence_report(ens, obs, cfg, cfg, seed);
}

}  // namespace menkf
