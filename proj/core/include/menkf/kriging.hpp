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

// Squared-exponential GP prior on a 1D grid, exact GP regression and
// pathwise posterior draws.

#include "menkf/gaussian.hpp"
#include "menkf/letkf.hpp"
#include "menkf/linalg.hpp"
#include "menkf/random.hpp"

#include <vector>

namespace menkf {

struct KernelParams {
  double sigma = 1.0;  ///< prior standard deviation
  double ell = 0.2;    ///< length-scale

  void check() const;
};

/// sigma^2 exp(-(r1 - r2)^2 / (2 ell^2))
double se_kernel(double r1, double r2, const KernelParams& p);

/// Kernel matrix between two point sets.
Matrix cross_gram(const std::vector<double>& rows, const std::vector<double>& cols,
                  const KernelParams& p);

/// K_ij + jitter delta_ij over the grid; exactly symmetric.
Matrix gram(const GridGeometry& grid, const KernelParams& p, double jitter);

/// Default Gram diagonal loading, 1e-8 sigma^2.
inline double default_gram_jitter(const KernelParams& p) { return 1e-8 * p.sigma * p.sigma; }

enum class SiteLayout { even, random };

/// m distinct grid indices in ascending order. `even` spaces them uniformly
/// (index floor((k + 1/2) d / m)); `random` draws them without replacement.
std::vector<Index> observation_sites(Index d, Index m, SiteLayout layout, Rng* rng = nullptr);

/// Twin-experiment kriging task: recover `truth` on the grid from
/// y_star = truth[obs_indices] + N(0, tau^2 I).
struct KrigingProblem {
  GridGeometry grid;
  KernelParams params;
  double tau = 0.2;
  Vector truth;
  Vector y_star;
  double gram_jitter = 1e-8;

  Index dim() const { return grid.dim(); }
  Index num_obs() const { return grid.num_obs(); }

  GaussianBelief prior() const;
  LinearObservation observation() const;

  void check() const;
};

/// Draws the truth from the prior with `truth_rng` and the observation noise
/// with `noise_rng`.
KrigingProblem synthesize_problem(GridGeometry grid, const KernelParams& params, double tau,
                                  Rng& truth_rng, Rng& noise_rng);

/// As above, drawing the truth from an existing factorization of the prior.
KrigingProblem synthesize_problem(GridGeometry grid, const KernelParams& params, double tau,
                                  const GaussianSampler& prior, Rng& truth_rng, Rng& noise_rng);

struct PosteriorSummary {
  Vector mean;
  Vector std;
};

/// Exact posterior mean and pointwise standard deviation on the full grid,
/// by conditioning the joint Gaussian of (field, observations).
PosteriorSummary gp_fit_predict(const KrigingProblem& problem);

/// Prior draws of the field and their simulated observations
/// y = H x + tau e, as (D x count, m x count).
std::pair<Matrix, Matrix> prior_pairs(const KrigingProblem& problem, const GaussianSampler& prior,
                                      Index count, Rng& rng);

/// Posterior draws through the exact Matheron update applied to prior pairs.
Matrix gp_posterior_draws(const KrigingProblem& problem, Index count, Rng& rng);

/// Fit/predict split of exact GP regression for timing. fit() factorizes
/// the m x m observation covariance; predict() forms the D x m cross
/// covariance and reads out mean, marginal std and optional Matheron draws.
/// Agrees with gp_fit_predict; the block formulas are those of make_joint.
class GpRegressor {
public:
  void fit(const KrigingProblem& problem);

  /// Mean and std on the grid.
  PosteriorSummary predict() const;
  /// Mean, std and Matheron draws from the given prior pairs.
  PosteriorSummary predict(const Matrix& prior_x, const Matrix& prior_y, Matrix& draws) const;

private:
  Matrix cross_covariance() const;

  const KrigingProblem* problem_ = nullptr;
  SpdFactor factor_;
  Vector alpha_;
};

}  // namespace menkf
