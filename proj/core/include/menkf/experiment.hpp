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

// Kriging benchmark: one synthetic problem per seed, three solvers on the
// same truth and observations, RMSE and median-of-runs wall-clock timing,
// and sweeps over the number of observations or the grid size.

#include "menkf/ensemble.hpp"
#include "menkf/kriging.hpp"
#include "menkf/letkf.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace menkf {

enum class Method { gp, enkf, letkf };
enum class SweepAxis { observations, dimensions };

std::string_view to_string(Method method);
std::string_view to_string(SweepAxis axis);
std::optional<Method> parse_method(std::string_view name);

struct ExperimentConfig {
  Index d = 200;
  /// Observation count; 0 means d / 5.
  Index m = 0;
  double sigma = 1.0;
  double ell = 0.2;
  double tau = 0.2;
  Index n_ens = 400;
  std::uint64_t seed = 0;
  /// Timed repetitions after one discarded warmup; odd.
  int runs = 5;
  std::vector<Method> methods{Method::gp, Method::enkf, Method::letkf};
  bool perturb_obs = false;
  /// LETKF taper half-width; 0 means 2 * ell.
  double loc_radius = 0.0;
  /// Posterior draws produced per method.
  Index draws = 5;
  SiteLayout sites = SiteLayout::even;

  Index observations() const { return m > 0 ? m : d / 5; }
  double localization_radius() const { return loc_radius > 0.0 ? loc_radius : 2.0 * ell; }
  KernelParams kernel() const { return {sigma, ell}; }

  void check() const;
};

struct TimingRecord {
  Method method = Method::gp;
  SweepAxis axis = SweepAxis::observations;
  Index axis_value = 0;
  double fit_time_s = 0.0;
  double predict_time_s = 0.0;
  double rmse = 0.0;
  int runs = 0;
  std::uint64_t seed = 0;
};

/// One benchmark problem with its prior samples. Every method run on the same
/// instance sees the same truth, observations and prior draws.
struct Instance {
  KrigingProblem problem;
  /// D x n_ens forecast ensemble for EnKF and LETKF.
  Matrix prior_ensemble;
  /// Prior pairs used for exact-GP Matheron draws.
  Matrix gp_prior_x;
  Matrix gp_prior_y;
};

Instance make_instance(const ExperimentConfig& cfg);

struct MethodResult {
  Vector mean;
  Vector std;
  /// D x cfg.draws
  Matrix draws;
  TimingRecord timing;
};

double rmse(const Vector& estimate, const Vector& truth);

MethodResult run_method(Method method, const Instance& instance, const ExperimentConfig& cfg,
                        SweepAxis axis = SweepAxis::observations, Index axis_value = 0);
MethodResult run_method(Method method, const ExperimentConfig& cfg);

/// Default sweep values: m in {40, 80, 160, 320} at d = 800, or
/// d in {200, 400, 600, 800} at m = 40.
std::vector<Index> default_sweep_values(SweepAxis axis);

/// One record per (value, method). `sink` sees each record as soon as it is
/// measured, so partial results survive a later failure.
std::vector<TimingRecord> sweep(SweepAxis axis, const std::vector<Index>& values,
                                const ExperimentConfig& cfg,
                                const std::function<void(const TimingRecord&)>& sink = {});

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs both analysis paths on seeded random instances and reports the
/// largest elementwise relative difference.
struct EquivalenceSummary {
  double max_difference = 0.0;
  std::vector<double> differences;
};

/// Instances have D_x <= 50, D_y <= 25, 2 <= N <= 20 and random rho,
/// upsilon, xi; half of them use perturbed observations.
EquivalenceSummary equivalence_suite(std::uint64_t seed, int instances = 100);

/// Monte Carlo check of the pathwise update on a fixed 3-state,
/// 2-observation joint Gaussian.
struct MomentCheck {
  Index draws = 0;
  Vector exact_mean;
  Matrix exact_cov;
  Vector empirical_mean;
  Matrix empirical_cov;
  /// |empirical - exact| / (sd / sqrt(draws)), per coordinate.
  Vector mean_z;
  /// Frobenius-relative covariance error.
  double cov_relative_error = 0.0;

  bool passed(double z_limit = 4.0, double cov_limit = 0.05) const;
};

MomentCheck matheron_moment_check(std::uint64_t seed, Index draws = 200000);

}  // namespace menkf
