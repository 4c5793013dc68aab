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

#include "menkf/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace menkf {

namespace {

// Independent random streams split from the root seed.
enum Stream : std::uint64_t {
  kTruth = 1,
  kNoise = 2,
  kEnsemble = 3,
  kGpDraws = 4,
  kSites = 5,
  kPerturb = 6,
};

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) {
    return 0.0;
  }
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

bool uses_ensemble(const std::vector<Method>& methods) {
  return std::any_of(methods.begin(), methods.end(),
                     [](Method m) { return m != Method::gp; });
}

struct EnsembleReadout {
  Vector mean;
  Vector std;
  Matrix draws;
};

EnsembleReadout read_out(const Matrix& members, Index draws) {
  EnsembleReadout out;
  const auto n = static_cast<double>(members.cols());
  out.mean = members.rowwise().mean();
  out.std = ((members.colwise() - out.mean).rowwise().squaredNorm() / (n - 1.0)).cwiseSqrt();
  out.draws = members.leftCols(std::min(draws, members.cols()));
  return out;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::gp:
      return "gp";
    case Method::enkf:
      return "enkf";
    case Method::letkf:
      return "letkf";
  }
  return "unknown";
}

std::string_view to_string(SweepAxis axis) {
  return axis == SweepAxis::observations ? "observations" : "dimensions";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "gp") {
    return Method::gp;
  }
  if (name == "enkf") {
    return Method::enkf;
  }
  if (name == "letkf") {
    return Method::letkf;
  }
  return std::nullopt;
}

void ExperimentConfig::check() const {
  std::ostringstream msg;
  if (d < 10) {
    msg << "d must be >= 10, got " << d;
  } else if (observations() < 1 || observations() > d) {
    msg << "m must lie in [1, d], got " << observations();
  } else if (n_ens < 2) {
    msg << "ensemble size must be >= 2, got " << n_ens;
  } else if (runs < 1 || runs % 2 == 0) {
    msg << "runs must be a positive odd number, got " << runs;
  } else if (!(sigma > 0.0) || !(ell > 0.0) || !(tau > 0.0)) {
    msg << "sigma, ell and tau must be positive";
  } else if (draws < 0) {
    msg << "draws must be >= 0";
  } else if (loc_radius < 0.0) {
    msg << "localization radius must be >= 0";
  } else if (methods.empty()) {
    msg << "at least one method is required";
  } else {
    return;
  }
  throw ContractViolation(msg.str());
}

Instance make_instance(const ExperimentConfig& cfg) {
  cfg.check();
  const Rng root(cfg.seed);
  Rng site_rng = root.split(kSites);
  Rng truth_rng = root.split(kTruth);
  Rng noise_rng = root.split(kNoise);
  Rng ensemble_rng = root.split(kEnsemble);
  Rng draw_rng = root.split(kGpDraws);

  const KernelParams params = cfg.kernel();
  GridGeometry grid =
      GridGeometry::unit(cfg.d, observation_sites(cfg.d, cfg.observations(), cfg.sites, &site_rng));
  const GaussianSampler prior(
      GaussianBelief{Vector::Zero(cfg.d), gram(grid, params, default_gram_jitter(params))});

  Instance instance;
  instance.problem =
      synthesize_problem(std::move(grid), params, cfg.tau, prior, truth_rng, noise_rng);
  if (uses_ensemble(cfg.methods)) {
    instance.prior_ensemble = prior.draw(cfg.n_ens, ensemble_rng);
  }
  if (cfg.draws > 0) {
    auto [xs, ys] = prior_pairs(instance.problem, prior, cfg.draws, draw_rng);
    instance.gp_prior_x = std::move(xs);
    instance.gp_prior_y = std::move(ys);
  } else {
    instance.gp_prior_x.resize(cfg.d, 0);
    instance.gp_prior_y.resize(cfg.observations(), 0);
  }
  return instance;
}

double rmse(const Vector& estimate, const Vector& truth) {
  require_size(estimate, truth.size(), "estimate");
  if (truth.size() == 0) {
    return 0.0;
  }
  return std::sqrt((estimate - truth).squaredNorm() / static_cast<double>(truth.size()));
}

MethodResult run_method(Method method, const Instance& instance, const ExperimentConfig& cfg,
                        SweepAxis axis, Index axis_value) {
  cfg.check();
  const KrigingProblem& problem = instance.problem;
  const Rng root(cfg.seed);

  MethodResult result;
  std::vector<double> fit_times;
  std::vector<double> predict_times;

  // Per-method state between fit and predict.
  GpRegressor regressor;
  Matrix analysis;
  LinearObservation obs;
  if (method == Method::enkf) {
    obs = problem.observation();
  }
  if (method != Method::gp && instance.prior_ensemble.cols() < 2) {
    throw ContractViolation("instance has no prior ensemble for an ensemble method");
  }
  EnkfConfig enkf_cfg;
  enkf_cfg.rho = problem.tau;
  enkf_cfg.perturb_observations = cfg.perturb_obs;
  LocalizationConfig loc;
  loc.radius = cfg.localization_radius();

  const auto fit = [&] {
    switch (method) {
      case Method::gp:
        regressor.fit(problem);
        break;
      case Method::enkf: {
        Rng perturb_rng = root.split(kPerturb);
        analysis = enkf_analysis(Ensemble(instance.prior_ensemble), obs, enkf_cfg, &perturb_rng)
                       .members();
        break;
      }
      case Method::letkf:
        analysis = letkf_analysis(Ensemble(instance.prior_ensemble), problem.grid, problem.y_star,
                                  problem.tau, loc)
                       .members();
        break;
    }
  };
  const auto predict = [&] {
    if (method == Method::gp) {
      const PosteriorSummary s =
          regressor.predict(instance.gp_prior_x, instance.gp_prior_y, result.draws);
      result.mean = s.mean;
      result.std = s.std;
    } else {
      EnsembleReadout r = read_out(analysis, cfg.draws);
      result.mean = std::move(r.mean);
      result.std = std::move(r.std);
      result.draws = std::move(r.draws);
    }
  };

  using clock = std::chrono::steady_clock;
  try {
    for (int rep = 0; rep <= cfg.runs; ++rep) {
      const auto t0 = clock::now();
      fit();
      const auto t1 = clock::now();
      predict();
      const auto t2 = clock::now();
      if (rep > 0) {
        fit_times.push_back(std::chrono::duration<double>(t1 - t0).count());
        predict_times.push_back(std::chrono::duration<double>(t2 - t1).count());
      }
    }
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(to_string(method)) + ": " + e.what());
  } catch (const ContractViolation& e) {
    throw ContractViolation(std::string(to_string(method)) + ": " + e.what());
  }

  TimingRecord& t = result.timing;
  t.method = method;
  t.axis = axis;
  t.axis_value = axis_value;
  t.fit_time_s = median(fit_times);
  t.predict_time_s = median(predict_times);
  t.rmse = rmse(result.mean, problem.truth);
  t.runs = cfg.runs;
  t.seed = cfg.seed;
  return result;
}

MethodResult run_method(Method method, const ExperimentConfig& cfg) {
  ExperimentConfig single = cfg;
  single.methods = {method};
  return run_method(method, make_instance(single), cfg);
}

std::vector<Index> default_sweep_values(SweepAxis axis) {
  if (axis == SweepAxis::observations) {
    return {40, 80, 160, 320};
  }
  return {200, 400, 600, 800};
}

std::vector<TimingRecord> sweep(SweepAxis axis, const std::vector<Index>& values,
                                const ExperimentConfig& cfg,
                                const std::function<void(const TimingRecord&)>& sink) {
  if (values.empty()) {
    throw ContractViolation("sweep: no sweep values");
  }
  if (!std::is_sorted(values.begin(), values.end())) {
    throw ContractViolation("sweep: values must be ascending");
  }
  std::vector<TimingRecord> records;
  for (const Index value : values) {
    ExperimentConfig point = cfg;
    if (axis == SweepAxis::observations) {
      point.m = value;
    } else {
      point.d = value;
      point.m = cfg.m > 0 ? cfg.m : 40;
    }
    const Instance instance = make_instance(point);
    for (const Method method : point.methods) {
      MethodResult r = run_method(method, instance, point, axis, value);
      records.push_back(r.timing);
      if (sink) {
        sink(r.timing);
      }
    }
  }
  return records;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ContractViolation("loglog_slope: need at least two paired points");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw ContractViolation("loglog_slope: values must be positive");
    }
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

EquivalenceSummary equivalence_suite(std::uint64_t seed, int instances) {
  EquivalenceSummary summary;
  const Rng root(seed);
  for (int k = 0; k < instances; ++k) {
    Rng rng = root.split(static_cast<std::uint64_t>(k));
    const Index dx = rng.uniform_int(1, 50);
    const Index dy = rng.uniform_int(1, 25);
    const Index n = rng.uniform_int(2, 20);

    const double spread = 0.5 + 1.5 * rng.uniform();
    Matrix members = spread * rng.standard_normal(dx, n);
    members.colwise() += rng.standard_normal(dx, 1).col(0);

    LinearObservation obs;
    obs.H = rng.standard_normal(dy, dx) / std::sqrt(static_cast<double>(dx));
    obs.rho = 0.1 + 1.9 * rng.uniform();
    obs.y_star = obs.H * rng.standard_normal(dx, 1).col(0) + rng.standard_normal(dy, 1).col(0);

    EnkfConfig cfg;
    cfg.rho = obs.rho;
    cfg.upsilon = rng.uniform();
    cfg.xi = rng.uniform();
    cfg.perturb_observations = (k % 2) == 1;

    const double diff =
        equivalence_report(Ensemble(std::move(members)), obs, cfg, mix_seed(seed + k));
    summary.differences.push_back(diff);
    summary.max_difference = std::max(summary.max_difference, diff);
  }
  return summary;
}

bool MomentCheck::passed(double z_limit, double cov_limit) const {
  return mean_z.size() > 0 && mean_z.maxCoeff() <= z_limit && cov_relative_error <= cov_limit;
}

MomentCheck matheron_moment_check(std::uint64_t seed, Index draws) {
  if (draws < 2) {
    throw ContractViolation("matheron_moment_check: need at least two draws");
  }
  GaussianBelief prior;
  prior.mean = Vector(3);
  prior.mean << 0.5, -1.0, 2.0;
  prior.cov = Matrix(3, 3);
  prior.cov << 2.0, 0.6, 0.3,  //
      0.6, 1.5, -0.4,          //
      0.3, -0.4, 1.0;
  LinearObservation obs;
  obs.H = Matrix(2, 3);
  obs.H << 1.0, 0.5, 0.0,  //
      0.0, -1.0, 2.0;
  obs.rho = 0.5;
  obs.y_star = Vector(2);
  obs.y_star << 1.2, 0.3;

  const JointGaussian joint = make_joint(prior, obs);
  const GaussianBelief exact = condition(joint, obs.y_star);

  Rng rng(seed);
  const auto [xs, ys] = sample_joint(joint, draws, rng);
  const Matrix out = matheron_exact(joint, xs, ys, obs.y_star);

  MomentCheck check;
  check.draws = draws;
  check.exact_mean = exact.mean;
  check.exact_cov = exact.cov;
  check.empirical_mean = out.rowwise().mean();
  const Matrix centered = out.colwise() - check.empirical_mean;
  check.empirical_cov = centered * centered.transpose() / static_cast<double>(draws - 1);
  const Vector standard_error = (exact.cov.diagonal() / static_cast<double>(draws)).cwiseSqrt();
  check.mean_z = (check.empirical_mean - exact.mean).cwiseAbs().cwiseQuotient(standard_error);
  check.cov_relative_error = (check.empirical_cov - exact.cov).norm() / exact.cov.norm();
  return check;
}

}  // namespace menkf
