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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances and problem sizes are pinned below.

#include "menkf/ensemble.hpp"
#include "menkf/experiment.hpp"
#include "menkf/gaussian.hpp"
#include "menkf/kriging.hpp"
#include "menkf/letkf.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace menkf;

namespace {

// Criterion 1
constexpr int kEquivalenceInstances = 100;
constexpr double kEquivalenceTolerance = 1e-9;
constexpr double kEquivalenceBudgetS = 5.0;
// Criterion 2
constexpr Index kMomentDraws = 200000;
constexpr double kMomentZ = 4.0;
constexpr double kMomentCovRelative = 0.05;
constexpr double kMomentBudgetS = 10.0;
// Criterion 3
constexpr int kKalmanInstances = 100;
constexpr Index kKalmanMaxDim = 20;
constexpr double kKalmanTolerance = 1e-10;
// Criterion 4
constexpr Index kConvergenceDx = 20;
constexpr Index kConvergenceDy = 10;
constexpr int kConvergenceSeeds = 20;
const std::vector<Index> kConvergenceSizes{100, 1000, 10000};
constexpr double kConvergenceSlopeLow = -0.7;
constexpr double kConvergenceSlopeHigh = -0.3;
constexpr double kConvergenceBudgetS = 60.0;
// Criterion 5
constexpr int kAccuracySeeds = 10;
constexpr double kAccuracyRelative = 0.25;
constexpr double kAccuracyBudgetS = 60.0;
// Criterion 6
constexpr Index kScalingEnsemble = 40;
constexpr Index kScalingFixedD = 800;
const std::vector<Index> kScalingM{100, 200, 400, 800};
constexpr Index kScalingFixedM = 40;
const std::vector<Index> kScalingD{200, 400, 600, 800};
constexpr int kScalingRuns = 11;
constexpr double kGpFitSlopeLow = 2.3;
constexpr double kGpFitSlopeHigh = 3.5;
constexpr double kEnsembleFitSlopeMax = 1.8;
constexpr double kEnsemblePredictSlopeMax = 1.3;
constexpr double kScalingBudgetS = 600.0;
// Criterion 7
constexpr int kSpreadSeeds = 10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Outcome {
  bool pass;
  std::string detail;
};

Outcome equivalence() {
  const auto t0 = Clock::now();
  const EquivalenceSummary s = equivalence_suite(2026, kEquivalenceInstances);
  const double elapsed = seconds_since(t0);
  const bool ok = s.differences.size() == std::size_t(kEquivalenceInstances) &&
                  s.max_difference <= kEquivalenceTolerance && elapsed < kEquivalenceBudgetS;
  return {ok, "max relative difference " + fmt(s.max_difference) + " (<= " +
                  fmt(kEquivalenceTolerance) + ") over " + std::to_string(s.differences.size()) +
                  " instances in " + fmt(elapsed) + " s"};
}

Outcome moment_matching() {
  const auto t0 = Clock::now();
  const MomentCheck c = matheron_moment_check(2026, kMomentDraws);
  const double elapsed = seconds_since(t0);
  // Recompute the empirical summary against the explicit-inverse posterior.
  Matrix h(2, 3);
  h << 1.0, 0.5, 0.0, 0.0, -1.0, 2.0;
  const oracle::Posterior ref = oracle::condition(
      (Vector(3) << 0.5, -1.0, 2.0).finished(),
      (Matrix(3, 3) << 2.0, 0.6, 0.3, 0.6, 1.5, -0.4, 0.3, -0.4, 1.0).finished(), h, 0.5,
      (Vector(2) << 1.2, 0.3).finished());
  double zmax = 0.0;
  for (Index i = 0; i < 3; ++i) {
    const double se = std::sqrt(ref.cov(i, i) / double(kMomentDraws));
    zmax = std::max(zmax, std::abs(c.empirical_mean(i) - ref.mean(i)) / se);
  }
  const double cov_err = oracle::frobenius_relative(c.empirical_cov, ref.cov);
  const bool ok = c.passed(kMomentZ, kMomentCovRelative) && zmax <= kMomentZ &&
                  cov_err <= kMomentCovRelative && elapsed < kMomentBudgetS;
  return {ok, "max mean z " + fmt(zmax) + " (<= 4), covariance error " + fmt(cov_err) +
                  " (<= 0.05), " + std::to_string(kMomentDraws) + " draws in " + fmt(elapsed) +
                  " s"};
}

Outcome kalman_equals_conditioning() {
  Rng root(31);
  double worst = 0.0;
  for (int t = 0; t < kKalmanInstances; ++t) {
    Rng rng = root.split(std::uint64_t(t));
    const Index dx = rng.uniform_int(1, kKalmanMaxDim);
    const Index dy = rng.uniform_int(1, kKalmanMaxDim);
    const GaussianBelief prior{rng.standard_normal(dx, 1), oracle::random_spd(dx, rng)};
    const LinearObservation obs{rng.standard_normal(dy, dx), 0.1 + rng.uniform(),
                                rng.standard_normal(dy, 1)};
    const GaussianBelief a = kalman_update(prior, obs);
    const GaussianBelief b = condition(make_joint(prior, obs), obs.y_star);
    worst = std::max({worst, max_relative_difference(a.mean, b.mean),
                      max_relative_difference(a.cov, b.cov)});
  }
  return {worst <= kKalmanTolerance, "max relative difference " + fmt(worst) + " (<= 1e-10) over " +
                                         std::to_string(kKalmanInstances) + " instances"};
}

Outcome large_ensemble_convergence() {
  const auto t0 = Clock::now();
  Rng setup(41);
  const GaussianBelief prior{setup.standard_normal(kConvergenceDx, 1),
                             oracle::random_spd(kConvergenceDx, setup, 0.2, 2.0)};
  const double rho = 0.5;
  const LinearObservation obs{
      setup.standard_normal(kConvergenceDy, kConvergenceDx) / std::sqrt(double(kConvergenceDx)),
      rho, setup.standard_normal(kConvergenceDy, 1)};
  const GaussianBelief exact = condition(make_joint(prior, obs), obs.y_star);
  const double mean_scale = std::sqrt(exact.cov.trace());
  EnkfConfig cfg;
  cfg.rho = rho;
  cfg.perturb_observations = true;

  std::vector<double> sizes, errors;
  std::ostringstream detail;
  for (const Index n : kConvergenceSizes) {
    double total = 0.0;
    for (int s = 0; s < kConvergenceSeeds; ++s) {
      Rng rng(mix_seed(std::uint64_t(n) * 1000 + std::uint64_t(s)));
      Rng ens_rng = rng.split(1);
      Rng noise_rng = rng.split(2);
      const Ensemble ens(sample(prior, n, ens_rng));
      const Ensemble post = enkf_analysis(ens, obs, cfg, &noise_rng);
      const EnsembleMoments m = moments(post);
      total += (m.mean - exact.mean).norm() / mean_scale +
               oracle::frobenius_relative(m.covariance(), exact.cov);
    }
    sizes.push_back(double(n));
    errors.push_back(total / kConvergenceSeeds);
    detail << "N=" << n << " err " << fmt(errors.back()) << "; ";
  }
  const double slope = loglog_slope(sizes, errors);
  const double elapsed = seconds_since(t0);
  const bool ok = slope >= kConvergenceSlopeLow && slope <= kConvergenceSlopeHigh &&
                  elapsed < kConvergenceBudgetS;
  return {ok, detail.str() + "slope " + fmt(slope) + " (in [-0.7, -0.3]) in " + fmt(elapsed) + " s"};
}

Outcome kriging_accuracy() {
  const auto t0 = Clock::now();
  std::vector<double> gp, enkf, letkf, prior;
  for (int s = 0; s < kAccuracySeeds; ++s) {
    ExperimentConfig cfg;
    cfg.d = 200;
    cfg.m = 40;
    cfg.n_ens = 400;
    cfg.perturb_obs = true;
    cfg.runs = 1;
    cfg.draws = 0;
    cfg.seed = std::uint64_t(100 + s);
    const Instance inst = make_instance(cfg);
    gp.push_back(run_method(Method::gp, inst, cfg).timing.rmse);
    enkf.push_back(run_method(Method::enkf, inst, cfg).timing.rmse);
    letkf.push_back(run_method(Method::letkf, inst, cfg).timing.rmse);
    prior.push_back(oracle::rmse(Vector::Zero(cfg.d), inst.problem.truth));
  }
  const double g = median(gp), e = median(enkf), l = median(letkf), p = median(prior);
  const double elapsed = seconds_since(t0);
  const bool ok = std::abs(e - g) <= kAccuracyRelative * g &&
                  std::abs(l - g) <= kAccuracyRelative * g && g < p && e < p && l < p &&
                  elapsed < kAccuracyBudgetS;
  return {ok, "median rmse gp " + fmt(g) + ", enkf " + fmt(e) + " (" + fmt(e / g - 1.0) +
                  "), letkf " + fmt(l) + " (" + fmt(l / g - 1.0) + "), prior mean " + fmt(p) +
                  " in " + fmt(elapsed) + " s"};
}

Outcome scaling_exponents() {
  const auto t0 = Clock::now();
  const auto series = [](const std::vector<TimingRecord>& recs, Method m, bool fit) {
    std::vector<double> x, y;
    for (const TimingRecord& r : recs) {
      if (r.method != m) continue;
      x.push_back(double(r.axis_value));
      y.push_back(fit ? r.fit_time_s : r.predict_time_s);
    }
    return std::make_pair(x, y);
  };
  const auto slope = [&](const std::vector<TimingRecord>& recs, Method m, bool fit) {
    const auto [x, y] = series(recs, m, fit);
    return loglog_slope(x, y);
  };

  ExperimentConfig cfg;
  cfg.n_ens = kScalingEnsemble;
  cfg.runs = kScalingRuns;
  cfg.draws = 0;
  cfg.seed = 7;
  ExperimentConfig obs_cfg = cfg;
  obs_cfg.d = kScalingFixedD;
  const auto by_m = sweep(SweepAxis::observations, kScalingM, obs_cfg);
  ExperimentConfig dim_cfg = cfg;
  dim_cfg.m = kScalingFixedM;
  const auto by_d = sweep(SweepAxis::dimensions, kScalingD, dim_cfg);

  const double gp_fit = slope(by_m, Method::gp, true);
  const double enkf_fit = slope(by_m, Method::enkf, true);
  const double letkf_fit = slope(by_m, Method::letkf, true);
  const double enkf_pred = slope(by_d, Method::enkf, false);
  const double letkf_pred = slope(by_d, Method::letkf, false);
  const double elapsed = seconds_since(t0);
  const bool ok = gp_fit >= kGpFitSlopeLow && gp_fit <= kGpFitSlopeHigh &&
                  enkf_fit <= kEnsembleFitSlopeMax && letkf_fit <= kEnsembleFitSlopeMax &&
                  enkf_pred <= kEnsemblePredictSlopeMax && letkf_pred <= kEnsemblePredictSlopeMax &&
                  elapsed < kScalingBudgetS;
  return {ok, "fit slope vs m: gp " + fmt(gp_fit) + " (in [2.3, 3.5]), enkf " + fmt(enkf_fit) +
                  ", letkf " + fmt(letkf_fit) + " (<= 1.8); predict slope vs d: enkf " +
                  fmt(enkf_pred) + ", letkf " + fmt(letkf_pred) + " (<= 1.3); N=" +
                  std::to_string(kScalingEnsemble) + ", " + fmt(elapsed) + " s"};
}

Outcome spread_deficit() {
  int holds = 0;
  double worst_ratio = 0.0;
  for (int s = 0; s < kSpreadSeeds; ++s) {
    ExperimentConfig cfg;
    cfg.d = 200;
    cfg.perturb_obs = false;
    cfg.runs = 1;
    cfg.draws = 0;
    cfg.methods = {Method::gp, Method::enkf};
    cfg.seed = std::uint64_t(200 + s);
    const Instance inst = make_instance(cfg);
    const MethodResult enkf = run_method(Method::enkf, inst, cfg);
    const PosteriorSummary exact = gp_fit_predict(inst.problem);
    const double ensemble_trace = enkf.std.squaredNorm();
    const double exact_trace = exact.std.squaredNorm();
    holds += ensemble_trace <= exact_trace ? 1 : 0;
    worst_ratio = std::max(worst_ratio, ensemble_trace / exact_trace);
  }
  return {holds == kSpreadSeeds, std::to_string(holds) + "/" + std::to_string(kSpreadSeeds) +
                                     " seeds with ensemble trace <= exact trace, max ratio " +
                                     fmt(worst_ratio)};
}

Outcome invariants() {
  std::vector<std::string> failed;
  const auto require = [&](bool ok, const char* name) {
    if (!ok) failed.emplace_back(name);
  };
  const auto valid_cov = [](const Matrix& c) { return is_symmetric(c) && is_psd(c); };

  Rng rng(51);
  const Index dx = 12, dy = 5, n = 15;
  const GaussianBelief prior{rng.standard_normal(dx, 1), oracle::random_spd(dx, rng)};
  const LinearObservation obs{rng.standard_normal(dy, dx), 0.4, rng.standard_normal(dy, 1)};
  const JointGaussian joint = make_joint(prior, obs);
  const GaussianBelief post = condition(joint, obs.y_star);
  require(valid_cov(joint.block_cov()), "joint covariance symmetric PSD");
  require(valid_cov(post.cov), "conditional covariance symmetric PSD");
  require(valid_cov(kalman_update(prior, obs).cov), "Kalman covariance symmetric PSD");

  const Matrix members = sample(prior, n, rng);
  EnkfConfig cfg;
  cfg.rho = 0.4;
  cfg.xi = 0.1;
  const Ensemble ens(members);
  require(valid_cov(moments(ens, cfg.xi).covariance()), "ensemble covariance symmetric PSD");
  require(valid_cov(moments(enkf_analysis(ens, obs, cfg), cfg.xi).covariance()),
          "analysis covariance symmetric PSD");
  const GridGeometry grid = GridGeometry::unit(dx, {1, 4, 7, 10});
  const LocalizationConfig loc;
  const Ensemble local = letkf_analysis(ens, grid, rng.standard_normal(4, 1), 0.4, loc);
  require(valid_cov(moments(local).covariance()), "local analysis covariance symmetric PSD");
  require(valid_cov(gram(GridGeometry::unit(100), {}, 0.0)), "gram symmetric PSD");
  const KrigingProblem problem = [&] {
    Rng a(1), b(2);
    return synthesize_problem(GridGeometry::unit(50, observation_sites(50, 10, SiteLayout::even)),
                              {}, 0.2, a, b);
  }();
  require(valid_cov(condition(make_joint(problem.prior(), problem.observation()), problem.y_star).cov),
          "kriging posterior covariance symmetric PSD");

  // Translation equivariance.
  const Vector c = rng.standard_normal(dx, 1);
  GaussianBelief shifted = prior;
  shifted.mean += c;
  const GaussianBelief post_shift = condition(make_joint(shifted, obs), obs.y_star + obs.H * c);
  require(max_relative_difference(post_shift.mean, post.mean + c) <= 1e-10 &&
              max_relative_difference(post_shift.cov, post.cov) <= 1e-10,
          "conditioning translation equivariance");
  LinearObservation obs_shift = obs;
  obs_shift.y_star += obs.H * c;
  require(max_relative_difference(
              enkf_analysis(Ensemble(members.colwise() + c), obs_shift, cfg).members(),
              enkf_analysis(ens, obs, cfg).members().colwise() + c) <= 1e-10,
          "ensemble analysis translation equivariance");
  require(max_relative_difference(moments(Ensemble(members.colwise() + c)).deviations,
                                  moments(ens).deviations) <= 1e-12,
          "deviation translation invariance");

  // Degenerate ensemble.
  Matrix flat(dx, n);
  flat.colwise() = prior.mean;
  const Ensemble degenerate(flat);
  require(enkf_analysis(degenerate, obs, cfg).members() == flat, "degenerate EnKF no-op");
  require(empirical_matheron(degenerate, obs, cfg).members() == flat,
          "degenerate empirical Matheron no-op");
  require(letkf_analysis(degenerate, grid, Vector::Ones(4), 0.4, loc).members() == flat,
          "degenerate LETKF no-op");
  require(equivalence_report(degenerate, obs, cfg) == 0.0, "degenerate equivalence report");

  // Taper compact support.
  bool support = true;
  for (double r : {0.1, 0.37, 1.0}) {
    const LocalizationConfig gc{r, Taper::gaspari_cohn, 1.0};
    const LocalizationConfig box{r, Taper::boxcar, 1.0};
    for (int k = 0; k <= 100; ++k) {
      const double dist = 4.0 * r * k / 100.0;
      const double w = taper_weight(dist, gc);
      support = support && w >= 0.0 && w <= 1.0 && (dist < 2.0 * r || w == 0.0);
      support = support && (dist <= r || taper_weight(dist, box) == 0.0);
    }
  }
  require(support, "taper compact support");

  // Reproducibility per seed.
  ExperimentConfig exp;
  exp.d = 60;
  exp.m = 12;
  exp.n_ens = 25;
  exp.runs = 1;
  exp.draws = 2;
  exp.perturb_obs = true;
  exp.seed = 77;
  bool same = true;
  for (Method m : {Method::gp, Method::enkf, Method::letkf}) {
    const MethodResult a = run_method(m, exp);
    const MethodResult b = run_method(m, exp);
    same = same && a.mean == b.mean && a.std == b.std && a.draws == b.draws &&
           a.timing.rmse == b.timing.rmse;
  }
  Rng s1(9), s2(9);
  same = same && sample(prior, 5, s1) == sample(prior, 5, s2);
  same = same && equivalence_suite(5, 10).differences == equivalence_suite(5, 10).differences;
  require(same, "seeded reproducibility");

  std::string detail = failed.empty() ? "all invariant checks hold" : "failed:";
  for (const auto& f : failed) detail += " [" + f + "]";
  return {failed.empty(), detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "EnKF equals empirical Matheron", equivalence},
      {2, "pathwise update matches conditional moments", moment_matching},
      {3, "Kalman update equals conditioning", kalman_equals_conditioning},
      {4, "perturbed EnKF converges to the exact posterior", large_ensemble_convergence},
      {5, "kriging accuracy of ensemble methods", kriging_accuracy},
      {6, "fit and predict scaling exponents", scaling_exponents},
      {7, "ensemble spread deficit without perturbation", spread_deficit},
      {8, "invariant suite", invariants},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::printf("criterion %d %s: %s: %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
