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

#include "menkf/kriging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace menkf {

void KernelParams::check() const {
  if (!(sigma > 0.0) || !(ell > 0.0)) {
    std::ostringstream msg;
    msg << "kernel parameters must be positive (sigma=" << sigma << ", ell=" << ell << ")";
    throw ContractViolation(msg.str());
  }
}

double se_kernel(double r1, double r2, const KernelParams& p) {
  const double diff = r1 - r2;
  return p.sigma * p.sigma * std::exp(-diff * diff / (2.0 * p.ell * p.ell));
}

Matrix cross_gram(const std::vector<double>& rows, const std::vector<double>& cols,
                  const KernelParams& p) {
  p.check();
  const auto nr = static_cast<Index>(rows.size());
  const auto nc = static_cast<Index>(cols.size());
  const Eigen::Map<const Eigen::ArrayXd> a(rows.data(), nr);
  const Eigen::Map<const Eigen::ArrayXd> b(cols.data(), nc);
  Eigen::ArrayXXd sq(nr, nc);
  for (Index j = 0; j < nc; ++j) {
    sq.col(j) = (a - b(j)).square();
  }
  const double scale = -1.0 / (2.0 * p.ell * p.ell);
  return (p.sigma * p.sigma) * (scale * sq).exp().matrix();
}

namespace {

// Lower triangle evaluated column by column, then mirrored, so the result
// is exactly symmetric and costs half the exponentials.
Matrix symmetric_gram(const std::vector<double>& points, const KernelParams& p) {
  p.check();
  const auto n = static_cast<Index>(points.size());
  const Eigen::Map<const Eigen::ArrayXd> a(points.data(), n);
  const double scale = -1.0 / (2.0 * p.ell * p.ell);
  const double var = p.sigma * p.sigma;
  Matrix k(n, n);
  for (Index j = 0; j < n; ++j) {
    const Index len = n - j;
    k.col(j).tail(len) = (var * (scale * (a.tail(len) - a(j)).square()).exp()).matrix();
  }
  k.triangularView<Eigen::StrictlyUpper>() = k.transpose();
  return k;
}

}  // namespace

Matrix gram(const GridGeometry& grid, const KernelParams& p, double jitter) {
  if (!(jitter >= 0.0)) {
    throw ContractViolation("gram: jitter must be >= 0");
  }
  Matrix k = symmetric_gram(grid.positions, p);
  k.diagonal().array() += jitter;
  return k;
}

std::vector<Index> observation_sites(Index d, Index m, SiteLayout layout, Rng* rng) {
  if (m < 0 || m > d) {
    std::ostringstream msg;
    msg << "cannot place " << m << " observations on a grid of " << d << " points";
    throw ContractViolation(msg.str());
  }
  std::vector<Index> sites;
  sites.reserve(static_cast<std::size_t>(m));
  if (layout == SiteLayout::even) {
    for (Index k = 0; k < m; ++k) {
      sites.push_back(((2 * k + 1) * d) / (2 * m));
    }
    return sites;
  }
  if (rng == nullptr) {
    throw ContractViolation("random observation sites need a random generator");
  }
  // Partial Fisher-Yates.
  std::vector<Index> all(static_cast<std::size_t>(d));
  std::iota(all.begin(), all.end(), Index{0});
  for (Index k = 0; k < m; ++k) {
    const auto pick = static_cast<std::size_t>(rng->uniform_int(k, d - 1));
    std::swap(all[static_cast<std::size_t>(k)], all[pick]);
  }
  sites.assign(all.begin(), all.begin() + m);
  std::sort(sites.begin(), sites.end());
  return sites;
}

GaussianBelief KrigingProblem::prior() const {
  return {Vector::Zero(dim()), gram(grid, params, gram_jitter)};
}

LinearObservation KrigingProblem::observation() const {
  return {selection_matrix(dim(), grid.obs_indices), tau, y_star};
}

void KrigingProblem::check() const {
  grid.check();
  params.check();
  if (!(tau > 0.0)) {
    throw ContractViolation("observation noise std tau must be > 0");
  }
  require_size(truth, dim(), "truth");
  require_size(y_star, num_obs(), "y_star");
}

KrigingProblem synthesize_problem(GridGeometry grid, const KernelParams& params, double tau,
                                  const GaussianSampler& prior, Rng& truth_rng, Rng& noise_rng) {
  KrigingProblem problem;
  problem.grid = std::move(grid);
  problem.params = params;
  problem.tau = tau;
  problem.gram_jitter = default_gram_jitter(params);
  if (prior.dim() != problem.dim()) {
    throw ContractViolation("synthesize_problem: prior sampler does not match the grid");
  }
  problem.truth = prior.draw(1, truth_rng).col(0);
  problem.y_star.resize(problem.num_obs());
  for (Index j = 0; j < problem.num_obs(); ++j) {
    problem.y_star(j) = problem.truth(problem.grid.obs_indices[static_cast<std::size_t>(j)]) +
                        tau * noise_rng.normal();
  }
  problem.check();
  return problem;
}

KrigingProblem synthesize_problem(GridGeometry grid, const KernelParams& params, double tau,
                                  Rng& truth_rng, Rng& noise_rng) {
  params.check();
  const GaussianSampler prior(
      GaussianBelief{Vector::Zero(grid.dim()), gram(grid, params, default_gram_jitter(params))});
  return synthesize_problem(std::move(grid), params, tau, prior, truth_rng, noise_rng);
}

PosteriorSummary gp_fit_predict(const KrigingProblem& problem) {
  problem.check();
  const JointGaussian joint = make_joint(problem.prior(), problem.observation());
  const GaussianBelief post = condition(joint, problem.y_star);
  return {post.mean, post.cov.diagonal().cwiseMax(0.0).cwiseSqrt()};
}

std::pair<Matrix, Matrix> prior_pairs(const KrigingProblem& problem, const GaussianSampler& prior,
                                      Index count, Rng& rng) {
  Matrix xs = prior.draw(count, rng);
  Matrix ys(problem.num_obs(), count);
  for (Index j = 0; j < problem.num_obs(); ++j) {
    ys.row(j) = xs.row(problem.grid.obs_indices[static_cast<std::size_t>(j)]);
  }
  ys += problem.tau * rng.standard_normal(problem.num_obs(), count);
  return {std::move(xs), std::move(ys)};
}

Matrix gp_posterior_draws(const KrigingProblem& problem, Index count, Rng& rng) {
  problem.check();
  const GaussianBelief prior = problem.prior();
  const GaussianSampler sampler(prior);
  const auto [xs, ys] = prior_pairs(problem, sampler, count, rng);
  const JointGaussian joint = make_joint(prior, problem.observation());
  return matheron_exact(joint, xs, ys, problem.y_star);
}

void GpRegressor::fit(const KrigingProblem& problem) {
  problem_ = &problem;
  std::vector<double> sites;
  sites.reserve(problem.grid.obs_indices.size());
  for (const Index j : problem.grid.obs_indices) {
    sites.push_back(problem.grid.positions[static_cast<std::size_t>(j)]);
  }
  Matrix cyy = symmetric_gram(sites, problem.params);
  cyy.diagonal().array() += problem.gram_jitter + problem.tau * problem.tau;
  factor_ = SpdFactor(cyy);
  alpha_ = factor_.solve(problem.y_star);
}

Matrix GpRegressor::cross_covariance() const {
  const KrigingProblem& problem = *problem_;
  std::vector<double> sites;
  sites.reserve(problem.grid.obs_indices.size());
  for (const Index j : problem.grid.obs_indices) {
    sites.push_back(problem.grid.positions[static_cast<std::size_t>(j)]);
  }
  Matrix cxy = cross_gram(problem.grid.positions, sites, problem.params);
  for (Index k = 0; k < problem.num_obs(); ++k) {
    cxy(problem.grid.obs_indices[static_cast<std::size_t>(k)], k) += problem.gram_jitter;
  }
  return cxy;
}

PosteriorSummary GpRegressor::predict() const {
  if (problem_ == nullptr) {
    throw ContractViolation("GpRegressor::predict called before fit");
  }
  Matrix none;
  return predict(Matrix(problem_->dim(), 0), Matrix(problem_->num_obs(), 0), none);
}

PosteriorSummary GpRegressor::predict(const Matrix& prior_x, const Matrix& prior_y,
                                      Matrix& draws) const {
  if (problem_ == nullptr) {
    throw ContractViolation("GpRegressor::predict called before fit");
  }
  const KrigingProblem& problem = *problem_;
  const Matrix cxy = cross_covariance();
  PosteriorSummary out;
  out.mean = cxy * alpha_;
  const Matrix half = factor_.half_solve(cxy.transpose());
  const double prior_var = problem.params.sigma * problem.params.sigma + problem.gram_jitter;
  out.std = (prior_var - half.colwise().squaredNorm().transpose().array()).cwiseMax(0.0).sqrt();
  if (prior_x.cols() > 0) {
    require_shape(prior_x, problem.dim(), prior_x.cols(), "prior draws");
    require_shape(prior_y, problem.num_obs(), prior_x.cols(), "prior observation draws");
    const Matrix residual = (-prior_y).colwise() + problem.y_star;
    draws = prior_x + cxy * factor_.solve(residual);
  } else {
    draws.resize(problem.dim(), 0);
  }
  return out;
}

}  // namespace menkf
