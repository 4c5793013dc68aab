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

#include "menkf/letkf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace menkf {

void LocalizationConfig::check() const {
  if (!(radius > 0.0)) {
    std::ostringstream msg;
    msg << "localization radius must be > 0, got " << radius;
    throw ContractViolation(msg.str());
  }
  if (!(inflation >= 1.0)) {
    std::ostringstream msg;
    msg << "inflation must be >= 1, got " << inflation;
    throw ContractViolation(msg.str());
  }
}

GridGeometry GridGeometry::unit(Index d, std::vector<Index> obs_indices) {
  GridGeometry g;
  g.positions.resize(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) {
    g.positions[static_cast<std::size_t>(i)] =
        d > 1 ? static_cast<double>(i) / static_cast<double>(d - 1) : 0.0;
  }
  g.obs_indices = std::move(obs_indices);
  return g;
}

void GridGeometry::check() const {
  for (std::size_t i = 1; i < positions.size(); ++i) {
    if (!(positions[i] > positions[i - 1])) {
      throw ContractViolation("grid positions must be strictly increasing");
    }
  }
  std::vector<Index> sorted = obs_indices;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k] < 0 || sorted[k] >= dim()) {
      std::ostringstream msg;
      msg << "observation index " << sorted[k] << " outside [0, " << dim() << ")";
      throw ContractViolation(msg.str());
    }
    if (k > 0 && sorted[k] == sorted[k - 1]) {
      std::ostringstream msg;
      msg << "observation index " << sorted[k] << " is repeated";
      throw ContractViolation(msg.str());
    }
  }
}

double taper_weight(double distance, const LocalizationConfig& cfg) {
  if (!(distance >= 0.0)) {
    throw ContractViolation("taper_weight: distance must be >= 0");
  }
  if (cfg.taper == Taper::boxcar) {
    return distance <= cfg.radius ? 1.0 : 0.0;
  }
  // Gaspari & Cohn (1999), fifth-order piecewise rational, support 2c.
  const double r = distance / cfg.radius;
  if (r <= 1.0) {
    return (((-0.25 * r + 0.5) * r + 0.625) * r - 5.0 / 3.0) * r * r + 1.0;
  }
  if (r < 2.0) {
    const double w =
        ((((r / 12.0 - 0.5) * r + 0.625) * r + 5.0 / 3.0) * r - 5.0) * r + 4.0 - 2.0 / (3.0 * r);
    return std::clamp(w, 0.0, 1.0);
  }
  return 0.0;
}

namespace {

// -1 / (sqrt(1+l) (1 + sqrt(1+l))) == ((1+l)^{-1/2} - 1) / l, finite at l = 0.
double shrink_coefficient(double lambda) {
  const double root = std::sqrt(1.0 + lambda);
  return -1.0 / (root * (1.0 + root));
}

[[noreturn]] void local_failure(Index state) {
  std::ostringstream msg;
  msg << "local analysis eigendecomposition failed at state index " << state;
  throw LocalAnalysisError(msg.str(), state);
}

}  // namespace

Ensemble letkf_analysis(const Ensemble& ens, const GridGeometry& geom, const Vector& y_star,
                        double rho, const LocalizationConfig& cfg, LocalSolve route) {
  cfg.check();
  geom.check();
  if (!(rho > 0.0)) {
    throw ContractViolation("letkf_analysis: observation noise std must be > 0");
  }
  if (geom.dim() != ens.dim()) {
    std::ostringstream msg;
    msg << "grid has " << geom.dim() << " points but ensemble members have dimension "
        << ens.dim();
    throw ContractViolation(msg.str());
  }
  require_size(y_star, geom.num_obs(), "y_star");

  const Matrix& xs = ens.members();
  const Index d = ens.dim();
  const Index n = ens.size();
  const Index m = geom.num_obs();
  const double root_n1 = std::sqrt(static_cast<double>(n) - 1.0);

  const Vector x_bar = ens.mean();
  const Matrix x_dev = (cfg.inflation / root_n1) * (xs.colwise() - x_bar);
  Matrix y_dev(m, n);
  Vector innovation(m);
  for (Index j = 0; j < m; ++j) {
    const Index site = geom.obs_indices[static_cast<std::size_t>(j)];
    y_dev.row(j) = x_dev.row(site);
    innovation(j) = y_star(j) - x_bar(site);
  }

  // Local observation sets.
  std::vector<std::vector<Index>> local_obs(static_cast<std::size_t>(d));
  std::vector<std::vector<double>> local_scale(static_cast<std::size_t>(d));
  bool any_observation_space = false;
  for (Index i = 0; i < d; ++i) {
    const double here = geom.positions[static_cast<std::size_t>(i)];
    auto& obs = local_obs[static_cast<std::size_t>(i)];
    auto& scale = local_scale[static_cast<std::size_t>(i)];
    for (Index j = 0; j < m; ++j) {
      const double there = geom.positions[static_cast<std::size_t>(geom.obs_indices[j])];
      const double w = taper_weight(std::abs(here - there), cfg);
      if (w > kMinLocalWeight) {
        obs.push_back(j);
        scale.push_back(std::sqrt(w) / rho);
      }
    }
    const auto ml = static_cast<Index>(obs.size());
    if (ml > 0 && (route == LocalSolve::observation_space ||
                   (route == LocalSolve::automatic && ml <= n))) {
      any_observation_space = true;
    }
  }

  // Shared products for the observation-space route.
  Matrix yy;
  Matrix xy;
  if (any_observation_space) {
    yy = y_dev * y_dev.transpose();
    xy = x_dev * y_dev.transpose();
  }

  Matrix out = xs;
  Eigen::SelfAdjointEigenSolver<Matrix> eig;
  for (Index i = 0; i < d; ++i) {
    const auto& obs = local_obs[static_cast<std::size_t>(i)];
    const auto& scale = local_scale[static_cast<std::size_t>(i)];
    const auto ml = static_cast<Index>(obs.size());
    if (ml == 0) {
      continue;
    }
    Vector s(ml);
    Vector delta(ml);
    for (Index k = 0; k < ml; ++k) {
      s(k) = scale[static_cast<std::size_t>(k)];
      delta(k) = s(k) * innovation(obs[static_cast<std::size_t>(k)]);
    }

    double mean_increment = 0.0;
    Eigen::RowVectorXd deviation(n);
    const bool observation_space =
        route == LocalSolve::observation_space || (route == LocalSolve::automatic && ml <= n);
    if (observation_space) {
      // G = S S^T with S = diag(s) Y~_L.
      Matrix g(ml, ml);
      Eigen::RowVectorXd a(ml);
      for (Index q = 0; q < ml; ++q) {
        const Index jq = obs[static_cast<std::size_t>(q)];
        a(q) = xy(i, jq) * s(q);
        for (Index p = 0; p < ml; ++p) {
          g(p, q) = s(p) * yy(obs[static_cast<std::size_t>(p)], jq) * s(q);
        }
      }
      eig.compute(g);
      if (eig.info() != Eigen::Success) {
        local_failure(i);
      }
      const Matrix& u = eig.eigenvectors();
      const Vector lambda = eig.eigenvalues().cwiseMax(0.0);
      const Eigen::RowVectorXd au = a * u;
      const Vector ud = u.transpose() * delta;
      Eigen::RowVectorXd coef(ml);
      for (Index k = 0; k < ml; ++k) {
        mean_increment += au(k) * ud(k) / (1.0 + lambda(k));
        coef(k) = au(k) * shrink_coefficient(lambda(k));
      }
      // x~_i + coef U^T diag(s) Y~_L
      const Eigen::RowVectorXd weights = (coef * u.transpose()).cwiseProduct(s.transpose());
      deviation = x_dev.row(i);
      for (Index k = 0; k < ml; ++k) {
        deviation += weights(k) * y_dev.row(obs[static_cast<std::size_t>(k)]);
      }
    } else {
      Matrix s_local(ml, n);
      for (Index k = 0; k < ml; ++k) {
        s_local.row(k) = s(k) * y_dev.row(obs[static_cast<std::size_t>(k)]);
      }
      const Matrix b = s_local.transpose() * s_local;
      eig.compute(b);
      if (eig.info() != Eigen::Success) {
        local_failure(i);
      }
      const Matrix& v = eig.eigenvectors();
      const Vector lambda = eig.eigenvalues().cwiseMax(0.0);
      const Eigen::RowVectorXd xv = x_dev.row(i) * v;
      const Vector vsd = v.transpose() * (s_local.transpose() * delta);
      Eigen::RowVectorXd shrunk(n);
      for (Index k = 0; k < n; ++k) {
        mean_increment += xv(k) * vsd(k) / (1.0 + lambda(k));
        shrunk(k) = xv(k) / std::sqrt(1.0 + lambda(k));
      }
      deviation = shrunk * v.transpose();
    }
    out.row(i).array() = root_n1 * deviation.array() + (x_bar(i) + mean_increment);
  }
  return Ensemble(std::move(out));
}

}  // namespace menkf
