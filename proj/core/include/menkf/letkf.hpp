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

#include "menkf/ensemble.hpp"
#include "menkf/linalg.hpp"

#include <vector>

namespace menkf {

enum class Taper { gaspari_cohn, boxcar };

struct LocalizationConfig {
  /// Half-width c of the taper, in grid coordinates. Gaspari-Cohn weights
  /// vanish beyond 2 * radius, boxcar weights beyond radius.
  double radius = 0.4;
  Taper taper = Taper::gaspari_cohn;
  /// Multiplies prior deviations before the analysis; >= 1.
  double inflation = 1.0;

  void check() const;
};

/// Point locations of the state entries and which entry each observation
/// samples directly.
struct GridGeometry {
  std::vector<double> positions;
  std::vector<Index> obs_indices;

  Index dim() const { return static_cast<Index>(positions.size()); }
  Index num_obs() const { return static_cast<Index>(obs_indices.size()); }

  /// d points evenly spaced over [0, 1].
  static GridGeometry unit(Index d, std::vector<Index> obs_indices = {});

  /// Positions strictly increasing, observation indices in range and unique.
  void check() const;
};

/// Taper weight in [0, 1] at a nonnegative distance.
double taper_weight(double distance, const LocalizationConfig& cfg);

/// Local weights below this are treated as zero and the observation dropped.
inline constexpr double kMinLocalWeight = 1e-6;

enum class LocalSolve {
  automatic,          ///< observation space when the local set has <= N entries
  observation_space,  ///< eigendecomposition of the m_local x m_local matrix
  ensemble_space,     ///< eigendecomposition of the N x N matrix
};

/// Raised when a local analysis fails; carries the state index.
class LocalAnalysisError : public NumericalError {
public:
  LocalAnalysisError(const std::string& what, Index state_index)
      : NumericalError(what), state_index_(state_index) {}
  Index state_index() const noexcept { return state_index_; }

private:
  Index state_index_;
};

/// Local ensemble transform analysis with R-localization: the update of
/// state entry i sees observation j with precision w_ij / rho^2, where w_ij
/// is the taper weight between their positions. Member deviations are
/// transformed by the symmetric square root (I + S^T S)^{-1/2}; entries with
/// no observation in range are returned unchanged.
///
/// Both LocalSolve routes evaluate the same algebra.
Ensemble letkf_analysis(const Ensemble& ens, const GridGeometry& geom, const Vector& y_star,
                        double rho, const LocalizationConfig& cfg,
                        LocalSolve route = LocalSolve::automatic);

}  // namespace menkf
