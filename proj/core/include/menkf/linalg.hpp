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

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace menkf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when an operation's preconditions do not hold (shapes, ranges).
class ContractViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Base for failures of the numerics themselves, as opposed to bad input.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A covariance that should be positive definite could not be factorized.
class SingularCovariance : public NumericalError {
public:
  SingularCovariance(const std::string& what, double smallest_pivot)
      : NumericalError(what), smallest_pivot_(smallest_pivot) {}

  double smallest_pivot() const noexcept { return smallest_pivot_; }

private:
  double smallest_pivot_;
};

/// Diagonal loading used before a symmetric positive-definite factorization.
/// The first attempt uses `initial`; each failure multiplies the jitter by
/// `factor` (starting from `start` when the jitter is zero) until `maximum`
/// has been tried.
struct JitterPolicy {
  double initial = 1e-10;
  double maximum = 1e-6;
  double factor = 10.0;
  double start = 1e-10;

  static JitterPolicy none() { return {0.0, 0.0, 10.0, 0.0}; }
  /// No loading unless the factorization fails.
  static JitterPolicy on_failure() { return {0.0, 1e-6, 10.0, 1e-10}; }

  /// Next jitter to try after `current` failed, or a negative value when
  /// the policy is exhausted.
  double next(double current) const;
};

/// Cholesky factor of (A + jitter * I), with the jitter escalated per policy.
/// Never forms an explicit inverse.
class SpdFactor {
public:
  SpdFactor() = default;
  explicit SpdFactor(const Matrix& a, JitterPolicy policy = {});

  Index size() const { return llt_.rows(); }
  double jitter() const { return jitter_; }

  /// (A + jitter I)^{-1} b
  Matrix solve(const Matrix& b) const;
  Vector solve(const Vector& b) const;

  /// L^{-1} b, where L is the lower Cholesky factor.
  Matrix half_solve(const Matrix& b) const;

  Matrix lower() const { return llt_.matrixL(); }

private:
  Eigen::LLT<Matrix> llt_;
  double jitter_ = 0.0;
};

/// (A + A^T) / 2
inline Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Throws ContractViolation unless `a` is `rows` x `cols`.
void require_shape(const Matrix& a, Index rows, Index cols, const char* name);
void require_size(const Vector& v, Index size, const char* name);

/// max_ij |a_ij - b_ij| / max(|a_ij|, |b_ij|, 1)
double max_relative_difference(const Matrix& a, const Matrix& b);

/// True when `a` is symmetric to `rel_tol` relative to its largest entry.
bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);

/// True when every eigenvalue of sym(a) is >= -rel_tol * ||a||.
bool is_psd(const Matrix& a, double rel_tol = 1e-10);

}  // namespace menkf
