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

#include "menkf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace menkf {

namespace {

double smallest_ldlt_pivot(const Matrix& a) {
  if (a.size() == 0) {
    return 0.0;
  }
  Eigen::LDLT<Matrix> ldlt(a);
  return ldlt.vectorD().minCoeff();
}

}  // namespace

double JitterPolicy::next(double current) const {
  const double candidate = current > 0.0 ? current * factor : start;
  if (candidate <= current || candidate > maximum * (1.0 + 1e-9)) {
    return -1.0;
  }
  return candidate;
}

SpdFactor::SpdFactor(const Matrix& a, JitterPolicy policy) {
  if (a.rows() != a.cols()) {
    std::ostringstream msg;
    msg << "SpdFactor: matrix must be square, got " << a.rows() << "x" << a.cols();
    throw ContractViolation(msg.str());
  }
  double jitter = policy.initial;
  Matrix loaded = a;
  for (;;) {
    loaded.diagonal() = a.diagonal().array() + jitter;
    llt_.compute(loaded);
    if (llt_.info() == Eigen::Success) {
      jitter_ = jitter;
      return;
    }
    const double next = policy.next(jitter);
    if (next < 0.0) {
      break;
    }
    jitter = next;
  }
  const double pivot = smallest_ldlt_pivot(loaded);
  std::ostringstream msg;
  msg << "covariance of size " << a.rows() << " is not positive definite after jitter "
      << jitter << " (smallest pivot " << pivot << ")";
  throw SingularCovariance(msg.str(), pivot);
}

Matrix SpdFactor::solve(const Matrix& b) const {
  if (b.rows() != size()) {
    throw ContractViolation("SpdFactor::solve: right-hand side has wrong row count");
  }
  return llt_.solve(b);
}

Vector SpdFactor::solve(const Vector& b) const {
  if (b.size() != size()) {
    throw ContractViolation("SpdFactor::solve: right-hand side has wrong length");
  }
  return llt_.solve(b);
}

Matrix SpdFactor::half_solve(const Matrix& b) const {
  if (b.rows() != size()) {
    throw ContractViolation("SpdFactor::half_solve: right-hand side has wrong row count");
  }
  return llt_.matrixL().solve(b);
}

void require_shape(const Matrix& a, Index rows, Index cols, const char* name) {
  if (a.rows() != rows || a.cols() != cols) {
    std::ostringstream msg;
    msg << name << " must be " << rows << "x" << cols << ", got " << a.rows() << "x" << a.cols();
    throw ContractViolation(msg.str());
  }
}

void require_size(const Vector& v, Index size, const char* name) {
  if (v.size() != size) {
    std::ostringstream msg;
    msg << name << " must have length " << size << ", got " << v.size();
    throw ContractViolation(msg.str());
  }
}

double max_relative_difference(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ContractViolation("max_relative_difference: shape mismatch");
  }
  double worst = 0.0;
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      const double x = a(i, j);
      const double y = b(i, j);
      if (std::isnan(x) || std::isnan(y)) {
        return std::numeric_limits<double>::infinity();
      }
      const double scale = std::max({std::abs(x), std::abs(y), 1.0});
      worst = std::max(worst, std::abs(x - y) / scale);
    }
  }
  return worst;
}

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) {
    return false;
  }
  const double scale = std::max(a.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool is_psd(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) {
    return false;
  }
  if (a.size() == 0) {
    return true;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(a), Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) {
    return false;
  }
  const double norm = a.norm();
  return eig.eigenvalues().minCoeff() >= -rel_tol * norm;
}

}  // namespace menkf
