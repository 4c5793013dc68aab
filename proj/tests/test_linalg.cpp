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
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace menkf;

TEST_CASE("SpdFactor solves against an explicit inverse") {
  Rng rng(11);
  const Matrix a = oracle::random_spd(8, rng);
  const Matrix b = rng.standard_normal(8, 3);
  const SpdFactor f(a);
  REQUIRE(f.jitter() == doctest::Approx(1e-10));
  const Matrix loaded = a + 1e-10 * Matrix::Identity(8, 8);
  CHECK(max_relative_difference(f.solve(b), oracle::inverse(loaded) * b) < 1e-10);
  CHECK(max_relative_difference(SpdFactor(a, JitterPolicy::none()).solve(b), oracle::inverse(a) * b) < 1e-10);
  const Matrix l = f.lower();
  CHECK((l * l.transpose() - a).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("SpdFactor escalates jitter on a singular matrix") {
  Matrix a = Matrix::Ones(3, 3);
  const SpdFactor f(a, JitterPolicy::on_failure());
  CHECK(f.jitter() > 0.0);
  CHECK(f.jitter() <= 1e-6);
}

TEST_CASE("SpdFactor reports the smallest pivot when escalation is exhausted") {
  Matrix a = Matrix::Identity(3, 3);
  a(2, 2) = -1.0;
  try {
    SpdFactor f(a);
    FAIL("expected SingularCovariance");
  } catch (const SingularCovariance& e) {
    CHECK(e.smallest_pivot() < 0.0);
  }
  CHECK_THROWS_AS(SpdFactor(Matrix::Zero(2, 3)), ContractViolation);
  CHECK_THROWS_AS(SpdFactor(Matrix::Zero(2, 2), JitterPolicy::none()), SingularCovariance);
}

TEST_CASE("JitterPolicy steps by the factor and stops at the maximum") {
  const JitterPolicy p;
  CHECK(p.next(1e-10) == doctest::Approx(1e-9));
  CHECK(p.next(1e-7) == doctest::Approx(1e-6));
  CHECK(p.next(1e-6) < 0.0);
  CHECK(JitterPolicy::none().next(0.0) < 0.0);
  CHECK(JitterPolicy::on_failure().next(0.0) == doctest::Approx(1e-10));
}

TEST_CASE("max_relative_difference uses a unit floor") {
  Matrix a(1, 3), b(1, 3);
  a << 1e-3, 100.0, -2.0;
  b << 2e-3, 101.0, -2.0;
  CHECK(max_relative_difference(a, b) == doctest::Approx(1.0 / 101.0));
  b(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(std::isinf(max_relative_difference(a, b)));
  CHECK_THROWS_AS(max_relative_difference(a, Matrix::Zero(2, 2)), ContractViolation);
}

TEST_CASE("symmetry and PSD predicates") {
  Rng rng(3);
  Matrix a = oracle::random_spd(5, rng);
  CHECK(is_symmetric(a));
  CHECK(is_psd(a));
  a(0, 1) += 1e-6;
  CHECK_FALSE(is_symmetric(a));
  Matrix n = -Matrix::Identity(2, 2);
  CHECK_FALSE(is_psd(n));
  CHECK(is_psd(Matrix::Zero(3, 3)));
}
