// tests/support/testing.hpp

// Copyright 2026 The zintent Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>

#include "zintent/matrix.hpp"
#include "zintent/rng.hpp"

namespace zintent::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double stddev = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = stddev * rng.normal();
  return m;
}

// Relative error with a small floor so that near-zero entries compare absolutely.
inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
  return std::abs(analytic - numeric) / denom;
}

// Largest relative error between `analytic` and central differences of `loss`
// with respect to every entry of `x`. `loss` must read `x` by reference.
inline double max_gradient_error(const std::function<double()>& loss, Matrix& x, const Matrix& analytic,
                                 double h = 1e-6) {
  double worst = 0.0;
  auto xs = x.values();
  auto gs = analytic.values();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double keep = xs[i];
    xs[i] = keep + h;
    const double up = loss();
    xs[i] = keep - h;
    const double down = loss();
    xs[i] = keep;
    worst = std::max(worst, relative_error(gs[i], (up - down) / (2.0 * h)));
  }
  return worst;
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  return worst;
}

}  // namespace zintent::testing
