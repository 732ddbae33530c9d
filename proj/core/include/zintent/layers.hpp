// core/include/zintent/layers.hpp

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

#include <cstddef>
#include <span>
#include <vector>

#include "zintent/matrix.hpp"
#include "zintent/rng.hpp"

namespace zintent {

/// Affine layer parameters: y = x * w + b, with w of shape in x out and b 1 x out.
struct Dense {
  Matrix w;
  Matrix b;

  std::size_t in_dim() const { return w.rows(); }
  std::size_t out_dim() const { return w.cols(); }

  // Gaussian init with standard deviation `stddev`; zero bias.
  static Dense random(std::size_t in, std::size_t out, double stddev, Rng& rng);

  friend bool operator==(const Dense&, const Dense&) = default;
};

struct LinearGrads {
  Matrix x;
  Matrix w;
  Matrix b;
};

Matrix linear_forward(const Matrix& x, const Matrix& w, const Matrix& b);
LinearGrads linear_backward(const Matrix& x, const Matrix& w, const Matrix& grad_out);

inline Matrix linear_forward(const Matrix& x, const Dense& d) { return linear_forward(x, d.w, d.b); }

Matrix relu_forward(const Matrix& x);
// Passes grad_out where x > 0, zero elsewhere.
Matrix relu_backward(const Matrix& x, const Matrix& grad_out);

Matrix softmax_rows(const Matrix& logits);

struct CrossEntropyResult {
  double loss = 0.0;
  Matrix grad_logits;
};

/// Mean over rows of -log softmax(row)[label]; gradient (softmax - onehot) / N.
CrossEntropyResult softmax_cross_entropy(const Matrix& logits, std::span<const std::size_t> labels);

// 1 x cols row of column means. Throws EmptyInputError on zero rows.
Matrix mean_pool(const Matrix& frames);
// Gradient of mean_pool: grad_pooled / rows broadcast over `rows` rows.
Matrix mean_pool_backward(const Matrix& grad_pooled, std::size_t rows);

// Unit-norm copy of a row vector. Throws DegenerateVectorError on a zero vector.
Matrix l2_normalize(const Matrix& v);

// Each row scaled to unit norm.
Matrix l2_normalize_rows(const Matrix& x);
// Gradient through l2_normalize_rows: (g - y (y.g)) / |x| per row.
Matrix l2_normalize_rows_backward(const Matrix& x, const Matrix& grad_out);

double cosine_similarity(const Matrix& u, const Matrix& v);

struct DropoutResult {
  Matrix output;
  // 1 for kept entries, 0 for dropped.
  Matrix mask;
  // Survivor scale, 1 / (1 - rate) in training mode.
  double keep_scale = 1.0;
};

/// Inverted dropout. Eval mode (or rate 0) is the identity and draws nothing from rng.
DropoutResult dropout_forward(const Matrix& x, double rate, Rng& rng, bool training);
Matrix dropout_backward(const DropoutResult& fwd, const Matrix& grad_out);

}  // namespace zintent
