// core/src/layers.cpp

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

#include "zintent/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "zintent/errors.hpp"

namespace zintent {

Dense Dense::random(std::size_t in, std::size_t out, double stddev, Rng& rng) {
  Dense d{Matrix(in, out), Matrix(1, out)};
  for (double& v : d.w.values()) v = stddev * rng.normal();
  return d;
}

Matrix linear_forward(const Matrix& x, const Matrix& w, const Matrix& b) {
  if (x.cols() != w.rows()) {
    throw DimensionError("linear_forward: input " + x.shape() + " vs weight " + w.shape());
  }
  if (b.rows() != 1 || b.cols() != w.cols()) {
    throw DimensionError("linear_forward: bias " + b.shape() + " vs weight " + w.shape());
  }
  Matrix out = matmul(x, w);
  auto bias = b.row(0);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
  }
  require_finite(out, "linear_forward");
  return out;
}

LinearGrads linear_backward(const Matrix& x, const Matrix& w, const Matrix& grad_out) {
  if (x.cols() != w.rows() || grad_out.rows() != x.rows() || grad_out.cols() != w.cols()) {
    throw DimensionError("linear_backward: input " + x.shape() + ", weight " + w.shape() +
                         ", grad " + grad_out.shape());
  }
  return {matmul_nt(grad_out, w), matmul_tn(x, grad_out), column_sums(grad_out)};
}

Matrix relu_forward(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

Matrix relu_backward(const Matrix& x, const Matrix& grad_out) {
  if (x.rows() != grad_out.rows() || x.cols() != grad_out.cols()) {
    throw DimensionError("relu_backward: " + x.shape() + " vs " + grad_out.shape());
  }
  Matrix out = grad_out;
  auto xv = x.values();
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (xv[i] <= 0.0) o[i] = 0.0;
  }
  return out;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out = logits;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double sum = 0.0;
    for (double& v : r) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : r) v /= sum;
  }
  return out;
}

CrossEntropyResult softmax_cross_entropy(const Matrix& logits, std::span<const std::size_t> labels) {
  if (labels.size() != logits.rows()) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for logits " + logits.shape());
  }
  if (logits.rows() == 0) throw EmptyInputError("softmax_cross_entropy: empty batch");
  const double n = static_cast<double>(logits.rows());
  CrossEntropyResult res{0.0, Matrix(logits.rows(), logits.cols())};
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (labels[i] >= logits.cols()) {
      throw IndexError("softmax_cross_entropy: label " + std::to_string(labels[i]) +
                       " out of range for " + std::to_string(logits.cols()) + " classes");
    }
    auto r = logits.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double sum = 0.0;
    for (double v : r) sum += std::exp(v - mx);
    const double log_sum = std::log(sum);
    res.loss += -(r[labels[i]] - mx - log_sum);
    auto g = res.grad_logits.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) g[j] = std::exp(r[j] - mx - log_sum) / n;
    g[labels[i]] -= 1.0 / n;
  }
  res.loss /= n;
  if (!std::isfinite(res.loss)) throw NumericError("softmax_cross_entropy: non-finite loss");
  return res;
}

Matrix mean_pool(const Matrix& frames) {
  if (frames.rows() == 0) throw EmptyInputError("mean_pool: zero rows");
  Matrix out = column_sums(frames);
  const double inv = 1.0 / static_cast<double>(frames.rows());
  for (double& v : out.values()) v *= inv;
  return out;
}

Matrix mean_pool_backward(const Matrix& grad_pooled, std::size_t rows) {
  if (grad_pooled.rows() != 1) throw DimensionError("mean_pool_backward: expected row vector");
  if (rows == 0) throw EmptyInputError("mean_pool_backward: zero rows");
  Matrix out(rows, grad_pooled.cols());
  const double inv = 1.0 / static_cast<double>(rows);
  auto g = grad_pooled.row(0);
  for (std::size_t i = 0; i < rows; ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = g[j] * inv;
  }
  return out;
}

Matrix l2_normalize(const Matrix& v) {
  if (v.rows() != 1) throw DimensionError("l2_normalize: expected row vector, got " + v.shape());
  const double n = l2_norm(v.row(0));
  if (!(n > 0.0)) throw DegenerateVectorError("l2_normalize: zero vector");
  return scale(v, 1.0 / n);
}

Matrix l2_normalize_rows(const Matrix& x) {
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double n = l2_norm(r);
    if (!(n > 0.0)) throw DegenerateVectorError("l2_normalize_rows: zero row " + std::to_string(i));
    for (double& v : r) v /= n;
  }
  return out;
}

Matrix l2_normalize_rows_backward(const Matrix& x, const Matrix& grad_out) {
  if (x.rows() != grad_out.rows() || x.cols() != grad_out.cols()) {
    throw DimensionError("l2_normalize_rows_backward: " + x.shape() + " vs " + grad_out.shape());
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto xr = x.row(i);
    auto gr = grad_out.row(i);
    const double n = l2_norm(xr);
    if (!(n > 0.0)) throw DegenerateVectorError("l2_normalize_rows_backward: zero row");
    // y = x / n; dy -> (g - y (y . g)) / n
    const double yg = dot(xr, gr) / n;
    auto o = out.row(i);
    for (std::size_t j = 0; j < xr.size(); ++j) o[j] = (gr[j] - (xr[j] / n) * yg) / n;
  }
  return out;
}

double cosine_similarity(const Matrix& u, const Matrix& v) {
  if (u.size() != v.size()) {
    throw DimensionError("cosine_similarity: " + u.shape() + " vs " + v.shape());
  }
  const double nu = l2_norm(u.values());
  const double nv = l2_norm(v.values());
  if (!(nu > 0.0) || !(nv > 0.0)) throw DegenerateVectorError("cosine_similarity: zero vector");
  const double c = dot(u.values(), v.values()) / (nu * nv);
  return std::clamp(c, -1.0, 1.0);
}

DropoutResult dropout_forward(const Matrix& x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ConfigError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  DropoutResult res{x, Matrix(x.rows(), x.cols(), 1.0), 1.0};
  if (!training || rate == 0.0) return res;
  res.keep_scale = 1.0 / (1.0 - rate);
  auto o = res.output.values();
  auto m = res.mask.values();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (rng.uniform() < rate) {
      m[i] = 0.0;
      o[i] = 0.0;
    } else {
      o[i] *= res.keep_scale;
    }
  }
  return res;
}

Matrix dropout_backward(const DropoutResult& fwd, const Matrix& grad_out) {
  Matrix out = hadamard(grad_out, fwd.mask);
  if (fwd.keep_scale != 1.0) {
    for (double& v : out.values()) v *= fwd.keep_scale;
  }
  return out;
}

}  // namespace zintent
