// tests/unit/encoders_test.cpp

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

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "support/testing.hpp"
#include "zintent/encoders.hpp"
#include "zintent/errors.hpp"

namespace zintent {
namespace {

using testing::max_abs_diff;
using testing::naive_matmul;
using testing::random_matrix;

// Per-row x w + b followed by relu, written out longhand.
Matrix dense_relu(const Matrix& x, const Dense& d) {
  Matrix y = naive_matmul(x, d.w);
  for (std::size_t i = 0; i < y.rows(); ++i) {
    for (std::size_t j = 0; j < y.cols(); ++j) y(i, j) = std::max(0.0, y(i, j) + d.b(0, j));
  }
  return y;
}

Matrix column_mean(const Matrix& x) {
  Matrix m(1, x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < x.cols(); ++j) m(0, j) += x(i, j) / static_cast<double>(x.rows());
  }
  return m;
}

TEST(EncodeAudio, DuplicateFramesPoolToSingleFrame) {
  const AudioBackbone bb = AudioBackbone::create(16, 64, 5, true);
  Rng rng(1);
  const Matrix f = random_matrix(1, 16, rng);
  const Matrix ff = stack_rows(std::vector<Matrix>{f, f});
  EXPECT_LT(max_abs_diff(encode_audio(bb, ff), encode_audio(bb, f)), 1e-15);
}

TEST(EncodeAudio, ZeroFrameFollowsBiasPath) {
  const AudioBackbone bb = AudioBackbone::create(4, 6, 9, true);
  const Matrix h1 = relu_forward(bb.layer1.b);
  const Matrix expect = relu_forward(add(matmul(h1, bb.layer2.w), bb.layer2.b));
  EXPECT_LT(max_abs_diff(encode_audio(bb, Matrix(1, 4)), expect), 1e-15);
}

TEST(EncodeAudio, MatchesLonghandTwoLayerMap) {
  const AudioBackbone bb = AudioBackbone::create(16, 64, 21, true);
  Rng rng(2);
  const Matrix frames = random_matrix(7, 16, rng);
  const Matrix expect = column_mean(dense_relu(dense_relu(frames, bb.layer1), bb.layer2));
  EXPECT_LT(max_abs_diff(encode_audio(bb, frames), expect), 1e-12);
}

TEST(EncodeAudio, FrameOrderInvariant) {
  const AudioBackbone bb = AudioBackbone::create(16, 64, 22, true);
  Rng rng(3);
  const Matrix frames = random_matrix(9, 16, rng);
  std::vector<std::size_t> order(9);
  for (std::size_t i = 0; i < 9; ++i) order[i] = i;
  for (int t = 0; t < 5; ++t) {
    rng.shuffle(std::span<std::size_t>(order));
    Matrix permuted(9, 16);
    for (std::size_t i = 0; i < 9; ++i) {
      std::copy(frames.row(order[i]).begin(), frames.row(order[i]).end(), permuted.row(i).begin());
    }
    EXPECT_LT(max_abs_diff(encode_audio(bb, permuted), encode_audio(bb, frames)), 1e-12);
  }
}

TEST(EncodeAudio, Errors) {
  const AudioBackbone bb = AudioBackbone::create(16, 64, 1, true);
  EXPECT_THROW(encode_audio(bb, Matrix(0, 16)), EmptyInputError);
  EXPECT_THROW(encode_audio(bb, Matrix(3, 15)), DimensionError);
}

TEST(EncodeAudio, PureFunctionOfSeed) {
  const AudioBackbone a = AudioBackbone::create(16, 64, 77, false);
  const AudioBackbone b = AudioBackbone::create(16, 64, 77, false);
  EXPECT_EQ(a, b);
  Rng rng(4);
  const Matrix frames = random_matrix(5, 16, rng);
  EXPECT_EQ(encode_audio(a, frames), encode_audio(b, frames));
  EXPECT_NE(AudioBackbone::create(16, 64, 78, false), a);
}

TEST(EncodeText, RepeatedTokenEqualsSingle) {
  const TextBackbone bb = TextBackbone::create(50, 64, 3);
  const std::vector<TokenId> one = {7};
  const std::vector<TokenId> many = {7, 7, 7, 7};
  EXPECT_LT(max_abs_diff(encode_text(bb, many), encode_text(bb, one)), 1e-15);
}

TEST(EncodeText, OrderInvariant) {
  const TextBackbone bb = TextBackbone::create(50, 64, 3);
  std::vector<TokenId> tokens = {3, 9, 27, 41, 0, 12};
  const Matrix base = encode_text(bb, tokens);
  Rng rng(5);
  for (int t = 0; t < 5; ++t) {
    rng.shuffle(std::span<TokenId>(tokens));
    EXPECT_LT(max_abs_diff(encode_text(bb, tokens), base), 1e-12);
  }
}

TEST(EncodeText, MatchesLonghandLookup) {
  const TextBackbone bb = TextBackbone::create(30, 8, 4);
  const std::vector<TokenId> tokens = {1, 29, 5, 5, 17};
  Matrix rows(tokens.size(), 8);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = 0; j < 8; ++j) rows(i, j) = bb.token_table(tokens[i], j);
  }
  EXPECT_LT(max_abs_diff(encode_text(bb, tokens), column_mean(dense_relu(rows, bb.mixing))), 1e-12);
}

TEST(EncodeText, Errors) {
  const TextBackbone bb = TextBackbone::create(10, 8, 4);
  const std::vector<TokenId> bad = {3, 10};
  EXPECT_THROW(encode_text(bb, bad), IndexError);
  EXPECT_THROW(encode_text(bb, std::vector<TokenId>{}), EmptyInputError);
}

ProjectionHead identity_head(std::size_t d) {
  ProjectionHead h;
  h.linear = Dense{Matrix::identity(d), Matrix(1, d)};
  h.dropout_rate = 0.2;
  return h;
}

TEST(Projection, IdentityHeadInEvalMode) {
  const ProjectionHead h = identity_head(128);
  Rng rng(6);
  const Matrix pooled = random_matrix(1, 128, rng);
  EXPECT_EQ(project_audio(h, pooled, rng, false), pooled);
  EXPECT_EQ(project_text(h, pooled, rng, false), pooled);
}

TEST(Projection, ZeroInputGivesBias) {
  Rng rng(7);
  ProjectionHead h = ProjectionHead::create(64, 128, 0.2, rng);
  h.linear.b = random_matrix(1, 128, rng);
  EXPECT_EQ(project_audio(h, Matrix(1, 64), rng, false), h.linear.b);
  EXPECT_EQ(project_text(h, Matrix(1, 64), rng, false), h.linear.b);
}

TEST(Projection, MatchesLinearOracle) {
  Rng rng(8);
  ProjectionHead h = ProjectionHead::create(64, 128, 0.2, rng);
  h.linear.b = random_matrix(1, 128, rng);
  const Matrix pooled = random_matrix(1, 64, rng);
  const Matrix expect = add(naive_matmul(pooled, h.linear.w), h.linear.b);
  EXPECT_LT(max_abs_diff(project_audio(h, pooled, rng, false), expect), 1e-12);
  EXPECT_LT(max_abs_diff(project_text(h, pooled, rng, false), expect), 1e-12);
  EXPECT_EQ(h.out_dim(), 128u);
}

TEST(Projection, ShapeMismatch) {
  Rng rng(9);
  const ProjectionHead h = ProjectionHead::create(64, 128, 0.2, rng);
  EXPECT_THROW(project_audio(h, Matrix(1, 63), rng, false), DimensionError);
}

TEST(Projection, TrainingModeAppliesDropout) {
  Rng rng(10);
  const ProjectionHead h = identity_head(128);
  const Matrix pooled(1, 128, 1.0);
  const Matrix out = project_audio(h, pooled, rng, true);
  const auto zeros = std::count(out.values().begin(), out.values().end(), 0.0);
  EXPECT_GT(zeros, 0);
  EXPECT_LT(zeros, 128);
}

}  // namespace
}  // namespace zintent
