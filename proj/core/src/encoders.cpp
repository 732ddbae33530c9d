// core/src/encoders.cpp

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

#include "zintent/encoders.hpp"

#include <cmath>
#include <string>

#include "zintent/errors.hpp"

namespace zintent {

namespace {

// Small nonzero biases so an all-zero frame still maps to a nonzero feature.
constexpr double kBiasStddev = 0.1;

void randomize_bias(Matrix& b, Rng& rng) {
  for (double& v : b.values()) v = kBiasStddev * rng.normal();
}

}  // namespace

AudioBackbone AudioBackbone::create(std::size_t raw_dim, std::size_t hidden_dim, std::uint64_t seed,
                                    bool layer2_trainable) {
  if (raw_dim == 0 || hidden_dim == 0) throw ConfigError("audio backbone dimensions must be positive");
  Rng rng(seed);
  AudioBackbone bb;
  bb.seed = seed;
  bb.layer2_trainable = layer2_trainable;
  bb.layer1 = Dense::random(raw_dim, hidden_dim, std::sqrt(2.0 / static_cast<double>(raw_dim)), rng);
  randomize_bias(bb.layer1.b, rng);
  bb.layer2 = Dense::random(hidden_dim, hidden_dim, std::sqrt(2.0 / static_cast<double>(hidden_dim)), rng);
  randomize_bias(bb.layer2.b, rng);
  return bb;
}

Matrix AudioBackbone::lower(const Matrix& frames) const {
  if (frames.rows() == 0) throw EmptyInputError("encode_audio: no frames");
  if (frames.cols() != raw_dim()) {
    throw DimensionError("encode_audio: frames " + frames.shape() + " vs backbone input " +
                         std::to_string(raw_dim()));
  }
  return relu_forward(linear_forward(frames, layer1));
}

AudioBackbone::UpperTrace AudioBackbone::upper(const Matrix& lower_activations) const {
  UpperTrace t;
  t.pre = linear_forward(lower_activations, layer2);
  t.pooled = mean_pool(relu_forward(t.pre));
  return t;
}

Dense AudioBackbone::upper_backward(const Matrix& lower_activations, const UpperTrace& trace,
                                    const Matrix& grad_pooled) const {
  Matrix grad_act = mean_pool_backward(grad_pooled, trace.pre.rows());
  Matrix grad_pre = relu_backward(trace.pre, grad_act);
  return {matmul_tn(lower_activations, grad_pre), column_sums(grad_pre)};
}

void AudioBackbone::append_params(std::vector<ParamRef>& out, const std::string& prefix) {
  out.push_back({prefix + "layer1.w", &layer1.w, false});
  out.push_back({prefix + "layer1.b", &layer1.b, false});
  out.push_back({prefix + "layer2.w", &layer2.w, layer2_trainable});
  out.push_back({prefix + "layer2.b", &layer2.b, layer2_trainable});
}

void AudioBackbone::append_params(std::vector<ConstParamRef>& out, const std::string& prefix) const {
  out.push_back({prefix + "layer1.w", &layer1.w, false});
  out.push_back({prefix + "layer1.b", &layer1.b, false});
  out.push_back({prefix + "layer2.w", &layer2.w, layer2_trainable});
  out.push_back({prefix + "layer2.b", &layer2.b, layer2_trainable});
}

Matrix encode_audio(const AudioBackbone& backbone, const Matrix& frames) {
  return backbone.upper(backbone.lower(frames)).pooled;
}

TextBackbone TextBackbone::create(std::size_t vocab_size, std::size_t hidden_dim, std::uint64_t seed) {
  if (vocab_size == 0 || hidden_dim == 0) throw ConfigError("text backbone dimensions must be positive");
  Rng rng(seed);
  TextBackbone bb;
  bb.seed = seed;
  bb.token_table = Matrix(vocab_size, hidden_dim);
  for (double& v : bb.token_table.values()) v = rng.normal();
  bb.mixing = Dense::random(hidden_dim, hidden_dim, std::sqrt(2.0 / static_cast<double>(hidden_dim)), rng);
  randomize_bias(bb.mixing.b, rng);
  return bb;
}

void TextBackbone::append_params(std::vector<ParamRef>& out, const std::string& prefix) {
  out.push_back({prefix + "token_table", &token_table, false});
  out.push_back({prefix + "mixing.w", &mixing.w, false});
  out.push_back({prefix + "mixing.b", &mixing.b, false});
}

void TextBackbone::append_params(std::vector<ConstParamRef>& out, const std::string& prefix) const {
  out.push_back({prefix + "token_table", &token_table, false});
  out.push_back({prefix + "mixing.w", &mixing.w, false});
  out.push_back({prefix + "mixing.b", &mixing.b, false});
}

Matrix encode_text(const TextBackbone& backbone, std::span<const TokenId> tokens) {
  if (tokens.empty()) throw EmptyInputError("encode_text: no tokens");
  Matrix rows(tokens.size(), backbone.hidden_dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= backbone.vocab_size()) {
      throw IndexError("encode_text: token " + std::to_string(tokens[i]) + " >= vocab " +
                       std::to_string(backbone.vocab_size()));
    }
    auto src = backbone.token_table.row(tokens[i]);
    std::copy(src.begin(), src.end(), rows.row(i).begin());
  }
  return mean_pool(relu_forward(linear_forward(rows, backbone.mixing)));
}

ProjectionHead ProjectionHead::create(std::size_t in_dim, std::size_t out_dim, double dropout_rate, Rng& rng) {
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("projection dropout must lie in [0, 1)");
  ProjectionHead h;
  h.linear = Dense::random(in_dim, out_dim, 1.0 / std::sqrt(static_cast<double>(in_dim)), rng);
  h.dropout_rate = dropout_rate;
  return h;
}

ProjectionHead::Trace ProjectionHead::forward(const Matrix& pooled, Rng& rng, bool training) const {
  Trace t;
  t.input = pooled;
  t.dropout = dropout_forward(linear_forward(pooled, linear), dropout_rate, rng, training);
  return t;
}

LinearGrads ProjectionHead::backward(const Trace& trace, const Matrix& grad_out) const {
  return linear_backward(trace.input, linear.w, dropout_backward(trace.dropout, grad_out));
}

Matrix project_audio(const ProjectionHead& head, const Matrix& pooled, Rng& rng, bool training) {
  return head.forward(pooled, rng, training).dropout.output;
}

Matrix project_text(const ProjectionHead& head, const Matrix& pooled, Rng& rng, bool training) {
  return head.forward(pooled, rng, training).dropout.output;
}

}  // namespace zintent
