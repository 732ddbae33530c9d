// core/include/zintent/encoders.hpp

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
#include <cstdint>
#include <span>
#include <vector>

#include "zintent/corpus.hpp"
#include "zintent/layers.hpp"
#include "zintent/params.hpp"
#include "zintent/rng.hpp"

namespace zintent {

/// Frozen two-layer frame encoder standing in for a pretrained speech model.
///
/// Per frame: relu(layer2(relu(layer1(x)))), then mean over frames. layer1 is
/// always frozen; layer2 is the fine-tunable top layer.
struct AudioBackbone {
  Dense layer1;
  Dense layer2;
  bool layer2_trainable = true;
  std::uint64_t seed = 0;

  static AudioBackbone create(std::size_t raw_dim, std::size_t hidden_dim, std::uint64_t seed,
                              bool layer2_trainable);

  std::size_t raw_dim() const { return layer1.in_dim(); }
  std::size_t hidden_dim() const { return layer2.out_dim(); }

  // relu(layer1) activations per frame; constant under training.
  Matrix lower(const Matrix& frames) const;

  struct UpperTrace {
    Matrix pre;     // layer2 pre-activation, T x hidden
    Matrix pooled;  // 1 x hidden
  };
  UpperTrace upper(const Matrix& lower_activations) const;
  // Gradients for layer2 given d(loss)/d(pooled).
  Dense upper_backward(const Matrix& lower_activations, const UpperTrace& trace,
                       const Matrix& grad_pooled) const;

  void append_params(std::vector<ParamRef>& out, const std::string& prefix);
  void append_params(std::vector<ConstParamRef>& out, const std::string& prefix) const;

  friend bool operator==(const AudioBackbone&, const AudioBackbone&) = default;
};

// Pooled backbone features (1 x hidden) of one utterance.
Matrix encode_audio(const AudioBackbone& backbone, const Matrix& frames);

/// Frozen token encoder standing in for a pretrained text model:
/// table lookup, relu(mixing) per token, mean over tokens.
struct TextBackbone {
  Matrix token_table;  // vocab x hidden
  Dense mixing;
  std::uint64_t seed = 0;

  static TextBackbone create(std::size_t vocab_size, std::size_t hidden_dim, std::uint64_t seed);

  std::size_t vocab_size() const { return token_table.rows(); }
  std::size_t hidden_dim() const { return mixing.out_dim(); }

  void append_params(std::vector<ParamRef>& out, const std::string& prefix);
  void append_params(std::vector<ConstParamRef>& out, const std::string& prefix) const;

  friend bool operator==(const TextBackbone&, const TextBackbone&) = default;
};

Matrix encode_text(const TextBackbone& backbone, std::span<const TokenId> tokens);

/// Linear projection into the shared embedding space, followed by dropout.
struct ProjectionHead {
  Dense linear;
  double dropout_rate = 0.2;

  static ProjectionHead create(std::size_t in_dim, std::size_t out_dim, double dropout_rate, Rng& rng);

  std::size_t out_dim() const { return linear.out_dim(); }

  struct Trace {
    Matrix input;
    DropoutResult dropout;
    const Matrix& output() const { return dropout.output; }
  };
  Trace forward(const Matrix& pooled, Rng& rng, bool training) const;
  // Returns {grad_input, grad_w, grad_b}.
  LinearGrads backward(const Trace& trace, const Matrix& grad_out) const;

  friend bool operator==(const ProjectionHead&, const ProjectionHead&) = default;
};

Matrix project_audio(const ProjectionHead& head, const Matrix& pooled, Rng& rng, bool training);
Matrix project_text(const ProjectionHead& head, const Matrix& pooled, Rng& rng, bool training);

}  // namespace zintent
