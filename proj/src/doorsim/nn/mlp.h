// Copyright 2026 The doorsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DOORSIM_NN_MLP_H_
#define DOORSIM_NN_MLP_H_

#include <cstdint>
#include <vector>

#include "doorsim/rng.h"

namespace doorsim {

// Fully-connected ReLU network with a linear output layer. Parameters live in
// one flat buffer ([W0, b0, W1, b1, ...], weights row-major [out x in]) so the
// optimizer, gradient clipping and finite-difference checks can treat the
// whole network as a single vector.
class Mlp {
 public:
  explicit Mlp(std::vector<int> dims);

  // Scratch space for one forward/backward pass over a batch. Reusable across
  // calls; grows on demand.
  struct Workspace {
    std::vector<std::vector<double>> act;  // act[0] = input copy, act[l] post-relu
    std::vector<double> delta_a;
    std::vector<double> delta_b;
    int batch = 0;
  };

  const std::vector<int>& dims() const { return dims_; }
  int input_size() const { return dims_.front(); }
  int output_size() const { return dims_.back(); }
  int num_layers() const { return static_cast<int>(dims_.size()) - 1; }
  int64_t num_params() const { return static_cast<int64_t>(params_.size()); }
  double* params() { return params_.data(); }
  const double* params() const { return params_.data(); }
  std::vector<double>& param_vector() { return params_; }
  const std::vector<double>& param_vector() const { return params_; }

  double* weights(int layer) { return params_.data() + w_offset_[layer]; }
  const double* weights(int layer) const { return params_.data() + w_offset_[layer]; }
  double* biases(int layer) { return params_.data() + b_offset_[layer]; }
  const double* biases(int layer) const { return params_.data() + b_offset_[layer]; }

  // Runs the batch [m x input_size] and returns the output [m x output_size],
  // owned by the workspace.
  const double* Forward(const double* x, int m, Workspace* ws) const;

  // Backpropagates dL/dy [m x output_size]; accumulates parameter gradients
  // into grad (same flat layout) and optionally writes dL/dx [m x input].
  // Requires the workspace of the matching Forward call.
  void Backward(const double* dy, int m, Workspace* ws, double* grad,
                double* dx = nullptr) const;

  // Orthogonal initialization; hidden layers use hidden_gain, the output
  // layer output_gain. Biases start at zero.
  void InitOrthogonal(Rng& rng, double hidden_gain, double output_gain);

 private:
  std::vector<int> dims_;
  std::vector<double> params_;
  std::vector<int64_t> w_offset_;
  std::vector<int64_t> b_offset_;
};

// Running per-component mean/variance used to whiten observations. Updates
// are plain per-sample Welford passes, so results are independent of batch
// partitioning.
class RunningNormalizer {
 public:
  explicit RunningNormalizer(int dim);

  void Update(const double* x, int rows);
  // out = (x - mean) / sqrt(var + eps); pass-through until the first update.
  void Apply(const double* x, double* out, int rows) const;

  int dim() const { return dim_; }
  double count() const { return count_; }
  double mean(int i) const { return mean_[i]; }
  double variance(int i) const { return count_ > 0.0 ? m2_[i] / count_ : 1.0; }

  // Raw access for checkpoint serialization.
  std::vector<double>& mean_vector() { return mean_; }
  std::vector<double>& m2_vector() { return m2_; }
  const std::vector<double>& mean_vector() const { return mean_; }
  const std::vector<double>& m2_vector() const { return m2_; }
  void set_count(double c) { count_ = c; }

 private:
  int dim_;
  double count_ = 0.0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace doorsim

#endif  // DOORSIM_NN_MLP_H_
