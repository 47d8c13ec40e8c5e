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

#include "doorsim/nn/mlp.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "doorsim/kernels/kernels.h"

namespace doorsim {

Mlp::Mlp(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw std::invalid_argument("mlp needs at least one layer");
  int64_t offset = 0;
  for (int l = 0; l < num_layers(); l++) {
    w_offset_.push_back(offset);
    offset += static_cast<int64_t>(dims_[l + 1]) * dims_[l];
    b_offset_.push_back(offset);
    offset += dims_[l + 1];
  }
  params_.assign(offset, 0.0);
}

const double* Mlp::Forward(const double* x, int m, Workspace* ws) const {
  int layers = num_layers();
  ws->act.resize(layers + 1);
  ws->batch = m;
  ws->act[0].assign(x, x + static_cast<int64_t>(m) * dims_[0]);

  const double* in = ws->act[0].data();
  for (int l = 0; l < layers; l++) {
    int in_dim = dims_[l], out_dim = dims_[l + 1];
    ws->act[l + 1].resize(static_cast<int64_t>(m) * out_dim);
    double* out = ws->act[l + 1].data();
    kernels::GemmNT(in, weights(l), out, m, out_dim, in_dim, false);
    kernels::AddBiasRows(out, biases(l), m, out_dim);
    if (l + 1 < layers) {
      kernels::ReluForward(out, static_cast<int64_t>(m) * out_dim);
    }
    in = out;
  }
  return in;
}

void Mlp::Backward(const double* dy, int m, Workspace* ws, double* grad,
                   double* dx) const {
  int layers = num_layers();
  int max_dim = *std::max_element(dims_.begin(), dims_.end());
  ws->delta_a.resize(static_cast<int64_t>(m) * max_dim);
  ws->delta_b.resize(static_cast<int64_t>(m) * max_dim);

  // cur holds dL/d(preactivation of layer l) throughout the downward sweep.
  double* cur = ws->delta_a.data();
  double* next = ws->delta_b.data();
  std::memcpy(cur, dy, sizeof(double) * static_cast<int64_t>(m) * dims_[layers]);

  for (int l = layers - 1; l >= 0; l--) {
    int in_dim = dims_[l], out_dim = dims_[l + 1];
    const double* in_act = ws->act[l].data();

    kernels::GemmTN(cur, in_act, grad + w_offset_[l], m, out_dim, in_dim, true);
    kernels::ColumnSums(cur, grad + b_offset_[l], m, out_dim, true);

    if (l > 0) {
      kernels::GemmNN(cur, weights(l), next, m, out_dim, in_dim, false);
      // Post-relu activations share the sign of the preactivations, so they
      // double as the relu mask.
      kernels::ReluBackward(in_act, next, static_cast<int64_t>(m) * in_dim);
      std::swap(cur, next);
    } else if (dx != nullptr) {
      kernels::GemmNN(cur, weights(l), dx, m, out_dim, in_dim, false);
    }
  }
}

void Mlp::InitOrthogonal(Rng& rng, double hidden_gain, double output_gain) {
  for (int l = 0; l < num_layers(); l++) {
    int out_dim = dims_[l + 1], in_dim = dims_[l];
    double gain = l + 1 == num_layers() ? output_gain : hidden_gain;
    double* w = weights(l);

    std::vector<double> g(static_cast<int64_t>(out_dim) * in_dim);
    for (double& v : g) v = rng.Normal();

    // Gram-Schmidt on the shorter side: rows when out <= in, else columns.
    if (out_dim <= in_dim) {
      for (int i = 0; i < out_dim; i++) {
        double* ri = g.data() + static_cast<int64_t>(i) * in_dim;
        for (int j = 0; j < i; j++) {
          const double* rj = g.data() + static_cast<int64_t>(j) * in_dim;
          double proj = kernels::Dot(ri, rj, in_dim);
          kernels::Axpy(-proj, rj, ri, in_dim);
        }
        double norm = std::sqrt(kernels::SumSquares(ri, in_dim));
        kernels::Scale(ri, 1.0 / norm, in_dim);
      }
    } else {
      for (int j = 0; j < in_dim; j++) {
        for (int jj = 0; jj < j; jj++) {
          double proj = 0.0;
          for (int i = 0; i < out_dim; i++)
            proj += g[static_cast<int64_t>(i) * in_dim + j] *
                    g[static_cast<int64_t>(i) * in_dim + jj];
          for (int i = 0; i < out_dim; i++)
            g[static_cast<int64_t>(i) * in_dim + j] -=
                proj * g[static_cast<int64_t>(i) * in_dim + jj];
        }
        double norm = 0.0;
        for (int i = 0; i < out_dim; i++) {
          double v = g[static_cast<int64_t>(i) * in_dim + j];
          norm += v * v;
        }
        norm = std::sqrt(norm);
        for (int i = 0; i < out_dim; i++)
          g[static_cast<int64_t>(i) * in_dim + j] /= norm;
      }
    }
    for (int64_t i = 0; i < static_cast<int64_t>(out_dim) * in_dim; i++) {
      w[i] = gain * g[i];
    }
    std::fill(biases(l), biases(l) + out_dim, 0.0);
  }
}

RunningNormalizer::RunningNormalizer(int dim)
    : dim_(dim), mean_(dim, 0.0), m2_(dim, 0.0) {}

void RunningNormalizer::Update(const double* x, int rows) {
  for (int r = 0; r < rows; r++) {
    const double* xr = x + static_cast<int64_t>(r) * dim_;
    count_ += 1.0;
    for (int i = 0; i < dim_; i++) {
      double delta = xr[i] - mean_[i];
      mean_[i] += delta / count_;
      m2_[i] += delta * (xr[i] - mean_[i]);
    }
  }
}

void RunningNormalizer::Apply(const double* x, double* out, int rows) const {
  if (count_ < 1.0) {
    std::memcpy(out, x, sizeof(double) * static_cast<int64_t>(rows) * dim_);
    return;
  }
  for (int r = 0; r < rows; r++) {
    const double* xr = x + static_cast<int64_t>(r) * dim_;
    double* or_ = out + static_cast<int64_t>(r) * dim_;
    for (int i = 0; i < dim_; i++) {
      or_[i] = (xr[i] - mean_[i]) / std::sqrt(m2_[i] / count_ + 1e-8);
    }
  }
}

}  // namespace doorsim
