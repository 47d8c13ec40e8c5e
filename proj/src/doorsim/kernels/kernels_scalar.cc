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

// Reference kernels. These define the semantics the SIMD variants are tested
// against; keep them simple and obviously correct.

#include <cmath>
#include <cstdint>

#include "doorsim/kernels/kernels_impl.h"

namespace doorsim::kernels {
namespace {

void GemmNTRows(const double* a, const double* b, double* c, int /*m*/, int n,
                int k, bool accumulate, int row_begin, int row_end) {
  for (int i = row_begin; i < row_end; i++) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    double* ci = c + static_cast<int64_t>(i) * n;
    for (int j = 0; j < n; j++) {
      const double* bj = b + static_cast<int64_t>(j) * k;
      double acc = 0.0;
      for (int kk = 0; kk < k; kk++) acc += ai[kk] * bj[kk];
      ci[j] = accumulate ? ci[j] + acc : acc;
    }
  }
}

void GemmNNRows(const double* a, const double* b, double* c, int /*m*/, int k,
                int n, bool accumulate, int row_begin, int row_end) {
  for (int i = row_begin; i < row_end; i++) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    double* ci = c + static_cast<int64_t>(i) * n;
    if (!accumulate) {
      for (int j = 0; j < n; j++) ci[j] = 0.0;
    }
    for (int kk = 0; kk < k; kk++) {
      double av = ai[kk];
      const double* bk = b + static_cast<int64_t>(kk) * n;
      for (int j = 0; j < n; j++) ci[j] += av * bk[j];
    }
  }
}

// C[n x k] = A[m x n]^T * B[m x k]; parallelized over rows of C.
void GemmTNRows(const double* a, const double* b, double* c, int m, int n, int k,
                bool accumulate, int row_begin, int row_end) {
  for (int j = row_begin; j < row_end; j++) {
    double* cj = c + static_cast<int64_t>(j) * k;
    if (!accumulate) {
      for (int kk = 0; kk < k; kk++) cj[kk] = 0.0;
    }
    for (int i = 0; i < m; i++) {
      double av = a[static_cast<int64_t>(i) * n + j];
      const double* bi = b + static_cast<int64_t>(i) * k;
      for (int kk = 0; kk < k; kk++) cj[kk] += av * bi[kk];
    }
  }
}

void AddBiasRowsImpl(double* y, const double* bias, int rows, int cols) {
  for (int r = 0; r < rows; r++) {
    double* yr = y + static_cast<int64_t>(r) * cols;
    for (int j = 0; j < cols; j++) yr[j] += bias[j];
  }
}

void ReluForwardImpl(double* x, int64_t n) {
  for (int64_t i = 0; i < n; i++) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void ReluBackwardImpl(const double* preact, double* grad, int64_t n) {
  for (int64_t i = 0; i < n; i++) {
    if (preact[i] <= 0.0) grad[i] = 0.0;
  }
}

void ColumnSumsImpl(const double* a, double* out, int rows, int cols,
                    bool accumulate) {
  if (!accumulate) {
    for (int j = 0; j < cols; j++) out[j] = 0.0;
  }
  for (int r = 0; r < rows; r++) {
    const double* ar = a + static_cast<int64_t>(r) * cols;
    for (int j = 0; j < cols; j++) out[j] += ar[j];
  }
}

double DotImpl(const double* x, const double* y, int64_t n) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; i++) acc += x[i] * y[i];
  return acc;
}

void AxpyImpl(double alpha, const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; i++) y[i] += alpha * x[i];
}

void ScaleImpl(double* x, double alpha, int64_t n) {
  for (int64_t i = 0; i < n; i++) x[i] *= alpha;
}

double SumSquaresImpl(const double* x, int64_t n) {
  double acc = 0.0;
  for (int64_t i = 0; i < n; i++) acc += x[i] * x[i];
  return acc;
}

void AdamStepImpl(double* param, const double* grad, double* m, double* v,
                  int64_t n, double lr, double beta1, double beta2, double eps,
                  double bias1, double bias2) {
  for (int64_t i = 0; i < n; i++) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    double mhat = m[i] / bias1;
    double vhat = v[i] / bias2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const Ops& ScalarOps() {
  static const Ops ops = {
      GemmNTRows,     GemmNNRows,      GemmTNRows, AddBiasRowsImpl,
      ReluForwardImpl, ReluBackwardImpl, ColumnSumsImpl, DotImpl,
      AxpyImpl,       ScaleImpl,       SumSquaresImpl, AdamStepImpl,
  };
  return ops;
}

}  // namespace doorsim::kernels
