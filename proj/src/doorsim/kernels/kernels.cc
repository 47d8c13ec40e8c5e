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

#include "doorsim/kernels/kernels.h"

#include <cstdlib>

#include "doorsim/kernels/kernels_impl.h"
#include "doorsim/threading.h"

namespace doorsim::kernels {
namespace {

const Ops* g_ops = nullptr;
Backend g_backend = Backend::kScalar;

// Matmuls below this many multiply-adds run single-threaded; the fork-join
// handshake costs more than the work.
constexpr int64_t kParallelFlopThreshold = 1 << 18;

const Ops& Active() {
  if (g_ops == nullptr) SetBackend(DetectBestBackend());
  return *g_ops;
}

}  // namespace

bool BackendSupported(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(DOORSIM_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Backend DetectBestBackend() {
  if (const char* env = std::getenv("DOORSIM_KERNEL_BACKEND")) {
    std::string v(env);
    if (v == "scalar") return Backend::kScalar;
    if (v == "avx2" && BackendSupported(Backend::kAvx2)) return Backend::kAvx2;
  }
  return BackendSupported(Backend::kAvx2) ? Backend::kAvx2 : Backend::kScalar;
}

void SetBackend(Backend b) {
  if (!BackendSupported(b)) b = Backend::kScalar;
  g_backend = b;
#if defined(DOORSIM_HAVE_AVX2)
  g_ops = b == Backend::kAvx2 ? &Avx2Ops() : &ScalarOps();
#else
  g_ops = &ScalarOps();
#endif
}

Backend ActiveBackend() {
  Active();
  return g_backend;
}

std::string BackendName(Backend b) {
  return b == Backend::kAvx2 ? "avx2" : "scalar";
}

void GemmNT(const double* a, const double* b, double* c, int m, int n, int k,
            bool accumulate) {
  const Ops& ops = Active();
  int64_t flops = static_cast<int64_t>(m) * n * k;
  if (flops < kParallelFlopThreshold) {
    ops.gemm_nt_rows(a, b, c, m, n, k, accumulate, 0, m);
    return;
  }
  GlobalPool()->ParallelFor(m, [&](int64_t lo, int64_t hi) {
    ops.gemm_nt_rows(a, b, c, m, n, k, accumulate, static_cast<int>(lo),
                     static_cast<int>(hi));
  });
}

void GemmNN(const double* a, const double* b, double* c, int m, int k, int n,
            bool accumulate) {
  const Ops& ops = Active();
  int64_t flops = static_cast<int64_t>(m) * n * k;
  if (flops < kParallelFlopThreshold) {
    ops.gemm_nn_rows(a, b, c, m, k, n, accumulate, 0, m);
    return;
  }
  GlobalPool()->ParallelFor(m, [&](int64_t lo, int64_t hi) {
    ops.gemm_nn_rows(a, b, c, m, k, n, accumulate, static_cast<int>(lo),
                     static_cast<int>(hi));
  });
}

void GemmTN(const double* a, const double* b, double* c, int m, int n, int k,
            bool accumulate) {
  const Ops& ops = Active();
  int64_t flops = static_cast<int64_t>(m) * n * k;
  if (flops < kParallelFlopThreshold) {
    ops.gemm_tn_rows(a, b, c, m, n, k, accumulate, 0, n);
    return;
  }
  GlobalPool()->ParallelFor(n, [&](int64_t lo, int64_t hi) {
    ops.gemm_tn_rows(a, b, c, m, n, k, accumulate, static_cast<int>(lo),
                     static_cast<int>(hi));
  });
}

void AddBiasRows(double* y, const double* bias, int rows, int cols) {
  Active().add_bias_rows(y, bias, rows, cols);
}

void ReluForward(double* x, int64_t n) { Active().relu_forward(x, n); }

void ReluBackward(const double* preact, double* grad, int64_t n) {
  Active().relu_backward(preact, grad, n);
}

void ColumnSums(const double* a, double* out, int rows, int cols, bool accumulate) {
  Active().column_sums(a, out, rows, cols, accumulate);
}

double Dot(const double* x, const double* y, int64_t n) {
  return Active().dot(x, y, n);
}

void Axpy(double alpha, const double* x, double* y, int64_t n) {
  Active().axpy(alpha, x, y, n);
}

void Scale(double* x, double alpha, int64_t n) { Active().scale(x, alpha, n); }

double SumSquares(const double* x, int64_t n) { return Active().sum_squares(x, n); }

void AdamStep(double* param, const double* grad, double* m, double* v, int64_t n,
              double lr, double beta1, double beta2, double eps, double bias1,
              double bias2) {
  Active().adam_step(param, grad, m, v, n, lr, beta1, beta2, eps, bias1, bias2);
}

}  // namespace doorsim::kernels
