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

#ifndef DOORSIM_KERNELS_KERNELS_IMPL_H_
#define DOORSIM_KERNELS_KERNELS_IMPL_H_

#include <cstdint>

namespace doorsim::kernels {

// Per-backend entry points. Rows of the output may be processed in parallel
// by the dispatcher, so implementations take a row range where that applies.
struct Ops {
  void (*gemm_nt_rows)(const double* a, const double* b, double* c, int m, int n,
                       int k, bool accumulate, int row_begin, int row_end);
  void (*gemm_nn_rows)(const double* a, const double* b, double* c, int m, int k,
                       int n, bool accumulate, int row_begin, int row_end);
  void (*gemm_tn_rows)(const double* a, const double* b, double* c, int m, int n,
                       int k, bool accumulate, int row_begin, int row_end);
  void (*add_bias_rows)(double* y, const double* bias, int rows, int cols);
  void (*relu_forward)(double* x, int64_t n);
  void (*relu_backward)(const double* preact, double* grad, int64_t n);
  void (*column_sums)(const double* a, double* out, int rows, int cols,
                      bool accumulate);
  double (*dot)(const double* x, const double* y, int64_t n);
  void (*axpy)(double alpha, const double* x, double* y, int64_t n);
  void (*scale)(double* x, double alpha, int64_t n);
  double (*sum_squares)(const double* x, int64_t n);
  void (*adam_step)(double* param, const double* grad, double* m, double* v,
                    int64_t n, double lr, double beta1, double beta2, double eps,
                    double bias1, double bias2);
};

const Ops& ScalarOps();
#if defined(DOORSIM_HAVE_AVX2)
const Ops& Avx2Ops();
#endif

}  // namespace doorsim::kernels

#endif  // DOORSIM_KERNELS_KERNELS_IMPL_H_
