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

#ifndef DOORSIM_KERNELS_KERNELS_H_
#define DOORSIM_KERNELS_KERNELS_H_

#include <cstdint>
#include <string>

namespace doorsim::kernels {

// The dense inner loops (layer matmuls, elementwise activations, reductions,
// optimizer updates) exist in two equivalent implementations: a plain scalar
// reference and an AVX2+FMA variant. The active one is picked at runtime from
// cpuid, and can be forced for testing. All matrices are row-major double.

enum class Backend { kScalar, kAvx2 };

Backend DetectBestBackend();
bool BackendSupported(Backend b);
void SetBackend(Backend b);
Backend ActiveBackend();
std::string BackendName(Backend b);

// C[m x n] = A[m x k] * B[n x k]^T, optionally accumulating into C.
void GemmNT(const double* a, const double* b, double* c, int m, int n, int k,
            bool accumulate);

// C[m x n] = A[m x k] * B[k x n], optionally accumulating into C.
void GemmNN(const double* a, const double* b, double* c, int m, int k, int n,
            bool accumulate);

// C[n x k] = A[m x n]^T * B[m x k], optionally accumulating into C.
void GemmTN(const double* a, const double* b, double* c, int m, int n, int k,
            bool accumulate);

// y[r, :] += bias for every row r.
void AddBiasRows(double* y, const double* bias, int rows, int cols);

// x = max(x, 0) elementwise.
void ReluForward(double* x, int64_t n);

// grad *= (preact > 0) elementwise.
void ReluBackward(const double* preact, double* grad, int64_t n);

// out[j] = sum_r a[r, j] over an [rows x cols] matrix, optionally accumulating.
void ColumnSums(const double* a, double* out, int rows, int cols, bool accumulate);

double Dot(const double* x, const double* y, int64_t n);
void Axpy(double alpha, const double* x, double* y, int64_t n);
void Scale(double* x, double alpha, int64_t n);
double SumSquares(const double* x, int64_t n);

// One Adam step on a flat parameter block. bias1/bias2 are the running
// beta^t bias-correction factors for this step.
void AdamStep(double* param, const double* grad, double* m, double* v, int64_t n,
              double lr, double beta1, double beta2, double eps, double bias1,
              double bias2);

}  // namespace doorsim::kernels

#endif  // DOORSIM_KERNELS_KERNELS_H_
