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

// AVX2+FMA variants of the dense kernels. Compiled with -mavx2 -mfma; only
// reachable when cpuid reports both features. Results may differ from the
// scalar reference by reassociation rounding only.

#if defined(DOORSIM_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "doorsim/kernels/kernels_impl.h"

namespace doorsim::kernels {
namespace {

inline double HSum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

void GemmNTRows(const double* a, const double* b, double* c, int /*m*/, int n,
                int k, bool accumulate, int row_begin, int row_end) {
  int k4 = k & ~3;
  int i = row_begin;
  // Two A rows x four B rows per tile keeps the FMA units fed.
  for (; i + 1 < row_end; i += 2) {
    const double* a0 = a + static_cast<int64_t>(i) * k;
    const double* a1 = a0 + k;
    double* c0 = c + static_cast<int64_t>(i) * n;
    double* c1 = c0 + n;
    int j = 0;
    for (; j + 3 < n; j += 4) {
      const double* b0 = b + static_cast<int64_t>(j) * k;
      const double* b1 = b0 + k;
      const double* b2 = b1 + k;
      const double* b3 = b2 + k;
      __m256d s00 = _mm256_setzero_pd(), s01 = _mm256_setzero_pd();
      __m256d s02 = _mm256_setzero_pd(), s03 = _mm256_setzero_pd();
      __m256d s10 = _mm256_setzero_pd(), s11 = _mm256_setzero_pd();
      __m256d s12 = _mm256_setzero_pd(), s13 = _mm256_setzero_pd();
      for (int kk = 0; kk < k4; kk += 4) {
        __m256d av0 = _mm256_loadu_pd(a0 + kk);
        __m256d av1 = _mm256_loadu_pd(a1 + kk);
        __m256d bv0 = _mm256_loadu_pd(b0 + kk);
        __m256d bv1 = _mm256_loadu_pd(b1 + kk);
        __m256d bv2 = _mm256_loadu_pd(b2 + kk);
        __m256d bv3 = _mm256_loadu_pd(b3 + kk);
        s00 = _mm256_fmadd_pd(av0, bv0, s00);
        s01 = _mm256_fmadd_pd(av0, bv1, s01);
        s02 = _mm256_fmadd_pd(av0, bv2, s02);
        s03 = _mm256_fmadd_pd(av0, bv3, s03);
        s10 = _mm256_fmadd_pd(av1, bv0, s10);
        s11 = _mm256_fmadd_pd(av1, bv1, s11);
        s12 = _mm256_fmadd_pd(av1, bv2, s12);
        s13 = _mm256_fmadd_pd(av1, bv3, s13);
      }
      double r00 = HSum(s00), r01 = HSum(s01), r02 = HSum(s02), r03 = HSum(s03);
      double r10 = HSum(s10), r11 = HSum(s11), r12 = HSum(s12), r13 = HSum(s13);
      for (int kk = k4; kk < k; kk++) {
        double av0 = a0[kk], av1 = a1[kk];
        r00 += av0 * b0[kk];
        r01 += av0 * b1[kk];
        r02 += av0 * b2[kk];
        r03 += av0 * b3[kk];
        r10 += av1 * b0[kk];
        r11 += av1 * b1[kk];
        r12 += av1 * b2[kk];
        r13 += av1 * b3[kk];
      }
      if (accumulate) {
        c0[j] += r00; c0[j + 1] += r01; c0[j + 2] += r02; c0[j + 3] += r03;
        c1[j] += r10; c1[j + 1] += r11; c1[j + 2] += r12; c1[j + 3] += r13;
      } else {
        c0[j] = r00; c0[j + 1] = r01; c0[j + 2] = r02; c0[j + 3] = r03;
        c1[j] = r10; c1[j + 1] = r11; c1[j + 2] = r12; c1[j + 3] = r13;
      }
    }
    for (; j < n; j++) {
      const double* bj = b + static_cast<int64_t>(j) * k;
      __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
      for (int kk = 0; kk < k4; kk += 4) {
        __m256d bv = _mm256_loadu_pd(bj + kk);
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a0 + kk), bv, s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a1 + kk), bv, s1);
      }
      double r0 = HSum(s0), r1 = HSum(s1);
      for (int kk = k4; kk < k; kk++) {
        r0 += a0[kk] * bj[kk];
        r1 += a1[kk] * bj[kk];
      }
      c0[j] = accumulate ? c0[j] + r0 : r0;
      c1[j] = accumulate ? c1[j] + r1 : r1;
    }
  }
  for (; i < row_end; i++) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    double* ci = c + static_cast<int64_t>(i) * n;
    for (int j = 0; j < n; j++) {
      const double* bj = b + static_cast<int64_t>(j) * k;
      __m256d s = _mm256_setzero_pd();
      for (int kk = 0; kk < k4; kk += 4) {
        s = _mm256_fmadd_pd(_mm256_loadu_pd(ai + kk), _mm256_loadu_pd(bj + kk), s);
      }
      double r = HSum(s);
      for (int kk = k4; kk < k; kk++) r += ai[kk] * bj[kk];
      ci[j] = accumulate ? ci[j] + r : r;
    }
  }
}

void GemmNNRows(const double* a, const double* b, double* c, int /*m*/, int k,
                int n, bool accumulate, int row_begin, int row_end) {
  for (int i = row_begin; i < row_end; i++) {
    const double* ai = a + static_cast<int64_t>(i) * k;
    double* ci = c + static_cast<int64_t>(i) * n;
    int j0 = 0;
    for (; j0 + 15 < n; j0 += 16) {
      __m256d acc0, acc1, acc2, acc3;
      if (accumulate) {
        acc0 = _mm256_loadu_pd(ci + j0);
        acc1 = _mm256_loadu_pd(ci + j0 + 4);
        acc2 = _mm256_loadu_pd(ci + j0 + 8);
        acc3 = _mm256_loadu_pd(ci + j0 + 12);
      } else {
        acc0 = acc1 = acc2 = acc3 = _mm256_setzero_pd();
      }
      for (int kk = 0; kk < k; kk++) {
        __m256d av = _mm256_set1_pd(ai[kk]);
        const double* bk = b + static_cast<int64_t>(kk) * n + j0;
        acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bk), acc0);
        acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bk + 4), acc1);
        acc2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bk + 8), acc2);
        acc3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bk + 12), acc3);
      }
      _mm256_storeu_pd(ci + j0, acc0);
      _mm256_storeu_pd(ci + j0 + 4, acc1);
      _mm256_storeu_pd(ci + j0 + 8, acc2);
      _mm256_storeu_pd(ci + j0 + 12, acc3);
    }
    for (; j0 < n; j0++) {
      double acc = accumulate ? ci[j0] : 0.0;
      for (int kk = 0; kk < k; kk++) {
        acc += ai[kk] * b[static_cast<int64_t>(kk) * n + j0];
      }
      ci[j0] = acc;
    }
  }
}

void GemmTNRows(const double* a, const double* b, double* c, int m, int n, int k,
                bool accumulate, int row_begin, int row_end) {
  for (int j = row_begin; j < row_end; j++) {
    double* cj = c + static_cast<int64_t>(j) * k;
    int k0 = 0;
    for (; k0 + 15 < k; k0 += 16) {
      __m256d acc0, acc1, acc2, acc3;
      if (accumulate) {
        acc0 = _mm256_loadu_pd(cj + k0);
        acc1 = _mm256_loadu_pd(cj + k0 + 4);
        acc2 = _mm256_loadu_pd(cj + k0 + 8);
        acc3 = _mm256_loadu_pd(cj + k0 + 12);
      } else {
        acc0 = acc1 = acc2 = acc3 = _mm256_setzero_pd();
      }
      for (int i = 0; i < m; i++) {
        __m256d av = _mm256_set1_pd(a[static_cast<int64_t>(i) * n + j]);
        const double* bi = b + static_cast<int64_t>(i) * k + k0;
        acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bi), acc0);
        acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bi + 4), acc1);
        acc2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bi + 8), acc2);
        acc3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bi + 12), acc3);
      }
      _mm256_storeu_pd(cj + k0, acc0);
      _mm256_storeu_pd(cj + k0 + 4, acc1);
      _mm256_storeu_pd(cj + k0 + 8, acc2);
      _mm256_storeu_pd(cj + k0 + 12, acc3);
    }
    for (; k0 < k; k0++) {
      double acc = accumulate ? cj[k0] : 0.0;
      for (int i = 0; i < m; i++) {
        acc += a[static_cast<int64_t>(i) * n + j] * b[static_cast<int64_t>(i) * k + k0];
      }
      cj[k0] = acc;
    }
  }
}

void AddBiasRowsImpl(double* y, const double* bias, int rows, int cols) {
  for (int r = 0; r < rows; r++) {
    double* yr = y + static_cast<int64_t>(r) * cols;
    int j = 0;
    for (; j + 3 < cols; j += 4) {
      _mm256_storeu_pd(yr + j, _mm256_add_pd(_mm256_loadu_pd(yr + j),
                                             _mm256_loadu_pd(bias + j)));
    }
    for (; j < cols; j++) yr[j] += bias[j];
  }
}

void ReluForwardImpl(double* x, int64_t n) {
  __m256d zero = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 3 < n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
  }
  for (; i < n; i++) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void ReluBackwardImpl(const double* preact, double* grad, int64_t n) {
  __m256d zero = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 3 < n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(preact + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(grad + i, _mm256_and_pd(_mm256_loadu_pd(grad + i), mask));
  }
  for (; i < n; i++) {
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
    int j = 0;
    for (; j + 3 < cols; j += 4) {
      _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j),
                                              _mm256_loadu_pd(ar + j)));
    }
    for (; j < cols; j++) out[j] += ar[j];
  }
}

double DotImpl(const double* x, const double* y, int64_t n) {
  __m256d s = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 3 < n; i += 4) {
    s = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s);
  }
  double r = HSum(s);
  for (; i < n; i++) r += x[i] * y[i];
  return r;
}

void AxpyImpl(double alpha, const double* x, double* y, int64_t n) {
  __m256d av = _mm256_set1_pd(alpha);
  int64_t i = 0;
  for (; i + 3 < n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; i++) y[i] += alpha * x[i];
}

void ScaleImpl(double* x, double alpha, int64_t n) {
  __m256d av = _mm256_set1_pd(alpha);
  int64_t i = 0;
  for (; i + 3 < n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), av));
  }
  for (; i < n; i++) x[i] *= alpha;
}

double SumSquaresImpl(const double* x, int64_t n) {
  __m256d s = _mm256_setzero_pd();
  int64_t i = 0;
  for (; i + 3 < n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    s = _mm256_fmadd_pd(v, v, s);
  }
  double r = HSum(s);
  for (; i < n; i++) r += x[i] * x[i];
  return r;
}

void AdamStepImpl(double* param, const double* grad, double* m, double* v,
                  int64_t n, double lr, double beta1, double beta2, double eps,
                  double bias1, double bias2) {
  __m256d b1 = _mm256_set1_pd(beta1);
  __m256d b2 = _mm256_set1_pd(beta2);
  __m256d onemb1 = _mm256_set1_pd(1.0 - beta1);
  __m256d onemb2 = _mm256_set1_pd(1.0 - beta2);
  __m256d inv_bias1 = _mm256_set1_pd(1.0 / bias1);
  __m256d inv_bias2 = _mm256_set1_pd(1.0 / bias2);
  __m256d lrv = _mm256_set1_pd(lr);
  __m256d epsv = _mm256_set1_pd(eps);
  int64_t i = 0;
  for (; i + 3 < n; i += 4) {
    __m256d g = _mm256_loadu_pd(grad + i);
    __m256d mv = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m + i), _mm256_mul_pd(onemb1, g));
    __m256d vv = _mm256_fmadd_pd(b2, _mm256_loadu_pd(v + i),
                                 _mm256_mul_pd(onemb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    __m256d mhat = _mm256_mul_pd(mv, inv_bias1);
    __m256d vhat = _mm256_mul_pd(vv, inv_bias2);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
    __m256d step = _mm256_div_pd(_mm256_mul_pd(lrv, mhat), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; i++) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
    double mhat = m[i] / bias1;
    double vhat = v[i] / bias2;
    param[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

const Ops& Avx2Ops() {
  static const Ops ops = {
      GemmNTRows,     GemmNNRows,      GemmTNRows, AddBiasRowsImpl,
      ReluForwardImpl, ReluBackwardImpl, ColumnSumsImpl, DotImpl,
      AxpyImpl,       ScaleImpl,       SumSquaresImpl, AdamStepImpl,
  };
  return ops;
}

}  // namespace doorsim::kernels

#endif  // DOORSIM_HAVE_AVX2
