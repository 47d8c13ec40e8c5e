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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "doorsim/kernels/kernels.h"
#include "doorsim/rng.h"

namespace kn = doorsim::kernels;
using doorsim::Rng;

namespace {

struct BackendGuard {
  kn::Backend saved = kn::ActiveBackend();
  ~BackendGuard() { kn::SetBackend(saved); }
};

std::vector<double> RandomVec(Rng& rng, int64_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.Normal();
  return v;
}

// Plain triple-loop oracles, independent of the kernel implementations.
std::vector<double> NaiveGemmNT(const std::vector<double>& a,
                                const std::vector<double>& b, int m, int n, int k) {
  std::vector<double> c(static_cast<int64_t>(m) * n, 0.0);
  for (int i = 0; i < m; i++)
    for (int j = 0; j < n; j++)
      for (int kk = 0; kk < k; kk++)
        c[i * n + j] += a[i * k + kk] * b[j * k + kk];
  return c;
}

std::vector<double> NaiveGemmNN(const std::vector<double>& a,
                                const std::vector<double>& b, int m, int k, int n) {
  std::vector<double> c(static_cast<int64_t>(m) * n, 0.0);
  for (int i = 0; i < m; i++)
    for (int kk = 0; kk < k; kk++)
      for (int j = 0; j < n; j++)
        c[i * n + j] += a[i * k + kk] * b[kk * n + j];
  return c;
}

std::vector<double> NaiveGemmTN(const std::vector<double>& a,
                                const std::vector<double>& b, int m, int n, int k) {
  std::vector<double> c(static_cast<int64_t>(n) * k, 0.0);
  for (int j = 0; j < n; j++)
    for (int i = 0; i < m; i++)
      for (int kk = 0; kk < k; kk++)
        c[j * k + kk] += a[i * n + j] * b[i * k + kk];
  return c;
}

void CheckClose(const std::vector<double>& got, const std::vector<double>& want,
                double tol) {
  REQUIRE(got.size() == want.size());
  for (size_t i = 0; i < got.size(); i++) {
    double denom = std::fmax(1.0, std::fabs(want[i]));
    CHECK(std::fabs(got[i] - want[i]) / denom < tol);
  }
}

}  // namespace

TEST_CASE("gemm kernels match naive oracles on every backend") {
  BackendGuard guard;
  Rng rng(42);
  const int shapes[][3] = {{1, 1, 1}, {2, 3, 5}, {7, 9, 19}, {16, 256, 19}, {5, 8, 4}};

  for (auto backend : {kn::Backend::kScalar, kn::Backend::kAvx2}) {
    if (!kn::BackendSupported(backend)) continue;
    kn::SetBackend(backend);
    for (const auto& s : shapes) {
      int m = s[0], n = s[1], k = s[2];
      auto a_nt = RandomVec(rng, static_cast<int64_t>(m) * k);
      auto b_nt = RandomVec(rng, static_cast<int64_t>(n) * k);
      std::vector<double> c(static_cast<int64_t>(m) * n, 0.5);
      kn::GemmNT(a_nt.data(), b_nt.data(), c.data(), m, n, k, false);
      CheckClose(c, NaiveGemmNT(a_nt, b_nt, m, n, k), 1e-12);

      // accumulate path
      std::vector<double> c2(c);
      kn::GemmNT(a_nt.data(), b_nt.data(), c2.data(), m, n, k, true);
      std::vector<double> doubled(c.size());
      for (size_t i = 0; i < c.size(); i++) doubled[i] = 2.0 * c[i];
      CheckClose(c2, doubled, 1e-12);

      auto a_nn = RandomVec(rng, static_cast<int64_t>(m) * k);
      auto b_nn = RandomVec(rng, static_cast<int64_t>(k) * n);
      std::vector<double> c3(static_cast<int64_t>(m) * n, 0.0);
      kn::GemmNN(a_nn.data(), b_nn.data(), c3.data(), m, k, n, false);
      CheckClose(c3, NaiveGemmNN(a_nn, b_nn, m, k, n), 1e-12);

      auto a_tn = RandomVec(rng, static_cast<int64_t>(m) * n);
      auto b_tn = RandomVec(rng, static_cast<int64_t>(m) * k);
      std::vector<double> c4(static_cast<int64_t>(n) * k, 0.0);
      kn::GemmTN(a_tn.data(), b_tn.data(), c4.data(), m, n, k, false);
      CheckClose(c4, NaiveGemmTN(a_tn, b_tn, m, n, k), 1e-12);
    }
  }
}

TEST_CASE("avx2 variants agree with the scalar reference") {
  if (!kn::BackendSupported(kn::Backend::kAvx2)) return;
  BackendGuard guard;
  Rng rng(7);

  const int shapes[][3] = {{33, 257, 255}, {2048, 256, 19}, {3, 5, 2}};
  for (const auto& s : shapes) {
    int m = s[0], n = s[1], k = s[2];
    auto a = RandomVec(rng, static_cast<int64_t>(m) * k);
    auto b = RandomVec(rng, static_cast<int64_t>(n) * k);
    std::vector<double> c_scalar(static_cast<int64_t>(m) * n);
    std::vector<double> c_avx(static_cast<int64_t>(m) * n);
    kn::SetBackend(kn::Backend::kScalar);
    kn::GemmNT(a.data(), b.data(), c_scalar.data(), m, n, k, false);
    kn::SetBackend(kn::Backend::kAvx2);
    kn::GemmNT(a.data(), b.data(), c_avx.data(), m, n, k, false);
    CheckClose(c_avx, c_scalar, 1e-10);
  }

  // Elementwise and reduction ops.
  int64_t n = 10007;
  auto x = RandomVec(rng, n);
  auto y = RandomVec(rng, n);

  kn::SetBackend(kn::Backend::kScalar);
  double dot_s = kn::Dot(x.data(), y.data(), n);
  double ss_s = kn::SumSquares(x.data(), n);
  kn::SetBackend(kn::Backend::kAvx2);
  double dot_a = kn::Dot(x.data(), y.data(), n);
  double ss_a = kn::SumSquares(x.data(), n);
  CHECK(std::fabs(dot_s - dot_a) / std::fmax(1.0, std::fabs(dot_s)) < 1e-12);
  CHECK(std::fabs(ss_s - ss_a) / ss_s < 1e-12);

  auto relu_s = x;
  auto relu_a = x;
  kn::SetBackend(kn::Backend::kScalar);
  kn::ReluForward(relu_s.data(), n);
  kn::SetBackend(kn::Backend::kAvx2);
  kn::ReluForward(relu_a.data(), n);
  CHECK(relu_s == relu_a);

  auto grad_s = y;
  auto grad_a = y;
  kn::SetBackend(kn::Backend::kScalar);
  kn::ReluBackward(x.data(), grad_s.data(), n);
  kn::SetBackend(kn::Backend::kAvx2);
  kn::ReluBackward(x.data(), grad_a.data(), n);
  CHECK(grad_s == grad_a);

  int rows = 61, cols = 113;
  auto mat = RandomVec(rng, static_cast<int64_t>(rows) * cols);
  std::vector<double> cs_s(cols), cs_a(cols);
  kn::SetBackend(kn::Backend::kScalar);
  kn::ColumnSums(mat.data(), cs_s.data(), rows, cols, false);
  kn::SetBackend(kn::Backend::kAvx2);
  kn::ColumnSums(mat.data(), cs_a.data(), rows, cols, false);
  CheckClose(cs_a, cs_s, 1e-12);
}

TEST_CASE("adam step matches the reference update") {
  BackendGuard guard;
  Rng rng(11);
  int64_t n = 1001;
  auto grad = RandomVec(rng, n);
  auto p0 = RandomVec(rng, n);

  std::vector<double> results[2];
  int idx = 0;
  for (auto backend : {kn::Backend::kScalar, kn::Backend::kAvx2}) {
    if (!kn::BackendSupported(backend)) {
      results[idx] = results[0];
      idx++;
      continue;
    }
    kn::SetBackend(backend);
    auto p = p0;
    std::vector<double> m(n, 0.0), v(n, 0.0);
    for (int t = 1; t <= 3; t++) {
      double b1 = 1.0 - std::pow(0.9, t);
      double b2 = 1.0 - std::pow(0.999, t);
      kn::AdamStep(p.data(), grad.data(), m.data(), v.data(), n, 1e-3, 0.9, 0.999,
                   1e-8, b1, b2);
    }
    results[idx++] = p;
  }
  CheckClose(results[1], results[0], 1e-12);

  // Hand-checked single step: m=0.1g, v=0.001g^2, update = lr*sign(g) approx.
  kn::SetBackend(kn::Backend::kScalar);
  double p = 1.0, g = 2.0, m = 0.0, v = 0.0;
  kn::AdamStep(&p, &g, &m, &v, 1, 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001);
  CHECK(m == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(v == doctest::Approx(0.004).epsilon(1e-12));
  CHECK(p == doctest::Approx(1.0 - 1e-3 * 2.0 / (2.0 + 1e-8)).epsilon(1e-9));
}

TEST_CASE("axpy and scale") {
  BackendGuard guard;
  for (auto backend : {kn::Backend::kScalar, kn::Backend::kAvx2}) {
    if (!kn::BackendSupported(backend)) continue;
    kn::SetBackend(backend);
    std::vector<double> x = {1, 2, 3, 4, 5, 6, 7};
    std::vector<double> y = {1, 1, 1, 1, 1, 1, 1};
    kn::Axpy(2.0, x.data(), y.data(), 7);
    CHECK(y[0] == 3.0);
    CHECK(y[6] == 15.0);
    kn::Scale(y.data(), 0.5, 7);
    CHECK(y[0] == 1.5);
    CHECK(y[6] == 7.5);
  }
}
