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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doorsim/nn/agent.h"
#include "doorsim/nn/mlp.h"
#include "doorsim/rng.h"

using namespace doorsim;

TEST_CASE("zero parameters give zero output") {
  Mlp net({19, 256, 256, 256, 9});
  Mlp::Workspace ws;
  std::vector<double> x(19, 1.5);
  const double* y = net.Forward(x.data(), 1, &ws);
  for (int d = 0; d < 9; d++) CHECK(y[d] == 0.0);
}

TEST_CASE("hand-constructed pass-through network reproduces selected inputs") {
  Mlp net({19, 256, 256, 256, 9});
  // Route x_d through relu(x) - relu(-x) pairs so signs survive.
  for (int d = 0; d < 9; d++) {
    net.weights(0)[(2 * d) * 19 + d] = 1.0;
    net.weights(0)[(2 * d + 1) * 19 + d] = -1.0;
  }
  for (int j = 0; j < 18; j++) {
    net.weights(1)[j * 256 + j] = 1.0;
    net.weights(2)[j * 256 + j] = 1.0;
  }
  for (int d = 0; d < 9; d++) {
    net.weights(3)[d * 256 + 2 * d] = 1.0;
    net.weights(3)[d * 256 + 2 * d + 1] = -1.0;
  }

  Rng rng(3);
  Mlp::Workspace ws;
  for (int trial = 0; trial < 10; trial++) {
    std::vector<double> x(19);
    for (double& v : x) v = rng.Normal();
    const double* y = net.Forward(x.data(), 1, &ws);
    for (int d = 0; d < 9; d++) {
      CHECK(y[d] == doctest::Approx(x[d]).epsilon(1e-12));
    }
  }
}

TEST_CASE("output perturbations respect the layer-norm Lipschitz bound") {
  Rng rng(7);
  Agent agent;
  agent.InitWeights(rng, std::log(0.5));

  // Product of Frobenius norms upper-bounds the product of spectral norms.
  double lipschitz = 1.0;
  for (int l = 0; l < agent.policy.num_layers(); l++) {
    int64_t n = static_cast<int64_t>(agent.policy.dims()[l]) *
                agent.policy.dims()[l + 1];
    double frob = 0.0;
    const double* w = agent.policy.weights(l);
    for (int64_t i = 0; i < n; i++) frob += w[i] * w[i];
    lipschitz *= std::sqrt(frob);
  }

  Mlp::Workspace ws;
  for (int trial = 0; trial < 50; trial++) {
    std::array<double, 19> x, xp;
    for (int i = 0; i < 19; i++) {
      x[i] = rng.Normal();
      xp[i] = x[i] + 1e-4 * rng.Normal();
    }
    auto y = agent.PolicyMean(x, &ws);
    auto yp = agent.PolicyMean(xp, &ws);
    double dy = 0.0, dx = 0.0;
    for (int d = 0; d < 9; d++) dy += (yp[d] - y[d]) * (yp[d] - y[d]);
    for (int i = 0; i < 19; i++) dx += (xp[i] - x[i]) * (xp[i] - x[i]);
    CHECK(std::sqrt(dy) <= lipschitz * std::sqrt(dx) + 1e-12);
  }
}

TEST_CASE("orthogonal init produces orthonormal rows or columns") {
  Rng rng(11);
  Mlp net({19, 256, 256, 9});
  net.InitOrthogonal(rng, std::sqrt(2.0), 0.01);

  // 256x19: columns orthonormal, scaled by sqrt(2).
  {
    const double* w = net.weights(0);
    for (int a = 0; a < 19; a++) {
      for (int b = 0; b <= a; b++) {
        double dot = 0.0;
        for (int i = 0; i < 256; i++) dot += w[i * 19 + a] * w[i * 19 + b];
        CHECK(dot == doctest::Approx(a == b ? 2.0 : 0.0).epsilon(1e-9));
      }
    }
  }
  // 9x256 head: rows orthonormal, scaled by 0.01.
  {
    const double* w = net.weights(2);
    for (int a = 0; a < 9; a++) {
      for (int b = 0; b <= a; b++) {
        double dot = 0.0;
        for (int i = 0; i < 256; i++) dot += w[a * 256 + i] * w[b * 256 + i];
        double want = a == b ? 1e-4 : 0.0;
        CHECK(std::fabs(dot - want) < 1e-12);
      }
    }
  }
}

TEST_CASE("gaussian head: logprob formula and sampling statistics") {
  Rng rng(13);
  Agent agent;
  agent.InitWeights(rng, std::log(0.5));

  std::array<double, 9> mean;
  for (double& m : mean) m = rng.Normal();

  // Log density of the mean itself.
  double lp = agent.LogProb(mean.data(), mean.data());
  double expect = -0.5 * 9.0 * std::log(2.0 * M_PI);
  for (double ls : agent.log_std) expect -= ls;
  CHECK(lp == doctest::Approx(expect).epsilon(1e-12));

  // Nearly deterministic limit.
  Agent tight = agent;
  tight.log_std.fill(-10.0);
  std::array<double, 9> action;
  SampleAction(tight, mean.data(), rng, action.data());
  for (int d = 0; d < 9; d++) {
    CHECK(std::fabs(action[d] - mean[d]) < 1e-3);
  }

  // Empirical stddev within 2% over 1e5 samples.
  const int n = 100000;
  std::vector<double> sum(9, 0.0), sumsq(9, 0.0);
  for (int i = 0; i < n; i++) {
    SampleAction(agent, mean.data(), rng, action.data());
    for (int d = 0; d < 9; d++) {
      sum[d] += action[d];
      sumsq[d] += action[d] * action[d];
    }
  }
  for (int d = 0; d < 9; d++) {
    double mu = sum[d] / n;
    double sd = std::sqrt(sumsq[d] / n - mu * mu);
    CHECK(std::fabs(sd - 0.5) / 0.5 < 0.02);
  }

  // Sampling determinism under a fixed seed.
  Rng r1(42), r2(42);
  std::array<double, 9> a1, a2;
  double lp1 = SampleAction(agent, mean.data(), r1, a1.data());
  double lp2 = SampleAction(agent, mean.data(), r2, a2.data());
  CHECK(lp1 == lp2);
  CHECK(a1 == a2);
}

TEST_CASE("backward matches finite differences on a small network") {
  Rng rng(17);
  Mlp net({4, 8, 8, 3});
  net.InitOrthogonal(rng, std::sqrt(2.0), 0.5);

  const int m = 5;
  std::vector<double> x(m * 4), dy(m * 3);
  for (double& v : x) v = rng.Normal();
  for (double& v : dy) v = rng.Normal();

  // Loss = sum(dy .* f(x)) so dL/dy = dy.
  Mlp::Workspace ws;
  auto loss = [&] {
    const double* y = net.Forward(x.data(), m, &ws);
    double s = 0.0;
    for (int i = 0; i < m * 3; i++) s += dy[i] * y[i];
    return s;
  };

  std::vector<double> grad(net.num_params(), 0.0);
  net.Forward(x.data(), m, &ws);
  net.Backward(dy.data(), m, &ws, grad.data());

  Rng pick(23);
  for (int t = 0; t < 60; t++) {
    int64_t idx = static_cast<int64_t>(pick.NextU64() % net.num_params());
    double saved = net.params()[idx];
    double h = 1e-6;
    net.params()[idx] = saved + h;
    double up = loss();
    net.params()[idx] = saved - h;
    double down = loss();
    net.params()[idx] = saved;
    double fd = (up - down) / (2.0 * h);
    CHECK(std::fabs(fd - grad[idx]) < 1e-6 * std::fmax(1.0, std::fabs(fd)));
  }
}

TEST_CASE("running normalizer matches a direct mean/variance computation") {
  Rng rng(19);
  RunningNormalizer norm(3);

  // Pass-through before the first update.
  double x0[3] = {5.0, -2.0, 0.5};
  double out0[3];
  norm.Apply(x0, out0, 1);
  CHECK(out0[0] == 5.0);

  const int n = 500;
  std::vector<double> data(n * 3);
  for (double& v : data) v = 2.0 + 3.0 * rng.Normal();
  norm.Update(data.data(), 200);
  norm.Update(data.data() + 200 * 3, n - 200);

  for (int d = 0; d < 3; d++) {
    double mean = 0.0;
    for (int i = 0; i < n; i++) mean += data[i * 3 + d];
    mean /= n;
    double var = 0.0;
    for (int i = 0; i < n; i++) {
      double diff = data[i * 3 + d] - mean;
      var += diff * diff;
    }
    var /= n;
    CHECK(norm.mean(d) == doctest::Approx(mean).epsilon(1e-12));
    CHECK(norm.variance(d) == doctest::Approx(var).epsilon(1e-10));
  }

  double x[3] = {1.0, 2.0, 3.0};
  double out[3];
  norm.Apply(x, out, 1);
  for (int d = 0; d < 3; d++) {
    double want = (x[d] - norm.mean(d)) / std::sqrt(norm.variance(d) + 1e-8);
    CHECK(out[d] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("checkpoint round-trip is bit-exact") {
  namespace fs = std::filesystem;
  Rng rng(29);
  Agent agent;
  agent.InitWeights(rng, std::log(0.5));
  std::vector<double> obs_batch(40 * kObservationSize);
  for (double& v : obs_batch) v = rng.Normal();
  agent.normalizer.Update(obs_batch.data(), 40);

  fs::path dir = fs::temp_directory_path() / "doorsim_ckpt_test";
  fs::create_directories(dir);
  std::string path = (dir / "agent.ckpt").string();
  SaveCheckpoint(agent, path);
  Agent loaded = LoadCheckpoint(path);

  CHECK(loaded.policy.param_vector() == agent.policy.param_vector());
  CHECK(loaded.value.param_vector() == agent.value.param_vector());
  CHECK(loaded.log_std == agent.log_std);
  CHECK(loaded.normalizer.count() == agent.normalizer.count());
  CHECK(loaded.normalizer.mean_vector() == agent.normalizer.mean_vector());
  CHECK(loaded.normalizer.m2_vector() == agent.normalizer.m2_vector());

  // Saving the loaded agent reproduces the file byte for byte.
  std::string path2 = (dir / "agent2.ckpt").string();
  SaveCheckpoint(loaded, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  CHECK(!b1.empty());

  CHECK_THROWS(LoadCheckpoint((dir / "missing.ckpt").string()));
  fs::remove_all(dir);
}
