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

#include "doorsim/nn/agent.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace doorsim {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2*pi)
constexpr uint64_t kCheckpointMagic = 0x31304b43534f4f44ULL;  // "DOOSCK01"

void WriteU32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void WriteDoubles(std::ofstream& out, const double* x, size_t n) {
  out.write(reinterpret_cast<const char*>(x), sizeof(double) * n);
}

uint32_t ReadU32(std::ifstream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void ReadDoubles(std::ifstream& in, double* x, size_t n) {
  in.read(reinterpret_cast<char*>(x), sizeof(double) * n);
}

}  // namespace

Agent::Agent()
    : policy({kObservationSize, kHiddenWidth, kHiddenWidth, kHiddenWidth, kActionSize}),
      value({kObservationSize, kHiddenWidth, kHiddenWidth, kHiddenWidth, 1}),
      normalizer(kObservationSize) {
  log_std.fill(0.0);
}

void Agent::InitWeights(Rng& rng, double init_log_std) {
  policy.InitOrthogonal(rng, std::sqrt(2.0), 0.01);
  value.InitOrthogonal(rng, std::sqrt(2.0), 1.0);
  log_std.fill(init_log_std);

  // Bias the action head at the identity rotation (lambda0 = x, lambda1 = y).
  // Gram-Schmidt decoding is scale-invariant, so a zero-mean head would
  // command uniformly random orientations no matter how small the stddev;
  // anchoring the mean keeps early exploration near the aligned attitude.
  double* head_bias = policy.biases(policy.num_layers() - 1);
  head_bias[3] = 1.0;
  head_bias[7] = 1.0;
}

std::array<double, kActionSize> Agent::PolicyMean(
    const std::array<double, kObservationSize>& normalized_obs,
    Mlp::Workspace* ws) const {
  const double* out = policy.Forward(normalized_obs.data(), 1, ws);
  std::array<double, kActionSize> mean;
  std::memcpy(mean.data(), out, sizeof(double) * kActionSize);
  return mean;
}

double Agent::LogProb(const double* mean, const double* action) const {
  double lp = 0.0;
  for (int d = 0; d < kActionSize; d++) {
    double sigma = std::exp(log_std[d]);
    double z = (action[d] - mean[d]) / sigma;
    lp += -0.5 * z * z - log_std[d] - 0.5 * kLogTwoPi;
  }
  return lp;
}

double Agent::Entropy() const {
  double h = 0.0;
  for (int d = 0; d < kActionSize; d++) {
    h += log_std[d] + 0.5 * (kLogTwoPi + 1.0);
  }
  return h;
}

double SampleAction(const Agent& agent, const double* mean, Rng& rng,
                    double* action_out) {
  double lp = 0.0;
  for (int d = 0; d < kActionSize; d++) {
    double z = rng.Normal();
    double sigma = std::exp(agent.log_std[d]);
    action_out[d] = mean[d] + sigma * z;
    lp += -0.5 * z * z - agent.log_std[d] - 0.5 * kLogTwoPi;
  }
  return lp;
}

void SaveCheckpoint(const Agent& agent, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);

  out.write(reinterpret_cast<const char*>(&kCheckpointMagic), sizeof(kCheckpointMagic));
  auto write_mlp = [&](const Mlp& net) {
    WriteU32(out, static_cast<uint32_t>(net.dims().size()));
    for (int d : net.dims()) WriteU32(out, static_cast<uint32_t>(d));
    WriteDoubles(out, net.params(), static_cast<size_t>(net.num_params()));
  };
  write_mlp(agent.policy);
  WriteDoubles(out, agent.log_std.data(), agent.log_std.size());
  write_mlp(agent.value);

  WriteU32(out, static_cast<uint32_t>(agent.normalizer.dim()));
  double count = agent.normalizer.count();
  WriteDoubles(out, &count, 1);
  WriteDoubles(out, agent.normalizer.mean_vector().data(), agent.normalizer.dim());
  WriteDoubles(out, agent.normalizer.m2_vector().data(), agent.normalizer.dim());
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Agent LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

  uint64_t magic = 0;
  in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  if (magic != kCheckpointMagic) {
    throw std::runtime_error("not a doorsim checkpoint: " + path);
  }

  Agent agent;
  auto read_mlp = [&](Mlp& net) {
    uint32_t ndims = ReadU32(in);
    std::vector<int> dims(ndims);
    for (uint32_t i = 0; i < ndims; i++) dims[i] = static_cast<int>(ReadU32(in));
    if (dims != net.dims()) {
      throw std::runtime_error("checkpoint layer shapes do not match: " + path);
    }
    ReadDoubles(in, net.params(), static_cast<size_t>(net.num_params()));
  };
  read_mlp(agent.policy);
  ReadDoubles(in, agent.log_std.data(), agent.log_std.size());
  read_mlp(agent.value);

  uint32_t dim = ReadU32(in);
  if (dim != static_cast<uint32_t>(kObservationSize)) {
    throw std::runtime_error("checkpoint normalizer dimension mismatch: " + path);
  }
  double count = 0.0;
  ReadDoubles(in, &count, 1);
  agent.normalizer.set_count(count);
  ReadDoubles(in, agent.normalizer.mean_vector().data(), dim);
  ReadDoubles(in, agent.normalizer.m2_vector().data(), dim);
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return agent;
}

}  // namespace doorsim
