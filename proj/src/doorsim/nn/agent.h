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

#ifndef DOORSIM_NN_AGENT_H_
#define DOORSIM_NN_AGENT_H_

#include <array>
#include <string>

#include "doorsim/env/task_env.h"
#include "doorsim/nn/mlp.h"
#include "doorsim/rng.h"

namespace doorsim {

inline constexpr int kHiddenWidth = 256;

// Policy trunk (19 -> 256 -> 256 -> 256 -> 9) with a state-independent
// diagonal-Gaussian head, a separate value trunk with a scalar output, and
// the observation normalizer. The normalizer is trained alongside the nets
// and frozen at deployment.
struct Agent {
  Agent();

  Mlp policy;
  std::array<double, kActionSize> log_std;
  Mlp value;
  RunningNormalizer normalizer;

  void InitWeights(Rng& rng, double init_log_std);

  // Deterministic policy mean for one normalized observation.
  std::array<double, kActionSize> PolicyMean(
      const std::array<double, kObservationSize>& normalized_obs,
      Mlp::Workspace* ws) const;

  // Log density of `action` under the Gaussian centered at `mean`.
  double LogProb(const double* mean, const double* action) const;

  // Gaussian entropy (state-independent).
  double Entropy() const;
};

// Draws action = mean + exp(log_std) * z and returns its log probability.
double SampleAction(const Agent& agent, const double* mean, Rng& rng,
                    double* action_out);

// Versioned binary checkpoint; round-trips bit-exactly.
void SaveCheckpoint(const Agent& agent, const std::string& path);
Agent LoadCheckpoint(const std::string& path);

}  // namespace doorsim

#endif  // DOORSIM_NN_AGENT_H_
