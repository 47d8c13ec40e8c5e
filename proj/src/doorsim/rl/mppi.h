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

#ifndef DOORSIM_RL_MPPI_H_
#define DOORSIM_RL_MPPI_H_

#include <array>
#include <utility>
#include <vector>

#include "doorsim/env/task_env.h"
#include "doorsim/rng.h"

namespace doorsim {

struct MppiConfig {
  int horizon_steps = 25;
  double control_dt = 0.1;  // 10 Hz replanning
  int num_samples = 64;
  double temperature = 50.0;
  double noise_std_pos = 0.05;  // m, per translation dim
  double noise_std_rot = 0.05;  // rad, per rotation-vector dim
  double smoothing = 0.0;       // blend of the previous nominal into the update
};

// One planned offset: translation in frame D plus a rotation vector. The same
// saturation caps as the policy apply when the offset is decoded.
using ControlStep = std::array<double, 6>;
using ControlSequence = std::vector<ControlStep>;

// Expands a 6-dof offset to the policy's raw 9-vector; the Gram-Schmidt
// decode reconstructs exactly the rotation encoded here.
std::array<double, kActionSize> ControlToRawAction(const ControlStep& u);

// Simulates the sequence through the pose controller and dynamics from
// `world` and returns the negative accumulated reward plus a terminal
// door-angle term. Numerical blowup yields a large finite cost.
double RolloutCost(const WorldState& world, const ControlSequence& seq,
                   const MppiConfig& cfg, const EpisodeConfig& episode,
                   const PoseGains& gains, const GeometryConfig& geometry);

struct MppiDiagnostics {
  double min_cost = 0.0;
  double mean_cost = 0.0;
  double weighted_cost = 0.0;      // sum_i w_i c_i
  double effective_samples = 0.0;  // 1 / sum_i w_i^2
  bool all_blown_up = false;
};

// Information-theoretic MPPI over pose offsets: noise-perturbed rollouts are
// softmin-weighted by cost, the weighted mean becomes the new nominal, its
// first element is emitted, and the sequence shifts by one step.
class MppiController {
 public:
  MppiController(const MppiConfig& cfg, const EpisodeConfig& episode,
                 const PoseGains& gains, const GeometryConfig& geometry);

  void Reset();

  // Plans from the controller's belief of the world (the harness injects
  // handle-observation offsets here) and returns the action to apply now.
  ControlStep Plan(const WorldState& believed_world, Rng& rng,
                   MppiDiagnostics* diag = nullptr);

  const ControlSequence& nominal() const { return nominal_; }
  void set_nominal(ControlSequence seq) { nominal_ = std::move(seq); }

  // Softmin weights for a cost vector; exposed for the property tests.
  static std::vector<double> SoftminWeights(const std::vector<double>& costs,
                                            double temperature);

 private:
  MppiConfig cfg_;
  EpisodeConfig episode_;
  PoseGains gains_;
  GeometryConfig geometry_;
  ControlSequence nominal_;
};

}  // namespace doorsim

#endif  // DOORSIM_RL_MPPI_H_
