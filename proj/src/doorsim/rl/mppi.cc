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

#include "doorsim/rl/mppi.h"

#include <cmath>

#include "doorsim/threading.h"

namespace doorsim {

namespace {
constexpr double kBlowupCost = 1e9;
}

std::array<double, kActionSize> ControlToRawAction(const ControlStep& u) {
  Mat3 rot = ExpSo3(Vec3{u[3], u[4], u[5]});
  std::array<double, kActionSize> raw;
  raw[0] = u[0];
  raw[1] = u[1];
  raw[2] = u[2];
  for (int i = 0; i < 3; i++) {
    raw[3 + i] = rot.m[i][0];  // lambda0 = first column
    raw[6 + i] = rot.m[i][1];  // lambda1 = second column
  }
  return raw;
}

double RolloutCost(const WorldState& world, const ControlSequence& seq,
                   const MppiConfig& cfg, const EpisodeConfig& episode,
                   const PoseGains& gains, const GeometryConfig& geometry) {
  double dt = episode.SubstepDt();
  int substeps = static_cast<int>(std::lround(cfg.control_dt / dt));
  if (substeps < 1) substeps = 1;

  WorldState sim = world;
  double cost = 0.0;
  for (const ControlStep& u : seq) {
    ActionCommand cmd = DecodeAction(ControlToRawAction(u), sim, episode, geometry);
    PoseReference ref = ToPoseReference(cmd);
    Wrench feedback;
    for (int s = 0; s < substeps; s++) {
      Wrench total = ComputeWrench(sim.robot, ref, gains, geometry);
      feedback = FeedbackWrench(total, sim.robot.orientation_WB, geometry);
      try {
        sim = StepWorld(sim, total, geometry, dt);
      } catch (const NumericalError&) {
        return kBlowupCost;
      }
    }
    cost -= ComputeReward(sim, feedback, episode, geometry).total;
  }
  cost += kCoeffDoorDist * std::fabs(sim.door.angle - episode.alpha_target) *
          static_cast<double>(cfg.horizon_steps);
  return cost;
}

MppiController::MppiController(const MppiConfig& cfg, const EpisodeConfig& episode,
                               const PoseGains& gains, const GeometryConfig& geometry)
    : cfg_(cfg), episode_(episode), gains_(gains), geometry_(geometry) {
  Reset();
}

void MppiController::Reset() {
  nominal_.assign(cfg_.horizon_steps, ControlStep{});
}

std::vector<double> MppiController::SoftminWeights(const std::vector<double>& costs,
                                                   double temperature) {
  double min_cost = costs[0];
  for (double c : costs) min_cost = std::fmin(min_cost, c);
  std::vector<double> w(costs.size());
  double total = 0.0;
  for (size_t i = 0; i < costs.size(); i++) {
    w[i] = std::exp(-(costs[i] - min_cost) / temperature);
    total += w[i];
  }
  for (double& wi : w) wi /= total;
  return w;
}

ControlStep MppiController::Plan(const WorldState& believed_world, Rng& rng,
                                 MppiDiagnostics* diag) {
  int samples = cfg_.num_samples;
  int horizon = cfg_.horizon_steps;
  if (static_cast<int>(nominal_.size()) != horizon) Reset();

  // Draw every perturbation up front so the parallel evaluation below cannot
  // affect the random stream.
  std::vector<ControlSequence> seqs(samples, ControlSequence(horizon));
  for (int e = 0; e < samples; e++) {
    for (int t = 0; t < horizon; t++) {
      for (int d = 0; d < 3; d++) {
        seqs[e][t][d] = nominal_[t][d] + cfg_.noise_std_pos * rng.Normal();
        seqs[e][t][3 + d] = nominal_[t][3 + d] + cfg_.noise_std_rot * rng.Normal();
      }
    }
  }

  std::vector<double> costs(samples);
  GlobalPool()->ParallelFor(samples, [&](int64_t lo, int64_t hi) {
    for (int64_t e = lo; e < hi; e++) {
      costs[e] = RolloutCost(believed_world, seqs[e], cfg_, episode_, gains_, geometry_);
    }
  });

  double min_cost = costs[0], mean_cost = 0.0;
  for (double c : costs) {
    min_cost = std::fmin(min_cost, c);
    mean_cost += c;
  }
  mean_cost /= samples;

  if (min_cost >= kBlowupCost) {
    if (diag != nullptr) {
      *diag = MppiDiagnostics{min_cost, mean_cost, min_cost, 0.0, true};
    }
    return ControlStep{};  // hold pose, keep the nominal
  }

  std::vector<double> w = SoftminWeights(costs, cfg_.temperature);

  ControlSequence updated(horizon, ControlStep{});
  for (int e = 0; e < samples; e++) {
    for (int t = 0; t < horizon; t++) {
      for (int d = 0; d < 6; d++) updated[t][d] += w[e] * seqs[e][t][d];
    }
  }
  if (cfg_.smoothing > 0.0) {
    for (int t = 0; t < horizon; t++) {
      for (int d = 0; d < 6; d++) {
        updated[t][d] =
            cfg_.smoothing * nominal_[t][d] + (1.0 - cfg_.smoothing) * updated[t][d];
      }
    }
  }

  if (diag != nullptr) {
    double weighted = 0.0, sumsq = 0.0;
    for (int e = 0; e < samples; e++) {
      weighted += w[e] * costs[e];
      sumsq += w[e] * w[e];
    }
    *diag = MppiDiagnostics{min_cost, mean_cost, weighted, 1.0 / sumsq, false};
  }

  ControlStep action = updated[0];
  for (int t = 0; t + 1 < horizon; t++) nominal_[t] = updated[t + 1];
  nominal_[horizon - 1] = updated[horizon - 1];
  return action;
}

}  // namespace doorsim
