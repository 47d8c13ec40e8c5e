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

#ifndef DOORSIM_RL_PPO_H_
#define DOORSIM_RL_PPO_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "doorsim/env/task_env.h"
#include "doorsim/nn/agent.h"
#include "doorsim/rng.h"

namespace doorsim {

struct PpoConfig {
  int num_envs = 16;
  int steps_per_env = 512;
  int epochs = 5;
  int minibatch_size = 2048;
  double clip_ratio = 0.2;
  double gamma = 0.995;
  double gae_lambda = 0.95;
  double learning_rate = 3e-4;
  double value_coef = 0.5;
  double entropy_coef = 1e-3;
  double max_grad_norm = 1.0;
  double kl_stop = 0.05;  // stop the epoch sweep when approx-KL exceeds this
  int64_t total_steps = 3000000;
  double reward_scale = 2e-5;
  double init_log_std = -2.302585092994046;  // log(0.1)
  int checkpoint_interval = 50;               // updates

  int64_t BatchSize() const {
    return static_cast<int64_t>(num_envs) * steps_per_env;
  }
};

// Flat per-transition storage across all environments, indexed
// [step * num_envs + env]. done marks the transition that ended its episode;
// truncated marks time-limit ends, whose value targets bootstrap through the
// final observation instead of terminating at zero.
struct RolloutBuffer {
  int steps = 0;
  int envs = 0;
  std::vector<double> obs;      // raw observations, [n x 19]
  std::vector<double> action;   // [n x 9]
  std::vector<double> logprob;  // [n]
  std::vector<double> reward;   // scaled, [n]
  std::vector<double> value;    // V(s_t), [n]
  std::vector<uint8_t> done;    // [n]
  std::vector<uint8_t> truncated;      // [n], subset of done
  std::vector<double> terminal_value;  // [n], V(final obs) where truncated
  std::vector<double> advantage;
  std::vector<double> returns;
  std::vector<double> bootstrap_value;  // V(s_T) per env

  void Resize(int steps_, int envs_);
  int64_t size() const { return static_cast<int64_t>(steps) * envs; }
  int64_t index(int step, int env) const {
    return static_cast<int64_t>(step) * envs + env;
  }
};

// Generalized advantage estimation with done masking:
//   delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// returns = advantages + values. Truncated (time-limit) transitions use
// delta_t = r_t + gamma * V(final obs) - V(s_t): the advantage chain still
// cuts, but the value target bootstraps through the truncation.
void ComputeGae(RolloutBuffer* buf, double gamma, double lambda);

// Whitens advantages across the whole buffer (zero mean, unit variance).
void NormalizeAdvantages(RolloutBuffer* buf);

// Which loss terms participate; used by the finite-difference checks to probe
// each term in isolation.
struct LossSelect {
  bool policy = true;
  bool value = true;
  bool entropy = true;
};

struct LossStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// Evaluates the PPO loss on a minibatch and accumulates exact gradients for
// the policy trunk, the log-std head and the value trunk. Observations must
// already be normalized. Returns the total loss.
double PpoLossAndGrad(const Agent& agent, const double* obs_norm,
                      const double* actions, const double* logprob_old,
                      const double* advantages, const double* returns, int m,
                      const PpoConfig& cfg, const LossSelect& select,
                      double* grad_policy, double* grad_log_std,
                      double* grad_value, Mlp::Workspace* ws_policy,
                      Mlp::Workspace* ws_value, LossStats* stats);

// Adam over the [policy | log_std | value] parameter stack with global
// gradient-norm clipping.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const Agent& agent);
  // Returns the pre-clip global gradient norm.
  double Step(Agent* agent, const double* grad_policy, const double* grad_log_std,
              const double* grad_value, double lr, double max_grad_norm);

 private:
  int64_t step_count_ = 0;
  std::vector<double> m_policy_, v_policy_;
  std::vector<double> m_log_std_, v_log_std_;
  std::vector<double> m_value_, v_value_;
};

struct UpdateStats {
  LossStats loss;
  double grad_norm = 0.0;
  bool aborted = false;  // non-finite loss; parameters were restored
};

// One PPO update over a collected buffer: epochs x shuffled minibatches of
// clipped-surrogate + value + entropy loss. GAE and advantage normalization
// must have run. Restores the old parameters if any loss turns non-finite.
UpdateStats PpoUpdate(Agent* agent, AdamOptimizer* adam, const RolloutBuffer& buf,
                      const PpoConfig& cfg, Rng* shuffle_rng);

struct EpisodeStat {
  double return_raw = 0.0;  // sum of unscaled per-tick rewards
  int length = 0;
  Termination termination = Termination::kRunning;
};

// Per-env carry-over between rollout collections.
struct CollectorState {
  std::vector<std::array<double, kObservationSize>> obs;
  std::vector<double> episode_return;
  std::vector<int> episode_length;
};

// Fills the buffer with steps_per_env transitions from each environment,
// auto-resetting finished episodes and recording their stats.
void CollectRollouts(const std::vector<std::unique_ptr<Environment>>& envs,
                     const Agent& agent, const PpoConfig& cfg, Rng* action_rng,
                     CollectorState* state, RolloutBuffer* buf,
                     std::vector<EpisodeStat>* episodes);

struct MetricsRow {
  int update = 0;
  int64_t global_steps = 0;
  int episodes = 0;
  double mean_return = 0.0;
  double mean_length = 0.0;
  double success_rate = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
  double learning_rate = 0.0;
};

using EnvFactory = std::function<std::unique_ptr<Environment>(uint64_t seed)>;

struct TrainCallbacks {
  std::function<void(const MetricsRow&)> on_metrics;
  std::function<void(int update, const Agent&, bool final)> on_checkpoint;
};

// Full training loop: alternate collect / GAE / update until total_steps.
// A non-finite update halves the learning rate once, then stops training.
// All randomness derives from `seed`; environment i uses seed_base + i.
Agent TrainLoop(const PpoConfig& cfg, const EnvFactory& make_env, uint64_t seed,
                const TrainCallbacks& callbacks);

}  // namespace doorsim

#endif  // DOORSIM_RL_PPO_H_
