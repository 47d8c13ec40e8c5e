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

#include "doorsim/rl/ppo.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "doorsim/kernels/kernels.h"

namespace doorsim {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kLogStdMin = -8.0;
constexpr double kLogStdMax = 2.0;

void FisherYates(std::vector<int64_t>* idx, Rng* rng) {
  for (int64_t i = static_cast<int64_t>(idx->size()) - 1; i > 0; i--) {
    int64_t j = static_cast<int64_t>(rng->NextU64() % static_cast<uint64_t>(i + 1));
    std::swap((*idx)[i], (*idx)[j]);
  }
}

}  // namespace

void RolloutBuffer::Resize(int steps_, int envs_) {
  steps = steps_;
  envs = envs_;
  int64_t n = size();
  obs.assign(n * kObservationSize, 0.0);
  action.assign(n * kActionSize, 0.0);
  logprob.assign(n, 0.0);
  reward.assign(n, 0.0);
  value.assign(n, 0.0);
  done.assign(n, 0);
  truncated.assign(n, 0);
  terminal_value.assign(n, 0.0);
  advantage.assign(n, 0.0);
  returns.assign(n, 0.0);
  bootstrap_value.assign(envs_, 0.0);
}

void ComputeGae(RolloutBuffer* buf, double gamma, double lambda) {
  for (int e = 0; e < buf->envs; e++) {
    double last_gae = 0.0;
    for (int t = buf->steps - 1; t >= 0; t--) {
      int64_t i = buf->index(t, e);
      double not_done = buf->done[i] ? 0.0 : 1.0;
      double next_value =
          t == buf->steps - 1 ? buf->bootstrap_value[e] : buf->value[buf->index(t + 1, e)];
      double delta;
      if (buf->truncated[i]) {
        // Time-limit end: the episode stops but the task does not; bootstrap
        // through the final observation to avoid a terminal-value bias.
        delta = buf->reward[i] + gamma * buf->terminal_value[i] - buf->value[i];
      } else {
        delta = buf->reward[i] + gamma * next_value * not_done - buf->value[i];
      }
      last_gae = delta + gamma * lambda * not_done * last_gae;
      buf->advantage[i] = last_gae;
    }
  }
  for (int64_t i = 0; i < buf->size(); i++) {
    buf->returns[i] = buf->advantage[i] + buf->value[i];
  }
}

void NormalizeAdvantages(RolloutBuffer* buf) {
  int64_t n = buf->size();
  if (n == 0) return;
  double mean = 0.0;
  for (int64_t i = 0; i < n; i++) mean += buf->advantage[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (int64_t i = 0; i < n; i++) {
    double d = buf->advantage[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  // Guard with a floor rather than an additive epsilon so that jointly
  // rescaling rewards and values leaves the whitened advantages unchanged.
  double std_dev = std::sqrt(var);
  double inv_std = 1.0 / (std_dev > 1e-12 ? std_dev : 1e-12);
  for (int64_t i = 0; i < n; i++) {
    buf->advantage[i] = (buf->advantage[i] - mean) * inv_std;
  }
}

double PpoLossAndGrad(const Agent& agent, const double* obs_norm,
                      const double* actions, const double* logprob_old,
                      const double* advantages, const double* returns, int m,
                      const PpoConfig& cfg, const LossSelect& select,
                      double* grad_policy, double* grad_log_std,
                      double* grad_value, Mlp::Workspace* ws_policy,
                      Mlp::Workspace* ws_value, LossStats* stats) {
  double total_loss = 0.0;
  double inv_m = 1.0 / static_cast<double>(m);

  if (select.policy) {
    const double* mean = agent.policy.Forward(obs_norm, m, ws_policy);
    std::vector<double> dmean(static_cast<int64_t>(m) * kActionSize, 0.0);

    double policy_loss = 0.0, kl = 0.0;
    int clipped = 0;
    for (int i = 0; i < m; i++) {
      const double* mu = mean + static_cast<int64_t>(i) * kActionSize;
      const double* a = actions + static_cast<int64_t>(i) * kActionSize;
      double z[kActionSize], sigma[kActionSize];
      double lp_new = 0.0;
      for (int d = 0; d < kActionSize; d++) {
        sigma[d] = std::exp(agent.log_std[d]);
        z[d] = (a[d] - mu[d]) / sigma[d];
        lp_new += -0.5 * z[d] * z[d] - agent.log_std[d] - 0.5 * 1.8378770664093453;
      }
      double log_ratio = lp_new - logprob_old[i];
      double ratio = std::exp(log_ratio);
      double adv = advantages[i];

      double surr1 = ratio * adv;
      double clipped_ratio =
          std::fmin(1.0 + cfg.clip_ratio, std::fmax(1.0 - cfg.clip_ratio, ratio));
      double surr2 = clipped_ratio * adv;
      policy_loss += -std::fmin(surr1, surr2);

      // Gradient flows only through the unclipped branch of the min.
      double dloss_dlp = surr1 <= surr2 ? -adv * ratio : 0.0;
      double* dmu = dmean.data() + static_cast<int64_t>(i) * kActionSize;
      for (int d = 0; d < kActionSize; d++) {
        // dlp/dmu = z/sigma, dlp/dlog_std = z^2 - 1.
        dmu[d] = dloss_dlp * inv_m * (z[d] / sigma[d]);
        grad_log_std[d] += dloss_dlp * inv_m * (z[d] * z[d] - 1.0);
      }

      kl += (ratio - 1.0) - log_ratio;
      if (std::fabs(ratio - 1.0) > cfg.clip_ratio) clipped++;
    }
    policy_loss *= inv_m;
    total_loss += policy_loss;
    agent.policy.Backward(dmean.data(), m, ws_policy, grad_policy);

    if (stats != nullptr) {
      stats->policy_loss = policy_loss;
      stats->approx_kl = kl * inv_m;
      stats->clip_fraction = static_cast<double>(clipped) * inv_m;
    }
  }

  if (select.value) {
    const double* v = agent.value.Forward(obs_norm, m, ws_value);
    std::vector<double> dv(m, 0.0);
    double value_loss = 0.0;
    for (int i = 0; i < m; i++) {
      double diff = v[i] - returns[i];
      value_loss += diff * diff;
      dv[i] = cfg.value_coef * 2.0 * diff * inv_m;
    }
    value_loss *= inv_m;
    total_loss += cfg.value_coef * value_loss;
    agent.value.Backward(dv.data(), m, ws_value, grad_value);
    if (stats != nullptr) stats->value_loss = value_loss;
  }

  if (select.entropy) {
    double entropy = agent.Entropy();
    total_loss -= cfg.entropy_coef * entropy;
    for (int d = 0; d < kActionSize; d++) grad_log_std[d] -= cfg.entropy_coef;
    if (stats != nullptr) stats->entropy = entropy;
  }

  return total_loss;
}

AdamOptimizer::AdamOptimizer(const Agent& agent)
    : m_policy_(agent.policy.num_params(), 0.0),
      v_policy_(agent.policy.num_params(), 0.0),
      m_log_std_(kActionSize, 0.0),
      v_log_std_(kActionSize, 0.0),
      m_value_(agent.value.num_params(), 0.0),
      v_value_(agent.value.num_params(), 0.0) {}

double AdamOptimizer::Step(Agent* agent, const double* grad_policy,
                           const double* grad_log_std, const double* grad_value,
                           double lr, double max_grad_norm) {
  int64_t np = agent->policy.num_params();
  int64_t nv = agent->value.num_params();

  double actor_sq = kernels::SumSquares(grad_policy, np) +
                    kernels::SumSquares(grad_log_std, kActionSize);
  double value_sq = kernels::SumSquares(grad_value, nv);
  double norm = std::sqrt(actor_sq + value_sq);

  // Norm-clip the actor (policy + log_std) and the critic as separate
  // blocks: early in training the value errors dwarf the policy gradient,
  // and a shared clip would throttle the actor by the critic's scale.
  std::vector<double> scaled;
  const double* gp = grad_policy;
  const double* gs = grad_log_std;
  const double* gv = grad_value;
  double actor_norm = std::sqrt(actor_sq);
  double value_norm = std::sqrt(value_sq);
  if (actor_norm > max_grad_norm || value_norm > max_grad_norm) {
    scaled.resize(np + kActionSize + nv);
    std::memcpy(scaled.data(), grad_policy, sizeof(double) * np);
    std::memcpy(scaled.data() + np, grad_log_std, sizeof(double) * kActionSize);
    std::memcpy(scaled.data() + np + kActionSize, grad_value, sizeof(double) * nv);
    if (actor_norm > max_grad_norm) {
      kernels::Scale(scaled.data(), max_grad_norm / actor_norm, np + kActionSize);
    }
    if (value_norm > max_grad_norm) {
      kernels::Scale(scaled.data() + np + kActionSize, max_grad_norm / value_norm, nv);
    }
    gp = scaled.data();
    gs = scaled.data() + np;
    gv = scaled.data() + np + kActionSize;
  }

  step_count_++;
  double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step_count_));
  double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step_count_));

  kernels::AdamStep(agent->policy.params(), gp, m_policy_.data(), v_policy_.data(),
                    np, lr, kAdamBeta1, kAdamBeta2, kAdamEps, bias1, bias2);
  kernels::AdamStep(agent->log_std.data(), gs, m_log_std_.data(), v_log_std_.data(),
                    kActionSize, lr, kAdamBeta1, kAdamBeta2, kAdamEps, bias1, bias2);
  kernels::AdamStep(agent->value.params(), gv, m_value_.data(), v_value_.data(), nv,
                    lr, kAdamBeta1, kAdamBeta2, kAdamEps, bias1, bias2);

  for (double& ls : agent->log_std) {
    ls = std::fmin(kLogStdMax, std::fmax(kLogStdMin, ls));
  }
  return norm;
}

UpdateStats PpoUpdate(Agent* agent, AdamOptimizer* adam, const RolloutBuffer& buf,
                      const PpoConfig& cfg, Rng* shuffle_rng) {
  UpdateStats out;
  int64_t n = buf.size();
  int mb = cfg.minibatch_size < n ? cfg.minibatch_size : static_cast<int>(n);

  // Normalize the whole buffer once with the stats that were frozen during
  // collection, so the first epoch sees ratio == 1.
  std::vector<double> obs_norm(n * kObservationSize);
  agent->normalizer.Apply(buf.obs.data(), obs_norm.data(), static_cast<int>(n));

  std::vector<double> saved_policy = agent->policy.param_vector();
  std::array<double, kActionSize> saved_log_std = agent->log_std;
  std::vector<double> saved_value = agent->value.param_vector();

  std::vector<int64_t> indices(n);
  std::iota(indices.begin(), indices.end(), 0);

  std::vector<double> mb_obs(static_cast<int64_t>(mb) * kObservationSize);
  std::vector<double> mb_action(static_cast<int64_t>(mb) * kActionSize);
  std::vector<double> mb_logprob(mb), mb_adv(mb), mb_ret(mb);
  std::vector<double> grad_policy(agent->policy.num_params());
  std::vector<double> grad_log_std(kActionSize);
  std::vector<double> grad_value(agent->value.num_params());
  Mlp::Workspace ws_policy, ws_value;

  int num_minibatches = 0;
  double grad_norm_acc = 0.0;
  LossStats acc;
  bool kl_exceeded = false;

  for (int epoch = 0; epoch < cfg.epochs && !kl_exceeded; epoch++) {
    FisherYates(&indices, shuffle_rng);
    for (int64_t start = 0; start + mb <= n; start += mb) {
      for (int i = 0; i < mb; i++) {
        int64_t src = indices[start + i];
        std::memcpy(mb_obs.data() + static_cast<int64_t>(i) * kObservationSize,
                    obs_norm.data() + src * kObservationSize,
                    sizeof(double) * kObservationSize);
        std::memcpy(mb_action.data() + static_cast<int64_t>(i) * kActionSize,
                    buf.action.data() + src * kActionSize,
                    sizeof(double) * kActionSize);
        mb_logprob[i] = buf.logprob[src];
        mb_adv[i] = buf.advantage[src];
        mb_ret[i] = buf.returns[src];
      }
      std::fill(grad_policy.begin(), grad_policy.end(), 0.0);
      std::fill(grad_log_std.begin(), grad_log_std.end(), 0.0);
      std::fill(grad_value.begin(), grad_value.end(), 0.0);

      LossStats stats;
      double loss = PpoLossAndGrad(*agent, mb_obs.data(), mb_action.data(),
                                   mb_logprob.data(), mb_adv.data(), mb_ret.data(),
                                   mb, cfg, LossSelect{}, grad_policy.data(),
                                   grad_log_std.data(), grad_value.data(),
                                   &ws_policy, &ws_value, &stats);
      if (!std::isfinite(loss)) {
        agent->policy.param_vector() = saved_policy;
        agent->log_std = saved_log_std;
        agent->value.param_vector() = saved_value;
        out.aborted = true;
        return out;
      }

      grad_norm_acc += adam->Step(agent, grad_policy.data(), grad_log_std.data(),
                                  grad_value.data(), cfg.learning_rate,
                                  cfg.max_grad_norm);
      acc.policy_loss += stats.policy_loss;
      acc.value_loss += stats.value_loss;
      acc.entropy += stats.entropy;
      acc.approx_kl += stats.approx_kl;
      acc.clip_fraction += stats.clip_fraction;
      num_minibatches++;

      // Ratios get volatile at small stddev; cut the sweep before a hot
      // minibatch can wreck the policy.
      if (cfg.kl_stop > 0.0 && stats.approx_kl > cfg.kl_stop) {
        kl_exceeded = true;
        break;
      }
    }
  }

  if (num_minibatches > 0) {
    double inv = 1.0 / num_minibatches;
    out.loss.policy_loss = acc.policy_loss * inv;
    out.loss.value_loss = acc.value_loss * inv;
    out.loss.entropy = acc.entropy * inv;
    out.loss.approx_kl = acc.approx_kl * inv;
    out.loss.clip_fraction = acc.clip_fraction * inv;
    out.grad_norm = grad_norm_acc * inv;
  }
  return out;
}

void CollectRollouts(const std::vector<std::unique_ptr<Environment>>& envs,
                     const Agent& agent, const PpoConfig& cfg, Rng* action_rng,
                     CollectorState* state, RolloutBuffer* buf,
                     std::vector<EpisodeStat>* episodes) {
  int n_envs = static_cast<int>(envs.size());
  buf->Resize(cfg.steps_per_env, n_envs);

  std::vector<double> raw_obs(static_cast<int64_t>(n_envs) * kObservationSize);
  std::vector<double> norm_obs(static_cast<int64_t>(n_envs) * kObservationSize);
  Mlp::Workspace ws_policy, ws_value, ws_terminal;

  for (int t = 0; t < cfg.steps_per_env; t++) {
    for (int e = 0; e < n_envs; e++) {
      std::memcpy(raw_obs.data() + static_cast<int64_t>(e) * kObservationSize,
                  state->obs[e].data(), sizeof(double) * kObservationSize);
    }
    agent.normalizer.Apply(raw_obs.data(), norm_obs.data(), n_envs);
    const double* mean = agent.policy.Forward(norm_obs.data(), n_envs, &ws_policy);
    const double* values = agent.value.Forward(norm_obs.data(), n_envs, &ws_value);

    for (int e = 0; e < n_envs; e++) {
      int64_t i = buf->index(t, e);
      std::memcpy(buf->obs.data() + i * kObservationSize,
                  raw_obs.data() + static_cast<int64_t>(e) * kObservationSize,
                  sizeof(double) * kObservationSize);
      buf->value[i] = values[e];

      double* action = buf->action.data() + i * kActionSize;
      buf->logprob[i] = SampleAction(
          agent, mean + static_cast<int64_t>(e) * kActionSize, *action_rng, action);

      std::array<double, kActionSize> a;
      std::memcpy(a.data(), action, sizeof(double) * kActionSize);
      EnvStep step = envs[e]->Step(a);

      buf->reward[i] = step.reward * cfg.reward_scale;
      buf->done[i] = step.done ? 1 : 0;
      state->episode_return[e] += step.reward;
      state->episode_length[e]++;

      if (step.done) {
        if (step.termination == Termination::kTimeout) {
          buf->truncated[i] = 1;
          // Value of the final observation, normalized like everything else.
          std::array<double, kObservationSize> norm_final;
          agent.normalizer.Apply(step.observation.data(), norm_final.data(), 1);
          buf->terminal_value[i] =
              agent.value.Forward(norm_final.data(), 1, &ws_terminal)[0];
        }
        episodes->push_back(EpisodeStat{state->episode_return[e],
                                        state->episode_length[e], step.termination});
        state->episode_return[e] = 0.0;
        state->episode_length[e] = 0;
        state->obs[e] = envs[e]->Reset();
      } else {
        state->obs[e] = step.observation;
      }
    }
  }

  // Bootstrap values for the (possibly mid-episode) final observations.
  for (int e = 0; e < n_envs; e++) {
    std::memcpy(raw_obs.data() + static_cast<int64_t>(e) * kObservationSize,
                state->obs[e].data(), sizeof(double) * kObservationSize);
  }
  agent.normalizer.Apply(raw_obs.data(), norm_obs.data(), n_envs);
  const double* values = agent.value.Forward(norm_obs.data(), n_envs, &ws_value);
  for (int e = 0; e < n_envs; e++) buf->bootstrap_value[e] = values[e];
}

Agent TrainLoop(const PpoConfig& cfg, const EnvFactory& make_env, uint64_t seed,
                const TrainCallbacks& callbacks) {
  Rng init_rng(Rng::Split(seed, 0));
  Rng action_rng(Rng::Split(seed, 1));
  Rng shuffle_rng(Rng::Split(seed, 2));
  uint64_t env_seed_base = Rng::Split(seed, 3);

  Agent agent;
  agent.InitWeights(init_rng, cfg.init_log_std);
  AdamOptimizer adam(agent);

  std::vector<std::unique_ptr<Environment>> envs;
  CollectorState state;
  for (int e = 0; e < cfg.num_envs; e++) {
    envs.push_back(make_env(env_seed_base + static_cast<uint64_t>(e)));
    state.obs.push_back(envs.back()->Reset());
    state.episode_return.push_back(0.0);
    state.episode_length.push_back(0);
  }

  int64_t batch = cfg.BatchSize();
  int num_updates =
      cfg.total_steps <= 0 ? 0 : static_cast<int>((cfg.total_steps + batch - 1) / batch);

  RolloutBuffer buf;
  PpoConfig run_cfg = cfg;
  bool lr_halved = false;

  for (int update = 1; update <= num_updates; update++) {
    std::vector<EpisodeStat> episodes;
    CollectRollouts(envs, agent, run_cfg, &action_rng, &state, &buf, &episodes);
    ComputeGae(&buf, run_cfg.gamma, run_cfg.gae_lambda);
    NormalizeAdvantages(&buf);

    UpdateStats stats = PpoUpdate(&agent, &adam, buf, run_cfg, &shuffle_rng);
    bool stop = false;
    if (stats.aborted) {
      if (!lr_halved) {
        run_cfg.learning_rate *= 0.5;
        lr_halved = true;
      } else {
        stop = true;  // second failure: keep the last good parameters
      }
    } else {
      // The normalizer advances only after the update so that collection and
      // reuse of a batch see identical statistics.
      agent.normalizer.Update(buf.obs.data(), static_cast<int>(buf.size()));
    }

    if (callbacks.on_metrics) {
      MetricsRow row;
      row.update = update;
      row.global_steps = static_cast<int64_t>(update) * batch;
      row.episodes = static_cast<int>(episodes.size());
      double ret = 0.0, len = 0.0, succ = 0.0;
      for (const EpisodeStat& ep : episodes) {
        ret += ep.return_raw;
        len += ep.length;
        succ += ep.termination == Termination::kSuccess ? 1.0 : 0.0;
      }
      int n_ep = static_cast<int>(episodes.size());
      row.mean_return = n_ep > 0 ? ret / n_ep : std::nan("");
      row.mean_length = n_ep > 0 ? len / n_ep : std::nan("");
      row.success_rate = n_ep > 0 ? succ / n_ep : std::nan("");
      row.policy_loss = stats.loss.policy_loss;
      row.value_loss = stats.loss.value_loss;
      row.entropy = stats.loss.entropy;
      row.approx_kl = stats.loss.approx_kl;
      row.clip_fraction = stats.loss.clip_fraction;
      row.grad_norm = stats.grad_norm;
      row.learning_rate = run_cfg.learning_rate;
      callbacks.on_metrics(row);
    }
    if (callbacks.on_checkpoint && cfg.checkpoint_interval > 0 &&
        update % cfg.checkpoint_interval == 0 && update != num_updates) {
      callbacks.on_checkpoint(update, agent, false);
    }
    if (stop) break;
  }

  if (callbacks.on_checkpoint) {
    callbacks.on_checkpoint(num_updates, agent, true);
  }
  return agent;
}

}  // namespace doorsim
