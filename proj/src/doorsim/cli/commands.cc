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

#include "doorsim/cli/commands.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "doorsim/csv.h"
#include "doorsim/eval/harness.h"
#include "doorsim/kernels/kernels.h"
#include "doorsim/nn/agent.h"
#include "doorsim/rl/ppo.h"
#include "doorsim/threading.h"

namespace doorsim {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string IsoTimestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void ApplyRuntimeConfig(const RuntimeConfig& rt) {
  ConfigureGlobalPool(rt.threads);
  if (rt.kernel_backend == "scalar") {
    kernels::SetBackend(kernels::Backend::kScalar);
  } else if (rt.kernel_backend == "avx2") {
    if (!kernels::BackendSupported(kernels::Backend::kAvx2)) {
      throw ConfigError("runtime.kernel_backend=avx2 not supported on this cpu");
    }
    kernels::SetBackend(kernels::Backend::kAvx2);
  } else {
    kernels::SetBackend(kernels::DetectBestBackend());
  }
}

ordered_json MakeManifest(const std::string& command, const Config& config,
                          uint64_t seed, const std::string& out_dir) {
  ordered_json manifest;
  manifest["command"] = command;
  manifest["seed"] = seed;
  manifest["out_dir"] = out_dir;
  manifest["started_at"] = IsoTimestamp();
  ordered_json cfg;
  for (const auto& [key, value] : config.Snapshot()) cfg[key] = value;
  manifest["config"] = cfg;
  ordered_json version;
  version["project"] = "doorsim 0.1.0";
#if defined(__VERSION__)
  version["compiler"] = __VERSION__;
#endif
  version["kernel_backend"] = kernels::BackendName(kernels::ActiveBackend());
  manifest["version"] = version;
  return manifest;
}

void WriteManifest(const ordered_json& manifest, const std::string& out_dir) {
  std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest in " + out_dir);
  out << manifest.dump(2) << "\n";
}

HarnessContext MakeHarnessContext(const Config& cfg) {
  return HarnessContext{cfg.geometry, cfg.pose, cfg.episode, cfg.randomization};
}

}  // namespace

Config ResolveConfig(const CommonArgs& args) {
  Config cfg;
  if (!args.config_path.empty()) cfg.LoadFile(args.config_path);
  cfg.ApplyEnvOverrides();
  for (const std::string& o : args.overrides) cfg.ApplyOverride(o);
  cfg.Validate();
  return cfg;
}

int CmdTrain(const CommonArgs& args) {
  Config cfg = ResolveConfig(args);
  ApplyRuntimeConfig(cfg.runtime);

  fs::create_directories(args.out_dir);
  ordered_json manifest = MakeManifest("train", cfg, args.seed, args.out_dir);
  WriteManifest(manifest, args.out_dir);

  CsvWriter metrics(
      (fs::path(args.out_dir) / "metrics.csv").string(),
      {"update", "global_steps", "episodes", "mean_return", "mean_length",
       "success_rate", "policy_loss", "value_loss", "entropy", "approx_kl",
       "clip_fraction", "grad_norm", "learning_rate"});

  EnvFactory factory = [&cfg](uint64_t seed) -> std::unique_ptr<Environment> {
    return std::make_unique<TaskEnv>(cfg.geometry, cfg.pose, cfg.episode,
                                     cfg.randomization, seed);
  };

  int64_t total_updates =
      cfg.ppo.total_steps <= 0
          ? 0
          : (cfg.ppo.total_steps + cfg.ppo.BatchSize() - 1) / cfg.ppo.BatchSize();
  TrainCallbacks callbacks;
  callbacks.on_metrics = [&metrics, total_updates](const MetricsRow& row) {
    metrics.WriteRow({std::to_string(row.update), std::to_string(row.global_steps),
                      std::to_string(row.episodes), CsvDouble(row.mean_return),
                      CsvDouble(row.mean_length), CsvDouble(row.success_rate),
                      CsvDouble(row.policy_loss), CsvDouble(row.value_loss),
                      CsvDouble(row.entropy), CsvDouble(row.approx_kl),
                      CsvDouble(row.clip_fraction), CsvDouble(row.grad_norm),
                      CsvDouble(row.learning_rate)});
    if (row.update % 10 == 0 || row.update == total_updates) {
      std::printf("update %d/%lld return=%.1f success=%.2f kl=%.4f\n", row.update,
                  static_cast<long long>(total_updates), row.mean_return,
                  row.success_rate, row.approx_kl);
      std::fflush(stdout);
    }
  };
  callbacks.on_checkpoint = [&args](int update, const Agent& agent, bool final) {
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoint_%06d.ckpt", update);
    SaveCheckpoint(agent, (fs::path(args.out_dir) / name).string());
    if (final) {
      SaveCheckpoint(agent, (fs::path(args.out_dir) / "checkpoint_final.ckpt").string());
    }
  };

  TrainLoop(cfg.ppo, factory, args.seed, callbacks);

  manifest["completed_at"] = IsoTimestamp();
  WriteManifest(manifest, args.out_dir);
  return kExitOk;
}

int CmdEval(const EvalArgs& args) {
  Config cfg = ResolveConfig(args.common);
  if (!args.experiment.empty()) {
    cfg.Set("eval.experiment", args.experiment);
    cfg.Validate();
  }
  ApplyRuntimeConfig(cfg.runtime);

  std::unique_ptr<TrialController> controller;
  if (args.controller == "policy") {
    if (args.checkpoint.empty()) {
      throw ConfigError("--controller policy requires --checkpoint");
    }
    // Fail before any trial if the checkpoint is unreadable.
    std::unique_ptr<Agent> agent;
    try {
      agent = std::make_unique<Agent>(LoadCheckpoint(args.checkpoint));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    controller = std::make_unique<PolicyController>(std::move(*agent),
                                                    cfg.episode.control_rate_hz);
  } else if (args.controller == "mppi") {
    controller = std::make_unique<MppiTrialController>(cfg.mppi, cfg.episode,
                                                       cfg.pose, cfg.geometry);
  } else {
    throw ConfigError("--controller must be policy or mppi");
  }

  ExperimentSpec spec;
  spec.kind = ParseExperimentKind(cfg.eval.experiment);
  spec.sweep = cfg.eval.sweep.empty() ? DefaultSweep(spec.kind) : cfg.eval.sweep;
  spec.trials_per_value = cfg.eval.trials_per_value;
  spec.timeout_seconds = cfg.eval.timeout_seconds;
  spec.success_band = cfg.eval.success_band;
  spec.seed = args.common.seed;

  fs::create_directories(args.common.out_dir);
  ordered_json manifest = MakeManifest("eval", cfg, args.common.seed, args.common.out_dir);
  manifest["controller"] = args.controller;
  if (!args.checkpoint.empty()) manifest["checkpoint"] = args.checkpoint;
  WriteManifest(manifest, args.common.out_dir);

  std::string traces_dir =
      cfg.eval.write_traces ? (fs::path(args.common.out_dir) / "traces").string() : "";
  std::vector<SweepRow> rows =
      RunSweep(MakeHarnessContext(cfg), spec, controller.get(),
               (fs::path(args.common.out_dir) / "results.csv").string(), traces_dir);

  for (const SweepRow& row : rows) {
    std::printf("%s value=%g success_rate=%.3f mean_time=%.2fs\n",
                cfg.eval.experiment.c_str(), row.value, row.success_rate,
                row.mean_time_s);
  }

  manifest["completed_at"] = IsoTimestamp();
  WriteManifest(manifest, args.common.out_dir);
  return kExitOk;
}

int CmdReplay(const ReplayArgs& args) {
  Config cfg;
  if (!args.common.config_path.empty()) cfg.LoadFile(args.common.config_path);
  cfg.ApplyEnvOverrides();
  for (const std::string& o : args.common.overrides) cfg.ApplyOverride(o);
  cfg.Validate();

  CsvTable table;
  try {
    table = ReadCsv(args.trace_path);
  } catch (const std::exception& e) {
    std::cerr << "replay: " << e.what() << "\n";
    return kExitUsage;
  }
  if (table.rows.empty()) {
    std::printf("replay: empty trace, nothing to check\n");
    return kExitOk;
  }

  const std::vector<std::string>& expected_header = TraceHeader();
  if (table.header != expected_header) {
    std::cerr << "replay: " << args.trace_path << ":1: unexpected trace header\n";
    return kExitUsage;
  }

  auto col = [&](const char* name) { return table.Column(name); };
  int c_alpha = col("alpha"), c_target = col("alpha_target");
  int c_phd[3] = {col("phd_x"), col("phd_y"), col("phd_z")};
  int c_theta = col("theta_hd");
  int c_v[3] = {col("vx"), col("vy"), col("vz")};
  int c_w[3] = {col("wx"), col("wy"), col("wz")};
  int c_f[3] = {col("fx"), col("fy"), col("fz")};
  int c_t[3] = {col("tx"), col("ty"), col("tz")};

  constexpr double kTol = 1e-9;
  for (size_t r = 0; r < table.rows.size(); r++) {
    const std::vector<std::string>& row = table.rows[r];
    int lineno = static_cast<int>(r) + 2;
    auto value = [&](int c) -> double {
      char* end = nullptr;
      double v = std::strtod(row[c].c_str(), &end);
      if (row[c].empty() || end != row[c].c_str() + row[c].size()) {
        throw std::runtime_error(args.trace_path + ":" + std::to_string(lineno) +
                                 ": bad number '" + row[c] + "'");
      }
      return v;
    };

    RewardBreakdown expected;
    try {
      double phd[3] = {value(c_phd[0]), value(c_phd[1]), value(c_phd[2])};
      double dist = std::sqrt(phd[0] * phd[0] + phd[1] * phd[1] + phd[2] * phd[2]);
      expected.r_h_dist = -dist;
      expected.r_h_in = dist > cfg.episode.delta_h_tresh ? -1.0 : 0.0;
      expected.r_att = -value(c_theta);
      double door_err = std::fabs(value(c_alpha) - value(c_target));
      expected.r_d_dist = -door_err;
      expected.r_d_open = door_err > cfg.episode.delta_d_tresh ? -1.0 : 0.0;
      expected.r_vel_lin = -(value(c_v[0]) * value(c_v[0]) + value(c_v[1]) * value(c_v[1]) +
                             value(c_v[2]) * value(c_v[2]));
      expected.r_vel_ang = -(value(c_w[0]) * value(c_w[0]) + value(c_w[1]) * value(c_w[1]) +
                             value(c_w[2]) * value(c_w[2]));
      expected.r_tau = -(value(c_f[0]) * value(c_f[0]) + value(c_f[1]) * value(c_f[1]) +
                         value(c_f[2]) * value(c_f[2]) + value(c_t[0]) * value(c_t[0]) +
                         value(c_t[1]) * value(c_t[1]) + value(c_t[2]) * value(c_t[2]));
    } catch (const std::exception& e) {
      std::cerr << "replay: " << e.what() << "\n";
      return kExitUsage;
    }
    expected.total = kCoeffHookDist * expected.r_h_dist + kCoeffHookIn * expected.r_h_in +
                     kCoeffAttitude * expected.r_att + kCoeffDoorDist * expected.r_d_dist +
                     kCoeffDoorOpen * expected.r_d_open + kCoeffVelLin * expected.r_vel_lin +
                     kCoeffVelAng * expected.r_vel_ang + kCoeffWrench * expected.r_tau;

    struct Check {
      const char* column;
      double expected;
    };
    Check checks[] = {
        {"r_h_dist", expected.r_h_dist},   {"r_h_in", expected.r_h_in},
        {"r_att", expected.r_att},         {"r_d_dist", expected.r_d_dist},
        {"r_d_open", expected.r_d_open},   {"r_vel_lin", expected.r_vel_lin},
        {"r_vel_ang", expected.r_vel_ang}, {"r_tau", expected.r_tau},
        {"total", expected.total},
    };
    for (const Check& check : checks) {
      double logged;
      try {
        logged = value(col(check.column));
      } catch (const std::exception& e) {
        std::cerr << "replay: " << e.what() << "\n";
        return kExitUsage;
      }
      if (std::fabs(logged - check.expected) > kTol) {
        std::printf("replay: divergence at %s:%d column %s: logged %.17g vs recomputed %.17g\n",
                    args.trace_path.c_str(), lineno, check.column, logged, check.expected);
        return kExitRuntime;
      }
    }
  }

  std::printf("replay: %zu rows verified, no divergence\n", table.rows.size());
  return kExitOk;
}

int RunCli(int argc, char** argv) {
  CLI::App app{"aerial door-opening task: training, evaluation and trace tools"};
  app.require_subcommand(1);

  CommonArgs train_args;
  CLI::App* train = app.add_subcommand("train", "train the policy with PPO");
  train->add_option("--config", train_args.config_path, "config file (key = value)");
  train->add_option("--override,-o", train_args.overrides,
                    "config override section.key=value (repeatable)");
  train->add_option("--seed", train_args.seed, "master seed");
  train->add_option("--out", train_args.out_dir, "output directory")->required();

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "run a robustness experiment sweep");
  eval->add_option("--config", eval_args.common.config_path, "config file");
  eval->add_option("--override,-o", eval_args.common.overrides,
                   "config override section.key=value (repeatable)");
  eval->add_option("--seed", eval_args.common.seed, "master seed");
  eval->add_option("--out", eval_args.common.out_dir, "output directory")->required();
  eval->add_option("--controller", eval_args.controller, "policy | mppi");
  eval->add_option("--checkpoint", eval_args.checkpoint, "policy checkpoint path");
  eval->add_option("--experiment", eval_args.experiment,
                   "initial_distance | lateral_offset | vertical_offset | door_closing");

  ReplayArgs replay_args;
  CLI::App* replay = app.add_subcommand("replay", "re-derive rewards from a trace csv");
  replay->add_option("--config", replay_args.common.config_path, "config file");
  replay->add_option("--override,-o", replay_args.common.overrides,
                     "config override section.key=value (repeatable)");
  replay->add_option("--trace", replay_args.trace_path, "trace csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (train->parsed()) return CmdTrain(train_args);
    if (eval->parsed()) return CmdEval(eval_args);
    if (replay->parsed()) return CmdReplay(replay_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace doorsim
