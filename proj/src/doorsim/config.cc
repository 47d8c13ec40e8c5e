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

#include "doorsim/config.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace doorsim {

namespace {

std::string Trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> SplitCommas(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) out.push_back(Trim(cur));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

double ParseDouble(const std::string& key, const std::string& s) {
  const std::string t = Trim(s);
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError("invalid number for " + key + ": '" + s + "'");
  }
  return v;
}

int64_t ParseInt(const std::string& key, const std::string& s) {
  const std::string t = Trim(s);
  char* end = nullptr;
  long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size()) {
    throw ConfigError("invalid integer for " + key + ": '" + s + "'");
  }
  return static_cast<int64_t>(v);
}

bool ParseBool(const std::string& key, const std::string& s) {
  const std::string t = Trim(s);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError("invalid bool for " + key + ": '" + s + "'");
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Single source of truth for the key space: every getter/setter/lister runs
// through this visitor.
template <typename F>
void VisitFields(Config& c, F&& f) {
  f("geometry.robot_mass", c.geometry.robot_mass);
  f("geometry.robot_inertia_B", c.geometry.robot_inertia_diag_B);
  f("geometry.hook_offset_B", c.geometry.hook_offset_B);
  f("geometry.hook_capsule_axis_B", c.geometry.hook_capsule_axis_B);
  f("geometry.hook_capsule_half_length", c.geometry.hook_capsule_half_length);
  f("geometry.hook_capsule_radius", c.geometry.hook_capsule_radius);
  f("geometry.door_inertia_about_hinge", c.geometry.door_inertia_about_hinge);
  f("geometry.door_width", c.geometry.door_width);
  f("geometry.hinge_axis_W", c.geometry.hinge_axis_W);
  f("geometry.hinge_position_W", c.geometry.hinge_position_W);
  f("geometry.door_base_rpy", c.geometry.door_base_rpy);
  f("geometry.handle_center_on_door", c.geometry.handle_center_on_door);
  f("geometry.handle_rect_width", c.geometry.handle_rect_width);
  f("geometry.handle_rect_height", c.geometry.handle_rect_height);
  f("geometry.handle_bar_radius", c.geometry.handle_bar_radius);
  f("geometry.handle_standoff", c.geometry.handle_standoff);
  f("geometry.door_viscous_damping", c.geometry.door_viscous_damping);
  f("geometry.contact_stiffness", c.geometry.contact_stiffness);
  f("geometry.contact_damping", c.geometry.contact_damping);
  f("geometry.friction_coefficient", c.geometry.friction_coefficient);

  f("pose.kp_pos", c.pose.kp_pos);
  f("pose.kd_pos", c.pose.kd_pos);
  f("pose.kp_rot", c.pose.kp_rot);
  f("pose.kd_rot", c.pose.kd_rot);
  f("pose.force_limit", c.pose.force_limit);
  f("pose.torque_limit", c.pose.torque_limit);

  f("episode.control_rate_hz", c.episode.control_rate_hz);
  f("episode.physics_substeps", c.episode.physics_substeps);
  f("episode.max_episode_seconds", c.episode.max_episode_seconds);
  f("episode.discount", c.episode.discount);
  f("episode.delta_h_tresh", c.episode.delta_h_tresh);
  f("episode.delta_d_tresh", c.episode.delta_d_tresh);
  f("episode.alpha_target", c.episode.alpha_target);
  f("episode.success_band", c.episode.success_band);
  f("episode.saturation_enabled", c.episode.saturation.enabled);
  f("episode.max_translation", c.episode.saturation.max_translation);
  f("episode.max_rotation", c.episode.saturation.max_rotation);

  f("randomization.handle_offset_range", c.randomization.handle_offset_range);
  f("randomization.init_position_x", c.randomization.init_position_x);
  f("randomization.init_position_y", c.randomization.init_position_y);
  f("randomization.init_position_z", c.randomization.init_position_z);
  f("randomization.init_rpy_range", c.randomization.init_rpy_range);
  f("randomization.init_linvel_range", c.randomization.init_linvel_range);
  f("randomization.init_angvel_range", c.randomization.init_angvel_range);

  f("ppo.num_envs", c.ppo.num_envs);
  f("ppo.steps_per_env", c.ppo.steps_per_env);
  f("ppo.epochs", c.ppo.epochs);
  f("ppo.minibatch_size", c.ppo.minibatch_size);
  f("ppo.clip_ratio", c.ppo.clip_ratio);
  f("ppo.gamma", c.ppo.gamma);
  f("ppo.gae_lambda", c.ppo.gae_lambda);
  f("ppo.learning_rate", c.ppo.learning_rate);
  f("ppo.value_coef", c.ppo.value_coef);
  f("ppo.entropy_coef", c.ppo.entropy_coef);
  f("ppo.max_grad_norm", c.ppo.max_grad_norm);
  f("ppo.kl_stop", c.ppo.kl_stop);
  f("ppo.total_steps", c.ppo.total_steps);
  f("ppo.reward_scale", c.ppo.reward_scale);
  f("ppo.init_log_std", c.ppo.init_log_std);
  f("ppo.checkpoint_interval", c.ppo.checkpoint_interval);

  f("mppi.horizon_steps", c.mppi.horizon_steps);
  f("mppi.control_dt", c.mppi.control_dt);
  f("mppi.num_samples", c.mppi.num_samples);
  f("mppi.temperature", c.mppi.temperature);
  f("mppi.noise_std_pos", c.mppi.noise_std_pos);
  f("mppi.noise_std_rot", c.mppi.noise_std_rot);
  f("mppi.smoothing", c.mppi.smoothing);

  f("eval.experiment", c.eval.experiment);
  f("eval.sweep", c.eval.sweep);
  f("eval.trials_per_value", c.eval.trials_per_value);
  f("eval.timeout_seconds", c.eval.timeout_seconds);
  f("eval.success_band", c.eval.success_band);
  f("eval.write_traces", c.eval.write_traces);

  f("runtime.threads", c.runtime.threads);
  f("runtime.kernel_backend", c.runtime.kernel_backend);
}

struct Setter {
  const std::string& key;
  const std::string& value;
  bool* found;

  void operator()(const char* k, double& field) const {
    if (key == k) {
      field = ParseDouble(key, value);
      *found = true;
    }
  }
  void operator()(const char* k, int& field) const {
    if (key == k) {
      field = static_cast<int>(ParseInt(key, value));
      *found = true;
    }
  }
  void operator()(const char* k, int64_t& field) const {
    if (key == k) {
      field = ParseInt(key, value);
      *found = true;
    }
  }
  void operator()(const char* k, bool& field) const {
    if (key == k) {
      field = ParseBool(key, value);
      *found = true;
    }
  }
  void operator()(const char* k, std::string& field) const {
    if (key == k) {
      field = Trim(value);
      *found = true;
    }
  }
  void operator()(const char* k, Vec3& field) const {
    if (key != k) return;
    auto parts = SplitCommas(value);
    if (parts.size() != 3) throw ConfigError(key + " expects three comma-separated values");
    field = {ParseDouble(key, parts[0]), ParseDouble(key, parts[1]),
             ParseDouble(key, parts[2])};
    *found = true;
  }
  void operator()(const char* k, std::pair<double, double>& field) const {
    if (key != k) return;
    auto parts = SplitCommas(value);
    if (parts.size() != 2) throw ConfigError(key + " expects 'lo,hi'");
    field = {ParseDouble(key, parts[0]), ParseDouble(key, parts[1])};
    *found = true;
  }
  void operator()(const char* k, std::vector<double>& field) const {
    if (key != k) return;
    field.clear();
    if (!Trim(value).empty()) {
      for (const std::string& part : SplitCommas(value)) {
        field.push_back(ParseDouble(key, part));
      }
    }
    *found = true;
  }
};

struct Getter {
  const std::string& key;
  std::string* out;
  bool* found;

  template <typename T>
  void Store(const char* k, const T& v, std::string (*fmt)(const T&)) const {
    if (key == k) {
      *out = fmt(v);
      *found = true;
    }
  }
  void operator()(const char* k, double& f) const {
    if (key == k) {
      *out = FormatDouble(f);
      *found = true;
    }
  }
  void operator()(const char* k, int& f) const {
    if (key == k) {
      *out = std::to_string(f);
      *found = true;
    }
  }
  void operator()(const char* k, int64_t& f) const {
    if (key == k) {
      *out = std::to_string(f);
      *found = true;
    }
  }
  void operator()(const char* k, bool& f) const {
    if (key == k) {
      *out = f ? "true" : "false";
      *found = true;
    }
  }
  void operator()(const char* k, std::string& f) const {
    if (key == k) {
      *out = f;
      *found = true;
    }
  }
  void operator()(const char* k, Vec3& f) const {
    if (key == k) {
      *out = FormatDouble(f.x) + "," + FormatDouble(f.y) + "," + FormatDouble(f.z);
      *found = true;
    }
  }
  void operator()(const char* k, std::pair<double, double>& f) const {
    if (key == k) {
      *out = FormatDouble(f.first) + "," + FormatDouble(f.second);
      *found = true;
    }
  }
  void operator()(const char* k, std::vector<double>& f) const {
    if (key != k) return;
    std::string s;
    for (size_t i = 0; i < f.size(); i++) {
      if (i > 0) s += ",";
      s += FormatDouble(f[i]);
    }
    *out = s;
    *found = true;
  }
};

}  // namespace

std::vector<std::string> Config::Keys() {
  Config tmp;
  std::vector<std::string> keys;
  VisitFields(tmp, [&](const char* k, auto&) { keys.push_back(k); });
  return keys;
}

void Config::Set(const std::string& key, const std::string& value) {
  bool found = false;
  VisitFields(*this, Setter{key, value, &found});
  if (!found) throw ConfigError("unknown config key: " + key);
}

std::string Config::Get(const std::string& key) const {
  bool found = false;
  std::string out;
  VisitFields(const_cast<Config&>(*this), Getter{key, &out, &found});
  if (!found) throw ConfigError("unknown config key: " + key);
  return out;
}

void Config::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  std::vector<std::string> unknown;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = Trim(line.substr(0, eq));
    std::string value = Trim(line.substr(eq + 1));
    try {
      Set(key, value);
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind("unknown config key", 0) == 0) {
        unknown.push_back(key);
      } else {
        throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
  }
  if (!unknown.empty()) {
    std::string msg = "unknown config keys in " + path + ":";
    for (const std::string& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }
}

void Config::ApplyOverride(const std::string& key_equals_value) {
  size_t eq = key_equals_value.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must look like section.key=value: " + key_equals_value);
  }
  Set(Trim(key_equals_value.substr(0, eq)), Trim(key_equals_value.substr(eq + 1)));
}

void Config::ApplyEnvOverrides() {
  for (const std::string& key : Keys()) {
    std::string env_name = "DOORSIM_";
    for (char ch : key) {
      if (ch == '.') {
        env_name += "__";
      } else {
        env_name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      }
    }
    if (const char* v = std::getenv(env_name.c_str())) {
      Set(key, v);
    }
  }
}

void Config::Validate() const {
  std::vector<std::string> bad;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) bad.push_back(msg);
  };

  const GeometryConfig& g = geometry;
  require(g.robot_mass > 0, "geometry.robot_mass must be positive");
  require(g.robot_inertia_diag_B.x > 0 && g.robot_inertia_diag_B.y > 0 &&
              g.robot_inertia_diag_B.z > 0,
          "geometry.robot_inertia_B must be positive definite");
  require(Norm(g.hook_capsule_axis_B) > 1e-9, "geometry.hook_capsule_axis_B must be nonzero");
  require(g.hook_capsule_half_length > 0, "geometry.hook_capsule_half_length must be positive");
  require(g.hook_capsule_radius > 0, "geometry.hook_capsule_radius must be positive");
  require(g.door_inertia_about_hinge > 0, "geometry.door_inertia_about_hinge must be positive");
  require(g.door_width > 0, "geometry.door_width must be positive");
  require(Norm(g.hinge_axis_W) > 1e-9, "geometry.hinge_axis_W must be nonzero");
  require(g.handle_rect_width > 0 && g.handle_rect_height > 0,
          "geometry.handle_rect dimensions must be positive");
  require(g.handle_bar_radius > 0, "geometry.handle_bar_radius must be positive");
  require(g.handle_standoff >= 0, "geometry.handle_standoff must be non-negative");
  require(g.door_viscous_damping >= 0, "geometry.door_viscous_damping must be non-negative");
  require(g.contact_stiffness > 0, "geometry.contact_stiffness must be positive");
  require(g.contact_damping >= 0, "geometry.contact_damping must be non-negative");
  require(g.friction_coefficient >= 0, "geometry.friction_coefficient must be non-negative");

  require(pose.kp_pos > 0 && pose.kd_pos > 0 && pose.kp_rot > 0 && pose.kd_rot > 0,
          "pose gains must be strictly positive");
  require(pose.force_limit > 0 && pose.torque_limit > 0,
          "pose wrench limits must be positive");

  const EpisodeConfig& e = episode;
  require(e.control_rate_hz > 0, "episode.control_rate_hz must be positive");
  require(e.physics_substeps >= 1, "episode.physics_substeps must be >= 1");
  if (e.control_rate_hz > 0 && e.physics_substeps >= 1) {
    require(e.SubstepDt() <= 0.01, "physics substep dt must be <= 0.01 s");
  }
  require(e.max_episode_seconds > 0, "episode.max_episode_seconds must be positive");
  require(e.discount > 0 && e.discount < 1, "episode.discount must be in (0,1)");
  require(e.delta_h_tresh > 0 && e.delta_d_tresh > 0,
          "episode thresholds must be positive");
  require(e.success_band > 0 && e.success_band <= 1,
          "episode.success_band must be in (0,1]");
  require(e.saturation.max_translation > 0 && e.saturation.max_rotation > 0,
          "saturation caps must be positive");

  const RandomizationConfig& r = randomization;
  require(r.handle_offset_range >= 0, "randomization.handle_offset_range must be >= 0");
  require(r.init_position_x.first <= r.init_position_x.second,
          "randomization.init_position_x must satisfy lo <= hi");
  require(r.init_position_y.first <= r.init_position_y.second,
          "randomization.init_position_y must satisfy lo <= hi");
  require(r.init_position_z.first <= r.init_position_z.second,
          "randomization.init_position_z must satisfy lo <= hi");
  require(r.init_rpy_range >= 0 && r.init_linvel_range >= 0 && r.init_angvel_range >= 0,
          "randomization ranges must be >= 0");

  const PpoConfig& p = ppo;
  require(p.num_envs >= 1, "ppo.num_envs must be >= 1");
  require(p.steps_per_env >= 1, "ppo.steps_per_env must be >= 1");
  require(p.epochs >= 1, "ppo.epochs must be >= 1");
  require(p.minibatch_size >= 1, "ppo.minibatch_size must be >= 1");
  if (p.minibatch_size >= 1 && p.num_envs >= 1 && p.steps_per_env >= 1) {
    require(p.BatchSize() % p.minibatch_size == 0 ||
                p.minibatch_size >= p.BatchSize(),
            "ppo.minibatch_size must divide num_envs*steps_per_env");
  }
  require(p.clip_ratio > 0 && p.clip_ratio < 1, "ppo.clip_ratio must be in (0,1)");
  require(p.gamma > 0 && p.gamma <= 1, "ppo.gamma must be in (0,1]");
  require(p.gae_lambda > 0 && p.gae_lambda <= 1, "ppo.gae_lambda must be in (0,1]");
  require(p.learning_rate > 0, "ppo.learning_rate must be positive");
  require(p.value_coef >= 0 && p.entropy_coef >= 0,
          "ppo loss coefficients must be >= 0");
  require(p.max_grad_norm > 0, "ppo.max_grad_norm must be positive");
  require(p.kl_stop >= 0, "ppo.kl_stop must be >= 0");
  require(p.total_steps >= 0, "ppo.total_steps must be >= 0");
  require(p.reward_scale > 0, "ppo.reward_scale must be positive");

  const MppiConfig& m = mppi;
  require(m.horizon_steps >= 1, "mppi.horizon_steps must be >= 1");
  require(m.control_dt > 0, "mppi.control_dt must be positive");
  require(m.num_samples >= 2, "mppi.num_samples must be >= 2");
  require(m.temperature > 0, "mppi.temperature must be positive");
  require(m.noise_std_pos >= 0 && m.noise_std_rot >= 0,
          "mppi noise stddevs must be >= 0");
  require(m.smoothing >= 0 && m.smoothing < 1, "mppi.smoothing must be in [0,1)");

  require(eval.experiment == "initial_distance" || eval.experiment == "lateral_offset" ||
              eval.experiment == "vertical_offset" || eval.experiment == "door_closing",
          "eval.experiment must be one of initial_distance|lateral_offset|"
          "vertical_offset|door_closing");
  require(eval.trials_per_value >= 1, "eval.trials_per_value must be >= 1");
  require(eval.timeout_seconds > 0, "eval.timeout_seconds must be positive");
  require(eval.success_band > 0 && eval.success_band <= 1,
          "eval.success_band must be in (0,1]");

  require(runtime.threads >= 0, "runtime.threads must be >= 0");
  require(runtime.kernel_backend == "auto" || runtime.kernel_backend == "scalar" ||
              runtime.kernel_backend == "avx2",
          "runtime.kernel_backend must be auto|scalar|avx2");

  if (!bad.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& b : bad) msg += "\n  " + b;
    throw ConfigError(msg);
  }
}

std::vector<std::pair<std::string, std::string>> Config::Snapshot() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const std::string& key : Keys()) {
    out.emplace_back(key, Get(key));
  }
  return out;
}

}  // namespace doorsim
