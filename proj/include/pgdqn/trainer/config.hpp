#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgdqn/agents/network.hpp"
#include "pgdqn/policy/policy.hpp"

namespace pgdqn {

enum class PrefGradMode { Sampled, Expected };

PrefGradMode pref_grad_mode_from_string(const std::string& s);
std::string to_string(PrefGradMode m);

// Every tunable of a training run. Two stock profiles: "control-default"
// (desk-scale classic control) and "paper-atari" (the documented large-scale
// record; kept for reference, not meant to run here).
struct Hyperparameters {
  // Replay and batching
  int minibatch_size = 32;
  std::size_t replay_capacity = 50000;
  std::size_t learning_start = 1000;
  bool sample_with_replacement = true;

  // Discount and update cadences (environment steps)
  double gamma = 0.99;
  int pref_update_period = 4;    // tau_eta
  int q_update_period = 4;       // tau_Q
  int target_sync_period = 500;  // tau_target

  // Optimizers
  double q_lr = 0.00025;     // RMSProp
  double pref_lr = 0.00025;  // RMSProp
  double alpha_lr = 0.00025; // Adam, on log(alpha)
  double rmsprop_rho = 0.95;
  double rmsprop_eps = 0.01;

  // Exploration
  EpsilonSchedule epsilon{1.0, 0.1, 10000};
  bool force_epsilon_greedy = false;  // ablation: preference branch trains but never samples

  // Preference objective
  double xi_entropy = -1.0;  // < 0 resolves to 0.5 * log|A| at run start
  double alpha_init = 1.0;
  PrefGradMode pref_grad_mode = PrefGradMode::Expected;

  // Agent
  AgentVariant variant = AgentVariant::PGDQN;
  bool share_embedding = true;
  std::vector<int> embedding_widths = {128, 128};
  int head_width = 128;

  // Run control
  long max_env_steps = 60000;
  long max_episodes = 1000000000L;
  long eval_interval = 2500;  // 0 disables evaluation
  int eval_episodes = 20;
  double early_stop_eval_return = std::numeric_limits<double>::quiet_NaN();  // NaN: off
  int episode_step_limit = 0;  // 0: environment default

  // Large-scale extras (off for classic control)
  bool reward_clip = false;
  double grad_clip = 0.0;  // 0 disables; reserved flag, not used at desk scale

  static Hyperparameters control_default();
  static Hyperparameters paper_atari();
  static Hyperparameters profile(const std::string& name);

  nlohmann::json to_json() const;
  static Hyperparameters from_json(const nlohmann::json& j);
  void apply_overrides(const nlohmann::json& overrides);

  // FNV-1a over the canonical JSON dump.
  std::string hash() const;
  double resolved_xi(int n_actions) const;
  void validate() const;  // throws on out-of-range values
};

}  // namespace pgdqn
