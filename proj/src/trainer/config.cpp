#include "pgdqn/trainer/config.hpp"

#include <cmath>
#include <stdexcept>

namespace pgdqn {

using nlohmann::json;

PrefGradMode pref_grad_mode_from_string(const std::string& s) {
  if (s == "sampled") return PrefGradMode::Sampled;
  if (s == "expected") return PrefGradMode::Expected;
  throw std::invalid_argument("unknown preference gradient mode '" + s + "'");
}

std::string to_string(PrefGradMode m) {
  return m == PrefGradMode::Sampled ? "sampled" : "expected";
}

Hyperparameters Hyperparameters::control_default() { return Hyperparameters{}; }

Hyperparameters Hyperparameters::paper_atari() {
  Hyperparameters hp;
  hp.replay_capacity = 1000000;
  hp.learning_start = 50000;
  hp.target_sync_period = 10000;
  hp.epsilon = EpsilonSchedule{1.0, 0.1, 1000000};
  hp.max_env_steps = 30000000;
  hp.reward_clip = true;
  return hp;
}

Hyperparameters Hyperparameters::profile(const std::string& name) {
  if (name == "control-default") return control_default();
  if (name == "paper-atari") return paper_atari();
  throw std::invalid_argument("unknown profile '" + name + "'");
}

json Hyperparameters::to_json() const {
  json j;
  j["minibatch_size"] = minibatch_size;
  j["replay_capacity"] = replay_capacity;
  j["learning_start"] = learning_start;
  j["sample_with_replacement"] = sample_with_replacement;
  j["gamma"] = gamma;
  j["pref_update_period"] = pref_update_period;
  j["q_update_period"] = q_update_period;
  j["target_sync_period"] = target_sync_period;
  j["q_lr"] = q_lr;
  j["pref_lr"] = pref_lr;
  j["alpha_lr"] = alpha_lr;
  j["rmsprop_rho"] = rmsprop_rho;
  j["rmsprop_eps"] = rmsprop_eps;
  j["epsilon_initial"] = epsilon.initial;
  j["epsilon_final"] = epsilon.final_value;
  j["epsilon_horizon"] = epsilon.horizon;
  j["force_epsilon_greedy"] = force_epsilon_greedy;
  j["xi_entropy"] = xi_entropy;
  j["alpha_init"] = alpha_init;
  j["pref_grad_mode"] = to_string(pref_grad_mode);
  j["variant"] = to_string(variant);
  j["share_embedding"] = share_embedding;
  j["embedding_widths"] = embedding_widths;
  j["head_width"] = head_width;
  j["max_env_steps"] = max_env_steps;
  j["max_episodes"] = max_episodes;
  j["eval_interval"] = eval_interval;
  j["eval_episodes"] = eval_episodes;
  // NaN is not representable in JSON; null means "disabled".
  if (std::isnan(early_stop_eval_return))
    j["early_stop_eval_return"] = nullptr;
  else
    j["early_stop_eval_return"] = early_stop_eval_return;
  j["episode_step_limit"] = episode_step_limit;
  j["reward_clip"] = reward_clip;
  j["grad_clip"] = grad_clip;
  return j;
}

Hyperparameters Hyperparameters::from_json(const json& j) {
  Hyperparameters hp;
  hp.apply_overrides(j);
  return hp;
}

void Hyperparameters::apply_overrides(const json& overrides) {
  for (const auto& [key, value] : overrides.items()) {
    if (key == "minibatch_size") minibatch_size = value.get<int>();
    else if (key == "replay_capacity") replay_capacity = value.get<std::size_t>();
    else if (key == "learning_start") learning_start = value.get<std::size_t>();
    else if (key == "sample_with_replacement") sample_with_replacement = value.get<bool>();
    else if (key == "gamma") gamma = value.get<double>();
    else if (key == "pref_update_period") pref_update_period = value.get<int>();
    else if (key == "q_update_period") q_update_period = value.get<int>();
    else if (key == "target_sync_period") target_sync_period = value.get<int>();
    else if (key == "q_lr") q_lr = value.get<double>();
    else if (key == "pref_lr") pref_lr = value.get<double>();
    else if (key == "alpha_lr") alpha_lr = value.get<double>();
    else if (key == "rmsprop_rho") rmsprop_rho = value.get<double>();
    else if (key == "rmsprop_eps") rmsprop_eps = value.get<double>();
    else if (key == "epsilon_initial") epsilon.initial = value.get<double>();
    else if (key == "epsilon_final") epsilon.final_value = value.get<double>();
    else if (key == "epsilon_horizon") epsilon.horizon = value.get<long>();
    else if (key == "force_epsilon_greedy") force_epsilon_greedy = value.get<bool>();
    else if (key == "xi_entropy") xi_entropy = value.get<double>();
    else if (key == "alpha_init") alpha_init = value.get<double>();
    else if (key == "pref_grad_mode") pref_grad_mode = pref_grad_mode_from_string(value.get<std::string>());
    else if (key == "variant") variant = variant_from_string(value.get<std::string>());
    else if (key == "share_embedding") share_embedding = value.get<bool>();
    else if (key == "embedding_widths") embedding_widths = value.get<std::vector<int>>();
    else if (key == "head_width") head_width = value.get<int>();
    else if (key == "max_env_steps") max_env_steps = value.get<long>();
    else if (key == "max_episodes") max_episodes = value.get<long>();
    else if (key == "eval_interval") eval_interval = value.get<long>();
    else if (key == "eval_episodes") eval_episodes = value.get<int>();
    else if (key == "early_stop_eval_return")
      early_stop_eval_return =
          value.is_null() ? std::numeric_limits<double>::quiet_NaN() : value.get<double>();
    else if (key == "episode_step_limit") episode_step_limit = value.get<int>();
    else if (key == "reward_clip") reward_clip = value.get<bool>();
    else if (key == "grad_clip") grad_clip = value.get<double>();
    else throw std::invalid_argument("unknown hyperparameter '" + key + "'");
  }
}

std::string Hyperparameters::hash() const {
  const std::string dump = to_json().dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

double Hyperparameters::resolved_xi(int n_actions) const {
  if (xi_entropy >= 0.0) return xi_entropy;
  return 0.5 * std::log(static_cast<double>(n_actions));
}

void Hyperparameters::validate() const {
  if (minibatch_size <= 0) throw std::invalid_argument("config: minibatch_size must be positive");
  if (replay_capacity == 0) throw std::invalid_argument("config: replay_capacity must be positive");
  if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("config: gamma must be in (0,1]");
  if (pref_update_period <= 0 || q_update_period <= 0 || target_sync_period <= 0)
    throw std::invalid_argument("config: update periods must be positive");
  if (q_lr <= 0.0 || pref_lr <= 0.0 || alpha_lr <= 0.0)
    throw std::invalid_argument("config: learning rates must be positive");
  if (!(epsilon.final_value > 0.0) || epsilon.initial < epsilon.final_value ||
      epsilon.initial > 1.0)
    throw std::invalid_argument("config: epsilon schedule needs initial >= final > 0");
  if (alpha_init <= 0.0) throw std::invalid_argument("config: alpha_init must be positive");
  if (max_env_steps <= 0) throw std::invalid_argument("config: max_env_steps must be positive");
  if (head_width <= 0 || embedding_widths.empty())
    throw std::invalid_argument("config: network widths must be positive");
  for (int w : embedding_widths)
    if (w <= 0) throw std::invalid_argument("config: network widths must be positive");
}

}  // namespace pgdqn
