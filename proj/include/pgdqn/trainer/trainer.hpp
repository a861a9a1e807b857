#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pgdqn/envkit/env.hpp"
#include "pgdqn/trainer/updates.hpp"

namespace pgdqn {

struct EpisodeRow {
  std::uint64_t seed = 0;
  long episode = 0;
  long frames = 0;  // cumulative environment steps at episode end
  double episode_return = 0.0;
  double epsilon = 0.0;
  double alpha = 0.0;
  double entropy = 0.0;   // mean over preference updates within the episode
  double q_loss = 0.0;    // mean over Q updates within the episode
  double pref_obj = 0.0;  // mean over preference updates within the episode
};

struct EvalPoint {
  long frames = 0;
  double mean_return = 0.0;
};

struct RunLog {
  std::string env;
  AgentVariant variant = AgentVariant::PGDQN;
  std::uint64_t seed = 0;
  std::string config_hash;

  std::vector<EpisodeRow> episodes;
  std::vector<EvalPoint> evals;

  long total_steps = 0;
  long n_pref_updates = 0;
  long n_q_updates = 0;
  long n_target_syncs = 0;

  bool aborted = false;
  std::string abort_reason;

  double best_eval() const;
  // First eval frame count at which mean return reached the threshold.
  std::optional<long> frames_to_reach(double threshold) const;
};

struct TrainResult {
  RunLog log;
  DualNetwork net;
};

// Runs the full interleaved loop: act with the variant's exploration policy,
// store the transition, update the preference branch and the temperature
// every tau_eta steps (preference variants only), update the Q branch on a
// replay minibatch every tau_Q steps once the buffer holds learning_start
// transitions, and hard-sync the targets every tau_target steps. Fully
// deterministic given (config, seed).
TrainResult train(const Hyperparameters& hp, const std::string& env_name, std::uint64_t seed);

// Mean return of greedy-argmax episodes; noisy heads get one frozen draw per
// episode.
double greedy_eval(const DualNetwork& net, Env& env, int episodes, Prng& noise_rng);

void write_runlog_csv(const RunLog& log, const std::string& path);
void write_eval_csv(const RunLog& log, const std::string& path);
void write_config_sidecar(const Hyperparameters& hp, const std::string& env_name,
                          std::uint64_t seed, const std::string& path);

std::string format_double(double v);  // shortest round-trip, deterministic

}  // namespace pgdqn
