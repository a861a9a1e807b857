#pragma once

#include <span>
#include <vector>

#include "pgdqn/numcore/prng.hpp"

namespace pgdqn {

// Mixture policy over a discrete action set: the Q-greedy action with
// probability 1 - epsilon, otherwise a draw from the preference distribution.
struct PolicyPmf {
  std::vector<double> probs;
  int greedy_action = 0;
  double epsilon = 1.0;
};

// probs[a*] = 1 - eps + eps * eta[a*], probs[a] = eps * eta[a] otherwise,
// a* = argmax q with lowest-index tie break. eta must be on the simplex
// within 1e-9. With uniform eta this is exactly classic epsilon-greedy.
PolicyPmf pg_policy_pmf(std::span<const double> q, std::span<const double> eta, double epsilon);
PolicyPmf epsilon_greedy_pmf(std::span<const double> q, double epsilon);

int sample_action(const PolicyPmf& pmf, Prng& rng);
int sample_categorical(std::span<const double> probs, Prng& rng);

// Linear anneal from initial to final over horizon steps, clamped afterwards.
struct EpsilonSchedule {
  double initial = 1.0;
  double final_value = 0.1;
  long horizon = 10000;

  double at(long step) const;
};

}  // namespace pgdqn
