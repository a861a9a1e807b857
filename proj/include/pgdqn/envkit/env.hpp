#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "pgdqn/numcore/prng.hpp"

namespace pgdqn {

struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool terminal = false;   // reached a terminal state; do not bootstrap
  bool truncated = false;  // step-limit cutoff; bootstrap normally
};

// Episodic environment with a deterministic, seedable reset stream.
// Stepping a finished episode is a contract violation and throws.
class Env {
 public:
  virtual ~Env() = default;

  virtual int obs_dim() const = 0;
  virtual int n_actions() const = 0;
  virtual std::string name() const = 0;

  virtual int step_limit() const = 0;
  virtual void set_step_limit(int limit) = 0;

  virtual std::vector<double> reset(std::uint64_t seed) = 0;  // reseed, then reset
  virtual std::vector<double> reset() = 0;                    // next episode from stream
  virtual StepResult step(int action) = 0;
};

// Known names: cartpole, mountaincar, acrobot, chain, random-mdp.
std::unique_ptr<Env> make_env(const std::string& name, std::uint64_t seed);

}  // namespace pgdqn
