#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pgdqn/envkit/env.hpp"

namespace pgdqn {

// Finite MDP with dense transition and reward tables. Every transition row
// must lie on the simplex within 1e-12.
struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> transition;  // [s][a][s'], row-major
  std::vector<double> reward;      // [s][a]
  double gamma = 0.99;

  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2];
  }
  double r(int s, int a) const { return reward[static_cast<std::size_t>(s) * n_actions + a]; }
  void validate() const;
};

// Deterministic chain of n states with actions {left, stay, right}; pushing
// right at the last state pays 1, everything else pays 0.
TabularMdp make_chain_mdp(int n_states, double gamma);

// Seeded random MDP: transition rows are normalized uniform draws, rewards
// uniform in [0, 1].
TabularMdp make_random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed);

// Single-state bandit whose rewards are the given per-action values.
TabularMdp make_bandit_mdp(std::span<const double> action_values);

struct QTable {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> q;  // [s][a]

  QTable() = default;
  QTable(int s, int a) : n_states(s), n_actions(a), q(static_cast<std::size_t>(s) * a, 0.0) {}
  double at(int s, int a) const { return q[static_cast<std::size_t>(s) * n_actions + a]; }
  double& at(int s, int a) { return q[static_cast<std::size_t>(s) * n_actions + a]; }
  std::span<const double> row(int s) const {
    return {q.data() + static_cast<std::size_t>(s) * n_actions,
            static_cast<std::size_t>(n_actions)};
  }
};

// Exact solution of Q = R + gamma P Pi Q via a dense linear solve on the
// state values. policy is [s][a] row-major, each row on the simplex.
QTable mdp_policy_eval(const TabularMdp& mdp, std::span<const double> policy);

struct ValueIterationResult {
  QTable q;
  std::vector<int> greedy;  // ties broken by lowest action index
  int iterations = 0;
  double residual = 0.0;
};

ValueIterationResult mdp_value_iteration(const TabularMdp& mdp, double tol,
                                         int max_iterations = 1000000);

// Episodic wrapper: one-hot observations, truncation at the step limit,
// no terminal states.
class TabularEnv : public Env {
 public:
  TabularEnv(TabularMdp mdp, std::uint64_t seed, int step_limit, std::string name,
             int fixed_start = -1);  // -1: uniform start state

  int obs_dim() const override { return mdp_.n_states; }
  int n_actions() const override { return mdp_.n_actions; }
  std::string name() const override { return name_; }
  int step_limit() const override { return step_limit_; }
  void set_step_limit(int limit) override { step_limit_ = limit; }

  std::vector<double> reset(std::uint64_t seed) override;
  std::vector<double> reset() override;
  StepResult step(int action) override;

  const TabularMdp& mdp() const { return mdp_; }

 private:
  std::vector<double> one_hot(int s) const;

  TabularMdp mdp_;
  Prng rng_;
  std::string name_;
  int fixed_start_;
  int step_limit_;
  int state_ = 0;
  int steps_ = 0;
  bool active_ = false;
};

}  // namespace pgdqn
