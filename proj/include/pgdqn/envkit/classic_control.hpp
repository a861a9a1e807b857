#pragma once

#include <array>

#include "pgdqn/envkit/env.hpp"

namespace pgdqn {

// Shared bookkeeping: episode step counting, step-limit truncation and the
// step-after-terminal guard.
class EpisodicEnvBase : public Env {
 public:
  EpisodicEnvBase(std::uint64_t seed, int step_limit)
      : rng_(seed, 0x656e76ULL), step_limit_(step_limit) {}

  int step_limit() const override { return step_limit_; }
  void set_step_limit(int limit) override { step_limit_ = limit; }

  using Env::reset;
  std::vector<double> reset(std::uint64_t seed) override {
    rng_ = Prng(seed, 0x656e76ULL);
    return reset();
  }

 protected:
  void begin_episode() {
    steps_ = 0;
    active_ = true;
  }
  void require_active() const;
  // Applies the per-step bookkeeping shared by every episodic env.
  void finish_step(StepResult& r) {
    ++steps_;
    if (!r.terminal && steps_ >= step_limit_) r.truncated = true;
    if (r.terminal || r.truncated) active_ = false;
  }

  Prng rng_;
  int step_limit_;
  int steps_ = 0;
  bool active_ = false;
};

// Cart-pole balancing, explicit Euler with tau = 0.02 s.
// Gravity 9.8, cart mass 1.0, pole mass 0.1, pole half-length 0.5, force 10.
class CartPoleEnv : public EpisodicEnvBase {
 public:
  explicit CartPoleEnv(std::uint64_t seed, int step_limit = 500)
      : EpisodicEnvBase(seed, step_limit) {}

  int obs_dim() const override { return 4; }
  int n_actions() const override { return 2; }
  std::string name() const override { return "cartpole"; }

  using EpisodicEnvBase::reset;
  std::vector<double> reset() override;
  StepResult step(int action) override;

 private:
  double x_ = 0, x_dot_ = 0, theta_ = 0, theta_dot_ = 0;
};

// Mountain car; actions {0: push left, 1: no push, 2: push right}.
class MountainCarEnv : public EpisodicEnvBase {
 public:
  explicit MountainCarEnv(std::uint64_t seed, int step_limit = 200)
      : EpisodicEnvBase(seed, step_limit) {}

  int obs_dim() const override { return 2; }
  int n_actions() const override { return 3; }
  std::string name() const override { return "mountaincar"; }

  using EpisodicEnvBase::reset;
  std::vector<double> reset() override;
  StepResult step(int action) override;

 private:
  double position_ = 0, velocity_ = 0;
};

// Two-link acrobot, RK4 with dt = 0.2 over the book dynamics; torques {-1,0,+1}.
// Observation is (cos t1, sin t1, cos t2, sin t2, t1_dot, t2_dot).
class AcrobotEnv : public EpisodicEnvBase {
 public:
  explicit AcrobotEnv(std::uint64_t seed, int step_limit = 500)
      : EpisodicEnvBase(seed, step_limit) {}

  int obs_dim() const override { return 6; }
  int n_actions() const override { return 3; }
  std::string name() const override { return "acrobot"; }

  using EpisodicEnvBase::reset;
  std::vector<double> reset() override;
  StepResult step(int action) override;

  // Internal joint state (theta1, theta2, dtheta1, dtheta2), exposed for the
  // dynamics regression tests.
  std::array<double, 4> joint_state() const { return s_; }
  void set_joint_state(const std::array<double, 4>& s);

 private:
  std::vector<double> observation() const;
  std::array<double, 4> s_{};
};

}  // namespace pgdqn
