#pragma once

#include <span>

#include "pgdqn/agents/network.hpp"
#include "pgdqn/numcore/optim.hpp"
#include "pgdqn/replay/replay_buffer.hpp"
#include "pgdqn/trainer/config.hpp"

namespace pgdqn {

// Raised when a run must stop (non-finite loss, broken environment); the
// partial run log is still persisted by the caller.
struct TrainAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One bootstrap target per transition. Terminal transitions take y = r;
// truncated ones bootstrap normally. The double rule evaluates the target
// network at the behavior network's argmax.
std::vector<double> q_target_values(const DualNetwork& net,
                                    std::span<const Transition* const> batch, double gamma,
                                    TargetRule rule, bool reward_clip = false,
                                    const NoiseDraw* behavior_noise = nullptr,
                                    const NoiseDraw* target_noise = nullptr);

// Loss graphs, shared between the optimizer steps and the gradient
// verification suite.
Tape::Var build_q_loss(Tape& tape, DualNetwork& net, std::span<const Transition* const> batch,
                       std::span<const double> targets, const NoiseDraw* noise = nullptr);
Tape::Var build_pref_objective(Tape& tape, DualNetwork& net, std::span<const double> state,
                               int sampled_action, double alpha, PrefGradMode mode,
                               std::span<const double> frozen_advantage,
                               Tape::Var* entropy_out = nullptr);

// Mean squared regression of Q(s,a) onto fixed targets; one RMSProp step on
// theta. Returns the loss. Throws TrainAbort on a non-finite loss.
double q_update(DualNetwork& net, std::span<const Transition* const> batch,
                std::span<const double> targets, RmsProp& opt,
                const NoiseDraw* noise = nullptr);

struct PrefUpdateResult {
  double objective = 0.0;  // surrogate value before the step
  double entropy = 0.0;    // H(eta(.|s)) before the step
};

// A(s,.) = Q(s,.) - sum_b eta(b|s) Q(s,b), evaluated with the current
// preference distribution and treated as constants by the surrogate.
std::vector<double> frozen_advantage_of(const DualNetwork& net, std::span<const double> state);

// One ascent step on phi for the entropy-regularized preference surrogate.
// The advantage A(s,a) = Q(s,a) - sum_b eta(b|s) Q(s,b) is computed from the
// behavior Q branch and held constant. Sampled mode differentiates
// A(s,a_t) log eta(a_t|s) + alpha H; expected mode sum_a eta(a|s) A(s,a) + alpha H.
PrefUpdateResult preference_update(DualNetwork& net, std::span<const double> state,
                                   int sampled_action, double alpha, RmsProp& opt,
                                   PrefGradMode mode);

// Temperature parameter alpha optimized in log space so it stays positive.
// The dual loss alpha * (H - xi) pushes alpha down when entropy exceeds the
// floor and up when it falls below.
struct TemperatureState {
  double log_alpha = 0.0;
  AdamScalar adam;
  double xi_entropy = 0.0;

  TemperatureState(double alpha_init, double lr, double xi);
  double alpha() const;
  double update(double entropy_observed);  // returns the new alpha
};

}  // namespace pgdqn
