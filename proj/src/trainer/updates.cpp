#include "pgdqn/trainer/updates.hpp"

#include <algorithm>
#include <cmath>

#include "pgdqn/numcore/math.hpp"

namespace pgdqn {

std::vector<double> q_target_values(const DualNetwork& net,
                                    std::span<const Transition* const> batch, double gamma,
                                    TargetRule rule, bool reward_clip,
                                    const NoiseDraw* behavior_noise,
                                    const NoiseDraw* target_noise) {
  if (batch.empty()) throw std::invalid_argument("q_target_values: empty batch");
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const Transition* t : batch) {
    double r = t->reward;
    if (reward_clip) r = std::clamp(r, -1.0, 1.0);
    if (t->terminal) {
      targets.push_back(r);
      continue;
    }
    const auto q_next = net.q_values(t->next_state, /*use_target=*/true, target_noise);
    double bootstrap;
    if (rule == TargetRule::Max) {
      bootstrap = *std::max_element(q_next.begin(), q_next.end());
    } else {
      const auto q_online = net.q_values(t->next_state, /*use_target=*/false, behavior_noise);
      bootstrap = q_next[static_cast<std::size_t>(argmax_lowest(q_online))];
    }
    targets.push_back(r + gamma * bootstrap);
  }
  return targets;
}

Tape::Var build_q_loss(Tape& tape, DualNetwork& net, std::span<const Transition* const> batch,
                       std::span<const double> targets, const NoiseDraw* noise) {
  if (batch.size() != targets.size() || batch.empty())
    throw std::invalid_argument("build_q_loss: batch/target size mismatch");
  Tape::Var loss_sum = -1;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition* t = batch[i];
    Tape::Var q_sa = net.q_value_on_tape(tape, t->state, t->action, noise);
    const double y = targets[i];
    Tape::Var diff = tape.sub(q_sa, tape.input(std::span<const double>(&y, 1)));
    Tape::Var sq = tape.dot(diff, diff);
    loss_sum = i == 0 ? sq : tape.add(loss_sum, sq);
  }
  return tape.scale(loss_sum, 1.0 / static_cast<double>(batch.size()));
}

Tape::Var build_pref_objective(Tape& tape, DualNetwork& net, std::span<const double> state,
                               int sampled_action, double alpha, PrefGradMode mode,
                               std::span<const double> frozen_advantage,
                               Tape::Var* entropy_out) {
  Tape::Var logits = net.pref_logits_on_tape(tape, state);
  Tape::Var eta = tape.softmax(logits);
  Tape::Var log_eta = tape.log_softmax(logits);
  Tape::Var ent = tape.scale(tape.dot(eta, log_eta), -1.0);
  if (entropy_out != nullptr) *entropy_out = ent;
  if (mode == PrefGradMode::Expected)
    return tape.add(tape.dot(eta, tape.input(frozen_advantage)), tape.scale(ent, alpha));
  Tape::Var weighted = tape.scale(tape.pick(log_eta, sampled_action),
                                  frozen_advantage[static_cast<std::size_t>(sampled_action)]);
  return tape.add(weighted, tape.scale(ent, alpha));
}

double q_update(DualNetwork& net, std::span<const Transition* const> batch,
                std::span<const double> targets, RmsProp& opt, const NoiseDraw* noise) {
  Tape tape;
  Tape::Var loss = build_q_loss(tape, net, batch, targets, noise);
  const double loss_value = tape.scalar(loss);
  if (!std::isfinite(loss_value))
    throw TrainAbort("q_update: non-finite loss");
  tape.backward(loss);
  opt.step_from(tape);
  return loss_value;
}

std::vector<double> frozen_advantage_of(const DualNetwork& net, std::span<const double> state) {
  const std::vector<double> q = net.q_values(state, /*use_target=*/false);
  const std::vector<double> eta = net.preference(state);
  double v = 0.0;
  for (std::size_t a = 0; a < q.size(); ++a) v += eta[a] * q[a];
  std::vector<double> advantage(q.size());
  for (std::size_t a = 0; a < q.size(); ++a) advantage[a] = q[a] - v;
  return advantage;
}

PrefUpdateResult preference_update(DualNetwork& net, std::span<const double> state,
                                   int sampled_action, double alpha, RmsProp& opt,
                                   PrefGradMode mode) {
  if (alpha < 0.0) throw std::invalid_argument("preference_update: alpha must be non-negative");
  if (sampled_action < 0 || sampled_action >= net.n_actions())
    throw std::invalid_argument("preference_update: action out of range");

  // Frozen signal: advantages from the behavior Q branch under the current
  // preference distribution. No gradient flows through them.
  const std::vector<double> advantage = frozen_advantage_of(net, state);

  Tape tape;
  Tape::Var ent = -1;
  Tape::Var objective =
      build_pref_objective(tape, net, state, sampled_action, alpha, mode, advantage, &ent);

  PrefUpdateResult result{tape.scalar(objective), tape.scalar(ent)};
  if (!std::isfinite(result.objective))
    throw TrainAbort("preference_update: non-finite objective");
  tape.backward(objective);
  opt.step_from(tape, /*sign=*/-1.0);  // ascent
  return result;
}

TemperatureState::TemperatureState(double alpha_init, double lr, double xi)
    : log_alpha(std::log(alpha_init)), adam(lr), xi_entropy(xi) {
  if (alpha_init <= 0.0)
    throw std::invalid_argument("TemperatureState: alpha_init must be positive");
}

double TemperatureState::alpha() const { return std::exp(log_alpha); }

double TemperatureState::update(double entropy_observed) {
  // d/dlog(alpha) of alpha * (H - xi) = alpha * (H - xi).
  const double grad = alpha() * (entropy_observed - xi_entropy);
  log_alpha = adam.step(log_alpha, grad);
  return alpha();
}

}  // namespace pgdqn
