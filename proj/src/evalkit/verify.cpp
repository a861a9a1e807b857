#include "pgdqn/evalkit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pgdqn/numcore/math.hpp"
#include "pgdqn/policy/policy.hpp"

namespace pgdqn {

double kl_to_boltzmann(std::span<const double> eta, std::span<const double> q, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("kl_to_boltzmann: alpha must be positive");
  if (eta.size() != q.size() || eta.empty())
    throw std::invalid_argument("kl_to_boltzmann: width mismatch");
  double sum = 0.0;
  for (double p : eta) {
    if (p < 0.0) throw std::invalid_argument("kl_to_boltzmann: eta has negative entries");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("kl_to_boltzmann: eta is off the simplex");

  std::vector<double> scaled(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) scaled[i] = q[i] / alpha;
  const std::vector<double> log_target = log_softmax(scaled);
  double kl = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i)
    if (eta[i] > 0.0) kl += eta[i] * (std::log(eta[i]) - log_target[i]);
  return kl;
}

namespace {

// pi_PG rows: eps * eta plus the (1 - eps) greedy mass.
std::vector<double> pg_policy_table(const TabularMdp& mdp, const std::vector<double>& eta,
                                    const std::vector<int>& greedy, double epsilon) {
  const int ns = mdp.n_states;
  const int na = mdp.n_actions;
  std::vector<double> policy(static_cast<std::size_t>(ns) * na, 0.0);
  for (int s = 0; s < ns; ++s) {
    for (int a = 0; a < na; ++a)
      policy[static_cast<std::size_t>(s) * na + a] =
          epsilon * eta[static_cast<std::size_t>(s) * na + a];
    policy[static_cast<std::size_t>(s) * na + greedy[s]] += 1.0 - epsilon;
  }
  return policy;
}

double expected_q(std::span<const double> eta_row, std::span<const double> q_row) {
  double v = 0.0;
  for (std::size_t a = 0; a < eta_row.size(); ++a) v += eta_row[a] * q_row[a];
  return v;
}

}  // namespace

ImprovementReport verify_policy_improvement(const TabularMdp& mdp, double epsilon, int n_rounds,
                                            EtaImprovementMode mode) {
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw std::invalid_argument("verify_policy_improvement: epsilon must be in (0, 1]");
  if (n_rounds <= 0) throw std::invalid_argument("verify_policy_improvement: n_rounds <= 0");
  mdp.validate();

  const int ns = mdp.n_states;
  const int na = mdp.n_actions;

  std::vector<double> eta(static_cast<std::size_t>(ns) * na, 1.0 / na);
  std::vector<int> greedy(static_cast<std::size_t>(ns), 0);  // arbitrary initial greedy arm
  QTable q = mdp_policy_eval(mdp, pg_policy_table(mdp, eta, greedy, epsilon));

  ImprovementReport report;
  report.overall_min = std::numeric_limits<double>::infinity();
  double boltzmann_alpha = 1.0;

  for (int round = 0; round < n_rounds; ++round) {
    // One-step greedy preference update: the new eta must not lower the
    // expected Q under the current evaluation.
    std::vector<double> eta_next(static_cast<std::size_t>(ns) * na, 0.0);
    for (int s = 0; s < ns; ++s) {
      std::span<const double> q_row = q.row(s);
      double* row = eta_next.data() + static_cast<std::size_t>(s) * na;
      if (mode == EtaImprovementMode::Greedy) {
        row[argmax_lowest(q_row)] = 1.0;
      } else {
        std::vector<double> scaled(q_row.size());
        for (std::size_t a = 0; a < scaled.size(); ++a) scaled[a] = q_row[a] / boltzmann_alpha;
        const std::vector<double> candidate = softmax(scaled);
        std::span<const double> eta_row{eta.data() + static_cast<std::size_t>(s) * na,
                                        static_cast<std::size_t>(na)};
        if (expected_q(candidate, q_row) + 1e-15 >= expected_q(eta_row, q_row)) {
          std::copy(candidate.begin(), candidate.end(), row);
        } else {
          std::copy(eta_row.begin(), eta_row.end(), row);
          ++report.boltzmann_fallbacks;
        }
      }
    }
    std::vector<int> greedy_next(static_cast<std::size_t>(ns));
    for (int s = 0; s < ns; ++s) greedy_next[s] = argmax_lowest(q.row(s));

    QTable q_next = mdp_policy_eval(mdp, pg_policy_table(mdp, eta_next, greedy_next, epsilon));
    double round_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < q.q.size(); ++i)
      round_min = std::min(round_min, q_next.q[i] - q.q[i]);
    report.per_round_min.push_back(round_min);
    report.overall_min = std::min(report.overall_min, round_min);

    eta = std::move(eta_next);
    greedy = std::move(greedy_next);
    q = std::move(q_next);
    boltzmann_alpha *= 0.7;
  }
  return report;
}

DualNetwork make_fixed_q_bandit_net(std::span<const double> q, std::uint64_t seed,
                                    int embedding_width, int head_width) {
  NetworkConfig nc;
  nc.obs_dim = 1;
  nc.n_actions = static_cast<int>(q.size());
  nc.embedding_widths = {embedding_width, embedding_width};
  nc.head_width = head_width;
  nc.pref_branch = true;
  Prng rng(seed, 0x666978ULL);
  DualNetwork net = DualNetwork::create(nc, rng);

  // Pin the Q output: zero weights, bias = q, so the branch returns exactly
  // these values for every state.
  auto named = net.named_tensors();
  for (auto& [name, tensor] : named) {
    if (name == "q_head.out.w") tensor->fill(0.0);
    if (name == "q_head.out.b")
      std::copy(q.begin(), q.end(), tensor->data().begin());
  }
  net.sync_target();
  return net;
}

BanditConvergence run_bandit_to_fixed_point(DualNetwork& net, std::span<const double> q,
                                            double alpha, double kl_tol, int max_updates,
                                            double suite_lr, PrefGradMode mode) {
  const std::vector<double> state = {1.0};
  RmsProp opt(net.pref_params(), suite_lr);
  Prng action_rng(17, 0x62616eULL);

  BanditConvergence result{};
  for (int i = 0; i < max_updates; ++i) {
    int action = 0;
    if (mode == PrefGradMode::Sampled)
      action = sample_categorical(net.preference(state), action_rng);
    preference_update(net, state, action, alpha, opt, mode);
    result.updates_used = i + 1;
    if ((i + 1) % 50 == 0 || i + 1 == max_updates) {
      result.final_kl = kl_to_boltzmann(net.preference(state), q, alpha);
      if (result.final_kl <= kl_tol) {
        result.converged = true;
        return result;
      }
    }
  }
  result.final_kl = kl_to_boltzmann(net.preference(state), q, alpha);
  result.converged = result.final_kl <= kl_tol;
  return result;
}

namespace {

std::vector<double> flatten(const std::vector<Tensor*>& params) {
  std::vector<double> flat;
  for (const Tensor* p : params) flat.insert(flat.end(), p->data().begin(), p->data().end());
  return flat;
}

void unflatten(std::span<const double> flat, const std::vector<Tensor*>& params) {
  std::size_t offset = 0;
  for (Tensor* p : params) {
    std::copy(flat.begin() + static_cast<std::ptrdiff_t>(offset),
              flat.begin() + static_cast<std::ptrdiff_t>(offset + p->size()),
              p->data().begin());
    offset += p->size();
  }
}

}  // namespace

double gradient_suite_worst_error(std::uint64_t seed, double fd_step) {
  Prng rng(seed, 0x67726164ULL);

  NetworkConfig nc;
  nc.obs_dim = 4;
  nc.n_actions = 3;
  nc.embedding_widths = {12, 12};
  nc.head_width = 10;
  nc.pref_branch = true;
  DualNetwork net = DualNetwork::create(nc, rng);

  std::vector<double> state(4);
  for (double& v : state) v = rng.uniform(-1.0, 1.0);
  const int action = static_cast<int>(rng.below(3));
  const double target = rng.uniform(-2.0, 2.0);
  const double alpha = rng.uniform(0.1, 1.0);

  double worst = 0.0;

  // Q loss on a single transition.
  {
    Transition t;
    t.state = state;
    t.action = action;
    const Transition* batch[] = {&t};
    const double targets[] = {target};

    auto params = net.q_params();
    Tape tape;
    Tape::Var loss = build_q_loss(tape, net, batch, targets);
    tape.backward(loss);
    std::vector<double> analytic;
    for (Tensor* p : params) {
      Tensor g = tape.grad(*p);
      analytic.insert(analytic.end(), g.data().begin(), g.data().end());
    }
    std::vector<double> point = flatten(params);
    auto f = [&](std::span<const double> x) {
      unflatten(x, params);
      Tape scratch;
      double value = scratch.scalar(build_q_loss(scratch, net, batch, targets));
      return value;
    };
    auto check = grad_check(f, point, analytic, fd_step);
    unflatten(point, params);
    worst = std::max(worst, check.max_rel_error);
  }

  // Both preference surrogates with the advantage frozen at the base point.
  const std::vector<double> advantage = frozen_advantage_of(net, state);
  for (PrefGradMode mode : {PrefGradMode::Sampled, PrefGradMode::Expected}) {
    auto params = net.pref_params();
    Tape tape;
    Tape::Var objective = build_pref_objective(tape, net, state, action, alpha, mode, advantage);
    tape.backward(objective);
    std::vector<double> analytic;
    for (Tensor* p : params) {
      Tensor g = tape.grad(*p);
      analytic.insert(analytic.end(), g.data().begin(), g.data().end());
    }
    std::vector<double> point = flatten(params);
    auto f = [&](std::span<const double> x) {
      unflatten(x, params);
      Tape scratch;
      double value =
          scratch.scalar(build_pref_objective(scratch, net, state, action, alpha, mode, advantage));
      return value;
    };
    auto check = grad_check(f, point, analytic, fd_step);
    unflatten(point, params);
    worst = std::max(worst, check.max_rel_error);
  }
  return worst;
}

}  // namespace pgdqn
