#include "pgdqn/envkit/tabular.hpp"

#include <cmath>
#include <stdexcept>

#include "pgdqn/numcore/math.hpp"

namespace pgdqn {

void TabularMdp::validate() const {
  if (n_states <= 0 || n_actions <= 0)
    throw std::invalid_argument("TabularMdp: empty state or action set");
  if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("TabularMdp: gamma not in (0,1]");
  if (transition.size() != static_cast<std::size_t>(n_states) * n_actions * n_states ||
      reward.size() != static_cast<std::size_t>(n_states) * n_actions)
    throw std::invalid_argument("TabularMdp: table size mismatch");
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        double pr = p(s, a, s2);
        if (pr < 0.0) throw std::invalid_argument("TabularMdp: negative transition probability");
        sum += pr;
      }
      if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
    }
}

TabularMdp make_chain_mdp(int n_states, double gamma) {
  TabularMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = 3;
  mdp.gamma = gamma;
  mdp.transition.assign(static_cast<std::size_t>(n_states) * 3 * n_states, 0.0);
  mdp.reward.assign(static_cast<std::size_t>(n_states) * 3, 0.0);
  auto set_p = [&](int s, int a, int s2) {
    mdp.transition[(static_cast<std::size_t>(s) * 3 + a) * n_states + s2] = 1.0;
  };
  for (int s = 0; s < n_states; ++s) {
    set_p(s, 0, std::max(s - 1, 0));
    set_p(s, 1, s);
    set_p(s, 2, std::min(s + 1, n_states - 1));
  }
  mdp.reward[static_cast<std::size_t>(n_states - 1) * 3 + 2] = 1.0;
  mdp.validate();
  return mdp;
}

TabularMdp make_random_mdp(int n_states, int n_actions, double gamma, std::uint64_t seed) {
  Prng rng(seed, 0x6d6470ULL);
  TabularMdp mdp;
  mdp.n_states = n_states;
  mdp.n_actions = n_actions;
  mdp.gamma = gamma;
  mdp.transition.resize(static_cast<std::size_t>(n_states) * n_actions * n_states);
  mdp.reward.resize(static_cast<std::size_t>(n_states) * n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      double* row = mdp.transition.data() + (static_cast<std::size_t>(s) * n_actions + a) * n_states;
      double sum = 0.0;
      for (int s2 = 0; s2 < n_states; ++s2) {
        // Offset keeps rows bounded away from degenerate corners.
        row[s2] = 0.05 + rng.uniform01();
        sum += row[s2];
      }
      for (int s2 = 0; s2 < n_states; ++s2) row[s2] /= sum;
      mdp.reward[static_cast<std::size_t>(s) * n_actions + a] = rng.uniform01();
    }
  mdp.validate();
  return mdp;
}

TabularMdp make_bandit_mdp(std::span<const double> action_values) {
  TabularMdp mdp;
  mdp.n_states = 1;
  mdp.n_actions = static_cast<int>(action_values.size());
  mdp.gamma = 0.99;
  mdp.transition.assign(action_values.size(), 1.0);
  mdp.reward.assign(action_values.begin(), action_values.end());
  mdp.validate();
  return mdp;
}

QTable mdp_policy_eval(const TabularMdp& mdp, std::span<const double> policy) {
  mdp.validate();
  if (mdp.gamma >= 1.0)
    throw std::invalid_argument("mdp_policy_eval: gamma = 1 on a non-episodic MDP is unbounded");
  const int ns = mdp.n_states;
  const int na = mdp.n_actions;
  if (policy.size() != static_cast<std::size_t>(ns) * na)
    throw std::invalid_argument("mdp_policy_eval: policy size mismatch");

  // Solve (I - gamma P_pi) V = R_pi, then read Q back off one Bellman backup.
  std::vector<double> a(static_cast<std::size_t>(ns) * ns, 0.0);
  std::vector<double> b(ns, 0.0);
  for (int s = 0; s < ns; ++s) {
    a[static_cast<std::size_t>(s) * ns + s] = 1.0;
    for (int act = 0; act < na; ++act) {
      const double pi = policy[static_cast<std::size_t>(s) * na + act];
      b[s] += pi * mdp.r(s, act);
      for (int s2 = 0; s2 < ns; ++s2)
        a[static_cast<std::size_t>(s) * ns + s2] -= mdp.gamma * pi * mdp.p(s, act, s2);
    }
  }
  std::vector<double> v = solve_linear(std::move(a), std::move(b));

  QTable q(ns, na);
  for (int s = 0; s < ns; ++s)
    for (int act = 0; act < na; ++act) {
      double acc = mdp.r(s, act);
      for (int s2 = 0; s2 < ns; ++s2) acc += mdp.gamma * mdp.p(s, act, s2) * v[s2];
      q.at(s, act) = acc;
    }
  return q;
}

ValueIterationResult mdp_value_iteration(const TabularMdp& mdp, double tol, int max_iterations) {
  mdp.validate();
  if (mdp.gamma >= 1.0)
    throw std::invalid_argument("mdp_value_iteration: gamma must be below 1");
  const int ns = mdp.n_states;
  const int na = mdp.n_actions;

  ValueIterationResult result;
  result.q = QTable(ns, na);
  QTable next(ns, na);
  for (int it = 0; it < max_iterations; ++it) {
    double residual = 0.0;
    for (int s = 0; s < ns; ++s)
      for (int a = 0; a < na; ++a) {
        double acc = mdp.r(s, a);
        for (int s2 = 0; s2 < ns; ++s2) {
          double best = result.q.at(s2, 0);
          for (int a2 = 1; a2 < na; ++a2) best = std::max(best, result.q.at(s2, a2));
          acc += mdp.gamma * mdp.p(s, a, s2) * best;
        }
        next.at(s, a) = acc;
        residual = std::max(residual, std::abs(acc - result.q.at(s, a)));
      }
    std::swap(result.q, next);
    result.iterations = it + 1;
    result.residual = residual;
    if (residual <= tol) {
      result.greedy.resize(ns);
      for (int s = 0; s < ns; ++s) result.greedy[s] = argmax_lowest(result.q.row(s));
      return result;
    }
  }
  throw std::runtime_error("mdp_value_iteration: no convergence within the iteration cap");
}

TabularEnv::TabularEnv(TabularMdp mdp, std::uint64_t seed, int step_limit, std::string name,
                       int fixed_start)
    : mdp_(std::move(mdp)),
      rng_(seed, 0x656e76ULL),
      name_(std::move(name)),
      fixed_start_(fixed_start),
      step_limit_(step_limit) {
  mdp_.validate();
}

std::vector<double> TabularEnv::one_hot(int s) const {
  std::vector<double> obs(mdp_.n_states, 0.0);
  obs[static_cast<std::size_t>(s)] = 1.0;
  return obs;
}

std::vector<double> TabularEnv::reset(std::uint64_t seed) {
  rng_ = Prng(seed, 0x656e76ULL);
  return reset();
}

std::vector<double> TabularEnv::reset() {
  state_ = fixed_start_ >= 0 ? fixed_start_
                             : static_cast<int>(rng_.below(static_cast<std::uint64_t>(mdp_.n_states)));
  steps_ = 0;
  active_ = true;
  return one_hot(state_);
}

StepResult TabularEnv::step(int action) {
  if (!active_) throw std::logic_error(name_ + ": step() on a finished episode");
  if (action < 0 || action >= mdp_.n_actions)
    throw std::invalid_argument(name_ + ": bad action");

  StepResult r;
  r.reward = mdp_.r(state_, action);
  double u = rng_.uniform01();
  double acc = 0.0;
  int next = mdp_.n_states - 1;
  for (int s2 = 0; s2 < mdp_.n_states; ++s2) {
    acc += mdp_.p(state_, action, s2);
    if (u < acc) {
      next = s2;
      break;
    }
  }
  state_ = next;
  r.next_state = one_hot(state_);
  ++steps_;
  if (steps_ >= step_limit_) r.truncated = true;
  if (r.truncated) active_ = false;
  return r;
}

}  // namespace pgdqn
