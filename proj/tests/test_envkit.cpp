#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pgdqn/envkit/classic_control.hpp"
#include "pgdqn/envkit/tabular.hpp"
#include "pgdqn/numcore/math.hpp"

using namespace pgdqn;

TEST_SUITE_BEGIN("envkit");

namespace {

// Independent re-integration of the cart-pole update for regression tests.
std::array<double, 4> cartpole_reference_step(std::array<double, 4> s, int action) {
  const double g = 9.8, mc = 1.0, mp = 0.1, total = mc + mp, l = 0.5, pml = mp * l, fmag = 10.0,
               tau = 0.02;
  const double force = action == 1 ? fmag : -fmag;
  const double ct = std::cos(s[2]), st = std::sin(s[2]);
  const double temp = (force + pml * s[3] * s[3] * st) / total;
  const double thacc = (g * st - ct * temp) / (l * (4.0 / 3.0 - mp * ct * ct / total));
  const double xacc = temp - pml * thacc * ct / total;
  return {s[0] + tau * s[1], s[1] + tau * xacc, s[2] + tau * s[3], s[3] + tau * thacc};
}

}  // namespace

TEST_CASE("cartpole zero-state step matches the frozen oracle") {
  // Single Euler step of the published dynamics from the exact zero state,
  // frozen from an independent integration.
  auto next1 = cartpole_reference_step({0, 0, 0, 0}, 1);
  CHECK(next1[0] == 0.0);
  CHECK(next1[1] == doctest::Approx(0.1951219512195122).epsilon(1e-15));
  CHECK(next1[2] == 0.0);
  CHECK(next1[3] == doctest::Approx(-0.2926829268292683).epsilon(1e-15));

  // action 0 is the exact sign mirror from the symmetric state.
  auto next0 = cartpole_reference_step({0, 0, 0, 0}, 0);
  CHECK(next0[1] == -next1[1]);
  CHECK(next0[3] == -next1[3]);
}

TEST_CASE("cartpole env agrees with the reference integrator bit for bit") {
  CartPoleEnv env(11);
  auto obs = env.reset(11);
  std::array<double, 4> s = {obs[0], obs[1], obs[2], obs[3]};
  Prng action_rng(3, 0x61ULL);
  for (int i = 0; i < 100; ++i) {
    const int action = static_cast<int>(action_rng.below(2));
    const StepResult r = env.step(action);
    s = cartpole_reference_step(s, action);
    for (int k = 0; k < 4; ++k) CHECK(r.next_state[k] == s[k]);
    CHECK(r.reward == 1.0);
    if (r.terminal || r.truncated) {
      obs = env.reset();
      s = {obs[0], obs[1], obs[2], obs[3]};
    }
  }
}

TEST_CASE("cartpole five-step trajectory regression") {
  // Frozen from the independent integrator: start (0.01,-0.02,0.03,-0.04),
  // actions 1,0,0,1,1.
  std::array<double, 4> s = {0.01, -0.02, 0.03, -0.04};
  for (int a : {1, 0, 0, 1, 1}) s = cartpole_reference_step(s, a);
  CHECK(s[0] == doctest::Approx(0.00792112827476232).epsilon(1e-14));
  CHECK(s[1] == doctest::Approx(0.17322123092863484).epsilon(1e-14));
  CHECK(s[2] == doctest::Approx(0.027738818013807072).epsilon(1e-14));
  CHECK(s[3] == doctest::Approx(-0.29087295230897875).epsilon(1e-14));
}

TEST_CASE("cartpole terminates on a threshold and rejects further steps") {
  CartPoleEnv env(1, 500);
  env.reset(42);
  StepResult last;
  int steps = 0;
  while (true) {
    last = env.step(0);  // constant push drives it out of bounds quickly
    ++steps;
    if (last.terminal || last.truncated) break;
  }
  CHECK(last.terminal);
  CHECK(steps < 500);
  const double theta_threshold = 12.0 * 2.0 * std::numbers::pi / 360.0;
  CHECK((std::abs(last.next_state[0]) > 2.4 || std::abs(last.next_state[2]) > theta_threshold));
  CHECK_THROWS_AS(env.step(0), std::logic_error);
}

TEST_CASE("mountaincar frozen one-step value and trajectory agreement") {
  auto ref_step = [](std::array<double, 2> s, int action) {
    double v = s[1];
    v += (action - 1) * 0.001 + std::cos(3.0 * s[0]) * (-0.0025);
    v = std::min(std::max(v, -0.07), 0.07);
    double p = std::min(std::max(s[0] + v, -1.2), 0.6);
    if (p == -1.2 && v < 0.0) v = 0.0;
    return std::array<double, 2>{p, v};
  };
  // From (-0.5, 0) with action 1, frozen independent evaluation.
  auto one = ref_step({-0.5, 0.0}, 1);
  CHECK(one[1] == doctest::Approx(-1.7684300416925727e-4).epsilon(1e-12));
  CHECK(one[0] == doctest::Approx(-0.5001768430041692).epsilon(1e-12));

  MountainCarEnv traced(9);
  auto obs = traced.reset(9);
  std::array<double, 2> s = {obs[0], obs[1]};
  Prng action_rng(5, 0x61ULL);
  for (int i = 0; i < 150; ++i) {
    const int action = static_cast<int>(action_rng.below(3));
    const StepResult r = traced.step(action);
    s = ref_step(s, action);
    CHECK(r.next_state[0] == s[0]);
    CHECK(r.next_state[1] == s[1]);
    CHECK(r.reward == -1.0);
    CHECK(std::abs(r.next_state[1]) <= 0.07);
    if (r.terminal || r.truncated) break;
  }
}

TEST_CASE("mountaincar reset rule and truncation") {
  MountainCarEnv env(3, 200);
  for (int i = 0; i < 1000; ++i) {
    auto s = env.reset();
    CHECK(s[0] >= -0.6);
    CHECK(s[0] <= -0.4);
    CHECK(s[1] == 0.0);
  }
  env.reset(4);
  StepResult r;
  int steps = 0;
  do {
    r = env.step(1);  // coasting never reaches the goal
    ++steps;
  } while (!r.terminal && !r.truncated);
  CHECK(r.truncated);
  CHECK(!r.terminal);
  CHECK(steps == 200);
}

namespace {

// Independent acrobot oracle: same published dynamics, separately coded RK4.
std::array<double, 4> acrobot_oracle_dsdt(const std::array<double, 4>& s, double torque) {
  const double m1 = 1, m2 = 1, l1 = 1, lc1 = 0.5, lc2 = 0.5, i1 = 1, i2 = 1, grav = 9.8;
  const double t1 = s[0], t2 = s[1], w1 = s[2], w2 = s[3];
  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2 * l1 * lc2 * std::cos(t2)) +
                    i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
  const double phi2 = m2 * lc2 * grav * std::cos(t1 + t2 - std::numbers::pi / 2);
  const double phi1 = -m2 * l1 * lc2 * w2 * w2 * std::sin(t2) -
                      2 * m2 * l1 * lc2 * w2 * w1 * std::sin(t2) +
                      (m1 * lc1 + m2 * l1) * grav * std::cos(t1 - std::numbers::pi / 2) + phi2;
  const double a2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * w1 * w1 * std::sin(t2) - phi2) /
                    (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double a1 = -(d2 * a2 + phi1) / d1;
  return {w1, w2, a1, a2};
}

std::array<double, 4> acrobot_oracle_step(std::array<double, 4> s, int action) {
  const double torque = action - 1;
  const double dt = 0.2;
  auto add = [](const std::array<double, 4>& y, const std::array<double, 4>& k, double h) {
    std::array<double, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = y[i] + h * k[i];
    return out;
  };
  const auto k1 = acrobot_oracle_dsdt(s, torque);
  const auto k2 = acrobot_oracle_dsdt(add(s, k1, dt / 2), torque);
  const auto k3 = acrobot_oracle_dsdt(add(s, k2, dt / 2), torque);
  const auto k4 = acrobot_oracle_dsdt(add(s, k3, dt), torque);
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = s[i] + dt / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  auto wrap = [](double x) {
    while (x > std::numbers::pi) x -= 2 * std::numbers::pi;
    while (x < -std::numbers::pi) x += 2 * std::numbers::pi;
    return x;
  };
  out[0] = wrap(out[0]);
  out[1] = wrap(out[1]);
  out[2] = std::clamp(out[2], -4 * std::numbers::pi, 4 * std::numbers::pi);
  out[3] = std::clamp(out[3], -9 * std::numbers::pi, 9 * std::numbers::pi);
  return out;
}

}  // namespace

TEST_CASE("acrobot matches the independent rk4 oracle and frozen values") {
  // Frozen single step from (0.05, -0.05, 0.1, -0.1) with action 2.
  auto one = acrobot_oracle_step({0.05, -0.05, 0.1, -0.1}, 2);
  CHECK(one[0] == doctest::Approx(0.048800752843503895).epsilon(1e-14));
  CHECK(one[1] == doctest::Approx(-0.024648210476123287).epsilon(1e-14));
  CHECK(one[2] == doctest::Approx(-0.11068554661394522).epsilon(1e-13));
  CHECK(one[3] == doctest::Approx(0.3484477150522355).epsilon(1e-13));

  AcrobotEnv env(1);
  env.set_joint_state({0.05, -0.05, 0.1, -0.1});
  std::array<double, 4> s = {0.05, -0.05, 0.1, -0.1};
  Prng action_rng(8, 0x61ULL);
  for (int i = 0; i < 120; ++i) {
    const int action = static_cast<int>(action_rng.below(3));
    const StepResult r = env.step(action);
    s = acrobot_oracle_step(s, action);
    const auto js = env.joint_state();
    for (int k = 0; k < 4; ++k)
      CHECK(std::abs(js[k] - s[k]) <= 1e-10 * std::max(1.0, std::abs(s[k])));
    if (r.terminal || r.truncated) break;
  }
}

TEST_CASE("acrobot reward and termination conventions") {
  AcrobotEnv env(2);
  env.set_joint_state({0.0, 0.0, 0.0, 0.0});
  // Hanging straight down: -cos(0) - cos(0) = -2, far from terminal.
  auto r = env.step(1);
  CHECK(!r.terminal);
  CHECK(r.reward == -1.0);

  // Rewards stay -1 until termination or truncation.
  AcrobotEnv run(5, 500);
  run.reset(5);
  StepResult last;
  do {
    last = run.step(0);
    if (!last.terminal) CHECK(last.reward == -1.0);
  } while (!last.terminal && !last.truncated);
}

TEST_CASE("env resets are deterministic given a seed") {
  for (const std::string name : {"cartpole", "mountaincar", "acrobot", "chain", "random-mdp"}) {
    auto env = make_env(name, 123);
    auto a = env->reset(77);
    auto env2 = make_env(name, 123);
    auto b = env2->reset(77);
    CHECK(a == b);
  }
  CHECK_THROWS_AS(make_env("pong", 1), std::invalid_argument);
}

TEST_CASE("cartpole reset draws stay inside the documented box") {
  CartPoleEnv env(99);
  for (int i = 0; i < 10000; ++i)
    for (double v : env.reset()) {
      CHECK(v >= -0.05);
      CHECK(v <= 0.05);
    }
}

TEST_CASE("acrobot reset keeps all four joint values in the init range") {
  AcrobotEnv env(31);
  for (int i = 0; i < 2000; ++i) {
    env.reset();
    for (double v : env.joint_state()) {
      CHECK(v >= -0.1);
      CHECK(v <= 0.1);
    }
  }
}

TEST_CASE("policy evaluation closed forms") {
  SUBCASE("single self-loop state: geometric series") {
    TabularMdp mdp;
    mdp.n_states = 1;
    mdp.n_actions = 1;
    mdp.gamma = 0.5;
    mdp.transition = {1.0};
    mdp.reward = {1.0};
    const std::vector<double> policy = {1.0};
    auto q = mdp_policy_eval(mdp, policy);
    CHECK(q.at(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("gamma near zero reduces to the reward table") {
    auto mdp = make_random_mdp(4, 2, 0.99, 7);
    mdp.gamma = 1e-12;
    std::vector<double> policy(4 * 2, 0.5);
    auto q = mdp_policy_eval(mdp, policy);
    for (int s = 0; s < 4; ++s)
      for (int a = 0; a < 2; ++a) CHECK(q.at(s, a) == doctest::Approx(mdp.r(s, a)).epsilon(1e-9));
  }
  SUBCASE("gamma = 1 is rejected as unbounded") {
    auto mdp = make_random_mdp(3, 2, 0.9, 1);
    mdp.gamma = 1.0;
    std::vector<double> policy(3 * 2, 0.5);
    CHECK_THROWS_AS(mdp_policy_eval(mdp, policy), std::invalid_argument);
  }
}

TEST_CASE("policy evaluation agrees with a monte-carlo oracle") {
  const auto mdp = make_random_mdp(5, 3, 0.9, 21);
  std::vector<double> policy(5 * 3, 1.0 / 3.0);
  const auto q = mdp_policy_eval(mdp, policy);

  // Monte-Carlo return estimate for one (s, a) under the uniform policy.
  Prng rng(99);
  auto sample_next = [&](int s, int a) {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (int s2 = 0; s2 < mdp.n_states; ++s2) {
      acc += mdp.p(s, a, s2);
      if (u < acc) return s2;
    }
    return mdp.n_states - 1;
  };
  const int s0 = 2, a0 = 1;
  const int n_rollouts = 4000, horizon = 250;  // gamma^250 ~ 4e-12
  double mean = 0.0, m2 = 0.0;
  for (int k = 0; k < n_rollouts; ++k) {
    double ret = mdp.r(s0, a0);
    int s = sample_next(s0, a0);
    double discount = mdp.gamma;
    for (int t = 0; t < horizon; ++t) {
      const int a = static_cast<int>(rng.below(3));
      ret += discount * mdp.r(s, a);
      discount *= mdp.gamma;
      s = sample_next(s, a);
    }
    const double delta = ret - mean;
    mean += delta / (k + 1);
    m2 += delta * (ret - mean);
  }
  const double stderr_mc = std::sqrt(m2 / (n_rollouts - 1) / n_rollouts);
  CHECK(std::abs(mean - q.at(s0, a0)) <= 3.0 * stderr_mc + 1e-9);
}

TEST_CASE("value iteration on the hand-solved chain") {
  // Goal-directed 2-state chain: pushing right at the last state pays 1.
  auto mdp = make_chain_mdp(2, 0.9);
  auto vi = mdp_value_iteration(mdp, 1e-12);
  // At the goal state, keep pushing right: Q = 1/(1-0.9) = 10.
  CHECK(vi.q.at(1, 2) == doctest::Approx(10.0).epsilon(1e-9));
  // One step away: Q(s0, right) = 0.9 * 10 = 9.
  CHECK(vi.q.at(0, 2) == doctest::Approx(9.0).epsilon(1e-9));
  CHECK(vi.greedy == std::vector<int>{2, 2});

  // Bellman residual at the fixed point.
  for (int s = 0; s < mdp.n_states; ++s)
    for (int a = 0; a < mdp.n_actions; ++a) {
      double acc = mdp.r(s, a);
      for (int s2 = 0; s2 < mdp.n_states; ++s2) {
        double best = vi.q.at(s2, 0);
        for (int a2 = 1; a2 < mdp.n_actions; ++a2) best = std::max(best, vi.q.at(s2, a2));
        acc += mdp.gamma * mdp.p(s, a, s2) * best;
      }
      CHECK(std::abs(acc - vi.q.at(s, a)) <= 1e-11);
    }
}

TEST_CASE("value iteration greedy policy is self-consistent with exact evaluation") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto mdp = make_random_mdp(5, 3, 0.9, seed);
    const auto vi = mdp_value_iteration(mdp, 1e-13);
    std::vector<double> greedy(5 * 3, 0.0);
    for (int s = 0; s < 5; ++s) greedy[static_cast<std::size_t>(s) * 3 + vi.greedy[s]] = 1.0;
    const auto q = mdp_policy_eval(mdp, greedy);
    for (std::size_t i = 0; i < q.q.size(); ++i)
      CHECK(std::abs(q.q[i] - vi.q.q[i]) <= 1e-9);
  }
}

TEST_CASE("dominant action wins everywhere") {
  TabularMdp mdp = make_random_mdp(4, 3, 0.9, 5);
  // Make action 1 strictly dominant in reward, with identical transition
  // rows across actions so only the reward matters.
  for (int s = 0; s < 4; ++s) {
    mdp.reward[static_cast<std::size_t>(s) * 3 + 0] = 0.0;
    mdp.reward[static_cast<std::size_t>(s) * 3 + 1] = 1.0;
    mdp.reward[static_cast<std::size_t>(s) * 3 + 2] = 0.0;
    for (int a = 1; a < 3; ++a)
      for (int s2 = 0; s2 < 4; ++s2)
        mdp.transition[(static_cast<std::size_t>(s) * 3 + a) * 4 + s2] =
            mdp.transition[(static_cast<std::size_t>(s) * 3) * 4 + s2];
  }
  const auto vi = mdp_value_iteration(mdp, 1e-12);
  for (int s = 0; s < 4; ++s) CHECK(vi.greedy[s] == 1);
}

TEST_CASE("transition rows of generated MDPs are on the simplex") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto mdp = make_random_mdp(6, 4, 0.95, seed);
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < mdp.n_actions; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < mdp.n_states; ++s2) sum += mdp.p(s, a, s2);
        CHECK(std::abs(sum - 1.0) <= 1e-12);
      }
  }
}

TEST_CASE("tabular env truncates at the step limit and never terminates") {
  auto env = make_env("chain", 3);
  env->reset(3);
  StepResult r;
  int steps = 0;
  do {
    r = env->step(2);
    ++steps;
    CHECK(!r.terminal);
  } while (!r.truncated);
  CHECK(steps == env->step_limit());
}

TEST_SUITE_END();
