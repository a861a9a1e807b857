#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pgdqn/envkit/tabular.hpp"
#include "pgdqn/evalkit/verify.hpp"
#include "pgdqn/numcore/math.hpp"
#include "pgdqn/trainer/trainer.hpp"

using namespace pgdqn;

TEST_SUITE_BEGIN("trainer");

namespace {

// Behavior/target Q outputs pinned through the output-layer bias.
DualNetwork pinned_net(std::span<const double> behavior_q, std::span<const double> target_q) {
  NetworkConfig nc;
  nc.obs_dim = 2;
  nc.n_actions = static_cast<int>(behavior_q.size());
  nc.embedding_widths = {8};
  nc.head_width = 8;
  nc.pref_branch = true;
  Prng rng(77);
  DualNetwork net = DualNetwork::create(nc, rng);
  for (auto& [name, tensor] : net.named_tensors()) {
    if (name == "q_head.out.w") tensor->fill(0.0);
    if (name == "q_head.out.b") std::copy(target_q.begin(), target_q.end(), tensor->data().begin());
  }
  net.sync_target();
  for (auto& [name, tensor] : net.named_tensors())
    if (name == "q_head.out.b" && name.rfind("target.", 0) != 0)
      std::copy(behavior_q.begin(), behavior_q.end(), tensor->data().begin());
  return net;
}

Hyperparameters small_control(AgentVariant variant) {
  Hyperparameters hp;
  hp.variant = variant;
  hp.embedding_widths = {24, 24};
  hp.head_width = 16;
  hp.replay_capacity = 5000;
  hp.learning_start = 500;
  hp.target_sync_period = 250;
  hp.epsilon = EpsilonSchedule{1.0, 0.1, 5000};
  hp.eval_interval = 0;
  return hp;
}

}  // namespace

TEST_CASE("q_target_values: masking and both bootstrap rules") {
  const std::vector<double> target_q = {2.0, 0.0, 4.0};
  const std::vector<double> behavior_q = {1.0, 5.0, 3.0};
  DualNetwork net = pinned_net(behavior_q, target_q);

  Transition t;
  t.state = {0.1, 0.2};
  t.next_state = {0.3, 0.4};
  t.action = 0;

  SUBCASE("max rule with r=1, gamma=0.99, max target 4 -> 1 + 3.96") {
    t.reward = 1.0;
    const Transition* batch[] = {&t};
    auto y = q_target_values(net, batch, 0.99, TargetRule::Max);
    CHECK(y[0] == doctest::Approx(1.0 + 0.99 * 4.0).epsilon(1e-15));
  }
  SUBCASE("terminal transitions take y = r regardless of the target net") {
    t.reward = -1.0;
    t.terminal = true;
    const Transition* batch[] = {&t};
    auto y = q_target_values(net, batch, 0.99, TargetRule::Max);
    CHECK(y[0] == -1.0);
  }
  SUBCASE("truncated transitions bootstrap normally") {
    t.reward = 0.5;
    t.truncated = true;
    const Transition* batch[] = {&t};
    auto y = q_target_values(net, batch, 0.99, TargetRule::Max);
    CHECK(y[0] == doctest::Approx(0.5 + 0.99 * 4.0).epsilon(1e-15));
  }
  SUBCASE("double rule evaluates the target at the behavior argmax") {
    // behavior argmax is index 1; target there is 0.
    t.reward = 0.0;
    const Transition* batch[] = {&t};
    auto y = q_target_values(net, batch, 1.0, TargetRule::Double);
    CHECK(y[0] == 0.0);
  }
  SUBCASE("reward clipping caps the magnitude") {
    t.reward = 7.0;
    t.terminal = true;
    const Transition* batch[] = {&t};
    auto y = q_target_values(net, batch, 0.99, TargetRule::Max, /*reward_clip=*/true);
    CHECK(y[0] == 1.0);
  }
}

TEST_CASE("q_update: stationary point and monotone regression") {
  NetworkConfig nc;
  nc.obs_dim = 2;
  nc.n_actions = 2;
  nc.embedding_widths = {12};
  nc.head_width = 8;
  nc.pref_branch = false;
  Prng rng(5);
  DualNetwork net = DualNetwork::create(nc, rng);
  RmsProp opt(net.q_params(), 0.01);

  Transition t;
  t.state = {0.4, -0.2};
  t.next_state = {0.0, 0.0};
  t.action = 1;
  t.reward = 0.0;
  t.terminal = true;
  const Transition* batch[] = {&t};

  SUBCASE("exact fit gives zero loss and no parameter motion") {
    const double y = net.q_values(t.state, false)[1];
    const double targets[] = {y};
    const auto before = net.q_values(t.state, false);
    const double loss = q_update(net, batch, targets, opt);
    CHECK(loss == 0.0);
    CHECK(net.q_values(t.state, false) == before);
  }
  SUBCASE("repeated updates converge monotonically in loss") {
    const double targets[] = {2.5};
    double prev = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 400; ++i) {
      const double loss = q_update(net, batch, targets, opt);
      CHECK(loss <= prev + 1e-12);
      prev = loss;
    }
    CHECK(std::abs(net.q_values(t.state, false)[1] - 2.5) < 0.05);
  }
}

TEST_CASE("preference_update: entropy-only objective drives eta to uniform") {
  const std::vector<double> q = {0.7, 0.7, 0.7, 0.7};  // constant: A = 0
  DualNetwork net = make_fixed_q_bandit_net(q, 3, 16, 12);
  RmsProp opt(net.pref_params(), 0.02);
  const std::vector<double> state = {1.0};
  for (int i = 0; i < 3000; ++i)
    preference_update(net, state, 0, 1.0, opt, PrefGradMode::Expected);
  // KL to uniform: the Boltzmann target of a constant Q row is uniform.
  CHECK(kl_to_boltzmann(net.preference(state), q, 1.0) <= 1e-6);
}

TEST_CASE("preference_update: fixed point matches the independent iteration oracle") {
  // Oracle: logits-space ascent on the exact objective, independent of the
  // network path.
  const std::vector<double> q = {1.0, 0.0};
  const double alpha = 0.5;
  std::vector<double> z = {0.0, 0.0};
  for (int it = 0; it < 20000; ++it) {
    auto eta = softmax(z);
    double v = eta[0] * q[0] + eta[1] * q[1];
    double h = entropy(eta);
    for (int k = 0; k < 2; ++k) {
      double adv = q[k] - v;
      double grad = eta[k] * (adv - alpha * (std::log(eta[k]) + h));
      z[k] += 0.05 * grad;
    }
  }
  auto oracle_eta = softmax(z);
  CHECK(oracle_eta[0] == doctest::Approx(0.8807970779778823).epsilon(1e-4));
  CHECK(oracle_eta[1] == doctest::Approx(0.1192029220221176).epsilon(1e-4));

  DualNetwork net = make_fixed_q_bandit_net(q, 11, 16, 12);
  auto result = run_bandit_to_fixed_point(net, q, alpha, 1e-6, 20000, 0.02);
  const auto eta = net.preference(std::vector<double>{1.0});
  CHECK(eta[0] == doctest::Approx(0.8807970779778823).epsilon(2e-3));
  CHECK(eta[1] == doctest::Approx(0.1192029220221176).epsilon(2e-2));
  CHECK(result.final_kl <= 1e-6);
}

TEST_CASE("preference_update: alpha 0 sampled mode raises a positive-advantage action") {
  const std::vector<double> q = {2.0, 0.0, -1.0};
  DualNetwork net = make_fixed_q_bandit_net(q, 9, 16, 12);
  const std::vector<double> state = {1.0};
  const double before = net.preference(state)[0];
  RmsProp opt(net.pref_params(), 0.01);
  // A(s, a0) = q0 - sum eta q > 0 since q0 is the maximum.
  preference_update(net, state, 0, 0.0, opt, PrefGradMode::Sampled);
  CHECK(net.preference(state)[0] > before);
}

TEST_CASE("expected-mode gradient equals the eta-weighted sampled-mode gradient") {
  Prng rng(21);
  NetworkConfig nc;
  nc.obs_dim = 3;
  nc.n_actions = 4;
  nc.embedding_widths = {10};
  nc.head_width = 8;
  nc.pref_branch = true;
  DualNetwork net = DualNetwork::create(nc, rng);
  std::vector<double> state = {0.3, -0.8, 0.5};
  const double alpha = 0.37;
  const auto advantage = frozen_advantage_of(net, state);
  const auto eta = net.preference(state);

  auto params = net.pref_params();
  std::vector<double> expected_grad;
  {
    Tape tape;
    auto obj = build_pref_objective(tape, net, state, 0, alpha, PrefGradMode::Expected, advantage);
    tape.backward(obj);
    for (Tensor* p : params) {
      Tensor g = tape.grad(*p);
      expected_grad.insert(expected_grad.end(), g.data().begin(), g.data().end());
    }
  }
  std::vector<double> weighted(expected_grad.size(), 0.0);
  for (int a = 0; a < nc.n_actions; ++a) {
    Tape tape;
    auto obj = build_pref_objective(tape, net, state, a, alpha, PrefGradMode::Sampled, advantage);
    tape.backward(obj);
    std::size_t off = 0;
    for (Tensor* p : params) {
      Tensor g = tape.grad(*p);
      for (std::size_t i = 0; i < g.size(); ++i) weighted[off + i] += eta[a] * g[i];
      off += g.size();
    }
  }
  for (std::size_t i = 0; i < expected_grad.size(); ++i)
    CHECK(std::abs(weighted[i] - expected_grad[i]) <= 1e-10);
}

TEST_CASE("temperature updates follow the dual gradient signs") {
  TemperatureState temp(1.0, 0.001, 0.5);
  SUBCASE("entropy at the floor leaves alpha unchanged") {
    CHECK(temp.update(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("entropy above the floor shrinks alpha") {
    CHECK(temp.update(0.9) < 1.0);
  }
  SUBCASE("entropy below the floor grows alpha") {
    CHECK(temp.update(0.1) > 1.0);
  }
  SUBCASE("alpha stays positive under extreme inputs") {
    TemperatureState t2(0.5, 0.05, 0.5);
    for (int i = 0; i < 3000; ++i) t2.update(5.0);
    CHECK(t2.alpha() > 0.0);
    for (int i = 0; i < 3000; ++i) t2.update(0.0);
    CHECK(t2.alpha() > 0.0);
    CHECK(std::isfinite(t2.alpha()));
  }
}

TEST_CASE("update cadence is auditable from the run log") {
  Hyperparameters hp = small_control(AgentVariant::PGDQN);
  hp.max_env_steps = 3000;
  hp.pref_update_period = 4;
  hp.q_update_period = 4;
  hp.target_sync_period = 250;
  hp.learning_start = 100;
  auto result = train(hp, "chain", 1);
  const long steps = result.log.total_steps;
  CHECK(steps == 3000);
  CHECK(std::abs(result.log.n_pref_updates - steps / 4) <= 1);
  // Q updates begin once the buffer holds learning_start transitions.
  const long expected_q = (steps - static_cast<long>(hp.learning_start)) / 4;
  CHECK(std::abs(result.log.n_q_updates - expected_q) <= 1);
  CHECK(std::abs(result.log.n_target_syncs - steps / 250) <= 1);

  // Baselines never touch the preference machinery.
  auto dqn = train(small_control(AgentVariant::DQN), "chain", 1);
  CHECK(dqn.log.n_pref_updates == 0);
}

TEST_CASE("pgdqn learns the chain to the value-iteration optimum") {
  Hyperparameters hp = small_control(AgentVariant::PGDQN);
  hp.gamma = 0.9;
  hp.q_lr = 0.01;
  hp.pref_lr = 0.01;
  hp.max_env_steps = 20000;
  auto result = train(hp, "chain", 3);
  REQUIRE(!result.log.aborted);

  const auto mdp = make_chain_mdp(5, 0.9);
  const auto vi = mdp_value_iteration(mdp, 1e-10);
  for (int s = 0; s < 5; ++s) {
    std::vector<double> obs(5, 0.0);
    obs[static_cast<std::size_t>(s)] = 1.0;
    const auto qrow = result.net.q_values(obs, false);
    CHECK(argmax_lowest(qrow) == vi.greedy[s]);
  }
}

TEST_CASE("identical config and seed give identical runs and identical csv bytes") {
  Hyperparameters hp = small_control(AgentVariant::PGDQN);
  hp.max_env_steps = 4000;
  hp.eval_interval = 1000;
  hp.eval_episodes = 3;
  auto a = train(hp, "cartpole", 12);
  auto b = train(hp, "cartpole", 12);
  REQUIRE(a.log.episodes.size() == b.log.episodes.size());
  for (std::size_t i = 0; i < a.log.episodes.size(); ++i) {
    CHECK(a.log.episodes[i].episode_return == b.log.episodes[i].episode_return);
    CHECK(a.log.episodes[i].frames == b.log.episodes[i].frames);
    CHECK(a.log.episodes[i].alpha == b.log.episodes[i].alpha);
    CHECK(a.log.episodes[i].q_loss == b.log.episodes[i].q_loss);
  }
  REQUIRE(a.log.evals.size() == b.log.evals.size());
  for (std::size_t i = 0; i < a.log.evals.size(); ++i)
    CHECK(a.log.evals[i].mean_return == b.log.evals[i].mean_return);

  write_runlog_csv(a.log, "det_a.csv");
  write_runlog_csv(b.log, "det_b.csv");
  auto slurp = [](const char* p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp("det_a.csv") == slurp("det_b.csv"));
  std::remove("det_a.csv");
  std::remove("det_b.csv");

  // A different seed must actually change the run.
  auto c = train(hp, "cartpole", 13);
  bool differs = c.log.episodes.size() != a.log.episodes.size();
  if (!differs)
    for (std::size_t i = 0; i < a.log.episodes.size() && !differs; ++i)
      differs = a.log.episodes[i].episode_return != c.log.episodes[i].episode_return;
  CHECK(differs);
}

TEST_CASE("frames are non-decreasing and episode rows are complete") {
  Hyperparameters hp = small_control(AgentVariant::D2QN);
  hp.max_env_steps = 2500;
  auto result = train(hp, "cartpole", 2);
  long prev = 0;
  for (const auto& row : result.log.episodes) {
    CHECK(row.frames >= prev);
    prev = row.frames;
    CHECK(std::isfinite(row.episode_return));
  }
  CHECK(result.log.episodes.back().frames == 2500);
}

TEST_CASE("non-finite losses raise TrainAbort and train keeps the partial log") {
  // Direct check on the update: poisoned parameters give an infinite loss.
  {
    std::vector<double> q = {1.0, 2.0};
    DualNetwork net = make_fixed_q_bandit_net(q, 5, 8, 8);
    for (auto& [name, tensor] : net.named_tensors())
      if (name == "q_head.out.b") tensor->fill(std::numeric_limits<double>::infinity());
    RmsProp opt(net.q_params(), 0.001);
    Transition t;
    t.state = {1.0};
    t.next_state = {1.0};
    t.action = 0;
    t.terminal = true;
    const Transition* batch[] = {&t};
    const double targets[] = {0.0};
    CHECK_THROWS_AS(q_update(net, batch, targets, opt), TrainAbort);
  }
  // Train-level: an infinite temperature makes the surrogate non-finite;
  // the run stops but the partial log survives.
  Hyperparameters hp = small_control(AgentVariant::PGDQN);
  hp.alpha_init = std::numeric_limits<double>::infinity();
  hp.max_env_steps = 4000;
  auto result = train(hp, "cartpole", 1);
  CHECK(result.log.aborted);
  CHECK(!result.log.abort_reason.empty());
  CHECK(result.log.total_steps > 0);
}

TEST_CASE("q-trajectory is bit-identical to dqn with sharing off and forced epsilon-greedy") {
  Hyperparameters dqn_hp = small_control(AgentVariant::DQN);
  dqn_hp.max_env_steps = 3000;
  Hyperparameters pg_hp = small_control(AgentVariant::PGDQN);
  pg_hp.max_env_steps = 3000;
  pg_hp.share_embedding = false;
  pg_hp.force_epsilon_greedy = true;

  auto dqn = train(dqn_hp, "cartpole", 4);
  auto pg = train(pg_hp, "cartpole", 4);

  auto dq = dqn.net.q_params();
  auto pq = pg.net.q_params();
  REQUIRE(dq.size() == pq.size());
  for (std::size_t i = 0; i < dq.size(); ++i) {
    REQUIRE(dq[i]->size() == pq[i]->size());
    for (std::size_t k = 0; k < dq[i]->size(); ++k) CHECK((*dq[i])[k] == (*pq[i])[k]);
  }
  // Same exploration stream, same batches: identical episode returns too.
  REQUIRE(dqn.log.episodes.size() == pg.log.episodes.size());
  for (std::size_t i = 0; i < dqn.log.episodes.size(); ++i)
    CHECK(dqn.log.episodes[i].episode_return == pg.log.episodes[i].episode_return);
}

TEST_CASE("hyperparameter profiles, json round trip and hashing") {
  const Hyperparameters atari = Hyperparameters::paper_atari();
  CHECK(atari.replay_capacity == 1000000);
  CHECK(atari.learning_start == 50000);
  CHECK(atari.target_sync_period == 10000);
  CHECK(atari.epsilon.initial == 1.0);
  CHECK(atari.epsilon.final_value == 0.1);
  CHECK(atari.epsilon.horizon == 1000000);
  CHECK(atari.minibatch_size == 32);
  CHECK(atari.gamma == 0.99);
  CHECK(atari.pref_update_period == 4);
  CHECK(atari.q_update_period == 4);
  CHECK(atari.q_lr == 0.00025);
  CHECK(atari.pref_lr == 0.00025);
  CHECK(atari.alpha_lr == 0.00025);

  const Hyperparameters control = Hyperparameters::control_default();
  CHECK(control.replay_capacity == 50000);
  CHECK(control.learning_start == 1000);
  CHECK(control.epsilon.horizon == 10000);
  CHECK_THROWS_AS(Hyperparameters::profile("nope"), std::invalid_argument);

  // JSON round trip preserves every field (and therefore the hash).
  const auto round = Hyperparameters::from_json(atari.to_json());
  CHECK(round.to_json() == atari.to_json());
  CHECK(round.hash() == atari.hash());
  CHECK(control.hash() != atari.hash());

  Hyperparameters bumped = control;
  bumped.q_lr = 0.001;
  CHECK(bumped.hash() != control.hash());

  nlohmann::json bad = {{"no_such_knob", 1}};
  Hyperparameters hp;
  CHECK_THROWS_AS(hp.apply_overrides(bad), std::invalid_argument);
}

TEST_CASE("config validation rejects out-of-range values") {
  Hyperparameters hp = small_control(AgentVariant::DQN);
  hp.gamma = 1.5;
  CHECK_THROWS_AS(train(hp, "chain", 1), std::invalid_argument);
  hp = small_control(AgentVariant::DQN);
  hp.epsilon = EpsilonSchedule{0.1, 0.5, 100};  // initial < final
  CHECK_THROWS_AS(train(hp, "chain", 1), std::invalid_argument);
  hp = small_control(AgentVariant::DQN);
  hp.q_lr = 0.0;
  CHECK_THROWS_AS(train(hp, "chain", 1), std::invalid_argument);
  hp = small_control(AgentVariant::DQN);
  hp.target_sync_period = 0;
  CHECK_THROWS_AS(train(hp, "chain", 1), std::invalid_argument);
}

TEST_CASE("all variants run the loop and log sane rows") {
  for (AgentVariant v : {AgentVariant::DQN, AgentVariant::D2QN, AgentVariant::VDD3QN,
                         AgentVariant::NoisyNetDQN, AgentVariant::PGDQN}) {
    Hyperparameters hp = small_control(v);
    hp.max_env_steps = 1200;
    hp.learning_start = 200;
    auto result = train(hp, "cartpole", 6);
    CHECK(!result.log.aborted);
    CHECK(result.log.total_steps == 1200);
    CHECK(result.log.n_q_updates > 0);
    if (v == AgentVariant::PGDQN) {
      CHECK(result.log.n_pref_updates > 0);
      CHECK(result.log.episodes.back().alpha > 0.0);
    }
  }
}

TEST_SUITE_END();
