#include "pgdqn/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "pgdqn/numcore/math.hpp"

namespace pgdqn {

namespace {

// Fixed substream tags so every consumer of randomness is independent.
constexpr std::uint64_t kStreamInit = 0x696e6974ULL;     // network init
constexpr std::uint64_t kStreamExplore = 0x6578706cULL;  // action sampling
constexpr std::uint64_t kStreamReplay = 0x72706c79ULL;   // minibatch draws
constexpr std::uint64_t kStreamNoise = 0x6e6f6973ULL;    // noisy-layer draws
constexpr std::uint64_t kEvalEnvSalt = 0x6576616cULL;    // eval env reset stream

struct EpisodeAccum {
  double ret = 0.0;
  double entropy_sum = 0.0;
  double pref_obj_sum = 0.0;
  long pref_count = 0;
  double q_loss_sum = 0.0;
  long q_count = 0;

  void reset() { *this = EpisodeAccum{}; }
};

}  // namespace

double RunLog::best_eval() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const EvalPoint& p : evals) best = std::max(best, p.mean_return);
  return best;
}

std::optional<long> RunLog::frames_to_reach(double threshold) const {
  for (const EvalPoint& p : evals)
    if (p.mean_return >= threshold) return p.frames;
  return std::nullopt;
}

double greedy_eval(const DualNetwork& net, Env& env, int episodes, Prng& noise_rng) {
  double total = 0.0;
  const bool noisy = net.config().noisy;
  for (int ep = 0; ep < episodes; ++ep) {
    // Noise frozen for the whole evaluation episode.
    NoiseDraw draw = noisy ? net.sample_q_noise(noise_rng) : NoiseDraw{};
    const NoiseDraw* noise = noisy ? &draw : nullptr;
    std::vector<double> state = env.reset();
    while (true) {
      const auto q = net.q_values(state, /*use_target=*/false, noise);
      StepResult r = env.step(argmax_lowest(q));
      total += r.reward;
      if (r.terminal || r.truncated) break;
      state = std::move(r.next_state);
    }
  }
  return total / static_cast<double>(episodes);
}

TrainResult train(const Hyperparameters& hp, const std::string& env_name, std::uint64_t seed) {
  hp.validate();
  const VariantTraits traits = traits_of(hp.variant);

  auto env = make_env(env_name, seed);
  auto eval_env = make_env(env_name, seed ^ kEvalEnvSalt);
  if (hp.episode_step_limit > 0) {
    env->set_step_limit(hp.episode_step_limit);
    eval_env->set_step_limit(hp.episode_step_limit);
  }

  Prng init_rng(seed, kStreamInit);
  Prng explore_rng(seed, kStreamExplore);
  Prng replay_rng(seed, kStreamReplay);
  Prng noise_rng(seed, kStreamNoise);

  NetworkConfig nc;
  nc.obs_dim = env->obs_dim();
  nc.n_actions = env->n_actions();
  nc.embedding_widths = hp.embedding_widths;
  nc.head_width = hp.head_width;
  nc.dueling = traits.dueling;
  nc.noisy = traits.noisy;
  nc.pref_branch = traits.pref_branch;
  nc.share_embedding = hp.share_embedding;

  TrainResult result{RunLog{}, DualNetwork::create(nc, init_rng)};
  DualNetwork& net = result.net;
  RunLog& log = result.log;
  log.env = env_name;
  log.variant = hp.variant;
  log.seed = seed;
  log.config_hash = hp.hash();

  ReplayBuffer buffer(hp.replay_capacity);
  RmsProp q_opt(net.q_params(), hp.q_lr, hp.rmsprop_rho, hp.rmsprop_eps);
  std::optional<RmsProp> pref_opt;
  std::optional<TemperatureState> temperature;
  if (traits.pref_branch) {
    pref_opt.emplace(net.pref_params(), hp.pref_lr, hp.rmsprop_rho, hp.rmsprop_eps);
    temperature.emplace(hp.alpha_init, hp.alpha_lr, hp.resolved_xi(nc.n_actions));
  }

  const std::vector<double> uniform_eta(static_cast<std::size_t>(nc.n_actions),
                                        1.0 / nc.n_actions);
  const bool early_stop_enabled = !std::isnan(hp.early_stop_eval_return);
  const std::size_t min_fill =
      std::max<std::size_t>(hp.learning_start, static_cast<std::size_t>(hp.minibatch_size));

  long step = 0;
  bool stop = false;
  try {
    for (long episode = 0; episode < hp.max_episodes && !stop; ++episode) {
      std::vector<double> state = env->reset();
      EpisodeAccum acc;
      double last_epsilon = 0.0;

      while (true) {
        const double eps =
            traits.exploration == Exploration::Noisy ? 0.0 : hp.epsilon.at(step);
        last_epsilon = eps;

        int action;
        if (traits.exploration == Exploration::Noisy) {
          NoiseDraw draw = net.sample_q_noise(noise_rng);
          action = argmax_lowest(net.q_values(state, false, &draw));
        } else {
          const auto q = net.q_values(state, false);
          const bool use_pref =
              traits.exploration == Exploration::PreferenceGuided && !hp.force_epsilon_greedy;
          const PolicyPmf pmf = use_pref ? pg_policy_pmf(q, net.preference(state), eps)
                                         : epsilon_greedy_pmf(q, eps);
          action = sample_action(pmf, explore_rng);
        }

        StepResult sr = env->step(action);
        if (!all_finite(sr.next_state) || !std::isfinite(sr.reward))
          throw TrainAbort("environment produced a non-finite value");
        acc.ret += sr.reward;
        buffer.push(Transition{state, action, sr.reward, sr.next_state, sr.terminal,
                               sr.truncated});
        ++step;

        if (traits.pref_branch && step % hp.pref_update_period == 0) {
          auto pr = preference_update(net, state, action, temperature->alpha(), *pref_opt,
                                      hp.pref_grad_mode);
          temperature->update(pr.entropy);
          acc.entropy_sum += pr.entropy;
          acc.pref_obj_sum += pr.objective;
          ++acc.pref_count;
          ++log.n_pref_updates;
        }

        if (buffer.size() >= min_fill && step % hp.q_update_period == 0) {
          auto batch = buffer.sample(static_cast<std::size_t>(hp.minibatch_size), replay_rng,
                                     hp.sample_with_replacement);
          NoiseDraw behavior_draw, target_draw;
          const NoiseDraw* bnoise = nullptr;
          const NoiseDraw* tnoise = nullptr;
          if (traits.noisy) {
            behavior_draw = net.sample_q_noise(noise_rng);
            target_draw = net.sample_q_noise(noise_rng);
            bnoise = &behavior_draw;
            tnoise = &target_draw;
          }
          const auto targets = q_target_values(net, batch, hp.gamma, traits.target_rule,
                                               hp.reward_clip, bnoise, tnoise);
          acc.q_loss_sum += q_update(net, batch, targets, q_opt, bnoise);
          ++acc.q_count;
          ++log.n_q_updates;
        }

        if (step % hp.target_sync_period == 0) {
          net.sync_target();
          ++log.n_target_syncs;
        }

        if (hp.eval_interval > 0 && step % hp.eval_interval == 0) {
          const double mean_return = greedy_eval(net, *eval_env, hp.eval_episodes, noise_rng);
          log.evals.push_back({step, mean_return});
          if (early_stop_enabled && mean_return >= hp.early_stop_eval_return) stop = true;
        }

        const bool episode_over = sr.terminal || sr.truncated;
        if (!episode_over) state = std::move(sr.next_state);
        if (stop || step >= hp.max_env_steps) stop = true;
        if (episode_over || stop) break;
      }

      EpisodeRow row;
      row.seed = seed;
      row.episode = episode;
      row.frames = step;
      row.episode_return = acc.ret;
      row.epsilon = last_epsilon;
      row.alpha = temperature ? temperature->alpha() : 0.0;
      row.entropy = acc.pref_count > 0 ? acc.entropy_sum / acc.pref_count : 0.0;
      row.q_loss = acc.q_count > 0 ? acc.q_loss_sum / acc.q_count : 0.0;
      row.pref_obj = acc.pref_count > 0 ? acc.pref_obj_sum / acc.pref_count : 0.0;
      log.episodes.push_back(row);
      log.total_steps = step;
    }
  } catch (const TrainAbort& abort) {
    log.aborted = true;
    log.abort_reason = abort.what();
    log.total_steps = step;
  }
  return result;
}

std::string format_double(double v) {
  // Shortest representation that round-trips exactly.
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void write_runlog_csv(const RunLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_runlog_csv: cannot open " + path);
  out << "seed,episode,frames,return,epsilon,alpha,entropy,q_loss,pref_obj\n";
  for (const EpisodeRow& r : log.episodes) {
    out << r.seed << ',' << r.episode << ',' << r.frames << ',' << format_double(r.episode_return)
        << ',' << format_double(r.epsilon) << ',' << format_double(r.alpha) << ','
        << format_double(r.entropy) << ',' << format_double(r.q_loss) << ','
        << format_double(r.pref_obj) << '\n';
  }
}

void write_eval_csv(const RunLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_eval_csv: cannot open " + path);
  out << "seed,frames,mean_return\n";
  for (const EvalPoint& p : log.evals)
    out << log.seed << ',' << p.frames << ',' << format_double(p.mean_return) << '\n';
}

void write_config_sidecar(const Hyperparameters& hp, const std::string& env_name,
                          std::uint64_t seed, const std::string& path) {
  nlohmann::json doc;
  doc["env"] = env_name;
  doc["variant"] = to_string(hp.variant);
  doc["seed"] = seed;
  doc["config"] = hp.to_json();
  doc["config_hash"] = hp.hash();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_config_sidecar: cannot open " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace pgdqn
