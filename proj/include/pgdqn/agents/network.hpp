#pragma once

#include <span>
#include <string>
#include <vector>

#include "pgdqn/numcore/prng.hpp"
#include "pgdqn/numcore/tape.hpp"
#include "pgdqn/numcore/tensor.hpp"

namespace pgdqn {

enum class Activation { ReLU, Identity };
enum class LayerKind { Dense, Noisy };

struct Layer {
  LayerKind kind = LayerKind::Dense;
  Activation act = Activation::Identity;
  // Dense parameters.
  Tensor w, b;
  // Noisy parameters (factorized Gaussian noise over means).
  Tensor w_mu, w_sigma, b_mu, b_sigma;

  int fan_in() const;
  int fan_out() const;
};

Layer make_dense(int in, int out, Activation act, Prng& rng);  // fan-in uniform init
Layer make_noisy(int in, int out, Activation act, Prng& rng);  // sigma init 0.5/sqrt(fan_in)

struct Stack {
  std::vector<Layer> layers;
  int in_width() const { return layers.empty() ? 0 : layers.front().fan_in(); }
  int out_width() const { return layers.empty() ? 0 : layers.back().fan_out(); }
};

// One factorized noise draw per noisy layer of a stack, already passed
// through f(u) = sign(u) sqrt(|u|). Dense layers get empty entries.
struct NoiseDraw {
  struct LayerNoise {
    std::vector<double> f_in, f_out;
  };
  std::vector<LayerNoise> per_layer;

  static NoiseDraw zeros_for(const Stack& stack);
  static NoiseDraw sample_for(const Stack& stack, Prng& rng);
};

// Forward through a stack; noise may be null when no layer is noisy.
std::vector<double> stack_forward(const Stack& stack, std::span<const double> x,
                                  const NoiseDraw* noise);
Tape::Var stack_forward_on_tape(Tape& tape, Stack& stack, Tape::Var x, const NoiseDraw* noise);

// Single noisy layer forward, exposed for direct tests.
std::vector<double> noisy_forward(const Layer& layer, std::span<const double> x,
                                  const NoiseDraw::LayerNoise& eps);

// q = v + adv - mean(adv)
std::vector<double> dueling_aggregate(double v, std::span<const double> adv);

enum class AgentVariant { DQN, D2QN, VDD3QN, NoisyNetDQN, PGDQN };
enum class TargetRule { Max, Double };
enum class Exploration { EpsilonGreedy, Noisy, PreferenceGuided };

struct VariantTraits {
  bool dueling = false;
  bool noisy = false;
  bool pref_branch = false;
  TargetRule target_rule = TargetRule::Max;
  Exploration exploration = Exploration::EpsilonGreedy;
};

VariantTraits traits_of(AgentVariant v);
AgentVariant variant_from_string(const std::string& s);
std::string to_string(AgentVariant v);

struct NetworkConfig {
  int obs_dim = 0;
  int n_actions = 0;
  std::vector<int> embedding_widths = {128, 128};
  int head_width = 128;
  bool dueling = false;
  bool noisy = false;          // noisy q-head layers
  bool pref_branch = true;
  bool share_embedding = true;  // false: the preference path owns a private trunk
};

// Q head: hidden relu layer(s), then either a plain linear output or a
// dueling split into value and advantage streams.
struct QHead {
  Stack hidden;
  Layer out;        // plain
  Layer value_out;  // dueling
  Layer adv_out;    // dueling
  bool dueling = false;
};

// Dual-branch value network: a shared embedding trunk feeding a Q head and a
// preference head, each with mirrored target copies. theta = embedding +
// q_head, phi = pref_head (+ the private trunk when sharing is off).
class DualNetwork {
 public:
  static DualNetwork create(const NetworkConfig& config, Prng& rng);

  const NetworkConfig& config() const { return config_; }
  int n_actions() const { return config_.n_actions; }

  std::vector<double> q_values(std::span<const double> state, bool use_target,
                               const NoiseDraw* noise = nullptr) const;
  std::vector<double> preference_logits(std::span<const double> state) const;
  std::vector<double> preference(std::span<const double> state) const;  // softmax(logits)

  // phi_target is kept in sync alongside theta_target; nothing consumes it,
  // but it is exposed read-only.
  std::vector<double> target_preference_logits(std::span<const double> state) const;

  void sync_target();  // target <- behavior, bitwise

  // Behavior parameters on the tape paths.
  Tape::Var q_value_on_tape(Tape& tape, std::span<const double> state, int action,
                            const NoiseDraw* noise = nullptr);
  Tape::Var pref_logits_on_tape(Tape& tape, std::span<const double> state);

  std::vector<Tensor*> q_params();     // theta: embedding + q head
  std::vector<Tensor*> pref_params();  // phi: pref head (+ private trunk when unshared)

  NoiseDraw sample_q_noise(Prng& rng) const;
  NoiseDraw zero_q_noise() const;

  // Flat named views over every behavior/target tensor, for checkpointing.
  std::vector<std::pair<std::string, Tensor*>> named_tensors();
  std::vector<std::pair<std::string, const Tensor*>> named_tensors() const;

 private:
  std::vector<double> q_from(const Stack& embedding, const QHead& head,
                             std::span<const double> state, const NoiseDraw* noise) const;

  NetworkConfig config_;
  Stack embedding_, pref_embedding_, pref_head_;
  QHead q_head_;
  Stack embedding_t_, pref_embedding_t_, pref_head_t_;
  QHead q_head_t_;
};

}  // namespace pgdqn
