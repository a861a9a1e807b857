#include "pgdqn/agents/network.hpp"

#include <cmath>
#include <stdexcept>

#include "pgdqn/numcore/math.hpp"

namespace pgdqn {

namespace {

double signed_sqrt(double u) { return (u < 0.0 ? -1.0 : 1.0) * std::sqrt(std::abs(u)); }

void apply_activation(std::vector<double>& v, Activation act) {
  if (act == Activation::ReLU)
    for (double& x : v) x = x > 0.0 ? x : 0.0;
}

std::vector<double> dense_forward(const Layer& layer, std::span<const double> x) {
  const std::size_t out = layer.w.rows();
  const std::size_t in = layer.w.cols();
  if (in != x.size()) throw std::invalid_argument("dense_forward: input width mismatch");
  std::vector<double> y(out);
  const auto wd = layer.w.data();
  for (std::size_t i = 0; i < out; ++i) {
    double acc = layer.b[i];
    const double* row = wd.data() + i * in;
    for (std::size_t j = 0; j < in; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

}  // namespace

int Layer::fan_in() const {
  return static_cast<int>(kind == LayerKind::Dense ? w.cols() : w_mu.cols());
}

int Layer::fan_out() const {
  return static_cast<int>(kind == LayerKind::Dense ? w.rows() : w_mu.rows());
}

Layer make_dense(int in, int out, Activation act, Prng& rng) {
  Layer layer;
  layer.kind = LayerKind::Dense;
  layer.act = act;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::vector<double> w(static_cast<std::size_t>(out) * in);
  for (double& v : w) v = rng.uniform(-bound, bound);
  std::vector<double> b(static_cast<std::size_t>(out));
  for (double& v : b) v = rng.uniform(-bound, bound);
  layer.w = Tensor::matrix(out, in, std::move(w));
  layer.b = Tensor::vector(std::move(b));
  return layer;
}

Layer make_noisy(int in, int out, Activation act, Prng& rng) {
  Layer layer;
  layer.kind = LayerKind::Noisy;
  layer.act = act;
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  const double sigma0 = 0.5 / std::sqrt(static_cast<double>(in));
  std::vector<double> wm(static_cast<std::size_t>(out) * in);
  for (double& v : wm) v = rng.uniform(-bound, bound);
  std::vector<double> bm(static_cast<std::size_t>(out));
  for (double& v : bm) v = rng.uniform(-bound, bound);
  layer.w_mu = Tensor::matrix(out, in, std::move(wm));
  layer.b_mu = Tensor::vector(std::move(bm));
  layer.w_sigma = Tensor::matrix(out, in, std::vector<double>(static_cast<std::size_t>(out) * in, sigma0));
  layer.b_sigma = Tensor::vector(std::vector<double>(static_cast<std::size_t>(out), sigma0));
  return layer;
}

NoiseDraw NoiseDraw::zeros_for(const Stack& stack) {
  NoiseDraw draw;
  draw.per_layer.resize(stack.layers.size());
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    const Layer& l = stack.layers[i];
    if (l.kind == LayerKind::Noisy) {
      draw.per_layer[i].f_in.assign(static_cast<std::size_t>(l.fan_in()), 0.0);
      draw.per_layer[i].f_out.assign(static_cast<std::size_t>(l.fan_out()), 0.0);
    }
  }
  return draw;
}

NoiseDraw NoiseDraw::sample_for(const Stack& stack, Prng& rng) {
  NoiseDraw draw = zeros_for(stack);
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    const Layer& l = stack.layers[i];
    if (l.kind != LayerKind::Noisy) continue;
    for (double& v : draw.per_layer[i].f_in) v = signed_sqrt(rng.normal());
    for (double& v : draw.per_layer[i].f_out) v = signed_sqrt(rng.normal());
  }
  return draw;
}

std::vector<double> noisy_forward(const Layer& layer, std::span<const double> x,
                                  const NoiseDraw::LayerNoise& eps) {
  const std::size_t out = layer.w_mu.rows();
  const std::size_t in = layer.w_mu.cols();
  if (in != x.size() || eps.f_in.size() != in || eps.f_out.size() != out)
    throw std::invalid_argument("noisy_forward: dimension mismatch");
  std::vector<double> y(out);
  for (std::size_t i = 0; i < out; ++i) {
    double acc = layer.b_mu[i] + layer.b_sigma[i] * eps.f_out[i];
    for (std::size_t j = 0; j < in; ++j)
      acc += (layer.w_mu.data()[i * in + j] +
              layer.w_sigma.data()[i * in + j] * eps.f_out[i] * eps.f_in[j]) *
             x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> stack_forward(const Stack& stack, std::span<const double> x,
                                  const NoiseDraw* noise) {
  std::vector<double> current(x.begin(), x.end());
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    const Layer& layer = stack.layers[i];
    if (layer.kind == LayerKind::Dense) {
      current = dense_forward(layer, current);
    } else {
      if (noise == nullptr || i >= noise->per_layer.size())
        throw std::invalid_argument("stack_forward: noisy layer without a noise draw");
      current = noisy_forward(layer, current, noise->per_layer[i]);
    }
    apply_activation(current, layer.act);
  }
  return current;
}

Tape::Var stack_forward_on_tape(Tape& tape, Stack& stack, Tape::Var x, const NoiseDraw* noise) {
  Tape::Var current = x;
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    Layer& layer = stack.layers[i];
    if (layer.kind == LayerKind::Dense) {
      current = tape.affine(tape.param(layer.w), tape.param(layer.b), current);
    } else {
      if (noise == nullptr || i >= noise->per_layer.size())
        throw std::invalid_argument("stack_forward_on_tape: noisy layer without a noise draw");
      const auto& eps = noise->per_layer[i];
      current = tape.noisy_affine(tape.param(layer.w_mu), tape.param(layer.w_sigma),
                                  tape.param(layer.b_mu), tape.param(layer.b_sigma), current,
                                  eps.f_out, eps.f_in);
    }
    if (layer.act == Activation::ReLU) current = tape.relu(current);
  }
  return current;
}

std::vector<double> dueling_aggregate(double v, std::span<const double> adv) {
  if (adv.empty()) throw std::invalid_argument("dueling_aggregate: empty advantage vector");
  double mean = 0.0;
  for (double a : adv) mean += a;
  mean /= static_cast<double>(adv.size());
  // Same association as the tape path (adv + (v - mean)) so both routes agree
  // bitwise.
  const double shift = v - mean;
  std::vector<double> q(adv.size());
  for (std::size_t i = 0; i < adv.size(); ++i) q[i] = adv[i] + shift;
  return q;
}

VariantTraits traits_of(AgentVariant v) {
  switch (v) {
    case AgentVariant::DQN:
      return {false, false, false, TargetRule::Max, Exploration::EpsilonGreedy};
    case AgentVariant::D2QN:
      return {false, false, false, TargetRule::Double, Exploration::EpsilonGreedy};
    case AgentVariant::VDD3QN:
      return {true, false, false, TargetRule::Double, Exploration::EpsilonGreedy};
    case AgentVariant::NoisyNetDQN:
      return {false, true, false, TargetRule::Max, Exploration::Noisy};
    case AgentVariant::PGDQN:
      return {false, false, true, TargetRule::Max, Exploration::PreferenceGuided};
  }
  throw std::invalid_argument("traits_of: unknown variant");
}

AgentVariant variant_from_string(const std::string& s) {
  if (s == "dqn") return AgentVariant::DQN;
  if (s == "d2qn") return AgentVariant::D2QN;
  if (s == "vdd3qn") return AgentVariant::VDD3QN;
  if (s == "noisynet") return AgentVariant::NoisyNetDQN;
  if (s == "pgdqn") return AgentVariant::PGDQN;
  throw std::invalid_argument("unknown agent variant '" + s + "'");
}

std::string to_string(AgentVariant v) {
  switch (v) {
    case AgentVariant::DQN: return "dqn";
    case AgentVariant::D2QN: return "d2qn";
    case AgentVariant::VDD3QN: return "vdd3qn";
    case AgentVariant::NoisyNetDQN: return "noisynet";
    case AgentVariant::PGDQN: return "pgdqn";
  }
  return "?";
}

namespace {

Stack build_trunk(const NetworkConfig& c, Prng& rng) {
  Stack stack;
  int in = c.obs_dim;
  for (int width : c.embedding_widths) {
    stack.layers.push_back(make_dense(in, width, Activation::ReLU, rng));
    in = width;
  }
  return stack;
}

QHead build_q_head(const NetworkConfig& c, int in, Prng& rng) {
  QHead head;
  head.dueling = c.dueling;
  auto hidden = c.noisy ? make_noisy(in, c.head_width, Activation::ReLU, rng)
                        : make_dense(in, c.head_width, Activation::ReLU, rng);
  head.hidden.layers.push_back(std::move(hidden));
  if (c.dueling) {
    head.value_out = c.noisy ? make_noisy(c.head_width, 1, Activation::Identity, rng)
                             : make_dense(c.head_width, 1, Activation::Identity, rng);
    head.adv_out = c.noisy ? make_noisy(c.head_width, c.n_actions, Activation::Identity, rng)
                           : make_dense(c.head_width, c.n_actions, Activation::Identity, rng);
  } else {
    head.out = c.noisy ? make_noisy(c.head_width, c.n_actions, Activation::Identity, rng)
                       : make_dense(c.head_width, c.n_actions, Activation::Identity, rng);
  }
  return head;
}

Stack build_pref_head(const NetworkConfig& c, int in, Prng& rng) {
  Stack stack;
  stack.layers.push_back(make_dense(in, c.head_width, Activation::ReLU, rng));
  stack.layers.push_back(make_dense(c.head_width, c.n_actions, Activation::Identity, rng));
  return stack;
}

// Noise draw covering the q-head layers in order hidden..., out / value, adv.
Stack q_head_as_stack_view(const QHead& head) {
  Stack view;
  view.layers = head.hidden.layers;
  if (head.dueling) {
    view.layers.push_back(head.value_out);
    view.layers.push_back(head.adv_out);
  } else {
    view.layers.push_back(head.out);
  }
  return view;
}

void collect_layer_params(Layer& layer, std::vector<Tensor*>& out) {
  if (layer.kind == LayerKind::Dense) {
    out.push_back(&layer.w);
    out.push_back(&layer.b);
  } else {
    out.push_back(&layer.w_mu);
    out.push_back(&layer.w_sigma);
    out.push_back(&layer.b_mu);
    out.push_back(&layer.b_sigma);
  }
}

void collect_named(const std::string& prefix, Layer& layer,
                   std::vector<std::pair<std::string, Tensor*>>& out) {
  if (layer.kind == LayerKind::Dense) {
    out.emplace_back(prefix + ".w", &layer.w);
    out.emplace_back(prefix + ".b", &layer.b);
  } else {
    out.emplace_back(prefix + ".w_mu", &layer.w_mu);
    out.emplace_back(prefix + ".w_sigma", &layer.w_sigma);
    out.emplace_back(prefix + ".b_mu", &layer.b_mu);
    out.emplace_back(prefix + ".b_sigma", &layer.b_sigma);
  }
}

}  // namespace

DualNetwork DualNetwork::create(const NetworkConfig& config, Prng& rng) {
  if (config.obs_dim <= 0 || config.n_actions <= 0)
    throw std::invalid_argument("DualNetwork: obs_dim and n_actions must be positive");
  DualNetwork net;
  net.config_ = config;
  // Order matters for reproducibility: theta draws come first so variants
  // without a preference branch share the same Q-path initialization.
  net.embedding_ = build_trunk(config, rng);
  net.q_head_ = build_q_head(config, net.embedding_.out_width(), rng);
  if (config.pref_branch) {
    if (!config.share_embedding) net.pref_embedding_ = build_trunk(config, rng);
    const int pref_in =
        config.share_embedding ? net.embedding_.out_width() : net.pref_embedding_.out_width();
    net.pref_head_ = build_pref_head(config, pref_in, rng);
  }
  net.sync_target();
  return net;
}

void DualNetwork::sync_target() {
  embedding_t_ = embedding_;
  q_head_t_ = q_head_;
  pref_embedding_t_ = pref_embedding_;
  pref_head_t_ = pref_head_;
}

std::vector<double> DualNetwork::q_from(const Stack& embedding, const QHead& head,
                                        std::span<const double> state,
                                        const NoiseDraw* noise) const {
  // The head noise draw is indexed over hidden..., out layers.
  std::size_t idx = 0;
  std::vector<double> z = stack_forward(embedding, state, nullptr);
  for (const Layer& layer : head.hidden.layers) {
    if (layer.kind == LayerKind::Dense) {
      z = dense_forward(layer, z);
    } else {
      if (noise == nullptr) throw std::invalid_argument("q_values: missing noise draw");
      z = noisy_forward(layer, z, noise->per_layer[idx]);
    }
    apply_activation(z, layer.act);
    ++idx;
  }
  auto run_out = [&](const Layer& layer) {
    std::vector<double> y;
    if (layer.kind == LayerKind::Dense) {
      y = dense_forward(layer, z);
    } else {
      if (noise == nullptr) throw std::invalid_argument("q_values: missing noise draw");
      y = noisy_forward(layer, z, noise->per_layer[idx]);
    }
    apply_activation(y, layer.act);
    ++idx;
    return y;
  };
  if (!head.dueling) return run_out(head.out);
  std::vector<double> v = run_out(head.value_out);
  std::vector<double> adv = run_out(head.adv_out);
  return dueling_aggregate(v[0], adv);
}

std::vector<double> DualNetwork::q_values(std::span<const double> state, bool use_target,
                                          const NoiseDraw* noise) const {
  if (static_cast<int>(state.size()) != config_.obs_dim)
    throw std::invalid_argument("q_values: state width mismatch");
  return use_target ? q_from(embedding_t_, q_head_t_, state, noise)
                    : q_from(embedding_, q_head_, state, noise);
}

std::vector<double> DualNetwork::preference_logits(std::span<const double> state) const {
  if (!config_.pref_branch)
    throw std::logic_error("preference_logits: network has no preference branch");
  if (static_cast<int>(state.size()) != config_.obs_dim)
    throw std::invalid_argument("preference_logits: state width mismatch");
  const Stack& trunk = config_.share_embedding ? embedding_ : pref_embedding_;
  std::vector<double> h = stack_forward(trunk, state, nullptr);
  return stack_forward(pref_head_, h, nullptr);
}

std::vector<double> DualNetwork::preference(std::span<const double> state) const {
  return softmax(preference_logits(state));
}

std::vector<double> DualNetwork::target_preference_logits(std::span<const double> state) const {
  if (!config_.pref_branch)
    throw std::logic_error("target_preference_logits: network has no preference branch");
  const Stack& trunk = config_.share_embedding ? embedding_t_ : pref_embedding_t_;
  std::vector<double> h = stack_forward(trunk, state, nullptr);
  return stack_forward(pref_head_t_, h, nullptr);
}

Tape::Var DualNetwork::q_value_on_tape(Tape& tape, std::span<const double> state, int action,
                                       const NoiseDraw* noise) {
  Tape::Var x = tape.input(state);
  Tape::Var h = stack_forward_on_tape(tape, embedding_, x, nullptr);

  std::size_t idx = 0;
  Tape::Var z = h;
  for (Layer& layer : q_head_.hidden.layers) {
    if (layer.kind == LayerKind::Dense) {
      z = tape.affine(tape.param(layer.w), tape.param(layer.b), z);
    } else {
      if (noise == nullptr) throw std::invalid_argument("q_value_on_tape: missing noise draw");
      const auto& eps = noise->per_layer[idx];
      z = tape.noisy_affine(tape.param(layer.w_mu), tape.param(layer.w_sigma),
                            tape.param(layer.b_mu), tape.param(layer.b_sigma), z, eps.f_out,
                            eps.f_in);
    }
    if (layer.act == Activation::ReLU) z = tape.relu(z);
    ++idx;
  }
  auto run_out = [&](Layer& layer) {
    Tape::Var y;
    if (layer.kind == LayerKind::Dense) {
      y = tape.affine(tape.param(layer.w), tape.param(layer.b), z);
    } else {
      if (noise == nullptr) throw std::invalid_argument("q_value_on_tape: missing noise draw");
      const auto& eps = noise->per_layer[idx];
      y = tape.noisy_affine(tape.param(layer.w_mu), tape.param(layer.w_sigma),
                            tape.param(layer.b_mu), tape.param(layer.b_sigma), z, eps.f_out,
                            eps.f_in);
    }
    if (layer.act == Activation::ReLU) y = tape.relu(y);
    ++idx;
    return y;
  };
  if (!q_head_.dueling) return tape.pick(run_out(q_head_.out), action);
  Tape::Var v = run_out(q_head_.value_out);
  Tape::Var adv = run_out(q_head_.adv_out);
  Tape::Var centered = tape.sub(v, tape.mean(adv));
  Tape::Var q = tape.add_scalar(adv, centered);
  return tape.pick(q, action);
}

Tape::Var DualNetwork::pref_logits_on_tape(Tape& tape, std::span<const double> state) {
  if (!config_.pref_branch)
    throw std::logic_error("pref_logits_on_tape: network has no preference branch");
  Tape::Var x = tape.input(state);
  Stack& trunk = config_.share_embedding ? embedding_ : pref_embedding_;
  Tape::Var h = stack_forward_on_tape(tape, trunk, x, nullptr);
  return stack_forward_on_tape(tape, pref_head_, h, nullptr);
}

std::vector<Tensor*> DualNetwork::q_params() {
  std::vector<Tensor*> out;
  for (Layer& layer : embedding_.layers) collect_layer_params(layer, out);
  for (Layer& layer : q_head_.hidden.layers) collect_layer_params(layer, out);
  if (q_head_.dueling) {
    collect_layer_params(q_head_.value_out, out);
    collect_layer_params(q_head_.adv_out, out);
  } else {
    collect_layer_params(q_head_.out, out);
  }
  return out;
}

std::vector<Tensor*> DualNetwork::pref_params() {
  if (!config_.pref_branch)
    throw std::logic_error("pref_params: network has no preference branch");
  std::vector<Tensor*> out;
  Stack& trunk = config_.share_embedding ? embedding_ : pref_embedding_;
  for (Layer& layer : trunk.layers) collect_layer_params(layer, out);
  for (Layer& layer : pref_head_.layers) collect_layer_params(layer, out);
  return out;
}

NoiseDraw DualNetwork::sample_q_noise(Prng& rng) const {
  return NoiseDraw::sample_for(q_head_as_stack_view(q_head_), rng);
}

NoiseDraw DualNetwork::zero_q_noise() const {
  return NoiseDraw::zeros_for(q_head_as_stack_view(q_head_));
}

std::vector<std::pair<std::string, Tensor*>> DualNetwork::named_tensors() {
  std::vector<std::pair<std::string, Tensor*>> out;
  auto walk_stack = [&](const std::string& prefix, Stack& stack) {
    for (std::size_t i = 0; i < stack.layers.size(); ++i)
      collect_named(prefix + "." + std::to_string(i), stack.layers[i], out);
  };
  auto walk_head = [&](const std::string& prefix, QHead& head) {
    walk_stack(prefix + ".hidden", head.hidden);
    if (head.dueling) {
      collect_named(prefix + ".value_out", head.value_out, out);
      collect_named(prefix + ".adv_out", head.adv_out, out);
    } else {
      collect_named(prefix + ".out", head.out, out);
    }
  };
  walk_stack("embedding", embedding_);
  walk_head("q_head", q_head_);
  if (config_.pref_branch) {
    if (!config_.share_embedding) walk_stack("pref_embedding", pref_embedding_);
    walk_stack("pref_head", pref_head_);
  }
  walk_stack("target.embedding", embedding_t_);
  walk_head("target.q_head", q_head_t_);
  if (config_.pref_branch) {
    if (!config_.share_embedding) walk_stack("target.pref_embedding", pref_embedding_t_);
    walk_stack("target.pref_head", pref_head_t_);
  }
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> DualNetwork::named_tensors() const {
  auto mutable_view = const_cast<DualNetwork*>(this)->named_tensors();
  std::vector<std::pair<std::string, const Tensor*>> out;
  out.reserve(mutable_view.size());
  for (auto& [name, tensor] : mutable_view) out.emplace_back(name, tensor);
  return out;
}

}  // namespace pgdqn
