#pragma once

#include <span>
#include <vector>

#include "pgdqn/envkit/tabular.hpp"
#include "pgdqn/trainer/updates.hpp"

namespace pgdqn {

// KL(eta || softmax(q / alpha)) in nats. Zero eta entries contribute 0;
// the Boltzmann target is strictly positive.
double kl_to_boltzmann(std::span<const double> eta, std::span<const double> q, double alpha);

enum class EtaImprovementMode {
  Greedy,     // point mass on argmax Q, the maximizer of sum_a eta(a) Q(a)
  Boltzmann,  // softmax(Q / alpha) with alpha decaying each round, kept only
              // when it does not lower the expected Q at a state
};

struct ImprovementReport {
  std::vector<double> per_round_min;  // min over (s,a) of Q^{i+1} - Q^i
  double overall_min = 0.0;
  int boltzmann_fallbacks = 0;  // states where the candidate was rejected
};

// Iterates exact evaluation of the preference-guided epsilon-greedy policy
// and one-step greedy preference updates, reporting the elementwise Q
// differences between consecutive rounds.
ImprovementReport verify_policy_improvement(const TabularMdp& mdp, double epsilon, int n_rounds,
                                            EtaImprovementMode mode = EtaImprovementMode::Greedy);

// A dual network whose Q branch outputs exactly the given action values for
// every state: the output layer weights are zeroed and the bias pinned.
// Used by the fixed-Q bandit suites.
DualNetwork make_fixed_q_bandit_net(std::span<const double> q, std::uint64_t seed,
                                    int embedding_width = 32, int head_width = 32);

struct BanditConvergence {
  double final_kl = 0.0;
  int updates_used = 0;
  bool converged = false;
};

// Runs expected-mode preference updates on a fixed-Q bandit until
// KL(eta || softmax(q/alpha)) drops to kl_tol or the update budget runs out.
BanditConvergence run_bandit_to_fixed_point(DualNetwork& net, std::span<const double> q,
                                            double alpha, double kl_tol, int max_updates,
                                            double suite_lr = 0.02,
                                            PrefGradMode mode = PrefGradMode::Expected);

// Analytic-vs-central-difference check of the Q loss and both preference
// surrogates on a small random network. Returns the max relative error over
// all three losses and all parameters.
double gradient_suite_worst_error(std::uint64_t seed, double fd_step = 1e-6);

}  // namespace pgdqn
