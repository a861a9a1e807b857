#include "pgdqn/policy/policy.hpp"

#include <cmath>
#include <stdexcept>

#include "pgdqn/numcore/math.hpp"

namespace pgdqn {

PolicyPmf pg_policy_pmf(std::span<const double> q, std::span<const double> eta, double epsilon) {
  if (q.size() != eta.size() || q.empty())
    throw std::invalid_argument("pg_policy_pmf: q and eta widths must match");
  if (!(epsilon > 0.0) || epsilon > 1.0)
    throw std::invalid_argument("pg_policy_pmf: epsilon must be in (0, 1]");
  double sum = 0.0;
  for (double p : eta) {
    if (p < 0.0) throw std::invalid_argument("pg_policy_pmf: eta has negative entries");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("pg_policy_pmf: eta is off the simplex");

  PolicyPmf pmf;
  pmf.epsilon = epsilon;
  pmf.greedy_action = argmax_lowest(q);
  pmf.probs.resize(q.size());
  for (std::size_t a = 0; a < q.size(); ++a) pmf.probs[a] = epsilon * eta[a];
  pmf.probs[static_cast<std::size_t>(pmf.greedy_action)] += 1.0 - epsilon;
  return pmf;
}

PolicyPmf epsilon_greedy_pmf(std::span<const double> q, double epsilon) {
  std::vector<double> uniform(q.size(), 1.0 / static_cast<double>(q.size()));
  return pg_policy_pmf(q, uniform, epsilon);
}

int sample_categorical(std::span<const double> probs, Prng& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  for (std::size_t a = 0; a < probs.size(); ++a) {
    acc += probs[a];
    if (u < acc) return static_cast<int>(a);
  }
  return static_cast<int>(probs.size()) - 1;  // guard against rounding at 1.0
}

int sample_action(const PolicyPmf& pmf, Prng& rng) {
  return sample_categorical(pmf.probs, rng);
}

double EpsilonSchedule::at(long step) const {
  if (step < 0) throw std::invalid_argument("EpsilonSchedule: negative step");
  if (horizon <= 0 || step >= horizon) return final_value;
  const double frac = static_cast<double>(step) / static_cast<double>(horizon);
  return initial + (final_value - initial) * frac;
}

}  // namespace pgdqn
