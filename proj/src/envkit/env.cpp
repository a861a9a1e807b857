#include "pgdqn/envkit/env.hpp"

#include <stdexcept>

#include "pgdqn/envkit/classic_control.hpp"
#include "pgdqn/envkit/tabular.hpp"

namespace pgdqn {

std::unique_ptr<Env> make_env(const std::string& name, std::uint64_t seed) {
  if (name == "cartpole") return std::make_unique<CartPoleEnv>(seed);
  if (name == "mountaincar") return std::make_unique<MountainCarEnv>(seed);
  if (name == "acrobot") return std::make_unique<AcrobotEnv>(seed);
  if (name == "chain")
    return std::make_unique<TabularEnv>(make_chain_mdp(5, 0.99), seed, 25, "chain", 0);
  if (name == "random-mdp")
    return std::make_unique<TabularEnv>(make_random_mdp(5, 3, 0.99, seed), seed, 50, "random-mdp");
  throw std::invalid_argument("make_env: unknown environment '" + name + "'");
}

}  // namespace pgdqn
