#pragma once

#include <cstddef>
#include <vector>

#include "pgdqn/numcore/prng.hpp"

namespace pgdqn {

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
  bool truncated = false;
};

// Fixed-capacity ring buffer with uniform random minibatch sampling.
// Eviction is strictly FIFO once full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  // i = 0 is the oldest stored transition.
  const Transition& oldest_first(std::size_t i) const;

  // Uniform draws, deterministic given the rng state. With replacement by
  // default; the alternative draws distinct indices.
  std::vector<const Transition*> sample(std::size_t n, Prng& rng,
                                        bool with_replacement = true) const;
  std::vector<std::size_t> sample_indices(std::size_t n, Prng& rng,
                                          bool with_replacement = true) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
};

}  // namespace pgdqn
