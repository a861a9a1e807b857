#include "pgdqn/replay/replay_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pgdqn {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  storage_.reserve(std::min<std::size_t>(capacity_, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (!std::isfinite(t.reward)) throw std::invalid_argument("ReplayBuffer: non-finite reward");
  if (size_ < capacity_) {
    storage_.push_back(std::move(t));
    ++size_;
  } else {
    storage_[cursor_] = std::move(t);
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::oldest_first(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("ReplayBuffer: index out of range");
  if (size_ < capacity_) return storage_[i];
  return storage_[(cursor_ + i) % capacity_];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Prng& rng,
                                                      bool with_replacement) const {
  if (size_ == 0) throw std::invalid_argument("ReplayBuffer: sample from an empty buffer");
  // With replacement n may exceed the fill (duplicates are expected);
  // distinct draws cannot.
  if (!with_replacement && n > size_)
    throw std::invalid_argument("ReplayBuffer: sample larger than buffer");
  std::vector<std::size_t> indices;
  indices.reserve(n);
  if (with_replacement) {
    for (std::size_t k = 0; k < n; ++k) indices.push_back(rng.below(size_));
  } else {
    // Rejection works well here since n is far below the buffer size.
    while (indices.size() < n) {
      std::size_t candidate = rng.below(size_);
      if (std::find(indices.begin(), indices.end(), candidate) == indices.end())
        indices.push_back(candidate);
    }
  }
  return indices;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Prng& rng,
                                                    bool with_replacement) const {
  auto indices = sample_indices(n, rng, with_replacement);
  std::vector<const Transition*> batch;
  batch.reserve(n);
  for (std::size_t i : indices) batch.push_back(&storage_[i]);
  return batch;
}

}  // namespace pgdqn
