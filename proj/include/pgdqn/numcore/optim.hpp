#pragma once

#include <vector>

#include "pgdqn/numcore/tape.hpp"
#include "pgdqn/numcore/tensor.hpp"

namespace pgdqn {

// RMSProp over a fixed parameter list. Defaults are the classic deep
// Q-learning configuration: rho 0.95, epsilon 0.01, no momentum.
class RmsProp {
 public:
  RmsProp(std::vector<Tensor*> params, double lr, double rho = 0.95, double eps = 0.01);

  // Descent step; grads must align with the parameter list. Ascent callers
  // negate their gradients. Refuses non-finite gradients.
  void step(std::span<const Tensor> grads);
  void step_from(const Tape& tape, double sign = 1.0);  // sign -1 for ascent

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }
  const std::vector<Tensor*>& params() const { return params_; }

 private:
  std::vector<Tensor*> params_;
  std::vector<Tensor> second_moment_;
  double lr_, rho_, eps_;
};

// Bias-corrected Adam on a single scalar (the temperature parameter).
class AdamScalar {
 public:
  explicit AdamScalar(double lr, double beta1 = 0.9, double beta2 = 0.999,
                      double eps = 1e-8);

  double step(double value, double grad);  // returns the updated value (descent)
  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  double m_ = 0.0, v_ = 0.0;
  long t_ = 0;
};

}  // namespace pgdqn
