#include "pgdqn/numcore/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace pgdqn {

RmsProp::RmsProp(std::vector<Tensor*> params, double lr, double rho, double eps)
    : params_(std::move(params)), lr_(lr), rho_(rho), eps_(eps) {
  if (lr_ <= 0.0) throw std::invalid_argument("RmsProp: learning rate must be positive");
  if (rho_ <= 0.0 || rho_ >= 1.0) throw std::invalid_argument("RmsProp: rho must be in (0,1)");
  second_moment_.reserve(params_.size());
  for (Tensor* p : params_) second_moment_.push_back(Tensor::zeros_like(*p));
}

void RmsProp::step(std::span<const Tensor> grads) {
  if (grads.size() != params_.size())
    throw std::invalid_argument("RmsProp::step: gradient count mismatch");
  for (std::size_t k = 0; k < params_.size(); ++k) {
    if (!grads[k].same_shape(*params_[k]))
      throw std::invalid_argument("RmsProp::step: gradient shape mismatch");
    if (!grads[k].all_finite())
      throw std::runtime_error("RmsProp::step: non-finite gradient, step refused");
  }
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Tensor& p = *params_[k];
    Tensor& v = second_moment_[k];
    const Tensor& g = grads[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = rho_ * v[i] + (1.0 - rho_) * g[i] * g[i];
      p[i] -= lr_ * g[i] / (std::sqrt(v[i]) + eps_);
    }
  }
}

void RmsProp::step_from(const Tape& tape, double sign) {
  std::vector<Tensor> grads;
  grads.reserve(params_.size());
  for (Tensor* p : params_) {
    Tensor g = tape.grad(*p);
    if (sign != 1.0)
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= sign;
    grads.push_back(std::move(g));
  }
  step(grads);
}

AdamScalar::AdamScalar(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (lr_ <= 0.0) throw std::invalid_argument("AdamScalar: learning rate must be positive");
}

double AdamScalar::step(double value, double grad) {
  if (!std::isfinite(grad))
    throw std::runtime_error("AdamScalar::step: non-finite gradient, step refused");
  ++t_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad * grad;
  const double m_hat = m_ / (1.0 - std::pow(beta1_, t_));
  const double v_hat = v_ / (1.0 - std::pow(beta2_, t_));
  return value - lr_ * m_hat / (std::sqrt(v_hat) + eps_);
}

}  // namespace pgdqn
