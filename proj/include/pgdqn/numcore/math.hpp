#pragma once

#include <functional>
#include <span>
#include <vector>

namespace pgdqn {

double log_sum_exp(std::span<const double> v);
std::vector<double> softmax(std::span<const double> logits);      // max-shifted
std::vector<double> log_softmax(std::span<const double> logits);  // via log-sum-exp
double entropy(std::span<const double> dist);                     // nats, 0*log0 := 0
int argmax_lowest(std::span<const double> v);                     // lowest index wins ties
bool all_finite(std::span<const double> v);

// Central-difference gradient check. Relative error per coordinate is
// |analytic - numeric| / max(1, |analytic|).
struct GradCheckResult {
  double max_rel_error = 0.0;
  int worst_index = -1;
  bool all_evaluations_finite = true;
  std::vector<double> rel_errors;
};

GradCheckResult grad_check(const std::function<double(std::span<const double>)>& f,
                           std::span<const double> point,
                           std::span<const double> analytic_grad, double step);

// Dense linear solve A x = b by Gaussian elimination with partial pivoting.
// A is n x n row-major and is consumed.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b);

}  // namespace pgdqn
