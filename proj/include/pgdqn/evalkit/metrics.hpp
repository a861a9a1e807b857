#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pgdqn/trainer/trainer.hpp"

namespace pgdqn {

// Percentage improvement of a score over a baseline. The denominator takes
// |baseline| so negative-score tasks keep sign-correct percentages.
double perf_improvement(double sc_new, double sc_baseline);

struct EfficiencyResult {
  bool reached = false;
  double percent = 0.0;  // meaningful only when reached
};

// Percentage of frames saved reaching the baseline's best score. frm_new is
// empty when that score was never reached, which maps to a distinct
// "unreached" result rather than a number.
EfficiencyResult efficiency_improvement(double frm_baseline, std::optional<double> frm_new);

struct MethodResult {
  std::string name;
  std::vector<double> best_scores;     // per seed
  std::vector<double> frames_to_best;  // per seed

  double mean_best_score() const;
  double mean_frames_to_best() const;
};

struct RankedMethod {
  std::string name;
  int rank = 0;  // 1 is best
  double mean_score = 0.0;
  double efficiency_tiebreak = 0.0;  // mean frames-saved percentage vs all opponents
};

// Primary key: mean best score, descending. Methods whose scores sit within
// tie_rel_tol of their group's best are treated as equally good and ordered
// by data efficiency instead (fewer frames to best = better). Stable on
// complete ties.
std::vector<RankedMethod> rank_methods(const std::vector<MethodResult>& results,
                                       double tie_rel_tol = 0.01);

// Smoothed evaluation-curve utilities (trailing window over eval points).
std::vector<double> smoothed_curve(const std::vector<EvalPoint>& evals, int window = 10);
double best_smoothed_score(const std::vector<EvalPoint>& evals, int window = 10);
std::optional<double> frames_to_score(const std::vector<EvalPoint>& evals, double score,
                                      int window = 10);

}  // namespace pgdqn
