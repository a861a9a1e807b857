#include "pgdqn/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pgdqn {

double perf_improvement(double sc_new, double sc_baseline) {
  if (sc_baseline == 0.0)
    throw std::invalid_argument(
        "perf_improvement: zero baseline score; the percentage is undefined");
  return 100.0 * (sc_new - sc_baseline) / std::abs(sc_baseline);
}

EfficiencyResult efficiency_improvement(double frm_baseline, std::optional<double> frm_new) {
  if (frm_baseline <= 0.0)
    throw std::invalid_argument("efficiency_improvement: baseline frames must be positive");
  if (!frm_new.has_value()) return {false, 0.0};
  if (*frm_new <= 0.0)
    throw std::invalid_argument("efficiency_improvement: frames must be positive");
  return {true, 100.0 * (frm_baseline - *frm_new) / frm_baseline};
}

double MethodResult::mean_best_score() const {
  if (best_scores.empty()) throw std::invalid_argument("MethodResult: no seeds");
  return std::accumulate(best_scores.begin(), best_scores.end(), 0.0) /
         static_cast<double>(best_scores.size());
}

double MethodResult::mean_frames_to_best() const {
  if (frames_to_best.empty()) throw std::invalid_argument("MethodResult: no seeds");
  return std::accumulate(frames_to_best.begin(), frames_to_best.end(), 0.0) /
         static_cast<double>(frames_to_best.size());
}

std::vector<RankedMethod> rank_methods(const std::vector<MethodResult>& results,
                                       double tie_rel_tol) {
  if (results.size() < 2) throw std::invalid_argument("rank_methods: need at least 2 methods");

  struct Entry {
    std::size_t input_index;
    double score;
    double frames;
    double tiebreak;
  };
  std::vector<Entry> entries;
  entries.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i)
    entries.push_back({i, results[i].mean_best_score(), results[i].mean_frames_to_best(), 0.0});

  // Efficiency tiebreak = mean over opponents of the frames-saved percentage.
  for (auto& e : entries) {
    double sum = 0.0;
    int n = 0;
    for (const auto& other : entries) {
      if (other.input_index == e.input_index) continue;
      sum += 100.0 * (other.frames - e.frames) / other.frames;
      ++n;
    }
    e.tiebreak = n > 0 ? sum / n : 0.0;
  }

  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.score > b.score; });

  // Greedy grouping: a method ties with a group when its score is within
  // tie_rel_tol of the group's best; groups reorder by the efficiency key.
  std::vector<RankedMethod> ranked;
  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i + 1;
    const double group_best = entries[i].score;
    const double tol = tie_rel_tol * std::max(std::abs(group_best), 1e-12);
    while (j < entries.size() && std::abs(group_best - entries[j].score) <= tol) ++j;
    std::stable_sort(entries.begin() + static_cast<std::ptrdiff_t>(i),
                     entries.begin() + static_cast<std::ptrdiff_t>(j),
                     [](const Entry& a, const Entry& b) { return a.tiebreak > b.tiebreak; });
    i = j;
  }

  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Entry& e = entries[k];
    ranked.push_back({results[e.input_index].name, static_cast<int>(k) + 1, e.score, e.tiebreak});
  }
  return ranked;
}

std::vector<double> smoothed_curve(const std::vector<EvalPoint>& evals, int window) {
  if (window <= 0) throw std::invalid_argument("smoothed_curve: window must be positive");
  std::vector<double> out(evals.size(), 0.0);
  double running = 0.0;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    running += evals[i].mean_return;
    if (i >= static_cast<std::size_t>(window)) running -= evals[i - window].mean_return;
    const std::size_t count = std::min<std::size_t>(i + 1, static_cast<std::size_t>(window));
    out[i] = running / static_cast<double>(count);
  }
  return out;
}

double best_smoothed_score(const std::vector<EvalPoint>& evals, int window) {
  if (evals.empty()) throw std::invalid_argument("best_smoothed_score: empty curve");
  const auto curve = smoothed_curve(evals, window);
  return *std::max_element(curve.begin(), curve.end());
}

std::optional<double> frames_to_score(const std::vector<EvalPoint>& evals, double score,
                                      int window) {
  const auto curve = smoothed_curve(evals, window);
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve[i] >= score) return static_cast<double>(evals[i].frames);
  return std::nullopt;
}

}  // namespace pgdqn
