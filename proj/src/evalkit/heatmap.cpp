#include "pgdqn/evalkit/heatmap.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "pgdqn/numcore/math.hpp"
#include "pgdqn/trainer/trainer.hpp"

namespace pgdqn {

HeatmapRecord export_heatmap(const DualNetwork& net, Env& env, std::uint64_t seed,
                             int max_steps) {
  if (!net.config().pref_branch)
    throw std::invalid_argument("export_heatmap: network has no preference branch");
  HeatmapRecord record;
  std::vector<double> state = env.reset(seed);
  for (int step = 0; step < max_steps; ++step) {
    const auto q = net.q_values(state, /*use_target=*/false);
    const auto eta = net.preference(state);
    const int action = argmax_lowest(q);

    HeatmapRecord::Row row;
    row.step = step;
    row.eta = eta;
    row.action = action;
    const double lo = *std::min_element(q.begin(), q.end());
    const double hi = *std::max_element(q.begin(), q.end());
    row.q_normalized.resize(q.size());
    for (std::size_t a = 0; a < q.size(); ++a)
      row.q_normalized[a] = hi > lo ? (q[a] - lo) / (hi - lo) : 0.0;
    record.rows.push_back(std::move(row));

    StepResult r = env.step(action);
    if (r.terminal || r.truncated) break;
    state = std::move(r.next_state);
  }
  return record;
}

void write_heatmap_csv(const HeatmapRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_heatmap_csv: cannot open " + path);
  if (record.rows.empty()) throw std::invalid_argument("write_heatmap_csv: empty record");
  const std::size_t n = record.rows.front().eta.size();
  out << "step";
  for (std::size_t a = 0; a < n; ++a) out << ",eta_" << a;
  for (std::size_t a = 0; a < n; ++a) out << ",q_norm_" << a;
  out << ",action\n";
  for (const auto& row : record.rows) {
    out << row.step;
    for (double v : row.eta) out << ',' << format_double(v);
    for (double v : row.q_normalized) out << ',' << format_double(v);
    out << ',' << row.action << '\n';
  }
}

}  // namespace pgdqn
