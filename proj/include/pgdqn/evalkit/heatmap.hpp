#pragma once

#include <string>
#include <vector>

#include "pgdqn/agents/network.hpp"
#include "pgdqn/envkit/env.hpp"

namespace pgdqn {

// Per-step record of one greedy evaluation episode: the preference
// distribution, the min-max normalized Q row and the chosen action.
struct HeatmapRecord {
  struct Row {
    long step = 0;
    std::vector<double> eta;
    std::vector<double> q_normalized;  // per-episode min-max; constant rows map to 0
    int action = 0;
  };
  std::vector<Row> rows;
};

HeatmapRecord export_heatmap(const DualNetwork& net, Env& env, std::uint64_t seed,
                             int max_steps);

void write_heatmap_csv(const HeatmapRecord& record, const std::string& path);

}  // namespace pgdqn
