#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pgdqn::cli {

// Exit codes: usage problems, aborted runs and failed verification suites
// are distinguishable from scripts.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRunAborted = 3;
constexpr int kExitVerifyFailed = 4;

struct TrainOptions {
  std::string config_path;  // optional JSON run config
  std::string env = "cartpole";
  std::string variant = "pgdqn";
  std::string profile = "control-default";
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "runs";
  std::vector<std::string> overrides;  // key=value, JSON-typed values
  bool overwrite = false;
  bool svg = false;
  std::string save_net_prefix;  // empty: no checkpoints
  int parallel = 1;
};

struct CompareOptions {
  std::string runlog_dir;
  std::string output_dir;  // defaults to runlog_dir
  bool svg = false;
  int smoothing_window = 10;
};

struct VerifyOptions {
  std::string suite = "all";  // gradients | theorem1 | kl-fixed-point | envs | all
  std::string output_json;    // optional machine-readable report
};

struct HeatmapOptions {
  std::string checkpoint;
  std::string env = "cartpole";
  std::uint64_t seed = 1;
  int max_steps = 500;
  std::string output = "heatmap.csv";
  bool svg = false;
};

struct SweepOptions {
  TrainOptions base;
  std::vector<int> pref_update_periods = {1, 4, 8};
  std::vector<double> pref_lrs = {0.00025, 0.001, 0.0025};
};

int cmd_train(const TrainOptions& opts);
int cmd_compare(const CompareOptions& opts);
int cmd_verify(const VerifyOptions& opts);
int cmd_heatmap(const HeatmapOptions& opts);
int cmd_sweep(const SweepOptions& opts);

}  // namespace pgdqn::cli
