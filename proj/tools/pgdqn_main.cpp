#include <CLI11.hpp>

#include "pgdqn/cli/commands.hpp"

using namespace pgdqn::cli;

int main(int argc, char** argv) {
  CLI::App app{"Preference-guided deep Q-learning lab"};
  app.require_subcommand(1);

  TrainOptions train_opts;
  auto* train = app.add_subcommand("train", "Train one variant over a seed sweep");
  train->add_option("--config", train_opts.config_path, "JSON run config");
  train->add_option("--env", train_opts.env, "cartpole|mountaincar|acrobot|chain|random-mdp");
  train->add_option("--variant", train_opts.variant, "dqn|d2qn|vdd3qn|noisynet|pgdqn");
  train->add_option("--profile", train_opts.profile, "control-default|paper-atari");
  train->add_option("--seeds", train_opts.seeds, "seed list");
  train->add_option("--out", train_opts.output_dir, "output directory");
  train->add_option("--set", train_opts.overrides, "hyperparameter override key=value");
  train->add_flag("--overwrite", train_opts.overwrite, "replace existing run files");
  train->add_flag("--svg", train_opts.svg, "emit an evaluation-curve SVG");
  train->add_option("--save-net", train_opts.save_net_prefix, "checkpoint prefix");
  train->add_option("--parallel", train_opts.parallel, "concurrent runs");

  CompareOptions compare_opts;
  auto* compare = app.add_subcommand("compare", "Metrics and ranking from run logs");
  compare->add_option("dir", compare_opts.runlog_dir, "run log directory")->required();
  compare->add_option("--out", compare_opts.output_dir, "report directory");
  compare->add_option("--window", compare_opts.smoothing_window, "eval smoothing window");
  compare->add_flag("--svg", compare_opts.svg, "emit a rank bar chart SVG");

  VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Run the oracle verification suites");
  verify->add_option("suite", verify_opts.suite, "gradients|theorem1|kl-fixed-point|envs|all");
  verify->add_option("--json", verify_opts.output_json, "machine-readable report path");

  HeatmapOptions heatmap_opts;
  auto* heatmap = app.add_subcommand("heatmap", "Per-step preference/Q export of one episode");
  heatmap->add_option("--net", heatmap_opts.checkpoint, "network checkpoint")->required();
  heatmap->add_option("--env", heatmap_opts.env, "environment name");
  heatmap->add_option("--seed", heatmap_opts.seed, "episode seed");
  heatmap->add_option("--max-steps", heatmap_opts.max_steps, "step cap");
  heatmap->add_option("--out", heatmap_opts.output, "CSV path");
  heatmap->add_flag("--svg", heatmap_opts.svg, "also emit an SVG heat map");

  SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Preference update-period x learning-rate matrix");
  sweep->add_option("--config", sweep_opts.base.config_path, "JSON run config");
  sweep->add_option("--env", sweep_opts.base.env, "environment name");
  sweep->add_option("--seeds", sweep_opts.base.seeds, "seed list");
  sweep->add_option("--out", sweep_opts.base.output_dir, "output directory");
  sweep->add_option("--set", sweep_opts.base.overrides, "hyperparameter override key=value");
  sweep->add_option("--tau-eta", sweep_opts.pref_update_periods, "update periods");
  sweep->add_option("--lambda-eta", sweep_opts.pref_lrs, "learning rates");
  sweep->add_flag("--overwrite", sweep_opts.base.overwrite, "replace existing run files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (train->parsed()) return cmd_train(train_opts);
  if (compare->parsed()) return cmd_compare(compare_opts);
  if (verify->parsed()) return cmd_verify(verify_opts);
  if (heatmap->parsed()) return cmd_heatmap(heatmap_opts);
  if (sweep->parsed()) return cmd_sweep(sweep_opts);
  return kExitUsage;
}
