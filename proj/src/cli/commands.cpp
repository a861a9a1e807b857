#include "pgdqn/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <map>
#include <optional>

#include <json.hpp>

#include "pgdqn/agents/checkpoint.hpp"
#include "pgdqn/cli/svg.hpp"
#include "pgdqn/envkit/classic_control.hpp"
#include "pgdqn/evalkit/heatmap.hpp"
#include "pgdqn/evalkit/metrics.hpp"
#include "pgdqn/evalkit/verify.hpp"
#include "pgdqn/numcore/math.hpp"
#include "pgdqn/trainer/trainer.hpp"

namespace pgdqn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parse_override_value(const std::string& raw) {
  try {
    return json::parse(raw);
  } catch (const json::parse_error&) {
    return json(raw);  // bare strings stay strings
  }
}

json overrides_to_json(const std::vector<std::string>& kvs) {
  json merged = json::object();
  for (const std::string& kv : kvs) {
    const auto pos = kv.find('=');
    if (pos == std::string::npos)
      throw std::invalid_argument("override '" + kv + "' is not key=value");
    merged[kv.substr(0, pos)] = parse_override_value(kv.substr(pos + 1));
  }
  return merged;
}

struct ResolvedRunConfig {
  std::string env;
  Hyperparameters hp;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;
};

ResolvedRunConfig resolve_run_config(const TrainOptions& opts) {
  std::string env = opts.env;
  std::string variant = opts.variant;
  std::string profile = opts.profile;
  std::vector<std::uint64_t> seeds = opts.seeds;
  std::string output_dir = opts.output_dir;
  json file_overrides = json::object();

  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw std::invalid_argument("cannot open config '" + opts.config_path + "'");
    json doc = json::parse(in);
    if (doc.contains("env")) env = doc["env"].get<std::string>();
    if (doc.contains("variant")) variant = doc["variant"].get<std::string>();
    if (doc.contains("profile")) profile = doc["profile"].get<std::string>();
    if (doc.contains("seeds")) seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
    if (doc.contains("output_dir")) output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("overrides")) file_overrides = doc["overrides"];
  }

  ResolvedRunConfig rc;
  rc.env = env;
  rc.hp = Hyperparameters::profile(profile);
  rc.hp.variant = variant_from_string(variant);
  rc.hp.apply_overrides(file_overrides);
  rc.hp.apply_overrides(overrides_to_json(opts.overrides));
  rc.seeds = seeds;
  rc.output_dir = output_dir;
  if (rc.seeds.empty()) throw std::invalid_argument("no seeds given");
  return rc;
}

std::string run_stem(const ResolvedRunConfig& rc, std::uint64_t seed) {
  return to_string(rc.hp.variant) + "_" + rc.env + "_seed" + std::to_string(seed);
}

struct RunCurve {
  std::string variant;
  std::uint64_t seed = 0;
  std::vector<EvalPoint> evals;
};

std::vector<RunCurve> load_run_curves(const std::string& dir) {
  std::vector<RunCurve> curves;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() < 12 || name.substr(name.size() - 12) != "_config.json") continue;
    std::ifstream in(entry.path());
    json sidecar = json::parse(in);
    RunCurve curve;
    curve.variant = sidecar.at("variant").get<std::string>();
    curve.seed = sidecar.at("seed").get<std::uint64_t>();

    const std::string stem = name.substr(0, name.size() - 12);
    const fs::path eval_path = entry.path().parent_path() / (stem + "_eval.csv");
    std::ifstream eval_in(eval_path);
    if (!eval_in) continue;
    std::string line;
    std::getline(eval_in, line);  // header
    while (std::getline(eval_in, line)) {
      EvalPoint p;
      if (std::sscanf(line.c_str(), "%*llu,%ld,%lf", &p.frames, &p.mean_return) == 2)
        curve.evals.push_back(p);
    }
    if (!curve.evals.empty()) curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace

int cmd_train(const TrainOptions& opts) {
  ResolvedRunConfig rc;
  try {
    rc = resolve_run_config(opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  fs::create_directories(rc.output_dir);
  for (std::uint64_t seed : rc.seeds) {
    const fs::path csv = fs::path(rc.output_dir) / (run_stem(rc, seed) + ".csv");
    if (fs::exists(csv) && !opts.overwrite) {
      std::cerr << "error: " << csv.string() << " exists; pass --overwrite to replace it\n";
      return kExitUsage;
    }
  }

  bool any_aborted = false;
  std::vector<Series> curves;

  auto run_one = [&rc](std::uint64_t seed) { return train(rc.hp, rc.env, seed); };

  auto persist = [&](std::uint64_t seed, TrainResult& result) {
    const std::string stem = run_stem(rc, seed);
    const fs::path base = fs::path(rc.output_dir);
    write_runlog_csv(result.log, (base / (stem + ".csv")).string());
    write_eval_csv(result.log, (base / (stem + "_eval.csv")).string());
    write_config_sidecar(rc.hp, rc.env, seed, (base / (stem + "_config.json")).string());
    if (!opts.save_net_prefix.empty())
      save_checkpoint(result.net, (base / (opts.save_net_prefix + "_" + stem + ".json")).string());
    if (result.log.aborted) {
      any_aborted = true;
      std::cerr << "run " << stem << " aborted: " << result.log.abort_reason << "\n";
    } else {
      std::cout << stem << ": episodes=" << result.log.episodes.size()
                << " frames=" << result.log.total_steps;
      if (!result.log.evals.empty()) std::cout << " best_eval=" << result.log.best_eval();
      std::cout << "\n";
    }
    Series s;
    s.label = stem;
    for (const EvalPoint& p : result.log.evals) {
      s.x.push_back(static_cast<double>(p.frames));
      s.y.push_back(p.mean_return);
    }
    curves.push_back(std::move(s));
  };

  try {
    if (opts.parallel > 1) {
      std::vector<std::pair<std::uint64_t, std::future<TrainResult>>> futures;
      for (std::uint64_t seed : rc.seeds)
        futures.emplace_back(seed, std::async(std::launch::async, run_one, seed));
      for (auto& [seed, fut] : futures) {
        TrainResult result = fut.get();
        persist(seed, result);
      }
    } else {
      for (std::uint64_t seed : rc.seeds) {
        TrainResult result = run_one(seed);
        persist(seed, result);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunAborted;
  }

  if (opts.svg && !curves.empty())
    write_line_svg(curves, rc.env + " greedy evaluation",
                   (fs::path(rc.output_dir) / (to_string(rc.hp.variant) + "_" + rc.env + "_eval.svg"))
                       .string());
  return any_aborted ? kExitRunAborted : kExitOk;
}

int cmd_compare(const CompareOptions& opts) {
  const std::string out_dir = opts.output_dir.empty() ? opts.runlog_dir : opts.output_dir;
  std::vector<RunCurve> curves;
  try {
    curves = load_run_curves(opts.runlog_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (curves.empty()) {
    std::cerr << "error: no run logs with evaluation curves under '" << opts.runlog_dir << "'\n";
    return kExitUsage;
  }

  std::map<std::string, std::vector<const RunCurve*>> by_method;
  for (const RunCurve& c : curves) by_method[c.variant].push_back(&c);
  if (by_method.size() < 2) {
    std::cerr << "error: need runs from at least two methods to compare; found only '"
              << by_method.begin()->first << "'\n";
    return kExitUsage;
  }

  const int window = opts.smoothing_window;
  std::vector<MethodResult> results;
  for (const auto& [method, runs] : by_method) {
    MethodResult mr;
    mr.name = method;
    for (const RunCurve* run : runs) {
      const double best = best_smoothed_score(run->evals, window);
      mr.best_scores.push_back(best);
      mr.frames_to_best.push_back(frames_to_score(run->evals, best, window).value_or(
          static_cast<double>(run->evals.back().frames)));
    }
    results.push_back(std::move(mr));
  }

  fs::create_directories(out_dir);
  const auto ranking = rank_methods(results);
  {
    std::ofstream out(fs::path(out_dir) / "ranking.csv");
    out << "rank,method,mean_best_score,efficiency_tiebreak\n";
    for (const auto& r : ranking)
      out << r.rank << ',' << r.name << ',' << format_double(r.mean_score) << ','
          << format_double(r.efficiency_tiebreak) << '\n';
  }

  // Pairwise improvement table, centered on pgdqn when present.
  const bool has_pgdqn = by_method.count("pgdqn") > 0;
  json summary;
  summary["ranking"] = json::array();
  for (const auto& r : ranking)
    summary["ranking"].push_back({{"rank", r.rank},
                                  {"method", r.name},
                                  {"mean_best_score", r.mean_score},
                                  {"efficiency_tiebreak", r.efficiency_tiebreak}});

  std::ofstream table(fs::path(out_dir) / "improvement.csv");
  table << "subject,baseline,perf_improvement_pct,efficiency_improvement_pct,efficiency_status\n";
  json pairs = json::array();
  auto find_result = [&](const std::string& name) -> const MethodResult& {
    for (const auto& r : results)
      if (r.name == name) return r;
    throw std::logic_error("method lookup failed");
  };
  auto frames_to = [&](const std::string& method, double score) -> std::optional<double> {
    double sum = 0.0;
    int reached = 0;
    for (const RunCurve* run : by_method.at(method)) {
      if (auto f = frames_to_score(run->evals, score, window)) {
        sum += *f;
        ++reached;
      }
    }
    if (reached == 0) return std::nullopt;
    return sum / reached;
  };

  std::vector<std::string> subjects;
  if (has_pgdqn)
    subjects = {"pgdqn"};
  else
    for (const auto& [method, _] : by_method) subjects.push_back(method);

  for (const std::string& subject : subjects) {
    for (const auto& [baseline, _] : by_method) {
      if (baseline == subject) continue;
      const double sc_subject = find_result(subject).mean_best_score();
      const double sc_base = find_result(baseline).mean_best_score();
      double perf = 0.0;
      bool perf_ok = sc_base != 0.0;
      if (perf_ok) perf = perf_improvement(sc_subject, sc_base);

      const auto frm_base = frames_to(baseline, sc_base);
      EfficiencyResult eff{false, 0.0};
      if (frm_base) eff = efficiency_improvement(*frm_base, frames_to(subject, sc_base));

      table << subject << ',' << baseline << ','
            << (perf_ok ? format_double(perf) : std::string("n/a")) << ','
            << (eff.reached ? format_double(eff.percent) : std::string("n/a")) << ','
            << (eff.reached ? "reached" : "unreached") << '\n';
      pairs.push_back({{"subject", subject},
                       {"baseline", baseline},
                       {"perf_improvement_pct", perf_ok ? json(perf) : json(nullptr)},
                       {"efficiency_improvement_pct", eff.reached ? json(eff.percent) : json(nullptr)},
                       {"efficiency_status", eff.reached ? "reached" : "unreached"}});
    }
  }
  summary["improvements"] = std::move(pairs);
  {
    std::ofstream out(fs::path(out_dir) / "summary.json");
    out << summary.dump(2) << '\n';
  }

  if (opts.svg) {
    std::vector<std::string> labels;
    std::vector<double> values;
    for (const auto& r : ranking) {
      labels.push_back(r.name);
      values.push_back(static_cast<double>(r.rank));
    }
    write_bar_svg(labels, values, "method rank (lower is better)",
                  (fs::path(out_dir) / "ranking.svg").string());
  }

  for (const auto& r : ranking)
    std::cout << r.rank << ". " << r.name << "  score=" << r.mean_score
              << "  efficiency=" << r.efficiency_tiebreak << "%\n";
  return kExitOk;
}

namespace {

struct SuiteCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double bound = 0.0;
  std::string detail;
};

void report(std::vector<SuiteCheck>& checks, const std::string& name, bool passed,
            double measured, double bound, const std::string& detail = "") {
  checks.push_back({name, passed, measured, bound, detail});
  std::cout << (passed ? "[PASS] " : "[FAIL] ") << name << ": measured=" << measured
            << " bound=" << bound << (detail.empty() ? "" : " (" + detail + ")") << "\n";
}

void verify_gradients(std::vector<SuiteCheck>& checks) {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
    worst = std::max(worst, gradient_suite_worst_error(seed));
  report(checks, "gradients: Q loss and both preference surrogates vs central differences",
         worst <= 1e-5, worst, 1e-5);
}

void verify_theorem1(std::vector<SuiteCheck>& checks) {
  double overall = std::numeric_limits<double>::infinity();
  for (double eps : {0.1, 0.5, 1.0})
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto mdp = make_random_mdp(5, 3, 0.9, seed);
      const auto rep = verify_policy_improvement(mdp, eps, 8, EtaImprovementMode::Greedy);
      overall = std::min(overall, rep.overall_min);
    }
  report(checks, "theorem1: min Q difference across greedy improvement rounds",
         overall >= -1e-9, overall, -1e-9);

  double overall_boltzmann = std::numeric_limits<double>::infinity();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto mdp = make_random_mdp(5, 3, 0.9, seed);
    const auto rep = verify_policy_improvement(mdp, 0.5, 8, EtaImprovementMode::Boltzmann);
    overall_boltzmann = std::min(overall_boltzmann, rep.overall_min);
  }
  report(checks, "theorem1: Boltzmann-mode improvement rounds", overall_boltzmann >= -1e-9,
         overall_boltzmann, -1e-9);
}

void verify_kl_fixed_point(std::vector<SuiteCheck>& checks) {
  double worst_kl = 0.0;
  int worst_updates = 0;
  bool all_converged = true;
  std::uint64_t salt = 0;
  for (int n_actions : {2, 6, 18})
    for (double alpha : {0.1, 0.5, 1.0}) {
      ++salt;
      Prng rng(salt, 0x6b6cULL);
      std::vector<double> q(static_cast<std::size_t>(n_actions));
      for (double& v : q) v = rng.uniform(-1.0, 1.0);
      DualNetwork net = make_fixed_q_bandit_net(q, salt);
      const auto res = run_bandit_to_fixed_point(net, q, alpha, 1e-3, 20000);
      all_converged = all_converged && res.converged;
      worst_kl = std::max(worst_kl, res.final_kl);
      worst_updates = std::max(worst_updates, res.updates_used);
    }
  report(checks, "kl-fixed-point: KL(eta || softmax(Q/alpha)) on fixed-Q bandits",
         all_converged && worst_kl <= 1e-3, worst_kl, 1e-3,
         "max updates used " + std::to_string(worst_updates));
}

void verify_envs(std::vector<SuiteCheck>& checks) {
  // Bit-exact replay of a recorded (seed, action sequence).
  bool replay_ok = true;
  for (const std::string name : {"cartpole", "mountaincar", "acrobot", "chain", "random-mdp"}) {
    auto a = make_env(name, 7);
    auto b = make_env(name, 7);
    Prng actions(name.size(), 0x616374ULL);
    auto sa = a->reset();
    auto sb = b->reset();
    replay_ok = replay_ok && sa == sb;
    for (int i = 0; i < 200; ++i) {
      const int act = static_cast<int>(actions.below(static_cast<std::uint64_t>(a->n_actions())));
      StepResult ra = a->step(act);
      StepResult rb = b->step(act);
      replay_ok = replay_ok && ra.next_state == rb.next_state && ra.reward == rb.reward &&
                  ra.terminal == rb.terminal && ra.truncated == rb.truncated;
      if (ra.terminal || ra.truncated) {
        sa = a->reset();
        sb = b->reset();
        replay_ok = replay_ok && sa == sb;
      }
    }
  }
  report(checks, "envs: bit-exact replay under a fixed seed", replay_ok, replay_ok ? 1 : 0, 1);

  bool init_ok = true;
  {
    CartPoleEnv cp(3);
    for (int i = 0; i < 10000; ++i)
      for (double v : cp.reset())
        init_ok = init_ok && v >= -0.05 && v <= 0.05;
    MountainCarEnv mc(3);
    for (int i = 0; i < 10000; ++i) {
      auto s = mc.reset();
      init_ok = init_ok && s[0] >= -0.6 && s[0] <= -0.4 && s[1] == 0.0;
    }
  }
  report(checks, "envs: reset distributions within documented ranges", init_ok, init_ok ? 1 : 0, 1);

  double self_consistency = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto mdp = make_random_mdp(6, 3, 0.95, seed);
    const auto vi = mdp_value_iteration(mdp, 1e-13);
    std::vector<double> greedy_policy(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions, 0.0);
    for (int s = 0; s < mdp.n_states; ++s)
      greedy_policy[static_cast<std::size_t>(s) * mdp.n_actions + vi.greedy[s]] = 1.0;
    const auto q = mdp_policy_eval(mdp, greedy_policy);
    for (std::size_t i = 0; i < q.q.size(); ++i)
      self_consistency = std::max(self_consistency, std::abs(q.q[i] - vi.q.q[i]));
  }
  report(checks, "envs: value iteration vs exact greedy evaluation", self_consistency <= 1e-9,
         self_consistency, 1e-9);
}

}  // namespace

int cmd_verify(const VerifyOptions& opts) {
  std::vector<SuiteCheck> checks;
  try {
    if (opts.suite == "gradients" || opts.suite == "all") verify_gradients(checks);
    if (opts.suite == "theorem1" || opts.suite == "all") verify_theorem1(checks);
    if (opts.suite == "kl-fixed-point" || opts.suite == "all") verify_kl_fixed_point(checks);
    if (opts.suite == "envs" || opts.suite == "all") verify_envs(checks);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerifyFailed;
  }
  if (checks.empty()) {
    std::cerr << "error: unknown suite '" << opts.suite
              << "' (expected gradients|theorem1|kl-fixed-point|envs|all)\n";
    return kExitUsage;
  }

  if (!opts.output_json.empty()) {
    json doc = json::array();
    for (const auto& c : checks)
      doc.push_back({{"name", c.name},
                     {"passed", c.passed},
                     {"measured", c.measured},
                     {"bound", c.bound},
                     {"detail", c.detail}});
    std::ofstream out(opts.output_json);
    out << doc.dump(2) << '\n';
  }

  for (const auto& c : checks)
    if (!c.passed) return kExitVerifyFailed;
  return kExitOk;
}

int cmd_heatmap(const HeatmapOptions& opts) {
  try {
    DualNetwork net = load_checkpoint(opts.checkpoint);
    auto env = make_env(opts.env, opts.seed);
    const HeatmapRecord record = export_heatmap(net, *env, opts.seed, opts.max_steps);
    write_heatmap_csv(record, opts.output);
    if (opts.svg) {
      std::vector<std::vector<double>> eta_rows;
      for (const auto& row : record.rows) eta_rows.push_back(row.eta);
      write_heatmap_svg(eta_rows, "action preference over one episode",
                        fs::path(opts.output).replace_extension(".svg").string());
    }
    std::cout << "wrote " << record.rows.size() << " steps to " << opts.output << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int cmd_sweep(const SweepOptions& opts) {
  // Matrix expansion over preference update period and learning rate.
  for (int period : opts.pref_update_periods)
    for (double lr : opts.pref_lrs) {
      TrainOptions combo = opts.base;
      combo.overrides.push_back("pref_update_period=" + std::to_string(period));
      char lr_buf[32];
      std::snprintf(lr_buf, sizeof lr_buf, "%g", lr);
      combo.overrides.push_back("pref_lr=" + std::string(lr_buf));
      combo.output_dir = (fs::path(opts.base.output_dir) /
                          ("tau" + std::to_string(period) + "_lam" + std::string(lr_buf)))
                             .string();
      std::cout << "sweep cell: tau_eta=" << period << " lambda_eta=" << lr_buf << "\n";
      const int status = cmd_train(combo);
      if (status != kExitOk) return status;
    }
  return kExitOk;
}

}  // namespace pgdqn::cli
