// uavho: scenario generation, training, weight averaging, fine-tuning,
// evaluation, threshold sweeps and handover comparisons.
//
// Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uavho/eval.hpp"
#include "uavho/io.hpp"

namespace fs = std::filesystem;
using namespace uavho;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  int jobs = 1;
  int verbose = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Run configuration (JSON)");
  cmd->add_option("--seed", c.seed, "Root seed (overrides the config)");
  cmd->add_option("--out", c.out, "Output directory");
  cmd->add_option("--jobs", c.jobs, "Parallel workers")->check(CLI::PositiveNumber);
  cmd->add_flag("-v,--verbose", c.verbose, "More progress output; repeat for per-step traces");
}

RunConfig load_run_config(const Common& c) {
  return c.config.empty() ? RunConfig{} : load_config(c.config);
}

/// Scenario directory layout written by `scenario`.
struct ScenarioDir {
  fs::path root;
  fs::path scenario_file() const { return root / "scenario.json"; }
  fs::path paths_dir() const { return root / "paths"; }
};

Scenario load_scenario(const ScenarioDir& dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(dir.scenario_file()));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(dir.scenario_file().string() + ": " + e.what());
  }
  return scenario_from_json(doc);
}

std::vector<FlightPath> load_paths(const ScenarioDir& dir, const Scenario& scenario,
                                   const std::vector<int>& ids) {
  std::vector<FlightPath> paths;
  for (int id : ids) {
    FlightPath p = load_path(dir.paths_dir(), id);
    try {
      p.validate(scenario);
    } catch (const std::exception& e) {
      throw ConfigError(path_file(dir.paths_dir(), id).string() + ": " + e.what());
    }
    paths.push_back(std::move(p));
  }
  return paths;
}

std::vector<int> all_path_ids(const RunConfig& cfg) {
  std::vector<int> ids;
  for (int i = 1; i <= cfg.experiment.path_count; ++i) ids.push_back(i);
  return ids;
}

std::string two_digits(int v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", v);
  return buf;
}

/// Replaces "{path}" with the two-digit path id.
fs::path expand_template(const std::string& tmpl, int path_id) {
  std::string s = tmpl;
  for (auto pos = s.find("{path}"); pos != std::string::npos; pos = s.find("{path}"))
    s.replace(pos, 6, two_digits(path_id));
  return s;
}

bool is_agent(const std::string& name) { return name == "ddqn" || name == "dqn"; }

/// Agent policies need weights; the template may differ per path.
NamedPolicy make_named_policy(const std::string& method, const std::string& weights,
                              const RunConfig& cfg, const std::vector<FlightPath>& paths) {
  if (!is_agent(method)) {
    if (!weights.empty())
      throw UsageError("policy '" + method + "' does not take weights");
    make_baseline(method, cfg.baselines);  // rejects unknown names up front
    const BaselineConfig bc = cfg.baselines;
    return {method, [method, bc](const FlightPath&) { return make_baseline(method, bc); }};
  }
  if (weights.empty()) throw UsageError("policy '" + method + "' requires --weights");
  auto nets = std::make_shared<std::map<int, std::shared_ptr<const QNetwork>>>();
  std::map<fs::path, std::shared_ptr<const QNetwork>> by_file;
  for (const auto& p : paths) {
    const fs::path file = expand_template(weights, p.id);
    auto it = by_file.find(file);
    if (it == by_file.end()) {
      WeightDocument doc = load_weights(file);
      if (doc.net.spec.input_size() != kStateSize || doc.net.spec.output_size() != kActionCount)
        throw ConfigError(file.string() + ": network shape does not match the environment");
      it = by_file.emplace(file, std::make_shared<const QNetwork>(std::move(doc.net))).first;
    }
    (*nets)[p.id] = it->second;
  }
  return {method, [method, nets](const FlightPath& path) -> std::unique_ptr<Policy> {
            return std::make_unique<AgentPolicy>(method, nets->at(path.id));
          }};
}

// ---------------------------------------------------------------- scenario

int cmd_scenario(const Common& c) {
  RunConfig cfg = load_run_config(c);
  const std::uint64_t seed = c.seed.value_or(cfg.experiment.seed);
  const ScenarioDir dir{c.out};
  const auto paths = generate_paths(cfg.scenario, cfg.experiment.path_count, seed);
  write_text(dir.scenario_file(), scenario_to_json(cfg.scenario).dump(2) + "\n");
  for (const auto& p : paths) {
    std::ostringstream os;
    write_path_csv(os, p);
    write_text(path_file(dir.paths_dir(), p.id), os.str());
  }
  std::cout << "base stations: " << cfg.scenario.bs_count() << "\n"
            << "area: " << cfg.scenario.area_l_m << " x " << cfg.scenario.area_w_m << " m\n"
            << "paths: " << paths.size() << "\n";
  for (const auto& p : paths)
    std::cout << "  path " << two_digits(p.id) << ": " << p.length() << " points\n";
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string scenario_dir;
  std::string agent = "ddqn";
  std::vector<int> path_ids;
  std::optional<int> episodes;
};

std::string model_stem(const std::string& agent, int path_id) {
  return agent + "_path_" + two_digits(path_id);
}

int cmd_train(const Common& c, const TrainArgs& a) {
  RunConfig cfg = load_run_config(c);
  cfg.agent.algorithm = algorithm_from_string(a.agent);
  const std::uint64_t seed = c.seed.value_or(cfg.experiment.seed);
  const int episodes = a.episodes.value_or(cfg.experiment.train_episodes);
  if (episodes < 1) throw UsageError("--episodes must be >= 1");
  const ScenarioDir dir{a.scenario_dir};
  const Scenario scenario = load_scenario(dir);
  const std::vector<int> ids = a.path_ids.empty() ? cfg.experiment.train_path_ids : a.path_ids;
  const auto paths = load_paths(dir, scenario, ids);

  std::vector<TrainResult> results(paths.size(), TrainResult{QNetwork{}, {}});
  parallel_for(paths.size(), c.jobs, [&](std::size_t i) {
    TrainOptions opts;
    if (c.verbose > 0) {
      const int id = paths[i].id;
      opts.hooks.on_episode = [id](const EpisodeRecord& r) {
        std::fprintf(stderr, "path %02d episode %d reward %.3f handovers %d outages %d\n", id,
                     r.episode, r.reward, r.handovers, r.outages);
      };
    }
    results[i] = train(scenario, paths[i], cfg.agent, seed, episodes, opts);
  });

  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::string stem = model_stem(a.agent, paths[i].id);
    nlohmann::json meta = {{"algorithm", a.agent},
                           {"path_id", paths[i].id},
                           {"seed", seed},
                           {"episodes", episodes}};
    write_text(fs::path(c.out) / (stem + ".weights.json"), serialize(results[i].net, meta));
    std::ostringstream os;
    write_train_report(os, results[i].report);
    write_text(fs::path(c.out) / (stem + "_report.csv"), os.str());
    const auto& last = results[i].report.episodes.back();
    std::cout << stem << ": final episode reward " << format_double(last.reward)
              << ", handovers " << last.handovers << ", outages " << last.outages << "\n";
  }
  return 0;
}

// --------------------------------------------------------------- aggregate

std::vector<ModelEntry> load_models(const std::vector<std::string>& files) {
  std::vector<ModelEntry> models;
  for (const auto& f : files) {
    std::string label = fs::path(f).filename().string();
    if (auto pos = label.find(".weights.json"); pos != std::string::npos) label.resize(pos);
    models.push_back({label, load_weights(f).net});
  }
  return models;
}

int cmd_aggregate(const Common& c, const std::vector<std::string>& model_files) {
  const auto models = load_models(model_files);
  std::vector<QNetwork> nets;
  for (const auto& m : models) nets.push_back(m.net);
  QNetwork global;
  try {
    global = average_weights(nets);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  nlohmann::json meta = {{"averaged_from", nlohmann::json::array()}};
  for (const auto& m : models) meta["averaged_from"].push_back(m.label);
  write_text(fs::path(c.out) / "global.weights.json", serialize(global, meta));
  std::ostringstream os;
  write_similarity(os, similarity_report({"global", global}, models, "pre"));
  write_text(fs::path(c.out) / "similarity_pre.csv", os.str());
  std::cout << "averaged " << models.size() << " models into "
            << (fs::path(c.out) / "global.weights.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- finetune

struct FinetuneArgs {
  std::string scenario_dir;
  std::string global;
  std::optional<int> path_id;
  std::optional<std::size_t> freeze;
  std::optional<double> alpha_fine;
  std::optional<int> episodes;
  std::vector<std::string> models;
};

int cmd_finetune(const Common& c, const FinetuneArgs& a) {
  RunConfig cfg = load_run_config(c);
  FinetuneConfig ft = cfg.finetune;
  if (a.freeze) ft.freeze_layers = *a.freeze;
  if (a.alpha_fine) ft.alpha_fine = *a.alpha_fine;
  const std::uint64_t seed = c.seed.value_or(cfg.experiment.seed);
  const int episodes = a.episodes.value_or(cfg.experiment.train_episodes);
  const int path_id = a.path_id.value_or(cfg.experiment.holdout_path_id);
  if (episodes < 1) throw UsageError("--episodes must be >= 1");

  const WeightDocument global = load_weights(a.global);
  if (ft.freeze_layers >= global.net.layers.size())
    throw UsageError("--freeze must be below the weight layer count (" +
                     std::to_string(global.net.layers.size()) + ")");
  if (!(ft.alpha_fine >= 0.0)) throw UsageError("--alpha-fine must be >= 0");
  cfg.agent.network = global.net.spec;

  const ScenarioDir dir{a.scenario_dir};
  const Scenario scenario = load_scenario(dir);
  const auto paths = load_paths(dir, scenario, {path_id});
  const TrainResult res =
      finetune(global.net, scenario, paths.front(), ft, cfg.agent, seed, episodes);

  nlohmann::json meta = {{"algorithm", std::string(to_string(cfg.agent.algorithm))},
                         {"path_id", path_id},
                         {"seed", seed},
                         {"episodes", episodes},
                         {"freeze_layers", ft.freeze_layers},
                         {"alpha_fine", ft.alpha_fine}};
  write_text(fs::path(c.out) / "finetuned.weights.json", serialize(res.net, meta));
  std::ostringstream report;
  write_train_report(report, res.report);
  write_text(fs::path(c.out) / "finetune_report.csv", report.str());
  if (!a.models.empty()) {
    std::ostringstream os;
    write_similarity(os, similarity_report({"finetuned", res.net}, load_models(a.models),
                                           "post", false));
    write_text(fs::path(c.out) / "similarity_post.csv", os.str());
  }
  std::cout << "fine-tuned on path " << two_digits(path_id) << " for " << episodes
            << " episodes; final reward " << format_double(res.report.episodes.back().reward)
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvalArgs {
  std::string scenario_dir;
  std::string policy;
  std::string weights;
  std::string label;
  std::vector<int> path_ids;
  std::optional<int> episodes;
  std::string format = "csv";
};

void print_aggregate(const AggregateMetrics& a) {
  std::ostringstream os;
  write_aggregate(os, {a});
  std::string text = os.str();
  std::cout << text.substr(text.find('\n') + 1);
}

void dump_traces(const fs::path& dir, const NamedPolicy& np, const Scenario& scenario,
                 const std::vector<FlightPath>& paths, int episodes, std::uint64_t seed) {
  for (const auto& p : paths)
    for (int e = 0; e < episodes; ++e) {
      EpisodeTrace tr;
      auto pol = np.factory(p);
      run_episode(*pol, scenario, p, e, episode_seed(seed, p.id, e), &tr);
      std::ostringstream os;
      os << "step,serving_bs,serving_sinr_db,handover,outage,reward\n";
      for (std::size_t t = 0; t < tr.serving.size(); ++t)
        os << t + 1 << ',' << tr.serving[t] << ',' << format_double(tr.serving_sinr_db[t])
           << ',' << tr.handover[t] << ',' << tr.outage[t] << ','
           << format_double(tr.reward[t]) << '\n';
      write_text(dir / (np.method + "_path_" + two_digits(p.id) + "_ep_" +
                        std::to_string(e) + ".csv"),
                 os.str());
    }
}

int cmd_evaluate(const Common& c, const EvalArgs& a) {
  RunConfig cfg = load_run_config(c);
  const std::uint64_t seed = c.seed.value_or(cfg.experiment.eval_seed);
  const int episodes = a.episodes.value_or(cfg.experiment.eval_episodes);
  if (episodes < 2) throw UsageError("--episodes must be >= 2");
  if (a.format != "csv" && a.format != "json") throw UsageError("--format must be csv or json");
  const ScenarioDir dir{a.scenario_dir};
  const Scenario scenario = load_scenario(dir);
  const auto paths = load_paths(dir, scenario, a.path_ids.empty() ? all_path_ids(cfg) : a.path_ids);
  NamedPolicy np = make_named_policy(a.policy, a.weights, cfg, paths);
  if (!a.label.empty()) np.method = a.label;

  const Evaluation ev = evaluate(np, scenario, paths, episodes, seed, c.jobs);
  std::ostringstream eps;
  write_episodes(eps, ev.episodes);
  write_text(fs::path(c.out) / (np.method + "_episodes.csv"), eps.str());
  std::ostringstream agg;
  const bool json = a.format == "json";
  write_aggregate(agg, {ev.aggregate}, json ? ExportFormat::Json : ExportFormat::Csv);
  write_text(fs::path(c.out) / (np.method + (json ? "_aggregate.json" : "_aggregate.csv")),
             agg.str());
  if (c.verbose > 1) dump_traces(fs::path(c.out) / "traces", np, scenario, paths, episodes, seed);
  print_aggregate(ev.aggregate);
  return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  std::string scenario_dir;
  std::vector<std::string> policies;
  std::vector<double> thresholds;
  std::vector<int> path_ids;
  std::optional<int> episodes;
};

int cmd_sweep(const Common& c, const SweepArgs& a) {
  if (a.policies.empty()) throw UsageError("--policies must name at least one policy");
  RunConfig cfg = load_run_config(c);
  const std::uint64_t seed = c.seed.value_or(cfg.experiment.eval_seed);
  const int episodes = a.episodes.value_or(cfg.experiment.eval_episodes);
  if (episodes < 1) throw UsageError("--episodes must be >= 1");
  const auto thresholds = a.thresholds.empty() ? default_sweep_thresholds() : a.thresholds;
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i] > thresholds[i - 1]))
      throw UsageError("--thresholds must be strictly increasing");
  const ScenarioDir dir{a.scenario_dir};
  const Scenario scenario = load_scenario(dir);
  const auto paths = load_paths(dir, scenario, a.path_ids.empty() ? all_path_ids(cfg) : a.path_ids);

  std::vector<NamedPolicy> policies;
  for (const auto& entry : a.policies) {
    const auto eq = entry.find('=');
    const std::string name = entry.substr(0, eq);
    const std::string weights = eq == std::string::npos ? "" : entry.substr(eq + 1);
    policies.push_back(make_named_policy(name, weights, cfg, paths));
  }
  const SweepResult res =
      threshold_sweep(policies, scenario, paths, thresholds, episodes, seed, c.jobs);
  std::ostringstream os;
  write_sweep(os, res);
  write_text(fs::path(c.out) / "sweep.csv", os.str());
  std::cout << os.str();
  return 0;
}

// ----------------------------------------------------------------- compare

int cmd_compare(const Common& c, const std::vector<std::string>& inputs,
                const std::string& baseline) {
  std::vector<AggregateMetrics> rows;
  for (const auto& f : inputs) {
    std::istringstream is(read_text(f));
    try {
      for (auto& r : read_aggregate_csv(is)) rows.push_back(std::move(r));
    } catch (const std::runtime_error& e) {
      throw ConfigError(f + ": " + e.what());
    }
  }
  const AggregateMetrics* base = nullptr;
  for (const auto& r : rows)
    if (r.method == baseline) base = &r;
  if (!base) throw UsageError("baseline '" + baseline + "' not found in the inputs");

  std::ostringstream os;
  os << "method,ho_mean,outage_pct_mean,ho_reduction_pct_vs_" << baseline << '\n';
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%s,%.3f,%.3f,", r.method.c_str(), r.ho_mean,
                  r.outage_pct_mean);
    os << line;
    // the reduction is undefined when the baseline never hands over
    if (base->ho_mean > 0.0) {
      std::snprintf(line, sizeof line, "%.1f", handover_reduction_pct(r.ho_mean, base->ho_mean));
      os << line;
    } else {
      os << "n/a";
    }
    os << '\n';
  }
  if (c.out != ".") write_text(fs::path(c.out) / "compare.csv", os.str());
  std::cout << os.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV handover workbench"};
  app.require_subcommand(1);

  Common common;
  TrainArgs train_args;
  FinetuneArgs ft_args;
  EvalArgs eval_args;
  SweepArgs sweep_args;
  std::vector<std::string> model_files;
  std::vector<std::string> compare_inputs;
  std::string compare_baseline = "greedy";

  auto* scenario = app.add_subcommand("scenario", "Write the scenario document and flight paths");
  add_common(scenario, common);

  auto* train_cmd = app.add_subcommand("train", "Train one model per flight path");
  add_common(train_cmd, common);
  train_cmd->add_option("--scenario", train_args.scenario_dir, "Scenario directory")->required();
  train_cmd->add_option("--agent", train_args.agent, "ddqn or dqn")
      ->check(CLI::IsMember({"ddqn", "dqn"}));
  train_cmd->add_option("--path-id", train_args.path_ids, "Path ids (default: training split)");
  train_cmd->add_option("--episodes", train_args.episodes, "Training episodes per path");

  auto* agg = app.add_subcommand("aggregate", "Average model weights");
  add_common(agg, common);
  agg->add_option("--models", model_files, "Weight files")->required()->check(CLI::ExistingFile);

  auto* ft = app.add_subcommand("finetune", "Fine-tune a global model on a new path");
  add_common(ft, common);
  ft->add_option("--scenario", ft_args.scenario_dir, "Scenario directory")->required();
  ft->add_option("--global", ft_args.global, "Global weight file")->required();
  ft->add_option("--path-id", ft_args.path_id, "Path id (default: held-out path)");
  ft->add_option("--freeze", ft_args.freeze, "Leading weight layers to freeze");
  ft->add_option("--alpha-fine", ft_args.alpha_fine, "Fine-tuning learning rate");
  ft->add_option("--episodes", ft_args.episodes, "Fine-tuning episodes");
  ft->add_option("--models", ft_args.models, "Individual models for post-tuning similarity");

  auto* ev = app.add_subcommand("evaluate", "Evaluate one policy");
  add_common(ev, common);
  ev->add_option("--scenario", eval_args.scenario_dir, "Scenario directory")->required();
  ev->add_option("--policy", eval_args.policy, "ddqn, dqn, greedy, hysteresis, mop or keep")
      ->required();
  ev->add_option("--weights", eval_args.weights,
                 "Weight file; '{path}' expands to the two-digit path id");
  ev->add_option("--label", eval_args.label, "Method name in the outputs");
  ev->add_option("--paths", eval_args.path_ids, "Path ids (default: all)");
  ev->add_option("--episodes", eval_args.episodes, "Episodes per path");
  ev->add_option("--format", eval_args.format, "Aggregate format: csv or json");

  auto* sw = app.add_subcommand("sweep", "Outage versus SINR threshold");
  add_common(sw, common);
  sw->add_option("--scenario", sweep_args.scenario_dir, "Scenario directory")->required();
  sw->add_option("--policies", sweep_args.policies,
                 "Policies; agents as name=weights_template")
      ->delimiter(',')
      ->required();
  sw->add_option("--thresholds", sweep_args.thresholds, "Thresholds in dB")->delimiter(',');
  sw->add_option("--paths", sweep_args.path_ids, "Path ids (default: all)");
  sw->add_option("--episodes", sweep_args.episodes, "Episodes per path");

  auto* cmp = app.add_subcommand("compare", "Handover reduction against a baseline");
  add_common(cmp, common);
  cmp->add_option("--inputs", compare_inputs, "Aggregate CSV files")
      ->required()
      ->check(CLI::ExistingFile);
  cmp->add_option("--baseline", compare_baseline, "Baseline method");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*scenario) return cmd_scenario(common);
    if (*train_cmd) return cmd_train(common, train_args);
    if (*agg) return cmd_aggregate(common, model_files);
    if (*ft) return cmd_finetune(common, ft_args);
    if (*ev) return cmd_evaluate(common, eval_args);
    if (*sw) return cmd_sweep(common, sweep_args);
    if (*cmp) return cmd_compare(common, compare_inputs, compare_baseline);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const TrainingError& e) {
    std::cerr << "training failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
