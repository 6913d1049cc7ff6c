// Python bindings. Scenarios, run configurations and weights cross the
// boundary as JSON text in the same formats the CLI reads and writes; flight
// paths are (N, 3) float arrays.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "uavho/eval.hpp"
#include "uavho/io.hpp"

namespace py = pybind11;
using namespace uavho;

namespace {

Scenario scenario_arg(const std::optional<std::string>& json_text) {
  if (!json_text) return default_scenario();
  return scenario_from_json(nlohmann::json::parse(*json_text));
}

RunConfig config_arg(const std::optional<std::string>& json_text) {
  if (!json_text) return RunConfig{};
  return config_from_json(nlohmann::json::parse(*json_text));
}

py::array_t<double> points_array(const FlightPath& path) {
  py::array_t<double> out({static_cast<py::ssize_t>(path.length()), py::ssize_t{3}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < path.length(); ++i) {
    v(i, 0) = path.points[i].x;
    v(i, 1) = path.points[i].y;
    v(i, 2) = path.points[i].z;
  }
  return out;
}

FlightPath path_from_array(int id, const py::array_t<double, py::array::c_style>& pts) {
  if (pts.ndim() != 2 || pts.shape(1) != 3)
    throw std::invalid_argument("points must have shape (N, 3)");
  FlightPath p;
  p.id = id;
  auto v = pts.unchecked<2>();
  for (py::ssize_t i = 0; i < v.shape(0); ++i) p.points.push_back({v(i, 0), v(i, 1), v(i, 2)});
  return p;
}

py::list report_rows(const TrainReport& report) {
  py::list rows;
  for (const auto& r : report.episodes) {
    py::dict d;
    d["episode"] = r.episode;
    d["reward"] = r.reward;
    d["handovers"] = r.handovers;
    d["outages"] = r.outages;
    d["steps"] = r.steps;
    d["epsilon"] = r.epsilon;
    d["mean_loss"] = r.mean_loss;
    rows.append(d);
  }
  return rows;
}

py::dict aggregate_dict(const AggregateMetrics& a) {
  py::dict d;
  d["method"] = a.method;
  d["ho_mean"] = a.ho_mean;
  d["ho_std"] = a.ho_std;
  d["outage_pct_mean"] = a.outage_pct_mean;
  d["outage_pct_std"] = a.outage_pct_std;
  d["episodes"] = a.episodes;
  return d;
}

NamedPolicy policy_arg(const std::string& name, const std::optional<std::string>& weights,
                       const BaselineConfig& bc) {
  if (name == "ddqn" || name == "dqn") {
    if (!weights) throw std::invalid_argument("policy '" + name + "' needs weights");
    auto net = std::make_shared<const QNetwork>(deserialize(*weights).net);
    return {name, [name, net](const FlightPath&) -> std::unique_ptr<Policy> {
              return std::make_unique<AgentPolicy>(name, net);
            }};
  }
  if (weights) throw std::invalid_argument("policy '" + name + "' takes no weights");
  make_baseline(name, bc);  // rejects unknown names up front
  return {name, [name, bc](const FlightPath&) { return make_baseline(name, bc); }};
}

/// Step-by-step episode driver over one path.
class Environment {
 public:
  Environment(py::array_t<double, py::array::c_style> points,
              const std::optional<std::string>& scenario_json, int path_id)
      : scenario_(scenario_arg(scenario_json)), path_(path_from_array(path_id, points)) {
    scenario_.validate();
    path_.validate(scenario_);
  }

  StateVector reset(std::uint64_t seed) {
    state_ = uavho::reset(scenario_, path_, seed);
    started_ = true;
    return observe(state_, scenario_, path_);
  }

  py::dict step(int action) {
    if (!started_) throw std::logic_error("call reset() before step()");
    const StepOutcome o = apply_action(state_, action, scenario_, path_);
    py::dict d;
    d["state"] = o.next_state;
    d["reward"] = o.reward;
    d["outage"] = o.outage;
    d["handover"] = o.handover;
    d["done"] = o.done;
    d["serving_bs"] = o.serving_bs;
    d["serving_sinr_db"] = o.serving_sinr_db;
    return d;
  }

  int serving_bs() const { return state_.serving_bs; }
  std::vector<double> sinr_db() const { return state_.sinr_db; }

 private:
  Scenario scenario_;
  FlightPath path_;
  EnvState state_;
  bool started_ = false;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "UAV handover simulation, DQN/DDQN training and evaluation";

  m.def("default_scenario", [] { return scenario_to_json(default_scenario()).dump(2); },
        "Default scenario as JSON text.");
  m.def("default_config", [] { return config_to_json(RunConfig{}).dump(2); },
        "Default run configuration as JSON text.");
  m.def(
      "validate_config",
      [](const std::string& text) { config_arg(text); },
      py::arg("config_json"), "Raises ValueError naming the first invalid field.");

  m.def(
      "link_budget",
      [](double d2d_m, double h_ut_m, double h_bs_m, double f_ghz) {
        const double dz = h_ut_m - h_bs_m;
        const channel::LinkGeometry g{d2d_m, std::sqrt(d2d_m * d2d_m + dz * dz), h_ut_m, h_bs_m};
        g.validate();
        channel::ChannelParams params;
        params.carrier_freq_ghz = f_ghz;
        Rng rng(0);
        py::dict d;
        d["p_los"] = channel::los_probability(g);
        d["pl_fs_db"] = channel::free_space_path_loss(g.d3d_m, f_ghz);
        d["pl_los_db"] = channel::path_loss_los(g, f_ghz);
        d["pl_nlos_db"] = channel::path_loss_nlos(g, f_ghz);
        d["pl_expected_db"] = channel::effective_path_loss(g, params, rng);
        return d;
      },
      py::arg("d2d_m"), py::arg("h_ut_m"), py::arg("h_bs_m"), py::arg("f_ghz") = 2.1,
      "Path-loss terms of one link under the aerial urban-macro model.");

  m.def(
      "expected_sinrs",
      [](double x, double y, double z, const std::optional<std::string>& scenario) {
        return expected_sinrs({x, y, z}, scenario_arg(scenario));
      },
      py::arg("x"), py::arg("y"), py::arg("z"), py::arg("scenario") = py::none(),
      "SINR in dB of every BS at one position, each evaluated as if serving.");

  m.def(
      "generate_paths",
      [](int count, std::uint64_t seed, const std::optional<std::string>& scenario) {
        py::list out;
        for (const auto& p : generate_paths(scenario_arg(scenario), count, seed))
          out.append(points_array(p));
        return out;
      },
      py::arg("count") = 10, py::arg("seed") = 1, py::arg("scenario") = py::none(),
      "Synthetic flight paths; element i has path id i + 1.");

  py::class_<Environment>(m, "Environment")
      .def(py::init<py::array_t<double, py::array::c_style>, const std::optional<std::string>&,
                    int>(),
           py::arg("points"), py::arg("scenario") = py::none(), py::arg("path_id") = 1)
      .def("reset", &Environment::reset, py::arg("seed") = 0)
      .def("step", &Environment::step, py::arg("action"))
      .def_property_readonly("serving_bs", &Environment::serving_bs)
      .def_property_readonly("sinr_db", &Environment::sinr_db);

  m.def(
      "train",
      [](py::array_t<double, py::array::c_style> points, int path_id, int episodes,
         std::uint64_t seed, const std::string& algorithm,
         const std::optional<std::string>& config,
         const std::optional<std::string>& initial_weights) {
        RunConfig cfg = config_arg(config);
        cfg.agent.algorithm = algorithm_from_string(algorithm);
        const FlightPath path = path_from_array(path_id, points);
        TrainOptions opts;
        if (initial_weights) opts.initial_net = deserialize(*initial_weights).net;
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(cfg.scenario, path, cfg.agent, seed, episodes, opts);
        }
        return py::make_tuple(serialize(r.net), report_rows(r.report));
      },
      py::arg("points"), py::arg("path_id") = 1, py::arg("episodes") = 500,
      py::arg("seed") = 1, py::arg("algorithm") = "ddqn", py::arg("config") = py::none(),
      py::arg("initial_weights") = py::none(),
      "Trains one agent on a path. Returns (weights_json, per-episode report rows).");

  m.def(
      "finetune",
      [](const std::string& global, py::array_t<double, py::array::c_style> points,
         int path_id, int episodes, std::uint64_t seed, const std::optional<std::string>& config) {
        const RunConfig cfg = config_arg(config);
        const QNetwork g = deserialize(global).net;
        const FlightPath path = path_from_array(path_id, points);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = finetune(g, cfg.scenario, path, cfg.finetune, cfg.agent, seed, episodes);
        }
        return py::make_tuple(serialize(r.net), report_rows(r.report));
      },
      py::arg("global_weights"), py::arg("points"), py::arg("path_id") = 1,
      py::arg("episodes") = 500, py::arg("seed") = 1, py::arg("config") = py::none(),
      "Fine-tunes a global model with the configured frozen layers and learning rate.");

  m.def(
      "average_weights",
      [](const std::vector<std::string>& models) {
        std::vector<QNetwork> nets;
        for (const auto& text : models) nets.push_back(deserialize(text).net);
        return serialize(average_weights(nets));
      },
      py::arg("models"), "Element-wise mean of weight documents.");

  m.def(
      "similarity",
      [](const std::string& a, const std::string& b) {
        const Similarity s = similarity(deserialize(a).net, deserialize(b).net);
        return py::make_tuple(s.cosine, s.euclidean);
      },
      py::arg("a"), py::arg("b"), "(cosine, euclidean) between two weight documents.");

  m.def(
      "evaluate",
      [](const std::string& policy, const std::vector<py::array_t<double, py::array::c_style>>& paths,
         int episodes, std::uint64_t seed, const std::optional<std::string>& weights,
         const std::optional<std::string>& config) {
        const RunConfig cfg = config_arg(config);
        std::vector<FlightPath> fps;
        for (std::size_t i = 0; i < paths.size(); ++i)
          fps.push_back(path_from_array(static_cast<int>(i) + 1, paths[i]));
        const NamedPolicy np = policy_arg(policy, weights, cfg.baselines);
        Evaluation ev;
        {
          py::gil_scoped_release release;
          ev = evaluate(np, cfg.scenario, fps, episodes, seed);
        }
        return aggregate_dict(ev.aggregate);
      },
      py::arg("policy"), py::arg("paths"), py::arg("episodes") = 20, py::arg("seed") = 1001,
      py::arg("weights") = py::none(), py::arg("config") = py::none(),
      "Aggregate handover and outage metrics of one policy over the given paths.");

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "WeightParseError", PyExc_ValueError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
}
