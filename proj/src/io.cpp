#include "uavho/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace uavho {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

/// Walks one JSON object, tracking consumed keys so leftovers can be reported.
class Section {
 public:
  Section(const json& doc, std::string where) : doc_(doc), where_(std::move(where)) {
    if (!doc_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": wrong type");
    }
  }

  template <typename T>
  void require(const char* key, T& out) {
    if (!doc_.contains(key)) throw ConfigError(field(key) + ": missing");
    get(key, out);
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  std::string field(const std::string& key) const {
    return where_.empty() ? key : where_ + "." + key;
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it)
      if (!seen_.contains(it.key())) throw ConfigError(field(it.key()) + ": unknown key");
  }

 private:
  const json& doc_;
  std::string where_;
  std::set<std::string> seen_;
};

template <typename F>
void checked(const std::string& where, F&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

ojson scenario_to_json(const Scenario& s) {
  ojson doc;
  doc["area"] = {{"l_m", s.area_l_m}, {"w_m", s.area_w_m}};
  doc["base_stations"] = ojson::array();
  for (const auto& b : s.base_stations)
    doc["base_stations"].push_back({{"id", b.id},
                                    {"x", b.x},
                                    {"y", b.y},
                                    {"h_bs_m", b.h_bs_m},
                                    {"tx_power_dbm", b.tx_power_dbm}});
  doc["channel"] = {{"carrier_freq_ghz", s.channel.carrier_freq_ghz},
                    {"noise_power_dbm", s.channel.noise_power_dbm},
                    {"sinr_threshold_db", s.channel.sinr_threshold_db},
                    {"mode", std::string(channel::to_string(s.channel.mode))}};
  doc["reward"] = {{"alpha_o", s.reward.alpha_o},
                   {"beta_h", s.reward.beta_h},
                   {"tau", s.reward.tau},
                   {"eta", s.reward.eta},
                   {"ho_margin_db", s.reward.ho_margin_db}};
  doc["uav"] = {{"speed_mps", s.uav.speed_mps},
                {"dt_s", s.uav.dt_s},
                {"max_altitude_m", s.uav.max_altitude_m}};
  return doc;
}

namespace {

void read_scenario_sections(Section& top, Scenario& s) {
  if (const json* area = top.child("area")) {
    Section sec(*area, "area");
    sec.get("l_m", s.area_l_m);
    sec.get("w_m", s.area_w_m);
    sec.finish();
  }
  if (const json* bss = top.child("base_stations")) {
    if (!bss->is_array()) throw ConfigError("base_stations: expected an array");
    s.base_stations.clear();
    for (std::size_t i = 0; i < bss->size(); ++i) {
      Section sec((*bss)[i], "base_stations[" + std::to_string(i) + "]");
      BaseStation b;
      sec.require("id", b.id);
      sec.require("x", b.x);
      sec.require("y", b.y);
      sec.require("h_bs_m", b.h_bs_m);
      sec.require("tx_power_dbm", b.tx_power_dbm);
      sec.finish();
      s.base_stations.push_back(b);
    }
  }
  if (const json* ch = top.child("channel")) {
    Section sec(*ch, "channel");
    sec.get("carrier_freq_ghz", s.channel.carrier_freq_ghz);
    sec.get("noise_power_dbm", s.channel.noise_power_dbm);
    sec.get("sinr_threshold_db", s.channel.sinr_threshold_db);
    std::string mode(channel::to_string(s.channel.mode));
    sec.get("mode", mode);
    checked("channel.mode", [&] { s.channel.mode = channel::channel_mode_from_string(mode); });
    sec.finish();
  }
  if (const json* r = top.child("reward")) {
    Section sec(*r, "reward");
    sec.get("alpha_o", s.reward.alpha_o);
    sec.get("beta_h", s.reward.beta_h);
    sec.get("tau", s.reward.tau);
    sec.get("eta", s.reward.eta);
    sec.get("ho_margin_db", s.reward.ho_margin_db);
    sec.finish();
  }
  if (const json* u = top.child("uav")) {
    Section sec(*u, "uav");
    sec.get("speed_mps", s.uav.speed_mps);
    sec.get("dt_s", s.uav.dt_s);
    sec.get("max_altitude_m", s.uav.max_altitude_m);
    sec.finish();
  }
}

void validate_scenario(const Scenario& s) {
  checked("scenario", [&] { s.validate(); });
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
  Scenario s = default_scenario();
  Section top(doc, "");
  read_scenario_sections(top, s);
  top.finish();
  validate_scenario(s);
  return s;
}

void RunConfig::validate() const {
  validate_scenario(scenario);
  checked("agent", [&] { agent.validate(); });
  checked("baselines", [&] { baselines.validate(); });
  const auto& e = experiment;
  if (e.path_count < 1) throw ConfigError("experiment.path_count: must be >= 1");
  for (int id : e.train_path_ids)
    if (id < 1 || id > e.path_count)
      throw ConfigError("experiment.train_path_ids: id " + std::to_string(id) +
                        " outside 1.." + std::to_string(e.path_count));
  if (e.holdout_path_id < 1 || e.holdout_path_id > e.path_count)
    throw ConfigError("experiment.holdout_path_id: outside 1.." + std::to_string(e.path_count));
  if (e.train_episodes < 1) throw ConfigError("experiment.train_episodes: must be >= 1");
  if (e.eval_episodes < 2) throw ConfigError("experiment.eval_episodes: must be >= 2");
  if (finetune.freeze_layers >= agent.network.weight_layers())
    throw ConfigError("finetune.freeze_layers: must be below the weight layer count");
  if (!(finetune.alpha_fine >= 0.0)) throw ConfigError("finetune.alpha_fine: must be >= 0");
  if (!(finetune.epsilon_start >= 0.0 && finetune.epsilon_start <= 1.0))
    throw ConfigError("finetune.epsilon_start: must be in [0, 1]");
}

ojson config_to_json(const RunConfig& cfg) {
  ojson doc = scenario_to_json(cfg.scenario);
  const AgentConfig& a = cfg.agent;
  doc["agent"] = {{"algorithm", std::string(to_string(a.algorithm))},
                  {"discount", a.discount},
                  {"epsilon_start", a.epsilon_start},
                  {"epsilon_min", a.epsilon_min},
                  {"epsilon_decay", a.epsilon_decay},
                  {"batch_size", a.batch_size},
                  {"target_sync_interval", a.target_sync_interval},
                  {"learning_rate", a.learning_rate},
                  {"buffer_capacity", a.buffer_capacity},
                  {"learning_starts", a.learning_starts},
                  {"layer_sizes", a.network.layer_sizes},
                  {"optimizer", a.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
                  {"clip_norm", a.clip_norm}};
  const BaselineConfig& b = cfg.baselines;
  doc["baselines"] = {{"greedy_margin_db", b.greedy_margin_db},
                      {"hysteresis_margin_db", b.hysteresis_margin_db},
                      {"ttt_steps", b.ttt_steps},
                      {"mop_horizon_steps", b.mop_horizon_steps}};
  doc["finetune"] = {{"freeze_layers", cfg.finetune.freeze_layers},
                     {"alpha_fine", cfg.finetune.alpha_fine},
                     {"epsilon_start", cfg.finetune.epsilon_start}};
  const ExperimentConfig& e = cfg.experiment;
  doc["experiment"] = {{"path_count", e.path_count},
                       {"train_path_ids", e.train_path_ids},
                       {"holdout_path_id", e.holdout_path_id},
                       {"train_episodes", e.train_episodes},
                       {"eval_episodes", e.eval_episodes},
                       {"seed", e.seed},
                       {"eval_seed", e.eval_seed},
                       {"output_dir", e.output_dir}};
  return doc;
}

RunConfig config_from_json(const json& doc) {
  RunConfig cfg;
  Section top(doc, "");
  read_scenario_sections(top, cfg.scenario);
  if (const json* a = top.child("agent")) {
    Section sec(*a, "agent");
    AgentConfig& ac = cfg.agent;
    std::string algorithm(to_string(ac.algorithm));
    sec.get("algorithm", algorithm);
    checked("agent.algorithm", [&] { ac.algorithm = algorithm_from_string(algorithm); });
    sec.get("discount", ac.discount);
    sec.get("epsilon_start", ac.epsilon_start);
    sec.get("epsilon_min", ac.epsilon_min);
    sec.get("epsilon_decay", ac.epsilon_decay);
    sec.get("batch_size", ac.batch_size);
    sec.get("target_sync_interval", ac.target_sync_interval);
    sec.get("learning_rate", ac.learning_rate);
    sec.get("buffer_capacity", ac.buffer_capacity);
    sec.get("learning_starts", ac.learning_starts);
    sec.get("layer_sizes", ac.network.layer_sizes);
    std::string opt = ac.optimizer == OptimizerKind::Adam ? "adam" : "sgd";
    sec.get("optimizer", opt);
    if (opt == "adam")
      ac.optimizer = OptimizerKind::Adam;
    else if (opt == "sgd")
      ac.optimizer = OptimizerKind::Sgd;
    else
      throw ConfigError("agent.optimizer: expected 'adam' or 'sgd'");
    sec.get("clip_norm", ac.clip_norm);
    sec.finish();
  }
  if (const json* b = top.child("baselines")) {
    Section sec(*b, "baselines");
    sec.get("greedy_margin_db", cfg.baselines.greedy_margin_db);
    sec.get("hysteresis_margin_db", cfg.baselines.hysteresis_margin_db);
    sec.get("ttt_steps", cfg.baselines.ttt_steps);
    sec.get("mop_horizon_steps", cfg.baselines.mop_horizon_steps);
    sec.finish();
  }
  if (const json* f = top.child("finetune")) {
    Section sec(*f, "finetune");
    sec.get("freeze_layers", cfg.finetune.freeze_layers);
    sec.get("alpha_fine", cfg.finetune.alpha_fine);
    sec.get("epsilon_start", cfg.finetune.epsilon_start);
    sec.finish();
  }
  if (const json* e = top.child("experiment")) {
    Section sec(*e, "experiment");
    ExperimentConfig& ec = cfg.experiment;
    sec.get("path_count", ec.path_count);
    sec.get("train_path_ids", ec.train_path_ids);
    sec.get("holdout_path_id", ec.holdout_path_id);
    sec.get("train_episodes", ec.train_episodes);
    sec.get("eval_episodes", ec.eval_episodes);
    sec.get("seed", ec.seed);
    sec.get("eval_seed", ec.eval_seed);
    sec.get("output_dir", ec.output_dir);
    sec.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  json doc;
  try {
    doc = json::parse(read_text(file));
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, end);
}

void write_path_csv(std::ostream& os, const FlightPath& path) {
  os << kPathCsvHeader << '\n';
  for (std::size_t i = 0; i < path.points.size(); ++i) {
    const Vec3& p = path.points[i];
    os << path.id << ',' << i << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
       << format_double(p.z) << '\n';
  }
}

namespace {

double parse_number(const std::string& cell, int line, const char* column) {
  double v = 0.0;
  auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || end != cell.data() + cell.size())
    throw ConfigError("line " + std::to_string(line) + ": bad " + column + " '" + cell + "'");
  return v;
}

}  // namespace

FlightPath read_path_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kPathCsvHeader)
    throw ConfigError(std::string("path CSV header must be '") + kPathCsvHeader + "'");
  FlightPath path;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 5)
      throw ConfigError("path CSV line " + std::to_string(lineno) + ": expected 5 fields");
    const int id = static_cast<int>(parse_number(cells[0], lineno, "path_id"));
    const auto step = static_cast<std::size_t>(parse_number(cells[1], lineno, "step"));
    if (path.points.empty()) path.id = id;
    if (id != path.id)
      throw ConfigError("path CSV line " + std::to_string(lineno) + ": mixed path ids");
    if (step != path.points.size())
      throw ConfigError("path CSV line " + std::to_string(lineno) + ": steps out of order");
    path.points.push_back({parse_number(cells[2], lineno, "x"),
                           parse_number(cells[3], lineno, "y"),
                           parse_number(cells[4], lineno, "z")});
  }
  return path;
}

std::filesystem::path path_file(const std::filesystem::path& dir, int path_id) {
  char name[32];
  std::snprintf(name, sizeof name, "path_%02d.csv", path_id);
  return dir / name;
}

FlightPath load_path(const std::filesystem::path& dir, int path_id) {
  const auto file = path_file(dir, path_id);
  std::istringstream is(read_text(file));
  FlightPath p = read_path_csv(is);
  if (p.id != path_id)
    throw ConfigError(file.string() + ": contains path " + std::to_string(p.id));
  return p;
}

void write_train_report(std::ostream& os, const TrainReport& report) {
  os << kTrainReportCsvHeader << '\n';
  for (const auto& e : report.episodes)
    os << e.episode << ',' << format_double(e.reward) << ',' << e.handovers << ','
       << e.outages << ',' << format_double(e.epsilon) << ',' << format_double(e.mean_loss)
       << '\n';
}

TrainReport read_train_report(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kTrainReportCsvHeader)
    throw ConfigError(std::string("train report header must be '") + kTrainReportCsvHeader + "'");
  TrainReport report;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() != 6)
      throw ConfigError("train report line " + std::to_string(lineno) + ": expected 6 fields");
    EpisodeRecord r;
    r.episode = static_cast<int>(parse_number(cells[0], lineno, "episode"));
    r.reward = parse_number(cells[1], lineno, "reward");
    r.handovers = static_cast<int>(parse_number(cells[2], lineno, "handovers"));
    r.outages = static_cast<int>(parse_number(cells[3], lineno, "outages"));
    r.epsilon = parse_number(cells[4], lineno, "epsilon");
    r.mean_loss = parse_number(cells[5], lineno, "mean_loss");
    report.episodes.push_back(r);
  }
  return report;
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

WeightDocument load_weights(const std::filesystem::path& file) {
  try {
    return deserialize(read_text(file));
  } catch (const ParseError& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

}  // namespace uavho
