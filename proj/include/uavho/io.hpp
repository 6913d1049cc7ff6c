#pragma once

// Run configuration, scenario documents, flight-path CSVs and file helpers.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uavho/agent.hpp"
#include "uavho/baselines.hpp"
#include "uavho/transfer.hpp"

namespace uavho {

/// Invalid configuration or input document; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  int path_count = 10;
  std::vector<int> train_path_ids{1, 2, 3, 4, 5, 6, 7, 8, 9};
  int holdout_path_id = 10;
  int train_episodes = 500;
  int eval_episodes = 20;
  std::uint64_t seed = 1;
  std::uint64_t eval_seed = 1001;
  std::string output_dir = "runs";
};

struct RunConfig {
  Scenario scenario = default_scenario();
  AgentConfig agent;
  BaselineConfig baselines;
  FinetuneConfig finetune;
  ExperimentConfig experiment;

  void validate() const;
};

nlohmann::ordered_json scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& doc);

nlohmann::ordered_json config_to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& file);

inline constexpr const char* kPathCsvHeader = "path_id,step,x,y,z";
inline constexpr const char* kTrainReportCsvHeader =
    "episode,reward,handovers,outages,epsilon,mean_loss";

void write_path_csv(std::ostream& os, const FlightPath& path);
FlightPath read_path_csv(std::istream& is);
std::filesystem::path path_file(const std::filesystem::path& dir, int path_id);
FlightPath load_path(const std::filesystem::path& dir, int path_id);

void write_train_report(std::ostream& os, const TrainReport& report);
TrainReport read_train_report(std::istream& is);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

std::string read_text(const std::filesystem::path& file);
/// Creates parent directories; throws on I/O failure.
void write_text(const std::filesystem::path& file, const std::string& text);

WeightDocument load_weights(const std::filesystem::path& file);

}  // namespace uavho
