#pragma once

// Experiment harness: episodes, aggregates, SINR-threshold sweeps, and the
// CSV / JSON exports consumed by plotting scripts.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "uavho/baselines.hpp"

namespace uavho {

struct EpisodeMetrics {
  std::string method;
  int path_id = 0;
  int episode = 0;
  std::uint64_t seed = 0;
  int handovers = 0;
  int outage_steps = 0;
  int total_steps = 0;
  double outage_rate = 0.0;
  double cumulative_reward = 0.0;
};

struct EpisodeTrace {
  std::vector<int> serving;
  std::vector<double> serving_sinr_db;
  std::vector<int> handover;
  std::vector<int> outage;
  std::vector<double> reward;
};

/// Population statistics; outage figures are in percent.
struct AggregateMetrics {
  std::string method;
  double ho_mean = 0.0;
  double ho_std = 0.0;
  double outage_pct_mean = 0.0;
  double outage_pct_std = 0.0;
  int episodes = 0;
};

struct SweepRow {
  double gamma_th_db = 0.0;
  std::string method;
  double outage_pct_mean = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // grouped by threshold, methods in input order
};

/// Builds a fresh policy for one episode on `path`.
using PolicyFactory = std::function<std::unique_ptr<Policy>(const FlightPath& path)>;

struct NamedPolicy {
  std::string method;
  PolicyFactory factory;
};

EpisodeMetrics run_episode(Policy& policy, const Scenario& scenario,
                           const FlightPath& path, int episode, std::uint64_t seed,
                           EpisodeTrace* trace = nullptr);

AggregateMetrics aggregate(const std::string& method,
                           const std::vector<EpisodeMetrics>& episodes);

struct Evaluation {
  AggregateMetrics aggregate;
  std::vector<EpisodeMetrics> episodes;  // path-major, episode-minor
};

/// Episode e on path p uses episode_seed(base_seed, p.id, e), so results do
/// not depend on `jobs`.
Evaluation evaluate(const NamedPolicy& policy, const Scenario& scenario,
                    const std::vector<FlightPath>& paths, int episodes_per_path,
                    std::uint64_t base_seed, int jobs = 1);

/// Plays each episode once per method and re-scores the serving-SINR trace
/// against every threshold. Thresholds must be strictly increasing.
SweepResult threshold_sweep(const std::vector<NamedPolicy>& policies,
                            const Scenario& scenario,
                            const std::vector<FlightPath>& paths,
                            const std::vector<double>& thresholds, int episodes_per_path,
                            std::uint64_t base_seed, int jobs = 1);

std::vector<double> default_sweep_thresholds();

/// 100 * (1 - method / baseline) mean handovers.
double handover_reduction_pct(double method_ho_mean, double baseline_ho_mean);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first error.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

enum class ExportFormat { Csv, Json };

inline constexpr const char* kEpisodesCsvHeader =
    "method,path_id,episode,seed,handovers,outage_steps,total_steps,outage_rate,cum_reward";
inline constexpr const char* kAggregateCsvHeader =
    "method,ho_mean,ho_std,outage_pct_mean,outage_pct_std,episodes";
inline constexpr const char* kSweepCsvHeader = "gamma_th_db,method,outage_pct_mean";

void write_episodes(std::ostream& os, const std::vector<EpisodeMetrics>& rows);
void write_aggregate(std::ostream& os, const std::vector<AggregateMetrics>& rows,
                     ExportFormat format = ExportFormat::Csv);
void write_sweep(std::ostream& os, const SweepResult& sweep);

std::vector<AggregateMetrics> read_aggregate_csv(std::istream& is);

}  // namespace uavho
