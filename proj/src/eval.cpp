#include "uavho/eval.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "uavho/agent.hpp"

namespace uavho {

EpisodeMetrics run_episode(Policy& policy, const Scenario& scenario,
                           const FlightPath& path, int episode, std::uint64_t seed,
                           EpisodeTrace* trace) {
  policy.begin_episode(scenario, path);
  EnvState env = reset(scenario, path, seed);
  while (!env.done) {
    int target = 0;
    try {
      target = policy.decide(env, scenario, path);
    } catch (const std::exception& e) {
      throw std::runtime_error(policy.name() + " failed at step " +
                               std::to_string(env.step) + " of path " +
                               std::to_string(path.id) + ": " + e.what());
    }
    const StepOutcome out = apply_serving(env, target, scenario, path);
    if (trace) {
      trace->serving.push_back(out.serving_bs);
      trace->serving_sinr_db.push_back(out.serving_sinr_db);
      trace->handover.push_back(out.handover);
      trace->outage.push_back(out.outage);
      trace->reward.push_back(out.reward);
    }
  }
  EpisodeMetrics m;
  m.method = policy.name();
  m.path_id = path.id;
  m.episode = episode;
  m.seed = seed;
  m.handovers = env.handovers;
  m.outage_steps = env.outages;
  m.total_steps = static_cast<int>(env.step);
  m.outage_rate = static_cast<double>(m.outage_steps) / m.total_steps;
  m.cumulative_reward = env.cum_reward;
  return m;
}

AggregateMetrics aggregate(const std::string& method,
                           const std::vector<EpisodeMetrics>& episodes) {
  if (episodes.empty()) throw std::invalid_argument("no episodes to aggregate");
  AggregateMetrics a;
  a.method = method;
  a.episodes = static_cast<int>(episodes.size());
  const double n = static_cast<double>(episodes.size());
  std::vector<double> ho, pct;
  for (const auto& e : episodes) {
    ho.push_back(e.handovers);
    pct.push_back(100.0 * e.outage_rate);
  }
  auto mean = [n](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / n;
  };
  auto sq_dev = [](const std::vector<double>& v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
  };
  a.ho_mean = mean(ho);
  a.outage_pct_mean = mean(pct);
  const double ho_sq = sq_dev(ho, a.ho_mean);
  const double out_sq = sq_dev(pct, a.outage_pct_mean);
  a.ho_std = std::sqrt(ho_sq / n);
  a.outage_pct_std = std::sqrt(out_sq / n);
  return a;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

namespace {

struct EpisodeRun {
  EpisodeMetrics metrics;
  EpisodeTrace trace;
};

std::vector<EpisodeRun> run_all(const NamedPolicy& policy, const Scenario& scenario,
                                const std::vector<FlightPath>& paths,
                                int episodes_per_path, std::uint64_t base_seed, int jobs,
                                bool keep_trace) {
  if (paths.empty()) throw std::invalid_argument("no flight paths to evaluate");
  if (episodes_per_path < 1) throw std::invalid_argument("episodes per path must be >= 1");
  const std::size_t per = static_cast<std::size_t>(episodes_per_path);
  std::vector<EpisodeRun> runs(paths.size() * per);
  parallel_for(runs.size(), jobs, [&](std::size_t i) {
    const FlightPath& path = paths[i / per];
    const int ep = static_cast<int>(i % per);
    auto p = policy.factory(path);
    runs[i].metrics = run_episode(*p, scenario, path, ep,
                                  episode_seed(base_seed, path.id, ep),
                                  keep_trace ? &runs[i].trace : nullptr);
    runs[i].metrics.method = policy.method;
  });
  return runs;
}

}  // namespace

Evaluation evaluate(const NamedPolicy& policy, const Scenario& scenario,
                    const std::vector<FlightPath>& paths, int episodes_per_path,
                    std::uint64_t base_seed, int jobs) {
  if (episodes_per_path < 2) throw std::invalid_argument("evaluate needs >= 2 episodes per path");
  Evaluation ev;
  for (auto& r : run_all(policy, scenario, paths, episodes_per_path, base_seed, jobs, false))
    ev.episodes.push_back(std::move(r.metrics));
  ev.aggregate = aggregate(policy.method, ev.episodes);
  return ev;
}

SweepResult threshold_sweep(const std::vector<NamedPolicy>& policies,
                            const Scenario& scenario,
                            const std::vector<FlightPath>& paths,
                            const std::vector<double>& thresholds, int episodes_per_path,
                            std::uint64_t base_seed, int jobs) {
  if (thresholds.empty()) throw std::invalid_argument("sweep needs at least one threshold");
  if (policies.empty()) throw std::invalid_argument("sweep needs at least one policy");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i] > thresholds[i - 1]))
      throw std::invalid_argument("sweep thresholds must be strictly increasing");

  // rates[method][threshold]
  std::vector<std::vector<double>> rates(policies.size(),
                                         std::vector<double>(thresholds.size(), 0.0));
  for (std::size_t m = 0; m < policies.size(); ++m) {
    const auto runs =
        run_all(policies[m], scenario, paths, episodes_per_path, base_seed, jobs, true);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      double sum = 0.0;
      for (const auto& r : runs) {
        int outages = 0;
        for (double s : r.trace.serving_sinr_db)
          outages += channel::outage_indicator(s, thresholds[k]);
        sum += 100.0 * outages / static_cast<double>(r.trace.serving_sinr_db.size());
      }
      rates[m][k] = sum / static_cast<double>(runs.size());
    }
  }

  SweepResult out;
  for (std::size_t k = 0; k < thresholds.size(); ++k)
    for (std::size_t m = 0; m < policies.size(); ++m)
      out.rows.push_back({thresholds[k], policies[m].method, rates[m][k]});
  return out;
}

std::vector<double> default_sweep_thresholds() { return {-5.0, -2.5, 0.0, 2.5, 5.0, 7.5, 10.0}; }

double handover_reduction_pct(double method_ho_mean, double baseline_ho_mean) {
  if (!(baseline_ho_mean > 0.0))
    throw std::invalid_argument("baseline mean handovers must be > 0");
  return 100.0 * (1.0 - method_ho_mean / baseline_ho_mean);
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  std::string s = os.str();
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_episodes(std::ostream& os, const std::vector<EpisodeMetrics>& rows) {
  os << kEpisodesCsvHeader << '\n';
  for (const auto& r : rows)
    os << r.method << ',' << r.path_id << ',' << r.episode << ',' << r.seed << ','
       << r.handovers << ',' << r.outage_steps << ',' << r.total_steps << ','
       << fixed(r.outage_rate, 8) << ',' << fixed(r.cumulative_reward, 6) << '\n';
}

void write_aggregate(std::ostream& os, const std::vector<AggregateMetrics>& rows,
                     ExportFormat format) {
  if (format == ExportFormat::Json) {
    nlohmann::ordered_json doc;
    doc["std_kind"] = "population";
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows)
      doc["rows"].push_back({{"method", r.method},
                             {"ho_mean", r.ho_mean},
                             {"ho_std", r.ho_std},
                             {"outage_pct_mean", r.outage_pct_mean},
                             {"outage_pct_std", r.outage_pct_std},
                             {"episodes", r.episodes}});
    os << doc.dump(2) << '\n';
    return;
  }
  os << kAggregateCsvHeader << '\n';
  for (const auto& r : rows)
    os << r.method << ',' << fixed(r.ho_mean, 3) << ',' << fixed(r.ho_std, 3) << ','
       << fixed(r.outage_pct_mean, 3) << ',' << fixed(r.outage_pct_std, 3) << ','
       << r.episodes << '\n';
}

void write_sweep(std::ostream& os, const SweepResult& sweep) {
  os << kSweepCsvHeader << '\n';
  for (const auto& r : sweep.rows)
    os << fixed(r.gamma_th_db, 2) << ',' << r.method << ',' << fixed(r.outage_pct_mean, 3)
       << '\n';
}

std::vector<AggregateMetrics> read_aggregate_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kAggregateCsvHeader)
    throw std::runtime_error("aggregate CSV header mismatch; expected '" +
                             std::string(kAggregateCsvHeader) + "'");
  std::vector<AggregateMetrics> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 6)
      throw std::runtime_error("aggregate CSV line " + std::to_string(lineno) +
                               ": expected 6 fields");
    try {
      rows.push_back({cells[0], std::stod(cells[1]), std::stod(cells[2]),
                      std::stod(cells[3]), std::stod(cells[4]), std::stoi(cells[5])});
    } catch (const std::logic_error&) {
      throw std::runtime_error("aggregate CSV line " + std::to_string(lineno) +
                               ": malformed number");
    }
  }
  return rows;
}

}  // namespace uavho
