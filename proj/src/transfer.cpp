#include "uavho/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace uavho {

QNetwork average_weights(const std::vector<QNetwork>& models) {
  if (models.empty()) throw std::invalid_argument("cannot average an empty model set");
  const QNetwork& first = models.front();
  for (std::size_t i = 1; i < models.size(); ++i)
    if (!(models[i].spec == first.spec))
      throw std::invalid_argument("model " + std::to_string(i) +
                                  " has a different network shape");

  QNetwork out = first;
  const long double n = static_cast<long double>(models.size());
  std::vector<double> column(models.size());
  auto mean_of = [&](auto&& get) {
    for (std::size_t m = 0; m < models.size(); ++m) column[m] = get(models[m]);
    std::sort(column.begin(), column.end());
    long double sum = 0.0L;
    for (double v : column) sum += v;
    return static_cast<double>(sum / n);
  };
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    auto& W = out.layers[l].weights;
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c)
        W(r, c) = mean_of([&](const QNetwork& q) { return q.layers[l].weights(r, c); });
    auto& b = out.layers[l].bias;
    for (Eigen::Index r = 0; r < b.size(); ++r)
      b(r) = mean_of([&](const QNetwork& q) { return q.layers[l].bias(r); });
  }
  return out;
}

Similarity similarity(const QNetwork& a, const QNetwork& b) {
  if (!(a.spec == b.spec)) throw std::invalid_argument("similarity needs identical shapes");
  const std::vector<double> u = a.flatten();
  const std::vector<double> v = b.flatten();
  double dot = 0.0, nu = 0.0, nv = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
    diff += (u[i] - v[i]) * (u[i] - v[i]);
  }
  if (nu == 0.0 || nv == 0.0)
    throw std::domain_error("cosine similarity undefined for a zero parameter vector");
  const double cosine = std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
  return {cosine, std::sqrt(diff)};
}

SimilarityReport similarity_report(const ModelEntry& reference,
                                   const std::vector<ModelEntry>& models,
                                   const std::string& phase, bool include_pairs) {
  SimilarityReport report;
  for (const auto& m : models) {
    const Similarity s = similarity(reference.net, m.net);
    report.rows.push_back({reference.label, m.label, phase, s.cosine, s.euclidean});
  }
  if (include_pairs) {
    for (std::size_t i = 0; i < models.size(); ++i)
      for (std::size_t j = i + 1; j < models.size(); ++j) {
        const Similarity s = similarity(models[i].net, models[j].net);
        report.rows.push_back({models[i].label, models[j].label, phase, s.cosine, s.euclidean});
      }
  }
  return report;
}

void write_similarity(std::ostream& os, const SimilarityReport& report) {
  os << kSimilarityCsvHeader << '\n';
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::fixed << std::setprecision(9);
  for (const auto& r : report.rows)
    os << r.model_a << ',' << r.model_b << ',' << r.phase << ',' << r.cosine << ','
       << r.euclidean << '\n';
  os.flags(flags);
  os.precision(prec);
}

TrainResult finetune(const QNetwork& global, const Scenario& scenario,
                     const FlightPath& path, const FinetuneConfig& ft,
                     const AgentConfig& cfg, std::uint64_t seed, int episodes,
                     const TrainHooks& hooks) {
  const std::size_t layers = global.layers.size();
  if (ft.freeze_layers >= layers)
    throw std::invalid_argument("freeze_layers (" + std::to_string(ft.freeze_layers) +
                                ") must be below the weight layer count (" +
                                std::to_string(layers) + ")");
  if (!(ft.alpha_fine >= 0.0) || !std::isfinite(ft.alpha_fine))
    throw std::invalid_argument("alpha_fine must be finite and >= 0");
  if (!(global.spec == cfg.network))
    throw std::invalid_argument("global model shape does not match the agent network");

  AgentConfig fine = cfg;
  fine.learning_rate = ft.alpha_fine;
  fine.epsilon_start = ft.epsilon_start;
  TrainOptions options;
  options.initial_net = global;
  options.freeze = FreezeMask::freeze_first(layers, ft.freeze_layers);
  options.hooks = hooks;
  return train(scenario, path, fine, seed, episodes, options);
}

int episodes_to_reach(const TrainReport& report, double target, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  const auto& eps = report.episodes;
  double sum = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    sum += eps[i].reward;
    if (i >= static_cast<std::size_t>(window)) sum -= eps[i - window].reward;
    const std::size_t n = std::min<std::size_t>(i + 1, window);
    if (n == static_cast<std::size_t>(window) && sum / n >= target)
      return static_cast<int>(i + 1);
  }
  return 0;
}

double final_mean_reward(const TrainReport& report, int count) {
  const auto& eps = report.episodes;
  if (count < 1 || eps.size() < static_cast<std::size_t>(count))
    throw std::invalid_argument("report has fewer episodes than requested");
  double sum = 0.0;
  for (std::size_t i = eps.size() - count; i < eps.size(); ++i) sum += eps[i].reward;
  return sum / count;
}

}  // namespace uavho
