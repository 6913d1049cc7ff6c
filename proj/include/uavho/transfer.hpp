#pragma once

// Weight averaging across per-path models, layer-frozen fine-tuning on a new
// path, and similarity diagnostics over flattened parameters.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "uavho/agent.hpp"

namespace uavho {

struct ModelEntry {
  std::string label;  // e.g. "path_03"
  QNetwork net;
};

/// Element-wise arithmetic mean. Per parameter the values are summed in
/// sorted order in extended precision, so the result is independent of the
/// model order and exact for identical inputs.
QNetwork average_weights(const std::vector<QNetwork>& models);

struct Similarity {
  double cosine = 0.0;
  double euclidean = 0.0;
};

Similarity similarity(const QNetwork& a, const QNetwork& b);

struct SimilarityRow {
  std::string model_a;
  std::string model_b;
  std::string phase;  // "pre" or "post"
  double cosine = 0.0;
  double euclidean = 0.0;
};

struct SimilarityReport {
  std::vector<SimilarityRow> rows;
};

inline constexpr const char* kSimilarityCsvHeader = "model_a,model_b,phase,cosine,euclidean";

/// `reference` against each model, then every unordered model pair.
SimilarityReport similarity_report(const ModelEntry& reference,
                                   const std::vector<ModelEntry>& models,
                                   const std::string& phase, bool include_pairs = true);

void write_similarity(std::ostream& os, const SimilarityReport& report);

struct FinetuneConfig {
  std::size_t freeze_layers = 2;
  double alpha_fine = 1e-4;
  double epsilon_start = 0.1;
};

/// Trains from `global` with the first `freeze_layers` weight layers fixed,
/// learning rate alpha_fine and a fresh optimizer.
TrainResult finetune(const QNetwork& global, const Scenario& scenario,
                     const FlightPath& path, const FinetuneConfig& ft,
                     const AgentConfig& cfg, std::uint64_t seed, int episodes,
                     const TrainHooks& hooks = {});

/// First episode (1-based count) at which the trailing `window`-episode mean
/// reward reaches `target`; 0 if never.
int episodes_to_reach(const TrainReport& report, double target, int window = 10);

/// Mean reward over the last `count` episodes.
double final_mean_reward(const TrainReport& report, int count);

}  // namespace uavho
