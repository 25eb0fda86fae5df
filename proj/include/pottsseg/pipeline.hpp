#pragma once

// End-to-end segmentation: deduplicate -> downsample -> mean edge -> graph ->
// Potts minimization -> labels carried back to every input row.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pottsseg/dataset.hpp"
#include "pottsseg/downsample.hpp"
#include "pottsseg/eval.hpp"
#include "pottsseg/graph.hpp"
#include "pottsseg/potts.hpp"

namespace pottsseg {

struct PipelineConfig {
  DownsampleConfig downsample;
  std::size_t mean_edge_cap = 5000;
  PottsConfig potts;
  std::vector<double> gamma_grid;  // empty: solve at potts.gamma only
};

struct StageTimings {
  double dedup = 0.0;
  double downsample = 0.0;
  double mean_edge = 0.0;
  double graph = 0.0;
  double potts = 0.0;
  double upsample = 0.0;
};

struct PipelineResult {
  std::size_t distinct_rows = 0;    // M'
  DownsampleResult downsampled;     // D~ -> D~'
  ReductionMap composed;            // D -> D~'
  double e_bar = 0.0;
  FeatureGraph graph;
  Solution solution;
  std::optional<GammaSweepResult> sweep;
  LabelVector labels;               // one per input row
  StageTimings timings;
};

PipelineResult run_pipeline(const FeatureMatrix& data, const PipelineConfig& cfg);

/// Replaces every source row by the reduced row it maps to.
FeatureMatrix reconstruct(const FeatureMatrix& reduced, const ReductionMap& composed);

/// Runs every (gamma, nodes, seed) combination against known labels. Each
/// seed drives both the mean-edge sample and the Potts restarts.
std::vector<SweepCell> run_sweep(const FeatureMatrix& data, std::span<const Label> truth,
                                 std::span<const double> gammas, std::span<const std::size_t> node_counts,
                                 std::span<const std::uint64_t> seeds, const PipelineConfig& base);

}  // namespace pottsseg
