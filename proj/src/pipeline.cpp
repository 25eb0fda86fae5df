#include "pottsseg/pipeline.hpp"

#include <chrono>

#include "pottsseg/errors.hpp"

namespace pottsseg {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double mean_edge_or_zero(const FeatureMatrix& data, std::size_t cap, std::uint64_t seed) {
  return data.rows() < 2 ? 0.0 : estimate_mean_edge(data, cap, seed);
}

}  // namespace

FeatureMatrix reconstruct(const FeatureMatrix& reduced, const ReductionMap& composed) {
  if (composed.reduced_count() != reduced.rows()) throw InvalidInput("map does not target the reduced matrix");
  std::vector<Feature> values;
  values.reserve(composed.source_count() * reduced.cols());
  for (std::size_t i = 0; i < composed.source_count(); ++i) {
    const auto r = reduced.row(composed[i]);
    values.insert(values.end(), r.begin(), r.end());
  }
  return FeatureMatrix(composed.source_count(), reduced.cols(), std::move(values));
}

PipelineResult run_pipeline(const FeatureMatrix& data, const PipelineConfig& cfg) {
  PipelineResult out;

  auto t = Clock::now();
  Deduplicated dedup = deduplicate(data);
  out.distinct_rows = dedup.distinct.rows();
  out.timings.dedup = seconds_since(t);

  t = Clock::now();
  out.downsampled = downsample(dedup.distinct, cfg.downsample);
  out.composed = dedup.map.then(out.downsampled.map);
  out.timings.downsample = seconds_since(t);

  t = Clock::now();
  out.e_bar = mean_edge_or_zero(data, cfg.mean_edge_cap, cfg.potts.seed);
  out.timings.mean_edge = seconds_since(t);

  t = Clock::now();
  out.graph = FeatureGraph::from_features(out.downsampled.reduced, out.e_bar);
  out.timings.graph = seconds_since(t);

  t = Clock::now();
  if (cfg.gamma_grid.empty()) {
    out.solution = best_of_restarts(out.graph, cfg.potts);
  } else {
    out.sweep = gamma_sweep(out.graph, cfg.gamma_grid, cfg.potts);
    out.solution = out.sweep->solutions[out.sweep->selected];
  }
  out.timings.potts = seconds_since(t);

  t = Clock::now();
  out.labels = upsample_labels(out.solution.partition.assignment, out.composed);
  out.timings.upsample = seconds_since(t);
  if (out.labels.size() != data.rows()) throw InvariantViolation("up-sampled labels do not cover every input row");
  return out;
}

std::vector<SweepCell> run_sweep(const FeatureMatrix& data, std::span<const Label> truth,
                                 std::span<const double> gammas, std::span<const std::size_t> node_counts,
                                 std::span<const std::uint64_t> seeds, const PipelineConfig& base) {
  if (truth.size() != data.rows()) throw InvalidInput("ground truth length does not match the data");
  const Deduplicated dedup = deduplicate(data);
  std::vector<SweepCell> cells;
  for (std::size_t nodes : node_counts) {
    DownsampleConfig dcfg = base.downsample;
    dcfg.target = nodes;
    const DownsampleResult down = downsample(dedup.distinct, dcfg);
    const ReductionMap composed = dedup.map.then(down.map);
    for (std::uint64_t seed : seeds) {
      const FeatureGraph graph =
          FeatureGraph::from_features(down.reduced, mean_edge_or_zero(data, base.mean_edge_cap, seed));
      for (double gamma : gammas) {
        PottsConfig pcfg = base.potts;
        pcfg.gamma = gamma;
        pcfg.seed = seed;
        const auto start = Clock::now();
        const Solution sol = best_of_restarts(graph, pcfg);
        const double took = seconds_since(start);
        const LabelVector labels = upsample_labels(sol.partition.assignment, composed);
        cells.push_back({gamma, nodes, seed, nmi(labels, truth), sol.partition.segment_count, sol.energy, took});
      }
    }
  }
  return cells;
}

}  // namespace pottsseg
