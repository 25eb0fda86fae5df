#pragma once

// Potts model energy over partitions of a FeatureGraph and its minimization by
// node-to-segment moves.
//
// Same-segment pairs contribute (e_ij - e_bar) when the edge is shorter than
// the background mean and gamma * (e_ij - e_bar) when it is longer. Pairs in
// different segments contribute nothing.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pottsseg/dataset.hpp"
#include "pottsseg/graph.hpp"

namespace pottsseg {

/// Move target meaning "open a fresh singleton segment".
inline constexpr Label kNewSegment = std::numeric_limits<Label>::max();

struct Partition {
  LabelVector assignment;
  std::size_t segment_count = 0;

  /// Compacts the labels to 0..L-1 in order of first appearance.
  static Partition from_labels(LabelVector labels);
};

struct PottsConfig {
  double gamma = 1.0;
  std::size_t initial_segments = 0;  // 0 selects ceil(nodes / 10)
  std::size_t restarts = 5;
  std::size_t max_sweeps = 100;
  double move_tolerance = 1e-12;     // a move must lower H by more than this
  std::uint64_t seed = 0;
  bool stop_when_converged = true;   // false runs exactly max_sweeps (benchmarking)
  std::size_t threads = 1;           // workers for independent restarts
  LabelVector initial_assignment;    // optional fixed start; overrides random initialization
};

struct Solution {
  Partition partition;
  double energy = 0.0;
  std::size_t sweeps_used = 0;
  std::size_t accepted_moves = 0;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  bool converged = false;
};

/// Reported for every accepted move; `assignment` is the state after the move.
struct MoveEvent {
  std::size_t sweep = 0;
  std::size_t node = 0;
  Label from = 0;
  Label to = 0;
  double delta = 0.0;
  std::span<const Label> assignment;
};
using MoveObserver = std::function<void(const MoveEvent&)>;

double edge_weight(double e_ij, double e_bar, double gamma) noexcept;

/// Sum of edge_weight over unordered same-segment pairs.
double hamiltonian(std::span<const Label> assignment, const FeatureGraph& g, double gamma);

/// Energy change from moving `node` into segment `target` (or kNewSegment),
/// evaluated directly from the edge weights. Throws InvalidInput if target is
/// the node's current segment.
double move_delta(std::size_t node, Label target, std::span<const Label> assignment, const FeatureGraph& g,
                  double gamma);

/// One descent run from a random initial partition. Each sweep visits the nodes
/// in a fresh random order and applies the single best move per node (any
/// existing segment or a new one). Stops after two consecutive sweeps without
/// an accepted move, or at max_sweeps.
Solution minimize(const FeatureGraph& g, const PottsConfig& cfg, const MoveObserver& observer = {});

/// Seed used by restart r: cfg.seed + r.
std::uint64_t restart_seed(std::uint64_t base, std::size_t restart) noexcept;

/// Lowest-energy solution over cfg.restarts runs; ties go to fewer segments,
/// then the lower seed.
Solution best_of_restarts(const FeatureGraph& g, const PottsConfig& cfg);

struct GammaSweepRow {
  double gamma = 0.0;
  double energy = 0.0;
  std::size_t segments = 0;
  std::size_t sweeps = 0;
  bool converged = false;
  double seconds = 0.0;
};

struct GammaSweepResult {
  std::vector<Solution> solutions;  // one per gamma, input order
  std::vector<GammaSweepRow> table;
  std::size_t selected = 0;         // index of the minimal-energy solution
};

GammaSweepResult gamma_sweep(const FeatureGraph& g, std::span<const double> gammas, const PottsConfig& cfg);

/// Inclusive arithmetic grid "start:stop:step", e.g. "0.0025:0.5:0.0025".
std::vector<double> parse_grid(const std::string& spec);

}  // namespace pottsseg
