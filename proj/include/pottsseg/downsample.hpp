#pragma once

// Column-wise 1-D K-means quantization of a deduplicated feature matrix, with a
// discrete PID loop steering the number of surviving distinct rows toward K.

#include <cstddef>
#include <span>
#include <vector>

#include "pottsseg/dataset.hpp"

namespace pottsseg {

/// Cluster count per column; every entry is at least 1.
using ColumnBudget = std::vector<std::size_t>;

struct PidGains {
  double kp = 0.5;
  double ki = 0.05;
  double kd = 0.15;
};

/// Error history of the cardinality controller. Errors before the first
/// measurement are taken as zero.
struct PidState {
  PidGains gains;
  std::vector<double> errors;

  std::size_t iteration() const noexcept { return errors.size(); }
};

struct DownsampleConfig {
  std::size_t target = 350;            // K
  double alpha = 0.95;                 // accept once achieved >= alpha * K
  PidGains gains;
  std::size_t dedup_threshold = 500;   // matrices this small are passed through
  std::size_t max_pid_iters = 50;
  std::size_t kmeans_max_iter = 100;
};

struct PidTraceRow {
  std::size_t iteration = 0;
  ColumnBudget budget;
  std::size_t achieved = 0;
  double error = 0.0;
};

struct DownsampleResult {
  FeatureMatrix reduced;  // distinct quantized rows
  ReductionMap map;       // input rows -> reduced rows
  std::size_t achieved = 0;
  std::size_t iterations_used = 0;
  bool converged = true;  // false when max_pid_iters ran out before the acceptance window
  std::vector<PidTraceRow> trace;
};

/// Round half up.
long long round_half_up(double x);

/// Population variance of every column.
std::vector<double> column_variances(const FeatureMatrix& m);

/// Variance-proportional starting budget:
///   k_j = round(var_j / sum(var) * K / prod(var)^(1/n) + 1/2)
/// over the n columns with nonzero variance. Zero-variance columns get 1.
ColumnBudget initial_budget(std::span<const double> variances, std::size_t target);
ColumnBudget initial_budget(const FeatureMatrix& m, std::size_t target);

struct KMeans1d {
  std::vector<double> centers;          // ascending
  std::vector<std::size_t> assignment;  // per input value
  std::vector<double> sse_history;      // within-cluster SSE after seeding and after each sweep
  std::size_t sweeps = 0;
};

/// Lloyd's algorithm on scalars with deterministic quantile seeding. k is
/// clamped to [1, distinct values]. Ties between equidistant centers go to the
/// lower center.
KMeans1d kmeans_1d(std::span<const double> values, std::size_t k, std::size_t max_iter = 100);

/// Replaces every entry by the rounded mean of its column cluster and
/// deduplicates the resulting rows.
DownsampleResult quantize_once(const FeatureMatrix& m, const ColumnBudget& budget, std::size_t kmeans_max_iter = 100);

/// One controller update: records e = 1 - achieved/K and rescales each k_j by
///   Kp*e + Ki*sum(e) + Kd*(e - e_prev) + 1, rounded half up and clamped to >= 1.
ColumnBudget pid_step(PidState& state, const ColumnBudget& budget, std::size_t achieved, std::size_t target);

/// Full reduction of a deduplicated matrix to roughly cfg.target rows. Stops
/// once achieved lies in [alpha*K, ceil(K/alpha)]. If that never happens the
/// best attempt is returned with converged = false: the one closest to K among
/// attempts reaching alpha*K, or closest to K overall if none did.
DownsampleResult downsample(const FeatureMatrix& m, const DownsampleConfig& cfg);

}  // namespace pottsseg
