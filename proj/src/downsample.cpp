#include "pottsseg/downsample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "pottsseg/errors.hpp"

namespace pottsseg {
namespace {

std::size_t distinct_count(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return static_cast<std::size_t>(std::unique(values.begin(), values.end()) - values.begin());
}

// Scalar histogram: ascending distinct values with multiplicities.
struct Histogram {
  std::vector<double> value;
  std::vector<double> weight;
  std::vector<std::size_t> bin_of;  // input index -> histogram bin
  std::size_t total = 0;
};

Histogram build_histogram(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  Histogram h;
  h.total = values.size();
  h.bin_of.resize(values.size());
  for (std::size_t idx : order) {
    if (h.value.empty() || values[idx] != h.value.back()) {
      h.value.push_back(values[idx]);
      h.weight.push_back(0.0);
    }
    h.weight.back() += 1.0;
    h.bin_of[idx] = h.value.size() - 1;
  }
  return h;
}

// Assigns each bin to its nearest center (centers ascending, ties to the lower
// one). Returns true if any bin changed cluster.
bool assign_bins(const Histogram& h, const std::vector<double>& centers, std::vector<std::size_t>& cluster) {
  bool changed = false;
  std::size_t c = 0;
  for (std::size_t b = 0; b < h.value.size(); ++b) {
    const double v = h.value[b];
    while (c + 1 < centers.size() && centers[c + 1] - v < v - centers[c]) ++c;
    if (cluster[b] != c) {
      cluster[b] = c;
      changed = true;
    }
  }
  return changed;
}

double bin_sse(const Histogram& h, const std::vector<double>& centers, const std::vector<std::size_t>& cluster) {
  double sse = 0.0;
  for (std::size_t b = 0; b < h.value.size(); ++b) {
    const double d = h.value[b] - centers[cluster[b]];
    sse += h.weight[b] * d * d;
  }
  return sse;
}

}  // namespace

long long round_half_up(double x) { return static_cast<long long>(std::floor(x + 0.5)); }

std::vector<double> column_variances(const FeatureMatrix& m) {
  std::vector<double> var(m.cols(), 0.0);
  const double n = static_cast<double>(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) mean += static_cast<double>(m.at(i, j));
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double d = static_cast<double>(m.at(i, j)) - mean;
      ss += d * d;
    }
    var[j] = ss / n;
  }
  return var;
}

ColumnBudget initial_budget(std::span<const double> variances, std::size_t target) {
  if (target == 0) throw InvalidInput("target count K must be at least 1");
  double sum = 0.0;
  double log_prod = 0.0;
  std::size_t live = 0;
  for (double v : variances) {
    if (v > 0.0) {
      sum += v;
      log_prod += std::log(v);
      ++live;
    }
  }
  ColumnBudget budget(variances.size(), 1);
  if (live == 0) return budget;
  const double root = std::exp(log_prod / static_cast<double>(live));
  const double scale = static_cast<double>(target) / root;
  for (std::size_t j = 0; j < variances.size(); ++j) {
    if (variances[j] <= 0.0) continue;
    const long long k = round_half_up(variances[j] / sum * scale);
    budget[j] = static_cast<std::size_t>(std::max(1LL, k));
  }
  return budget;
}

ColumnBudget initial_budget(const FeatureMatrix& m, std::size_t target) {
  const auto var = column_variances(m);
  return initial_budget(var, target);
}

KMeans1d kmeans_1d(std::span<const double> values, std::size_t k, std::size_t max_iter) {
  if (values.empty()) throw InvalidInput("kmeans_1d needs at least one value");
  const Histogram h = build_histogram(values);
  const std::size_t bins = h.value.size();
  k = std::clamp<std::size_t>(k, 1, bins);

  // Quantile seeds at (i + 1/2)/k, nudged apart so every seed is a distinct value.
  std::vector<double> cumulative(bins);
  std::partial_sum(h.weight.begin(), h.weight.end(), cumulative.begin());
  std::vector<std::size_t> seed_bin(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double rank = std::floor((static_cast<double>(i) + 0.5) / static_cast<double>(k) * static_cast<double>(h.total));
    seed_bin[i] = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), rank) - cumulative.begin());
    seed_bin[i] = std::min(seed_bin[i], bins - 1);
  }
  for (std::size_t i = 1; i < k; ++i) seed_bin[i] = std::max(seed_bin[i], seed_bin[i - 1] + 1);
  seed_bin[k - 1] = std::min(seed_bin[k - 1], bins - 1);
  for (std::size_t i = k - 1; i-- > 0;) seed_bin[i] = std::min(seed_bin[i], seed_bin[i + 1] - 1);

  KMeans1d out;
  out.centers.resize(k);
  for (std::size_t i = 0; i < k; ++i) out.centers[i] = h.value[seed_bin[i]];

  std::vector<std::size_t> cluster(bins, k);  // k = unassigned
  assign_bins(h, out.centers, cluster);
  out.sse_history.push_back(bin_sse(h, out.centers, cluster));

  std::vector<double> sum(k), weight(k);
  while (out.sweeps < max_iter) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(weight.begin(), weight.end(), 0.0);
    for (std::size_t b = 0; b < bins; ++b) {
      sum[cluster[b]] += h.weight[b] * h.value[b];
      weight[cluster[b]] += h.weight[b];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (weight[c] > 0.0) out.centers[c] = sum[c] / weight[c];  // empty clusters keep their center
    }
    ++out.sweeps;
    const bool changed = assign_bins(h, out.centers, cluster);
    out.sse_history.push_back(bin_sse(h, out.centers, cluster));
    if (!changed) break;
  }

  out.assignment.resize(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out.assignment[i] = cluster[h.bin_of[i]];
  return out;
}

DownsampleResult quantize_once(const FeatureMatrix& m, const ColumnBudget& budget, std::size_t kmeans_max_iter) {
  if (budget.size() != m.cols()) throw InvalidInput("budget length does not match the column count");
  std::vector<Feature> q(m.values().size());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    if (budget[j] == 0) throw InvalidInput("column budget entries must be at least 1");
    const std::vector<double> col = m.column(j);
    const KMeans1d km = kmeans_1d(col, budget[j], kmeans_max_iter);
    std::vector<Feature> level(km.centers.size());
    for (std::size_t c = 0; c < level.size(); ++c) {
      level[c] = static_cast<Feature>(std::max(0LL, round_half_up(km.centers[c])));
    }
    for (std::size_t i = 0; i < m.rows(); ++i) q[i * m.cols() + j] = level[km.assignment[i]];
  }
  auto dedup = deduplicate(FeatureMatrix(m.rows(), m.cols(), std::move(q)));
  DownsampleResult r{std::move(dedup.distinct), std::move(dedup.map), 0, 1, true, {}};
  r.achieved = r.reduced.rows();
  return r;
}

ColumnBudget pid_step(PidState& state, const ColumnBudget& budget, std::size_t achieved, std::size_t target) {
  if (target == 0) throw InvalidInput("target count K must be at least 1");
  const double e = 1.0 - static_cast<double>(achieved) / static_cast<double>(target);
  const double prev = state.errors.empty() ? 0.0 : state.errors.back();
  state.errors.push_back(e);
  const double integral = std::accumulate(state.errors.begin(), state.errors.end(), 0.0);
  const PidGains& g = state.gains;
  const double factor = g.kp * e + g.ki * integral + g.kd * (e - prev) + 1.0;
  ColumnBudget next(budget.size());
  for (std::size_t j = 0; j < budget.size(); ++j) {
    next[j] = static_cast<std::size_t>(std::max(1LL, round_half_up(static_cast<double>(budget[j]) * factor)));
  }
  return next;
}

DownsampleResult downsample(const FeatureMatrix& m, const DownsampleConfig& cfg) {
  if (cfg.target == 0) throw InvalidInput("target count K must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw InvalidInput("alpha must lie in (0, 1]");
  if (m.rows() <= cfg.dedup_threshold) {
    return {m, ReductionMap::identity(m.rows()), m.rows(), 0, true, {}};
  }

  ColumnBudget ceiling(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) ceiling[j] = distinct_count(m.column(j));
  auto clamp_budget = [&](ColumnBudget b) {
    for (std::size_t j = 0; j < b.size(); ++j) b[j] = std::clamp<std::size_t>(b[j], 1, ceiling[j]);
    return b;
  };

  const double K = static_cast<double>(cfg.target);
  const double lo = cfg.alpha * K;
  const double hi = std::ceil(K / cfg.alpha);
  auto distance = [&](std::size_t achieved) { return std::abs(static_cast<double>(achieved) - K); };

  PidState pid{cfg.gains, {}};
  ColumnBudget budget = clamp_budget(initial_budget(m, cfg.target));
  std::vector<PidTraceRow> trace;
  std::optional<DownsampleResult> best;
  bool best_reaches_floor = false;

  for (std::size_t t = 1; t <= std::max<std::size_t>(cfg.max_pid_iters, 1); ++t) {
    DownsampleResult r = quantize_once(m, budget, cfg.kmeans_max_iter);
    const double achieved = static_cast<double>(r.achieved);
    const double error = 1.0 - achieved / K;
    trace.push_back({t, budget, r.achieved, error});

    r.iterations_used = t;
    const bool reaches_floor = achieved >= lo;
    if (reaches_floor && achieved <= hi) {
      r.trace = std::move(trace);
      return r;
    }
    const bool better = !best || (reaches_floor && !best_reaches_floor) ||
                        (reaches_floor == best_reaches_floor && distance(r.achieved) < distance(best->achieved));
    if (better) {
      best = std::move(r);
      best_reaches_floor = reaches_floor;
    }
    budget = clamp_budget(pid_step(pid, budget, static_cast<std::size_t>(achieved), cfg.target));
  }
  best->converged = false;
  best->iterations_used = trace.size();
  best->trace = std::move(trace);
  return std::move(*best);
}

}  // namespace pottsseg
