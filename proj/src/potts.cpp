#include "pottsseg/potts.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "pottsseg/errors.hpp"
#include "pottsseg/parallel.hpp"

namespace pottsseg {
namespace {

void check_assignment(std::span<const Label> assignment, const FeatureGraph& g) {
  if (assignment.size() != g.node_count()) {
    throw InvalidInput("partition covers " + std::to_string(assignment.size()) + " nodes, graph has " +
                       std::to_string(g.node_count()));
  }
}

// Working state of one descent run. Segment ids live in [0, n); vacated ids
// go back on a free list and are handed out again for new segments.
class Descent {
 public:
  Descent(const FeatureGraph& g, const PottsConfig& cfg)
      : n_(g.node_count()), cfg_(cfg), weight_(n_ * n_), label_(n_), size_(n_, 0), sums_(n_, 0.0), stamp_(n_, 0), rng_(cfg.seed) {
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) weight_[i * n_ + j] = i == j ? 0.0 : edge_weight(g.edge(i, j), g.e_bar(), cfg.gamma);
    }
    if (!cfg.initial_assignment.empty()) {
      if (cfg.initial_assignment.size() != n_) throw InvalidInput("initial assignment must label every node");
      label_ = cfg.initial_assignment;
      compact_labels(label_);
    } else {
      std::size_t initial = cfg.initial_segments == 0 ? (n_ + 9) / 10 : cfg.initial_segments;
      initial = std::clamp<std::size_t>(initial, 1, n_);
      std::uniform_int_distribution<std::size_t> pick(0, initial - 1);
      for (std::size_t i = 0; i < n_; ++i) label_[i] = pick(rng_);
    }
    for (Label l : label_) ++size_[l];
    for (Label s = n_; s-- > 0;) {
      if (size_[s] == 0) free_.push_back(s);  // lowest id on top
    }
    energy_ = hamiltonian(label_, g, cfg.gamma);
  }

  Solution run(const MoveObserver& observer) {
    Solution sol;
    sol.gamma = cfg_.gamma;
    sol.seed = cfg_.seed;
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t quiet = 0;
    while (sol.sweeps_used < cfg_.max_sweeps) {
      ++sol.sweeps_used;
      std::shuffle(order.begin(), order.end(), rng_);
      std::size_t moves = 0;
      for (std::size_t node : order) {
        if (try_move(node, sol.sweeps_used, observer)) ++moves;
      }
      sol.accepted_moves += moves;
      quiet = moves == 0 ? quiet + 1 : 0;
      if (quiet >= 2) {
        sol.converged = true;
        if (cfg_.stop_when_converged) break;
      }
    }
    sol.partition = Partition::from_labels(label_);
    return sol;
  }

  double running_energy() const noexcept { return energy_; }

 private:
  bool try_move(std::size_t node, std::size_t sweep, const MoveObserver& observer) {
    const Label current = label_[node];
    const double* w = weight_.data() + node * n_;
    touched_.clear();
    ++visit_;
    for (std::size_t j = 0; j < n_; ++j) {
      const Label s = label_[j];
      if (stamp_[s] != visit_) {
        stamp_[s] = visit_;
        touched_.push_back(s);
      }
      sums_[s] += w[j];  // w[node] is zero
    }

    const double leave = sums_[current];
    double best_delta = 0.0;
    Label best = current;
    for (Label s : touched_) {
      if (s == current) continue;
      const double d = sums_[s] - leave;
      if (d < best_delta || (d == best_delta && best != current && s < best)) {
        best_delta = d;
        best = s;
      }
    }
    // A node that is already alone gains nothing from a fresh segment.
    if (size_[current] > 1 && -leave < best_delta) {
      best_delta = -leave;
      best = kNewSegment;
    }
    for (Label s : touched_) sums_[s] = 0.0;

    if (best == current || !(best_delta < -cfg_.move_tolerance)) return false;
    if (best == kNewSegment) {
      best = free_.back();
      free_.pop_back();
    }
    label_[node] = best;
    ++size_[best];
    if (--size_[current] == 0) free_.push_back(current);
    energy_ += best_delta;
    if (observer) observer(MoveEvent{sweep, node, current, best, best_delta, label_});
    return true;
  }

  std::size_t n_;
  const PottsConfig& cfg_;
  std::vector<double> weight_;
  std::vector<Label> label_;
  std::vector<std::size_t> size_;
  std::vector<double> sums_;
  std::vector<Label> touched_;
  std::vector<std::size_t> stamp_;
  std::size_t visit_ = 0;
  std::vector<Label> free_;
  std::mt19937_64 rng_;
  double energy_ = 0.0;
};

bool better_solution(const Solution& a, const Solution& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  if (a.partition.segment_count != b.partition.segment_count) {
    return a.partition.segment_count < b.partition.segment_count;
  }
  return a.seed < b.seed;
}

double parse_number(std::string_view text, const std::string& spec) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("malformed grid '" + spec + "', expected start:stop:step");
  }
  return v;
}

}  // namespace

Partition Partition::from_labels(LabelVector labels) {
  Partition p;
  p.segment_count = compact_labels(labels);
  p.assignment = std::move(labels);
  return p;
}

double edge_weight(double e_ij, double e_bar, double gamma) noexcept {
  const double d = e_ij - e_bar;
  if (d < 0.0) return d;
  if (d > 0.0) return gamma * d;
  return 0.0;
}

double hamiltonian(std::span<const Label> assignment, const FeatureGraph& g, double gamma) {
  check_assignment(assignment, g);
  const std::size_t n = g.node_count();
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (assignment[i] == assignment[j]) h += edge_weight(g.edge(i, j), g.e_bar(), gamma);
    }
  }
  return h;
}

double move_delta(std::size_t node, Label target, std::span<const Label> assignment, const FeatureGraph& g,
                  double gamma) {
  check_assignment(assignment, g);
  if (node >= assignment.size()) throw InvalidInput("node index out of range");
  const Label current = assignment[node];
  if (target == current) throw InvalidInput("move target is the node's current segment");
  double join = 0.0;
  double leave = 0.0;
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    if (j == node) continue;
    const double w = edge_weight(g.edge(node, j), g.e_bar(), gamma);
    if (assignment[j] == current) leave += w;
    if (target != kNewSegment && assignment[j] == target) join += w;
  }
  return join - leave;
}

Solution minimize(const FeatureGraph& g, const PottsConfig& cfg, const MoveObserver& observer) {
  if (g.node_count() == 0) throw InvalidInput("cannot minimize over an empty graph");
  if (!(cfg.gamma > 0.0)) throw InvalidInput("gamma must be positive");
  Descent descent(g, cfg);
  Solution sol = descent.run(observer);
  sol.energy = hamiltonian(sol.partition.assignment, g, cfg.gamma);
  const double drift = std::abs(sol.energy - descent.running_energy());
  if (drift > 1e-6 * std::max(1.0, std::abs(sol.energy))) {
    throw InvariantViolation("tracked energy drifted from the recomputed Hamiltonian");
  }
  return sol;
}

std::uint64_t restart_seed(std::uint64_t base, std::size_t restart) noexcept { return base + restart; }

Solution best_of_restarts(const FeatureGraph& g, const PottsConfig& cfg) {
  if (cfg.restarts == 0) throw InvalidInput("restarts must be at least 1");
  std::vector<Solution> runs(cfg.restarts);
  parallel_for(cfg.restarts, cfg.threads, [&](std::size_t r) {
    PottsConfig local = cfg;
    local.seed = restart_seed(cfg.seed, r);
    runs[r] = minimize(g, local);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (better_solution(runs[r], runs[best])) best = r;
  }
  return std::move(runs[best]);
}

GammaSweepResult gamma_sweep(const FeatureGraph& g, std::span<const double> gammas, const PottsConfig& cfg) {
  if (gammas.empty()) throw InvalidInput("gamma sweep needs at least one gamma");
  GammaSweepResult out;
  for (double gamma : gammas) {
    if (!(gamma > 0.0)) throw InvalidInput("every gamma must be positive");
    PottsConfig local = cfg;
    local.gamma = gamma;
    const auto start = std::chrono::steady_clock::now();
    Solution sol = best_of_restarts(g, local);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    out.table.push_back({gamma, sol.energy, sol.partition.segment_count, sol.sweeps_used, sol.converged, took.count()});
    out.solutions.push_back(std::move(sol));
  }
  for (std::size_t i = 1; i < out.solutions.size(); ++i) {
    if (out.solutions[i].energy < out.solutions[out.selected].energy) out.selected = i;
  }
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto first = spec.find(':');
  const auto second = first == std::string::npos ? std::string::npos : spec.find(':', first + 1);
  if (second == std::string::npos || spec.find(':', second + 1) != std::string::npos) {
    throw ParseError("malformed grid '" + spec + "', expected start:stop:step");
  }
  const std::string_view view(spec);
  const double start = parse_number(view.substr(0, first), spec);
  const double stop = parse_number(view.substr(first + 1, second - first - 1), spec);
  const double step = parse_number(view.substr(second + 1), spec);
  if (!(step > 0.0) || stop < start) throw ParseError("grid '" + spec + "' needs step > 0 and stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) grid[i] = start + static_cast<double>(i) * step;
  return grid;
}

}  // namespace pottsseg
