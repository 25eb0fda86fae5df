#include "pottsseg/graph.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "pottsseg/errors.hpp"

namespace pottsseg {
namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

double mean_pairwise(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  CompensatedSum acc;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const auto ra = m.row(rows[a]);
    for (std::size_t b = a + 1; b < rows.size(); ++b) acc.add(euclidean(ra, m.row(rows[b])));
  }
  const double pairs = static_cast<double>(rows.size()) * static_cast<double>(rows.size() - 1) / 2.0;
  return acc.value() / pairs;
}

}  // namespace

double euclidean(std::span<const Feature> a, std::span<const Feature> b) {
  double ss = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    ss += d * d;
  }
  return std::sqrt(ss);
}

FeatureGraph FeatureGraph::from_features(const FeatureMatrix& nodes, double e_bar) {
  if (nodes.empty()) throw InvalidInput("graph needs at least one node");
  if (!(e_bar >= 0.0) || !std::isfinite(e_bar)) throw InvalidInput("mean edge must be finite and non-negative");
  FeatureGraph g;
  g.nodes_ = nodes.rows();
  g.e_bar_ = e_bar;
  g.features_ = nodes;
  g.edges_.assign(g.nodes_ * g.nodes_, 0.0);
  for (std::size_t i = 0; i < g.nodes_; ++i) {
    for (std::size_t j = i + 1; j < g.nodes_; ++j) {
      const double d = euclidean(nodes.row(i), nodes.row(j));
      g.edges_[i * g.nodes_ + j] = d;
      g.edges_[j * g.nodes_ + i] = d;
    }
  }
  return g;
}

FeatureGraph FeatureGraph::from_edges(std::size_t nodes, std::vector<double> edges, double e_bar) {
  if (nodes == 0) throw InvalidInput("graph needs at least one node");
  if (edges.size() != nodes * nodes) throw InvalidInput("edge matrix must be n x n");
  if (!std::isfinite(e_bar)) throw InvalidInput("mean edge must be finite");
  for (std::size_t i = 0; i < nodes; ++i) {
    if (edges[i * nodes + i] != 0.0) throw InvalidInput("edge matrix diagonal must be zero");
    for (std::size_t j = i + 1; j < nodes; ++j) {
      const double w = edges[i * nodes + j];
      if (w != edges[j * nodes + i] || !(w >= 0.0) || !std::isfinite(w)) {
        throw InvalidInput("edge matrix must be symmetric, finite and non-negative");
      }
    }
  }
  FeatureGraph g;
  g.nodes_ = nodes;
  g.edges_ = std::move(edges);
  g.e_bar_ = e_bar;
  return g;
}

std::string FeatureGraph::edge_list_csv() const {
  std::string out = "i,j,e_ij\n";
  char buf[96];
  for (std::size_t i = 0; i < nodes_; ++i) {
    for (std::size_t j = i + 1; j < nodes_; ++j) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g\n", i, j, edge(i, j));
      out += buf;
    }
  }
  return out;
}

double exact_mean_edge(const FeatureMatrix& m) {
  if (m.rows() < 2) throw InvalidInput("mean edge needs at least two rows");
  std::vector<std::size_t> all(m.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return mean_pairwise(m, all);
}

double estimate_mean_edge(const FeatureMatrix& original, std::size_t cap, std::uint64_t seed) {
  if (cap < 2) throw InvalidInput("mean edge sample cap must be at least 2");
  if (original.rows() < 2) throw InvalidInput("mean edge needs at least two rows");
  if (original.rows() <= cap) return exact_mean_edge(original);

  // Partial Fisher-Yates: the first `cap` slots end up a uniform sample.
  std::vector<std::size_t> idx(original.rows());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < cap; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(cap);
  return mean_pairwise(original, idx);
}

}  // namespace pottsseg
