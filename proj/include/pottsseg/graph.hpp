#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pottsseg/dataset.hpp"

namespace pottsseg {

/// Complete graph over feature rows. Edge weights are Euclidean distances held
/// in a dense symmetric matrix with a zero diagonal; e_bar is the background
/// mean edge that separates attractive from repulsive pairs.
class FeatureGraph {
 public:
  FeatureGraph() = default;

  /// Pairwise distances between the rows of `nodes`.
  static FeatureGraph from_features(const FeatureMatrix& nodes, double e_bar);

  /// Graph with explicitly given weights. `edges` is row-major n x n and must be
  /// symmetric, non-negative and zero on the diagonal. No node features are kept.
  static FeatureGraph from_edges(std::size_t nodes, std::vector<double> edges, double e_bar);

  std::size_t node_count() const noexcept { return nodes_; }
  std::size_t edge_count() const noexcept { return nodes_ * (nodes_ - (nodes_ > 0 ? 1 : 0)) / 2; }
  double e_bar() const noexcept { return e_bar_; }
  double edge(std::size_t i, std::size_t j) const noexcept { return edges_[i * nodes_ + j]; }
  std::span<const double> edges_from(std::size_t i) const noexcept { return {edges_.data() + i * nodes_, nodes_}; }
  const FeatureMatrix& node_features() const noexcept { return features_; }

  /// Debug dump: "i,j,e_ij" per unordered pair, i < j.
  std::string edge_list_csv() const;

 private:
  std::size_t nodes_ = 0;
  std::vector<double> edges_;
  double e_bar_ = 0.0;
  FeatureMatrix features_;
};

double euclidean(std::span<const Feature> a, std::span<const Feature> b);

/// Mean pairwise distance over all rows when rows <= cap, otherwise over `cap`
/// rows drawn uniformly without replacement. Sums are compensated and taken in
/// a fixed order, so the result depends only on the inputs and the seed.
double estimate_mean_edge(const FeatureMatrix& original, std::size_t cap, std::uint64_t seed);

/// Exact mean over all M(M-1)/2 pairs.
double exact_mean_edge(const FeatureMatrix& m);

}  // namespace pottsseg
