#pragma once

// Synthetic benchmark data, clustering agreement metrics, image fidelity and a
// plain K-means baseline.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pottsseg/dataset.hpp"

namespace pottsseg {

struct GaussianCluster {
  std::vector<double> mean;
  std::vector<double> variance;  // per dimension
  std::size_t count = 0;
};

struct SyntheticSpec {
  std::vector<GaussianCluster> clusters;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  FeatureMatrix points;
  LabelVector truth;
};

/// Samples every cluster in order, rounds half up and clamps at zero.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Four 3-D Gaussian classes of 250 points centred on the corners of a regular
/// tetrahedron (pairwise center distance 80*sqrt(2)) with per-axis standard
/// deviation `sigma`. Larger sigma increases the overlap between classes.
SyntheticSpec four_gaussian_spec(std::uint64_t seed, double sigma = 8.0);

/// Counts N_ab of points with label a in c and label b in g.
struct ContingencyTable {
  std::vector<std::size_t> counts;  // row-major rows x cols
  std::vector<std::size_t> row_sums;
  std::vector<std::size_t> col_sums;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t total = 0;

  std::size_t at(std::size_t a, std::size_t b) const noexcept { return counts[a * cols + b]; }
};

ContingencyTable contingency(std::span<const Label> c, std::span<const Label> g);

/// Shannon entropy in bits; empty segments contribute nothing.
double shannon_entropy(std::span<const Label> labels);

/// Mutual information in bits.
double mutual_information(std::span<const Label> c, std::span<const Label> g);

/// 2 I(c,g) / (H_c + H_g), defined as 1 when both labelings are constant.
double nmi(std::span<const Label> c, std::span<const Label> g);

struct KMeansResult {
  LabelVector labels;
  std::vector<double> centers;      // k x n row-major
  std::vector<double> sse_history;  // after seeding and after every sweep
  std::size_t sweeps = 0;
};

/// Lloyd's algorithm in full feature space with k-means++ seeding.
KMeansResult kmeans_full(const FeatureMatrix& m, std::size_t k, std::uint64_t seed, std::size_t max_sweeps = 300);
LabelVector kmeans_baseline(const FeatureMatrix& m, std::size_t k, std::uint64_t seed);

/// Mean SSIM over all 8x8 windows (uniform weights), averaged over the three
/// channels. Images narrower or shorter than 8 use a single window spanning
/// that dimension.
double ssim(const RgbImage& a, const RgbImage& b);

struct SweepCell {
  double gamma = 0.0;
  std::size_t nodes = 0;  // M'' requested
  std::uint64_t seed = 0;
  double nmi = 0.0;
  std::size_t segments = 0;
  double energy = 0.0;
  double wall_seconds = 0.0;
};

/// CSV with header gamma,nodes,seed,nmi,segments,energy[,wall_time]; rows sorted
/// by (gamma, nodes, seed). Omitting wall time makes the output reproducible
/// byte for byte.
std::string sweep_report(std::vector<SweepCell> cells, bool include_wall_time = true);

}  // namespace pottsseg
