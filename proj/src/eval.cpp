#include "pottsseg/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <tuple>
#include <unordered_map>

#include "pottsseg/errors.hpp"

namespace pottsseg {
namespace {

// Maps arbitrary label values to 0..L-1 (first-appearance order).
std::vector<std::size_t> dense_labels(std::span<const Label> labels, std::size_t& count) {
  std::unordered_map<Label, std::size_t> ids;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids.try_emplace(labels[i], ids.size()).first->second;
  count = ids.size();
  return out;
}

double entropy_of_counts(std::span<const std::size_t> counts, double total) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

double squared_distance(std::span<const Feature> row, const double* center) {
  double ss = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double d = static_cast<double>(row[k]) - center[k];
    ss += d * d;
  }
  return ss;
}

// Summed-area table with a zero top row and left column.
class Integral {
 public:
  Integral(std::size_t w, std::size_t h) : w_(w + 1), data_((w + 1) * (h + 1), 0.0) {}
  double& at(std::size_t x, std::size_t y) { return data_[y * w_ + x]; }
  double box(std::size_t x, std::size_t y, std::size_t bw, std::size_t bh) const {
    auto v = [&](std::size_t xx, std::size_t yy) { return data_[yy * w_ + xx]; };
    return v(x + bw, y + bh) - v(x, y + bh) - v(x + bw, y) + v(x, y);
  }

 private:
  std::size_t w_;
  std::vector<double> data_;
};

double channel_ssim(const RgbImage& a, const RgbImage& b, std::size_t channel) {
  constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
  constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);
  const std::size_t w = a.width;
  const std::size_t h = a.height;
  Integral sx(w, h), sy(w, h), sxx(w, h), syy(w, h), sxy(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double pa = a.pixels[(y * w + x) * 3 + channel];
      const double pb = b.pixels[(y * w + x) * 3 + channel];
      auto accumulate = [&](Integral& s, double v) {
        s.at(x + 1, y + 1) = v + s.at(x, y + 1) + s.at(x + 1, y) - s.at(x, y);
      };
      accumulate(sx, pa);
      accumulate(sy, pb);
      accumulate(sxx, pa * pa);
      accumulate(syy, pb * pb);
      accumulate(sxy, pa * pb);
    }
  }
  const std::size_t bw = std::min<std::size_t>(8, w);
  const std::size_t bh = std::min<std::size_t>(8, h);
  const double n = static_cast<double>(bw * bh);
  double total = 0.0;
  std::size_t windows = 0;
  for (std::size_t y = 0; y + bh <= h; ++y) {
    for (std::size_t x = 0; x + bw <= w; ++x) {
      const double mx = sx.box(x, y, bw, bh) / n;
      const double my = sy.box(x, y, bw, bh) / n;
      const double vx = std::max(0.0, sxx.box(x, y, bw, bh) / n - mx * mx);
      const double vy = std::max(0.0, syy.box(x, y, bw, bh) / n - my * my);
      const double cxy = sxy.box(x, y, bw, bh) / n - mx * my;
      total += ((2 * mx * my + kC1) * (2 * cxy + kC2)) / ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.clusters.empty()) throw InvalidInput("synthetic spec has no clusters");
  const std::size_t dim = spec.clusters.front().mean.size();
  if (dim == 0) throw InvalidInput("synthetic clusters need at least one dimension");
  std::size_t total = 0;
  for (const auto& c : spec.clusters) {
    if (c.mean.size() != dim || c.variance.size() != dim) throw InvalidInput("synthetic cluster dimensions disagree");
    if (c.count == 0) throw InvalidInput("synthetic cluster count must be at least 1");
    for (double v : c.variance) {
      if (!(v >= 0.0)) throw InvalidInput("synthetic variances must be non-negative");
    }
    total += c.count;
  }

  std::mt19937_64 rng(spec.seed);
  std::vector<Feature> values;
  values.reserve(total * dim);
  LabelVector truth;
  truth.reserve(total);
  for (std::size_t k = 0; k < spec.clusters.size(); ++k) {
    const auto& c = spec.clusters[k];
    std::vector<std::normal_distribution<double>> axis;
    for (std::size_t d = 0; d < dim; ++d) axis.emplace_back(c.mean[d], c.variance[d] > 0 ? std::sqrt(c.variance[d]) : 1.0);
    for (std::size_t p = 0; p < c.count; ++p) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double x = c.variance[d] > 0 ? axis[d](rng) : c.mean[d];
        values.push_back(static_cast<Feature>(std::max(0.0, std::floor(x + 0.5))));
      }
      truth.push_back(k);
    }
  }
  return {FeatureMatrix(total, dim, std::move(values)), std::move(truth)};
}

SyntheticSpec four_gaussian_spec(std::uint64_t seed, double sigma) {
  const double var = sigma * sigma;
  SyntheticSpec spec;
  spec.seed = seed;
  const double corners[4][3] = {{60, 60, 60}, {140, 140, 60}, {140, 60, 140}, {60, 140, 140}};
  for (const auto& c : corners) spec.clusters.push_back({{c[0], c[1], c[2]}, {var, var, var}, 250});
  return spec;
}

ContingencyTable contingency(std::span<const Label> c, std::span<const Label> g) {
  if (c.size() != g.size()) {
    throw InvalidInput("labelings differ in length: " + std::to_string(c.size()) + " vs " + std::to_string(g.size()));
  }
  ContingencyTable t;
  const auto dc = dense_labels(c, t.rows);
  const auto dg = dense_labels(g, t.cols);
  t.total = c.size();
  t.counts.assign(t.rows * t.cols, 0);
  t.row_sums.assign(t.rows, 0);
  t.col_sums.assign(t.cols, 0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    ++t.counts[dc[i] * t.cols + dg[i]];
    ++t.row_sums[dc[i]];
    ++t.col_sums[dg[i]];
  }
  return t;
}

double shannon_entropy(std::span<const Label> labels) {
  if (labels.empty()) throw InvalidInput("entropy of an empty labeling");
  std::size_t count = 0;
  const auto dense = dense_labels(labels, count);
  std::vector<std::size_t> sizes(count, 0);
  for (std::size_t l : dense) ++sizes[l];
  return entropy_of_counts(sizes, static_cast<double>(labels.size()));
}

double mutual_information(std::span<const Label> c, std::span<const Label> g) {
  const ContingencyTable t = contingency(c, g);
  const double m = static_cast<double>(t.total);
  double mi = 0.0;
  for (std::size_t a = 0; a < t.rows; ++a) {
    for (std::size_t b = 0; b < t.cols; ++b) {
      const double n = static_cast<double>(t.at(a, b));
      if (n == 0.0) continue;
      mi += n / m * std::log2(n * m / (static_cast<double>(t.row_sums[a]) * static_cast<double>(t.col_sums[b])));
    }
  }
  return mi;
}

double nmi(std::span<const Label> c, std::span<const Label> g) {
  if (c.size() != g.size()) {
    throw InvalidInput("labelings differ in length: " + std::to_string(c.size()) + " vs " + std::to_string(g.size()));
  }
  if (c.empty()) throw InvalidInput("NMI of empty labelings");
  const ContingencyTable t = contingency(c, g);
  const double m = static_cast<double>(t.total);
  const double hc = entropy_of_counts(t.row_sums, m);
  const double hg = entropy_of_counts(t.col_sums, m);
  if (hc + hg == 0.0) return 1.0;
  double mi = 0.0;
  for (std::size_t a = 0; a < t.rows; ++a) {
    for (std::size_t b = 0; b < t.cols; ++b) {
      const double n = static_cast<double>(t.at(a, b));
      if (n == 0.0) continue;
      mi += n / m * std::log2(n * m / (static_cast<double>(t.row_sums[a]) * static_cast<double>(t.col_sums[b])));
    }
  }
  return std::clamp(2.0 * mi / (hc + hg), 0.0, 1.0);
}

KMeansResult kmeans_full(const FeatureMatrix& m, std::size_t k, std::uint64_t seed, std::size_t max_sweeps) {
  if (k == 0 || k > m.rows()) throw InvalidInput("k must lie in [1, rows]");
  const std::size_t n = m.cols();
  const std::size_t rows = m.rows();
  std::mt19937_64 rng(seed);
  KMeansResult out;
  out.centers.assign(k * n, 0.0);
  auto set_center = [&](std::size_t c, std::size_t row) {
    for (std::size_t d = 0; d < n; ++d) out.centers[c * n + d] = static_cast<double>(m.at(row, d));
  };

  // k-means++ seeding.
  set_center(0, std::uniform_int_distribution<std::size_t>(0, rows - 1)(rng));
  std::vector<double> nearest(rows, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(m.row(i), &out.centers[(c - 1) * n]));
      total += nearest[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick + 1 < rows; ++pick) {
        target -= nearest[pick];
        if (target < 0.0) break;
      }
    } else {
      pick = std::uniform_int_distribution<std::size_t>(0, rows - 1)(rng);
    }
    set_center(c, pick);
  }

  out.labels.assign(rows, k);
  auto assign = [&] {
    bool changed = false;
    double sse = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(m.row(i), &out.centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = squared_distance(m.row(i), &out.centers[c * n]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      changed |= out.labels[i] != best;
      out.labels[i] = best;
      sse += best_d;
    }
    out.sse_history.push_back(sse);
    return changed;
  };

  assign();
  std::vector<double> sum(k * n);
  std::vector<std::size_t> size(k);
  while (out.sweeps < max_sweeps) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(size.begin(), size.end(), 0);
    for (std::size_t i = 0; i < rows; ++i) {
      const std::size_t c = out.labels[i];
      ++size[c];
      for (std::size_t d = 0; d < n; ++d) sum[c * n + d] += static_cast<double>(m.at(i, d));
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (size[c] == 0) continue;
      for (std::size_t d = 0; d < n; ++d) out.centers[c * n + d] = sum[c * n + d] / static_cast<double>(size[c]);
    }
    ++out.sweeps;
    if (!assign()) break;
  }
  return out;
}

LabelVector kmeans_baseline(const FeatureMatrix& m, std::size_t k, std::uint64_t seed) {
  return kmeans_full(m, k, seed).labels;
}

double ssim(const RgbImage& a, const RgbImage& b) {
  if (a.width != b.width || a.height != b.height) throw InvalidInput("SSIM needs images of equal size");
  if (a.width == 0 || a.height == 0) throw InvalidInput("SSIM of an empty image");
  if (a.pixels.size() != a.pixel_count() * 3 || b.pixels.size() != b.pixel_count() * 3) {
    throw InvalidInput("image buffer size does not match its dimensions");
  }
  double total = 0.0;
  for (std::size_t ch = 0; ch < 3; ++ch) total += channel_ssim(a, b, ch);
  return total / 3.0;
}

std::string sweep_report(std::vector<SweepCell> cells, bool include_wall_time) {
  std::sort(cells.begin(), cells.end(), [](const SweepCell& x, const SweepCell& y) {
    return std::tie(x.gamma, x.nodes, x.seed) < std::tie(y.gamma, y.nodes, y.seed);
  });
  std::string out = include_wall_time ? "gamma,nodes,seed,nmi,segments,energy,wall_time\n"
                                      : "gamma,nodes,seed,nmi,segments,energy\n";
  char buf[256];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%.6g,%zu,%llu,%.6f,%zu,%.10g", c.gamma, c.nodes,
                  static_cast<unsigned long long>(c.seed), c.nmi, c.segments, c.energy);
    out += buf;
    if (include_wall_time) {
      std::snprintf(buf, sizeof buf, ",%.6f", c.wall_seconds);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace pottsseg
