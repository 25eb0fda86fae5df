#pragma once

// Feature matrices, row deduplication by iterated Cantor pairing, and the
// index maps that carry segment labels back to the original rows.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pottsseg {

using Feature = std::uint64_t;
using RowKey = std::uint64_t;
using Label = std::size_t;
using LabelVector = std::vector<Label>;

/// Row-major M x n matrix of non-negative integer features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Throws InvalidInput unless rows >= 1, cols >= 1 and values.size() == rows * cols.
  FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<Feature> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const Feature> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }
  Feature at(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
  const std::vector<Feature>& values() const noexcept { return values_; }

  /// Copies column j out as doubles.
  std::vector<double> column(std::size_t j) const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Feature> values_;
};

/// Surjective map from source row indices onto [0, reduced_count).
class ReductionMap {
 public:
  ReductionMap() = default;
  /// Throws InvalidInput if any entry is out of range or some reduced index has no preimage.
  ReductionMap(std::vector<std::size_t> forward, std::size_t reduced_count);

  static ReductionMap identity(std::size_t count);

  std::size_t source_count() const noexcept { return forward_.size(); }
  std::size_t reduced_count() const noexcept { return reduced_count_; }
  const std::vector<std::size_t>& forward() const noexcept { return forward_; }
  std::size_t operator[](std::size_t i) const noexcept { return forward_[i]; }

  /// Map that applies *this first and then `next`.
  ReductionMap then(const ReductionMap& next) const;

  friend bool operator==(const ReductionMap&, const ReductionMap&) = default;

 private:
  std::vector<std::size_t> forward_;
  std::size_t reduced_count_ = 0;
};

/// 8-bit RGB raster, pixels stored row-major as interleaved R,G,B.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  std::size_t pixel_count() const noexcept { return width * height; }
  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

FeatureMatrix image_to_matrix(const RgbImage& image);
/// Inverse of image_to_matrix. Values above 255 are rejected.
RgbImage matrix_to_image(const FeatureMatrix& m, std::size_t width, std::size_t height);

/// Cantor pairing (a+b)(a+b+1)/2 + b. Throws OverflowError if the result exceeds 64 bits.
RowKey cantor_pair(std::uint64_t a, std::uint64_t b);

/// Left fold of cantor_pair across the row; a single-feature row maps to itself.
RowKey row_key(std::span<const Feature> row);

struct Deduplicated {
  FeatureMatrix distinct;
  ReductionMap map;
};

/// Distinct rows in first-occurrence order plus the map from each input row to its representative.
Deduplicated deduplicate(const FeatureMatrix& m);

/// out[i] = labels[map[i]].
LabelVector upsample_labels(std::span<const Label> labels, const ReductionMap& map);

/// Relabels to 0..L-1 in order of first appearance. Returns L.
std::size_t compact_labels(std::span<Label> labels);

}  // namespace pottsseg
