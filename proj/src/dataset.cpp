#include "pottsseg/dataset.hpp"

#include <limits>
#include <string>
#include <unordered_map>

#include "pottsseg/errors.hpp"

namespace pottsseg {

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<Feature> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0) {
    throw InvalidInput("feature matrix needs at least one row and one column");
  }
  if (values_.size() != rows_ * cols_) {
    throw InvalidInput("feature matrix has " + std::to_string(values_.size()) + " values, expected " +
                       std::to_string(rows_ * cols_));
  }
}

std::vector<double> FeatureMatrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = static_cast<double>(at(i, j));
  return out;
}

ReductionMap::ReductionMap(std::vector<std::size_t> forward, std::size_t reduced_count)
    : forward_(std::move(forward)), reduced_count_(reduced_count) {
  std::vector<bool> hit(reduced_count_, false);
  for (std::size_t v : forward_) {
    if (v >= reduced_count_) throw InvalidInput("reduction map entry out of range");
    hit[v] = true;
  }
  for (bool h : hit) {
    if (!h) throw InvalidInput("reduction map is not surjective");
  }
}

ReductionMap ReductionMap::identity(std::size_t count) {
  std::vector<std::size_t> fwd(count);
  for (std::size_t i = 0; i < count; ++i) fwd[i] = i;
  return ReductionMap(std::move(fwd), count);
}

ReductionMap ReductionMap::then(const ReductionMap& next) const {
  if (next.source_count() != reduced_count_) {
    throw InvalidInput("cannot compose reduction maps: " + std::to_string(reduced_count_) +
                       " reduced rows feed a map over " + std::to_string(next.source_count()));
  }
  std::vector<std::size_t> fwd(forward_.size());
  for (std::size_t i = 0; i < forward_.size(); ++i) fwd[i] = next.forward_[forward_[i]];
  return ReductionMap(std::move(fwd), next.reduced_count_);
}

FeatureMatrix image_to_matrix(const RgbImage& image) {
  if (image.width == 0 || image.height == 0) throw InvalidInput("image is empty");
  if (image.pixels.size() != image.pixel_count() * 3) {
    throw InvalidInput("image buffer size does not match its dimensions");
  }
  return FeatureMatrix(image.pixel_count(), 3, std::vector<Feature>(image.pixels.begin(), image.pixels.end()));
}

RgbImage matrix_to_image(const FeatureMatrix& m, std::size_t width, std::size_t height) {
  if (m.cols() != 3) throw InvalidInput("image reconstruction needs exactly 3 columns");
  if (width * height != m.rows()) throw InvalidInput("image dimensions do not match the row count");
  RgbImage img{width, height, {}};
  img.pixels.reserve(m.values().size());
  for (Feature v : m.values()) {
    if (v > 255) throw InvalidInput("feature value " + std::to_string(v) + " does not fit 8 bits");
    img.pixels.push_back(static_cast<std::uint8_t>(v));
  }
  return img;
}

RowKey cantor_pair(std::uint64_t a, std::uint64_t b) {
  __extension__ typedef unsigned __int128 Wide;
  const Wide s = static_cast<Wide>(a) + b;
  // s >= 2^33 already puts the triangular term above 2^65.
  if (s >= (static_cast<Wide>(1) << 33)) {
    throw OverflowError("cantor pairing of (" + std::to_string(a) + ", " + std::to_string(b) +
                        ") exceeds 64 bits");
  }
  const Wide tri = s * (s + 1) / 2;
  const Wide key = tri + b;
  if (key > std::numeric_limits<RowKey>::max()) {
    throw OverflowError("cantor pairing of (" + std::to_string(a) + ", " + std::to_string(b) +
                        ") exceeds 64 bits");
  }
  return static_cast<RowKey>(key);
}

RowKey row_key(std::span<const Feature> row) {
  if (row.empty()) throw InvalidInput("row_key of an empty row");
  RowKey key = row[0];
  for (std::size_t j = 1; j < row.size(); ++j) key = cantor_pair(key, row[j]);
  return key;
}

Deduplicated deduplicate(const FeatureMatrix& m) {
  // Keys are injective, so equal keys mean equal rows.
  std::unordered_map<RowKey, std::size_t> first_seen;
  first_seen.reserve(m.rows());
  std::vector<std::size_t> forward(m.rows());
  std::vector<Feature> distinct;
  std::size_t count = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto [it, inserted] = first_seen.try_emplace(row_key(m.row(i)), count);
    if (inserted) {
      auto r = m.row(i);
      distinct.insert(distinct.end(), r.begin(), r.end());
      ++count;
    }
    forward[i] = it->second;
  }
  return {FeatureMatrix(count, m.cols(), std::move(distinct)), ReductionMap(std::move(forward), count)};
}

LabelVector upsample_labels(std::span<const Label> labels, const ReductionMap& map) {
  if (labels.size() != map.reduced_count()) {
    throw InvalidInput("label count " + std::to_string(labels.size()) + " does not match " +
                       std::to_string(map.reduced_count()) + " reduced rows");
  }
  LabelVector out(map.source_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = labels[map[i]];
  return out;
}

std::size_t compact_labels(std::span<Label> labels) {
  std::unordered_map<Label, Label> remap;
  for (Label& l : labels) {
    auto [it, inserted] = remap.try_emplace(l, remap.size());
    l = it->second;
  }
  return remap.size();
}

}  // namespace pottsseg
