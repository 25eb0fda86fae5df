#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pottsseg/dataset.hpp"

namespace pottsseg::io {

/// Reads an 8-bit RGB image. PNG is decoded with libpng (palette and gray
/// inputs are expanded, alpha is dropped); binary PPM (P6, maxval 255) is
/// parsed directly. The format is sniffed from the file's magic bytes.
RgbImage read_image(const std::filesystem::path& path);

void write_ppm(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const RgbImage& image);

/// Writes labels as an indexed-color PNG, one palette entry per segment.
/// More than 256 segments cannot be indexed; the image is then written as RGB.
void write_label_png(const std::filesystem::path& path, std::span<const Label> labels, std::size_t width,
                     std::size_t height);

/// Evenly spaced hues around the color wheel, one per segment.
std::vector<std::array<std::uint8_t, 3>> segment_palette(std::size_t segments);

/// Per-column affine map applied to CSV values before rounding. Empty vectors
/// mean scale 1 and offset 0; otherwise one entry per column.
struct Quantization {
  std::vector<double> scale;
  std::vector<double> offset;
};

/// Headerless numeric CSV. Every cell is mapped through `q`, rounded half-up and
/// must land on a non-negative integer. Throws ParseError naming row and column.
FeatureMatrix parse_feature_csv(const std::string& text, const Quantization& q = {});
FeatureMatrix read_feature_csv(const std::filesystem::path& path, const Quantization& q = {});
std::string format_feature_csv(const FeatureMatrix& m);
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m);

LabelVector parse_label_csv(const std::string& text);
LabelVector read_label_csv(const std::filesystem::path& path);
std::string format_label_csv(std::span<const Label> labels);
void write_label_csv(const std::filesystem::path& path, std::span<const Label> labels);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace pottsseg::io
