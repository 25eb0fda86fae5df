#include "pottsseg/io.hpp"

#include <png.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pottsseg/errors.hpp"

namespace pottsseg::io {
namespace {

bool has_png_signature(const std::string& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) == 0;
}

RgbImage decode_png(const std::string& bytes, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw IoError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  RgbImage out{image.width, image.height, std::vector<std::uint8_t>(PNG_IMAGE_SIZE(image))};
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError("cannot decode PNG " + path.string() + ": " + msg);
  }
  return out;
}

// Skips whitespace and '#' comments between PPM header tokens.
std::size_t ppm_token(const std::string& bytes, std::size_t& pos, const std::filesystem::path& path) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(bytes.data() + pos, bytes.data() + bytes.size(), value);
  if (ec != std::errc()) throw IoError("malformed PPM header in " + path.string());
  pos = static_cast<std::size_t>(ptr - bytes.data());
  return value;
}

RgbImage decode_ppm(const std::string& bytes, const std::filesystem::path& path) {
  std::size_t pos = 2;
  const std::size_t width = ppm_token(bytes, pos, path);
  const std::size_t height = ppm_token(bytes, pos, path);
  const std::size_t maxval = ppm_token(bytes, pos, path);
  if (maxval != 255) throw IoError("only 8-bit PPM is supported: " + path.string());
  ++pos;  // single whitespace byte before the raster
  const std::size_t need = width * height * 3;
  if (width == 0 || height == 0 || bytes.size() < pos + need) {
    throw IoError("truncated PPM raster in " + path.string());
  }
  RgbImage out{width, height, {}};
  out.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return out;
}

void encode_png(const std::filesystem::path& path, png_image& image, const void* buffer, const void* colormap) {
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer, 0, colormap)) {
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

[[noreturn]] void cell_error(std::size_t row, std::size_t col, const std::string& what) {
  throw ParseError("CSV row " + std::to_string(row + 1) + ", column " + std::to_string(col + 1) + ": " + what);
}

template <typename Fn>
void for_each_csv_line(const std::string& text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) fn(line_no++, line);
    start = end + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

RgbImage read_image(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  if (has_png_signature(bytes)) return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes, path);
  throw IoError("unrecognised image format (expected PNG or binary PPM): " + path.string());
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  std::ostringstream out;
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  write_text(path, out.str());
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  encode_png(path, png, image.pixels.data(), nullptr);
}

std::vector<std::array<std::uint8_t, 3>> segment_palette(std::size_t segments) {
  std::vector<std::array<std::uint8_t, 3>> palette(segments);
  for (std::size_t s = 0; s < segments; ++s) {
    const double h = 6.0 * static_cast<double>(s) / static_cast<double>(segments);
    const int sector = static_cast<int>(h) % 6;
    const double f = h - std::floor(h);
    const auto up = static_cast<std::uint8_t>(std::lround(255.0 * f));
    const auto down = static_cast<std::uint8_t>(255 - up);
    switch (sector) {
      case 0: palette[s] = {255, up, 0}; break;
      case 1: palette[s] = {down, 255, 0}; break;
      case 2: palette[s] = {0, 255, up}; break;
      case 3: palette[s] = {0, down, 255}; break;
      case 4: palette[s] = {up, 0, 255}; break;
      default: palette[s] = {255, 0, down}; break;
    }
  }
  return palette;
}

void write_label_png(const std::filesystem::path& path, std::span<const Label> labels, std::size_t width,
                     std::size_t height) {
  if (labels.size() != width * height) throw InvalidInput("label count does not match image dimensions");
  std::size_t segments = 0;
  for (Label l : labels) segments = std::max(segments, l + 1);
  const auto palette = segment_palette(segments);

  png_image png;
  std::memset(&png, 0, sizeof png);
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(width);
  png.height = static_cast<png_uint_32>(height);

  if (segments <= 256) {
    std::vector<std::uint8_t> index(labels.begin(), labels.end());
    std::vector<std::uint8_t> colormap;
    for (const auto& c : palette) colormap.insert(colormap.end(), c.begin(), c.end());
    png.format = PNG_FORMAT_RGB_COLORMAP;
    png.colormap_entries = static_cast<png_uint_32>(segments);
    encode_png(path, png, index.data(), colormap.data());
    return;
  }
  std::vector<std::uint8_t> rgb;
  rgb.reserve(labels.size() * 3);
  for (Label l : labels) rgb.insert(rgb.end(), palette[l].begin(), palette[l].end());
  png.format = PNG_FORMAT_RGB;
  encode_png(path, png, rgb.data(), nullptr);
}

FeatureMatrix parse_feature_csv(const std::string& text, const Quantization& q) {
  std::vector<Feature> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  for_each_csv_line(text, [&](std::size_t row, std::string_view line) {
    std::size_t col = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell = trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        cell_error(row, col, "not a number: '" + std::string(cell) + "'");
      }
      if (!q.scale.empty()) {
        if (col >= q.scale.size()) cell_error(row, col, "no quantization scale for this column");
        v *= q.scale[col];
      }
      if (!q.offset.empty()) {
        if (col >= q.offset.size()) cell_error(row, col, "no quantization offset for this column");
        v += q.offset[col];
      }
      const double rounded = std::floor(v + 0.5);
      if (!std::isfinite(rounded) || rounded < 0.0 || rounded > 9.0e15) {
        cell_error(row, col, "value does not quantize to a non-negative integer");
      }
      values.push_back(static_cast<Feature>(rounded));
      ++col;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (row == 0) {
      cols = col;
    } else if (col != cols) {
      cell_error(row, std::min(col, cols), "expected " + std::to_string(cols) + " columns, found " + std::to_string(col));
    }
    ++rows;
  });
  if (rows == 0) throw ParseError("CSV contains no data rows");
  return FeatureMatrix(rows, cols, std::move(values));
}

FeatureMatrix read_feature_csv(const std::filesystem::path& path, const Quantization& q) {
  return parse_feature_csv(read_text(path), q);
}

std::string format_feature_csv(const FeatureMatrix& m) {
  std::string out;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += std::to_string(m.at(i, j));
    }
    out += '\n';
  }
  return out;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
  write_text(path, format_feature_csv(m));
}

LabelVector parse_label_csv(const std::string& text) {
  LabelVector labels;
  for_each_csv_line(text, [&](std::size_t row, std::string_view line) {
    const std::string_view cell = trim(line);
    Label v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      cell_error(row, 0, "not a label: '" + std::string(cell) + "'");
    }
    labels.push_back(v);
  });
  return labels;
}

LabelVector read_label_csv(const std::filesystem::path& path) { return parse_label_csv(read_text(path)); }

std::string format_label_csv(std::span<const Label> labels) {
  std::string out;
  out.reserve(labels.size() * 3);
  for (Label l : labels) {
    out += std::to_string(l);
    out += '\n';
  }
  return out;
}

void write_label_csv(const std::filesystem::path& path, std::span<const Label> labels) {
  write_text(path, format_label_csv(labels));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

std::string file_digest(const std::filesystem::path& path) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : read_text(path)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pottsseg::io
