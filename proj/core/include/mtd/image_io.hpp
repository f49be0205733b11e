#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mtd/image.hpp"

namespace mtd {

enum class Normalization {
  kNone,
  kMaxOne,          // divide by the maximum value (no-op for an all-zero image)
  kUnitFrobenius,   // divide by the Frobenius norm
};

Normalization parse_normalization(const std::string& name);
std::string to_string(Normalization mode);

/// How raw dataset records become target images.
struct DatasetSpec {
  std::filesystem::path source;
  int crop_margin = 4;  // pixels removed from every side before resizing
  int side = 14;        // target side length L
  Normalization normalization = Normalization::kMaxOne;

  void validate() const;
};

/// Decodes an IDX image file (magic 0x00 0x00 0x08 0x03, big-endian sizes).
/// Pixel bytes map to [0,1] by division by 255.
std::vector<Image> parse_idx(std::span<const std::uint8_t> bytes);

/// Decodes an IDX label file (magic 0x00 0x00 0x08 0x01).
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

/// Removes `spec.crop_margin` pixels from every side, then bilinearly resizes
/// (half-pixel centres, edge clamped) to spec.side x spec.side. Does not
/// normalize; see prepare_image().
Image crop_and_resize(const Image& img, const DatasetSpec& spec);

Image resize_bilinear(const Image& img, int width, int height);

Image normalize(Image img, Normalization mode);

/// crop_and_resize followed by normalize.
Image prepare_image(const Image& img, const DatasetSpec& spec);

/// Maps [0,1] to a byte: clip, then floor(v * 255 + 0.5).
std::uint8_t quantize(double v);

/// Writes an 8-bit grayscale raster. Format follows the extension (.png or
/// .pgm); values are clipped to [0,1] and quantized with quantize().
void write_raster(const Image& img, const std::filesystem::path& path);

/// Reads an 8-bit grayscale PNG or binary PGM back into [0,1] intensities.
Image read_raster(const std::filesystem::path& path);

/// Full-precision text form: one comma-separated row per line.
void write_image_csv(const Image& img, const std::filesystem::path& path);
Image read_image_csv(const std::filesystem::path& path);

/// .csv goes through the lossless text form, anything else through
/// write_raster / read_raster.
void save_image(const Image& img, const std::filesystem::path& path);
Image load_image(const std::filesystem::path& path);

}  // namespace mtd
