#include "mtd/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mtd/error.hpp"

namespace mtd {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

struct IdxHeader {
  std::vector<std::uint32_t> dims;
  std::size_t payload_offset = 0;
};

IdxHeader parse_idx_header(std::span<const std::uint8_t> bytes, std::uint8_t expected_dims) {
  if (bytes.size() < 4) throw FormatError("IDX: file shorter than magic number");
  if (bytes[0] != 0 || bytes[1] != 0) throw FormatError("IDX: bad magic (leading bytes not zero)");
  if (bytes[2] != 0x08) throw FormatError("IDX: only unsigned byte payloads (type 0x08) supported");
  if (bytes[3] != expected_dims) {
    throw FormatError("IDX: expected " + std::to_string(expected_dims) + " dimensions, found " +
                      std::to_string(bytes[3]));
  }
  IdxHeader header;
  header.payload_offset = 4 + 4 * std::size_t{expected_dims};
  if (bytes.size() < header.payload_offset) throw LengthError("IDX header");
  for (std::uint8_t d = 0; d < expected_dims; ++d) header.dims.push_back(read_be32(bytes, 4 + 4 * d));
  return header;
}

double sample_clamped(const Image& img, int row, int col) {
  row = std::clamp(row, 0, img.height() - 1);
  col = std::clamp(col, 0, img.width() - 1);
  return img.at(row, col);
}

// Source coordinate for output index `dst` under half-pixel alignment.
double source_coord(int dst, double scale) {
  return std::max(0.0, (dst + 0.5) * scale - 0.5);
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

void write_pgm(const std::vector<std::uint8_t>& pixels, int width, int height,
               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw FormatError("PGM: expected binary P5 header in " + path.string());
  auto next_int = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
      in >> std::ws;
    }
    int v = -1;
    in >> v;
    if (!in) throw FormatError("PGM: malformed header in " + path.string());
    return v;
  };
  const int width = next_int();
  const int height = next_int();
  const int maxval = next_int();
  if (width <= 0 || height <= 0 || maxval != 255) {
    throw FormatError("PGM: only 8-bit images with positive size supported");
  }
  in.get();  // single whitespace after maxval
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) throw LengthError("PGM payload");
  Image img(width, height);
  for (std::size_t i = 0; i < pixels.size(); ++i) img[i] = pixels[i] / 255.0;
  return img;
}

void write_png(const std::vector<std::uint8_t>& pixels, int width, int height,
               const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError("PNG write failed for " + path.string() + ": " + msg);
  }
}

Image read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    std::string msg = image.message;
    png_image_free(&image);
    if (!std::filesystem::exists(path)) throw IoError("cannot open for reading: " + path.string());
    throw FormatError("PNG read failed for " + path.string() + ": " + msg);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw FormatError("PNG decode failed for " + path.string() + ": " + msg);
  }
  Image img(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = pixels[i] / 255.0;
  return img;
}

}  // namespace

Normalization parse_normalization(const std::string& name) {
  if (name == "none") return Normalization::kNone;
  if (name == "max1" || name == "max-1") return Normalization::kMaxOne;
  if (name == "frobenius" || name == "unit-frobenius") return Normalization::kUnitFrobenius;
  throw ConfigError("unknown normalization mode '" + name + "'");
}

std::string to_string(Normalization mode) {
  switch (mode) {
    case Normalization::kNone: return "none";
    case Normalization::kMaxOne: return "max1";
    case Normalization::kUnitFrobenius: return "frobenius";
  }
  return "none";
}

void DatasetSpec::validate() const {
  if (crop_margin < 0) throw ConfigError("crop margin must be >= 0");
  if (side < 1) throw ConfigError("target side length must be >= 1");
}

std::vector<Image> parse_idx(std::span<const std::uint8_t> bytes) {
  const IdxHeader header = parse_idx_header(bytes, 3);
  const std::size_t count = header.dims[0];
  const std::size_t rows = header.dims[1];
  const std::size_t cols = header.dims[2];
  const std::size_t record = rows * cols;
  if (bytes.size() - header.payload_offset < count * record) {
    throw LengthError("IDX payload holds " + std::to_string(bytes.size() - header.payload_offset) +
                      " bytes, header promises " + std::to_string(count * record));
  }
  std::vector<Image> images;
  images.reserve(count);
  const std::uint8_t* p = bytes.data() + header.payload_offset;
  for (std::size_t n = 0; n < count; ++n) {
    Image img(static_cast<int>(cols), static_cast<int>(rows));
    for (std::size_t i = 0; i < record; ++i) img[i] = p[i] / 255.0;
    images.push_back(std::move(img));
    p += record;
  }
  return images;
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  const IdxHeader header = parse_idx_header(bytes, 1);
  const std::size_t count = header.dims[0];
  if (bytes.size() - header.payload_offset < count) throw LengthError("IDX label payload");
  std::vector<int> labels(count);
  for (std::size_t i = 0; i < count; ++i) labels[i] = bytes[header.payload_offset + i];
  return labels;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

Image resize_bilinear(const Image& img, int width, int height) {
  if (img.empty()) throw ShapeError("cannot resize an empty image");
  if (width < 1 || height < 1) throw ShapeError("resize target must be at least 1x1");
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  Image out(width, height);
  for (int r = 0; r < height; ++r) {
    const double y = source_coord(r, sy);
    const int y0 = static_cast<int>(std::floor(y));
    const double fy = y - y0;
    for (int c = 0; c < width; ++c) {
      const double x = source_coord(c, sx);
      const int x0 = static_cast<int>(std::floor(x));
      const double fx = x - x0;
      const double top = (1 - fx) * sample_clamped(img, y0, x0) + fx * sample_clamped(img, y0, x0 + 1);
      const double bottom =
          (1 - fx) * sample_clamped(img, y0 + 1, x0) + fx * sample_clamped(img, y0 + 1, x0 + 1);
      out.at(r, c) = (1 - fy) * top + fy * bottom;
    }
  }
  return out;
}

Image crop_and_resize(const Image& img, const DatasetSpec& spec) {
  spec.validate();
  const int m = spec.crop_margin;
  const int w = img.width() - 2 * m;
  const int h = img.height() - 2 * m;
  if (w <= 0 || h <= 0) {
    throw BoundsError("crop margin " + std::to_string(m) + " leaves no interior in a " +
                      std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
  }
  Image cropped(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) cropped.at(r, c) = img.at(r + m, c + m);
  }
  if (w == spec.side && h == spec.side) return cropped;
  return resize_bilinear(cropped, spec.side, spec.side);
}

Image normalize(Image img, Normalization mode) {
  double scale = 0.0;
  switch (mode) {
    case Normalization::kNone:
      return img;
    case Normalization::kMaxOne:
      for (double v : img.values()) scale = std::max(scale, v);
      break;
    case Normalization::kUnitFrobenius:
      scale = frobenius_norm(img);
      break;
  }
  if (scale > 0.0) img *= 1.0 / scale;
  return img;
}

Image prepare_image(const Image& img, const DatasetSpec& spec) {
  return normalize(crop_and_resize(img, spec), spec.normalization);
}

std::uint8_t quantize(double v) {
  const double clipped = std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(clipped * 255.0 + 0.5));
}

void write_raster(const Image& img, const std::filesystem::path& path) {
  img.validate();
  if (img.empty()) throw ShapeError("cannot write an empty raster");
  std::vector<std::uint8_t> pixels(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) pixels[i] = quantize(img[i]);
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_png(pixels, img.width(), img.height(), path);
  } else if (ext == ".pgm") {
    write_pgm(pixels, img.width(), img.height(), path);
  } else {
    throw ConfigError("unsupported raster extension '" + ext + "' (use .png or .pgm)");
  }
}

Image read_raster(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  throw ConfigError("unsupported raster extension '" + ext + "' (use .png or .pgm)");
}

void write_image_csv(const Image& img, const std::filesystem::path& path) {
  img.validate();
  if (img.empty()) throw ShapeError("cannot write an empty image");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.precision(17);
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) out << (c ? "," : "") << img.at(r, c);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Image read_image_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<double> values;
  int width = -1;
  int height = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    int count = 0;
    while (std::getline(row, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || cell.find_first_not_of(" \t\r", used) != std::string::npos) {
        throw FormatError("malformed value '" + cell + "' in " + path.string());
      }
      values.push_back(v);
      ++count;
    }
    if (width >= 0 && count != width) throw FormatError("ragged rows in " + path.string());
    width = count;
    ++height;
  }
  if (height == 0 || width <= 0) throw FormatError("no pixel rows in " + path.string());
  Image img(width, height, std::move(values));
  img.validate();
  return img;
}

void save_image(const Image& img, const std::filesystem::path& path) {
  if (lower_extension(path) == ".csv") {
    write_image_csv(img, path);
  } else {
    write_raster(img, path);
  }
}

Image load_image(const std::filesystem::path& path) {
  return lower_extension(path) == ".csv" ? read_image_csv(path) : read_raster(path);
}

}  // namespace mtd
