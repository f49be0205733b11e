#include "mtd/image.hpp"

#include <cmath>
#include <string>

#include "mtd/error.hpp"

namespace mtd {

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw ShapeError("negative image dimensions");
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

Image::Image(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width < 0 || height < 0) throw ShapeError("negative image dimensions");
  if (data_.size() != static_cast<std::size_t>(width) * height) {
    throw ShapeError("image data length " + std::to_string(data_.size()) + " != " +
                     std::to_string(width) + "x" + std::to_string(height));
  }
}

bool Image::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Image::validate() const {
  if (!all_finite()) throw NumericError("image contains non-finite values");
}

Image& Image::operator+=(const Image& rhs) {
  if (!same_shape(rhs)) throw ShapeError("image addition shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

Image& Image::operator-=(const Image& rhs) {
  if (!same_shape(rhs)) throw ShapeError("image subtraction shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

Image& Image::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Image operator+(Image lhs, const Image& rhs) { return lhs += rhs; }
Image operator-(Image lhs, const Image& rhs) { return lhs -= rhs; }
Image operator*(double s, Image img) { return img *= s; }

double squared_norm(const Image& img) {
  double acc = 0.0;
  for (double v : img.values()) acc += v * v;
  return acc;
}

double frobenius_norm(const Image& img) { return std::sqrt(squared_norm(img)); }

double dot(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ShapeError("dot product shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace mtd
