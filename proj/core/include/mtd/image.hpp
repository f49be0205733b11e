#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mtd {

/// Row-major grid of real intensities. Invariant: data().size() ==
/// width() * height() and every value is finite (checked by validate()).
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> data);

  static Image square(int side, double fill = 0.0) { return Image(side, side, fill); }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool is_square() const noexcept { return width_ == height_; }
  /// Side length of a square image (width).
  int side() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& at(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }
  double at(int row, int col) const {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Throws NumericError if any value is NaN or infinite.
  void validate() const;
  bool all_finite() const noexcept;

  Image& operator+=(const Image& rhs);
  Image& operator-=(const Image& rhs);
  Image& operator*=(double s);

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

Image operator+(Image lhs, const Image& rhs);
Image operator-(Image lhs, const Image& rhs);
Image operator*(double s, Image img);

double frobenius_norm(const Image& img);
double squared_norm(const Image& img);
double dot(const Image& a, const Image& b);

}  // namespace mtd
