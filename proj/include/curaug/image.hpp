#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace curaug {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB image, row-major, channels interleaved.
class RasterImage {
 public:
  static constexpr int kChannels = 3;

  RasterImage() = default;

  RasterImage(int width, int height, Rgb fill = {})
      : width_(checked_dim(width)), height_(checked_dim(height)),
        data_(static_cast<std::size_t>(width) * height * kChannels) {
    for (std::size_t i = 0; i < data_.size(); i += kChannels) {
      data_[i] = fill.r;
      data_[i + 1] = fill.g;
      data_[i + 2] = fill.b;
    }
  }

  RasterImage(int width, int height, std::vector<std::uint8_t> data)
      : width_(checked_dim(width)), height_(checked_dim(height)), data_(std::move(data)) {
    if (data_.size() != static_cast<std::size_t>(width) * height * kChannels) {
      throw std::invalid_argument("RasterImage: pixel buffer has " +
                                  std::to_string(data_.size()) + " bytes, expected " +
                                  std::to_string(static_cast<std::size_t>(width) * height * 3));
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width_) * height_;
  }
  bool empty() const noexcept { return data_.empty(); }

  std::uint8_t& at(int x, int y, int c) noexcept { return data_[offset(x, y) + c]; }
  std::uint8_t at(int x, int y, int c) const noexcept { return data_[offset(x, y) + c]; }

  Rgb pixel(int x, int y) const noexcept {
    const auto o = offset(x, y);
    return {data_[o], data_[o + 1], data_[o + 2]};
  }
  void set_pixel(int x, int y, Rgb p) noexcept {
    const auto o = offset(x, y);
    data_[o] = p.r;
    data_[o + 1] = p.g;
    data_[o + 2] = p.b;
  }

  std::span<std::uint8_t> bytes() noexcept { return data_; }
  std::span<const std::uint8_t> bytes() const noexcept { return data_; }

  bool same_shape(const RasterImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  static int checked_dim(int d) {
    if (d < 1) throw std::invalid_argument("RasterImage: dimensions must be >= 1");
    return d;
  }
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Rounds half-to-even and clamps to the channel range.
inline std::uint8_t to_channel(double v) noexcept {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::nearbyint(v));
}

}  // namespace curaug
