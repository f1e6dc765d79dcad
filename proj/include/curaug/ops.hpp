#pragma once

// The 22 augmentation operations and the strength-to-magnitude mapping.
//
// Random draws made inside apply_op (all other ops draw nothing):
//   Color, Contrast, Brightness, Sharpness: one uniform01() for the factor sign.
//   ResizeCrop: uniform_index() for the x offset, then for the y offset.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curaug/image.hpp"
#include "curaug/rng.hpp"

namespace curaug {

enum class OpKind : std::uint8_t {
  Flip,
  Mirror,
  EdgeEnhance,
  Detail,
  Smooth,
  AutoContrast,
  Equalize,
  Invert,
  GaussianBlur,
  ResizeCrop,
  Rotate,
  Posterize,
  Solarize,
  SolarizeAdd,
  Color,
  Contrast,
  Brightness,
  Sharpness,
  ShearX,
  ShearY,
  TranslateX,
  TranslateY,
};

inline constexpr int kNumOps = 22;
inline constexpr int kMagnitudeLevels = 30;
inline constexpr std::uint8_t kFillGray = 128;

enum class ParamClass : std::uint8_t { OnOff, Ranged };

struct OpSpec {
  OpKind kind;
  std::string_view name;
  ParamClass param_class;
  // Raw parameter range as tabulated.
  double table_min;
  double table_max;
  // Effect at s = 0 and s = S. For the enhancement ops the drawn sign mirrors
  // the factor about 1.0, so [weakest, strongest] = [1.0, 1.9] covers the
  // tabulated [0.1, 1.9].
  double weakest;
  double strongest;
  std::string_view unit;
};

/// Magnitude of one application. OnOff ops carry a switch marker only.
struct Magnitude {
  double value = 0.0;
  bool is_switch = false;

  static constexpr Magnitude on() { return {1.0, true}; }
  friend bool operator==(const Magnitude&, const Magnitude&) = default;
};

inline constexpr std::array<OpSpec, kNumOps> kCatalog{{
    {OpKind::Flip, "Flip", ParamClass::OnOff, 0, 0, 0, 0, "on/off"},
    {OpKind::Mirror, "Mirror", ParamClass::OnOff, 0, 0, 0, 0, "on/off"},
    {OpKind::EdgeEnhance, "EdgeEnhance", ParamClass::OnOff, 0, 0, 0, 0, "on/off"},
    {OpKind::Detail, "Detail", ParamClass::OnOff, 0, 0, 0, 0, "on/off"},
    {OpKind::Smooth, "Smooth", ParamClass::OnOff, 0, 0, 0, 0, "on/off"},
    {OpKind::AutoContrast, "AutoContrast", ParamClass::OnOff, 0, 0, 0, 0, "on/off"},
    {OpKind::Equalize, "Equalize", ParamClass::OnOff, 0, 0, 0, 0, "on/off"},
    {OpKind::Invert, "Invert", ParamClass::OnOff, 0, 0, 0, 0, "on/off"},
    {OpKind::GaussianBlur, "GaussianBlur", ParamClass::Ranged, 0, 2, 0, 2, "sigma (pixels)"},
    {OpKind::ResizeCrop, "ResizeCrop", ParamClass::Ranged, 1, 1.3, 1, 1.3, "scale factor"},
    {OpKind::Rotate, "Rotate", ParamClass::Ranged, 0, 30, 0, 30, "degrees"},
    {OpKind::Posterize, "Posterize", ParamClass::Ranged, 0, 4, 0, 4, "bits removed"},
    {OpKind::Solarize, "Solarize", ParamClass::Ranged, 0, 256, 256, 0, "threshold"},
    {OpKind::SolarizeAdd, "SolarizeAdd", ParamClass::Ranged, 0, 110, 0, 110, "addend"},
    {OpKind::Color, "Color", ParamClass::Ranged, 0.1, 1.9, 1.0, 1.9, "factor"},
    {OpKind::Contrast, "Contrast", ParamClass::Ranged, 0.1, 1.9, 1.0, 1.9, "factor"},
    {OpKind::Brightness, "Brightness", ParamClass::Ranged, 0.1, 1.9, 1.0, 1.9, "factor"},
    {OpKind::Sharpness, "Sharpness", ParamClass::Ranged, 0.1, 1.9, 1.0, 1.9, "factor"},
    {OpKind::ShearX, "ShearX", ParamClass::Ranged, 0, 0.3, 0, 0.3, "shear coefficient"},
    {OpKind::ShearY, "ShearY", ParamClass::Ranged, 0, 0.3, 0, 0.3, "shear coefficient"},
    {OpKind::TranslateX, "TranslateX", ParamClass::Ranged, 0, 100, 0, 100, "pixels"},
    {OpKind::TranslateY, "TranslateY", ParamClass::Ranged, 0, 100, 0, 100, "pixels"},
}};

inline const std::array<OpSpec, kNumOps>& op_catalog() noexcept { return kCatalog; }

inline const OpSpec& op_spec(OpKind kind) noexcept {
  return kCatalog[static_cast<std::size_t>(kind)];
}

inline std::string_view op_name(OpKind kind) noexcept { return op_spec(kind).name; }

/// 1-based position in the catalog (k in 1..K).
inline int catalog_index(OpKind kind) noexcept { return static_cast<int>(kind) + 1; }

inline OpKind op_from_index(int k) {
  if (k < 1 || k > kNumOps) {
    throw std::out_of_range("op index " + std::to_string(k) + " outside 1.." +
                            std::to_string(kNumOps));
  }
  return static_cast<OpKind>(k - 1);
}

inline std::optional<OpKind> op_from_name(std::string_view name) noexcept {
  for (const auto& spec : kCatalog) {
    if (spec.name == name) return spec.kind;
  }
  return std::nullopt;
}

inline bool is_enhancement(OpKind kind) noexcept {
  return kind == OpKind::Color || kind == OpKind::Contrast || kind == OpKind::Brightness ||
         kind == OpKind::Sharpness;
}

/// Linear strength-to-magnitude map over `levels` steps.
inline Magnitude magnitude(OpKind kind, int s, int levels = kMagnitudeLevels) {
  if (levels < 1) throw std::out_of_range("magnitude: levels must be positive");
  if (s < 0 || s > levels) {
    throw std::out_of_range("magnitude: strength " + std::to_string(s) + " outside 0.." +
                            std::to_string(levels));
  }
  const auto& spec = op_spec(kind);
  if (spec.param_class == ParamClass::OnOff) return Magnitude::on();
  return {spec.weakest + (spec.strongest - spec.weakest) * s / levels, false};
}

namespace detail {

using Kernel3 = std::array<double, 9>;

inline int clamp_coord(int v, int hi) noexcept { return std::clamp(v, 0, hi - 1); }

inline RasterImage convolve3x3(const RasterImage& img, const Kernel3& k, double divisor) {
  RasterImage out(img.width(), img.height());
  const int w = img.width();
  const int h = img.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            acc += k[(dy + 1) * 3 + (dx + 1)] *
                   img.at(clamp_coord(x + dx, w), clamp_coord(y + dy, h), c);
          }
        }
        out.at(x, y, c) = to_channel(acc / divisor);
      }
    }
  }
  return out;
}

inline constexpr Kernel3 kEdgeEnhanceKernel{-1, -1, -1, -1, 10, -1, -1, -1, -1};
inline constexpr Kernel3 kDetailKernel{0, -1, 0, -1, 10, -1, 0, -1, 0};
inline constexpr Kernel3 kSmoothKernel{1, 1, 1, 1, 5, 1, 1, 1, 1};

inline double kernel_sum(const Kernel3& k) noexcept {
  double s = 0.0;
  for (double v : k) s += v;
  return s;
}

using Lut = std::array<std::uint8_t, 256>;

inline RasterImage apply_luts(const RasterImage& img, const std::array<Lut, 3>& luts) {
  RasterImage out = img;
  auto bytes = out.bytes();
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = luts[i % 3][bytes[i]];
  return out;
}

inline std::array<std::array<std::uint64_t, 256>, 3> histograms(const RasterImage& img) {
  std::array<std::array<std::uint64_t, 256>, 3> hist{};
  auto bytes = img.bytes();
  for (std::size_t i = 0; i < bytes.size(); ++i) ++hist[i % 3][bytes[i]];
  return hist;
}

inline Lut identity_lut() noexcept {
  Lut lut{};
  for (int i = 0; i < 256; ++i) lut[i] = static_cast<std::uint8_t>(i);
  return lut;
}

// Bilinear sample of channel c at (sx, sy); neighbours outside the image take `fill`.
inline double sample_fill(const RasterImage& img, double sx, double sy, int c, double fill) {
  const double fx0 = std::floor(sx);
  const double fy0 = std::floor(sy);
  const double fx = sx - fx0;
  const double fy = sy - fy0;
  // Far outside: all four neighbours are fill.
  if (fx0 < -1.0 || fy0 < -1.0 || fx0 > img.width() || fy0 > img.height()) return fill;
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  auto px = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return fill;
    return img.at(x, y, c);
  };
  return (1.0 - fx) * (1.0 - fy) * px(x0, y0) + fx * (1.0 - fy) * px(x0 + 1, y0) +
         (1.0 - fx) * fy * px(x0, y0 + 1) + fx * fy * px(x0 + 1, y0 + 1);
}

// Bilinear sample with clamp-to-edge addressing.
inline double sample_clamp(const RasterImage& img, double sx, double sy, int c) {
  sx = std::clamp(sx, 0.0, static_cast<double>(img.width() - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(img.height() - 1));
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = sx - x0;
  const double fy = sy - y0;
  return (1.0 - fx) * (1.0 - fy) * img.at(x0, y0, c) + fx * (1.0 - fy) * img.at(x1, y0, c) +
         (1.0 - fx) * fy * img.at(x0, y1, c) + fx * fy * img.at(x1, y1, c);
}

// Inverse-mapped warp: `src_of(x, y)` returns the source coordinate for output (x, y).
template <class SourceFn>
RasterImage warp(const RasterImage& img, SourceFn src_of) {
  RasterImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto [sx, sy] = src_of(static_cast<double>(x), static_cast<double>(y));
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = to_channel(sample_fill(img, sx, sy, c, kFillGray));
    }
  }
  return out;
}

inline bool is_single_pixel(const RasterImage& img) noexcept {
  return img.width() == 1 && img.height() == 1;
}

inline RasterImage flip(const RasterImage& img) {
  RasterImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.set_pixel(x, img.height() - 1 - y, img.pixel(x, y));
  return out;
}

inline RasterImage mirror(const RasterImage& img) {
  RasterImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.set_pixel(img.width() - 1 - x, y, img.pixel(x, y));
  return out;
}

inline RasterImage gaussian_blur(const RasterImage& img, double sigma) {
  if (!(sigma > 0.0)) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    total += k[i + radius];
  }
  for (auto& v : k) v /= total;

  const int w = img.width();
  const int h = img.height();
  std::vector<double> tmp(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[i + radius] * img.at(clamp_coord(x + i, w), y, c);
        tmp[(static_cast<std::size_t>(y) * w + x) * 3 + c] = acc;
      }
  RasterImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[i + radius] * tmp[(static_cast<std::size_t>(clamp_coord(y + i, h)) * w + x) * 3 + c];
        out.at(x, y, c) = to_channel(acc);
      }
  return out;
}

inline RasterImage resize_crop(const RasterImage& img, double scale, Rng& rng) {
  const int w = img.width();
  const int h = img.height();
  const int nw = std::max(w, static_cast<int>(std::nearbyint(w * scale)));
  const int nh = std::max(h, static_cast<int>(std::nearbyint(h * scale)));
  const auto ox = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(nw - w) + 1));
  const auto oy = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(nh - h) + 1));
  if (nw == w && nh == h) return img;
  const double rx = static_cast<double>(w) / nw;
  const double ry = static_cast<double>(h) / nh;
  RasterImage out(w, h);
  for (int y = 0; y < h; ++y) {
    const double sy = (y + oy + 0.5) * ry - 0.5;
    for (int x = 0; x < w; ++x) {
      const double sx = (x + ox + 0.5) * rx - 0.5;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = to_channel(sample_clamp(img, sx, sy, c));
    }
  }
  return out;
}

// Counter-clockwise on screen (y axis pointing down), about the image centre.
inline RasterImage rotate(const RasterImage& img, double degrees) {
  if (is_single_pixel(img) || degrees == 0.0) return img;
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cx = (img.width() - 1) / 2.0;
  const double cy = (img.height() - 1) / 2.0;
  return warp(img, [&](double x, double y) {
    const double dx = x - cx;
    const double dy = y - cy;
    return std::pair{cx + cs * dx - sn * dy, cy + sn * dx + cs * dy};
  });
}

inline Lut autocontrast_lut(const std::array<std::uint64_t, 256>& hist, double cutoff) {
  std::uint64_t total = 0;
  for (auto v : hist) total += v;
  const auto cut = static_cast<std::uint64_t>(std::floor(static_cast<double>(total) * cutoff));
  // Drop `cut` pixels from each end of the histogram.
  auto h = hist;
  std::uint64_t remove = cut;
  for (int i = 0; i < 256 && remove > 0; ++i) {
    const auto take = std::min(remove, h[i]);
    h[i] -= take;
    remove -= take;
  }
  remove = cut;
  for (int i = 255; i >= 0 && remove > 0; --i) {
    const auto take = std::min(remove, h[i]);
    h[i] -= take;
    remove -= take;
  }
  int lo = 0;
  while (lo < 256 && h[lo] == 0) ++lo;
  int hi = 255;
  while (hi >= 0 && h[hi] == 0) --hi;
  if (lo >= hi) return identity_lut();
  const double scale = 255.0 / (hi - lo);
  Lut lut{};
  for (int i = 0; i < 256; ++i) lut[i] = to_channel((i - lo) * scale);
  return lut;
}

inline Lut equalize_lut(const std::array<std::uint64_t, 256>& hist) {
  std::uint64_t total = 0;
  std::uint64_t last_nonzero = 0;
  int nonzero = 0;
  for (auto v : hist) {
    total += v;
    if (v) {
      last_nonzero = v;
      ++nonzero;
    }
  }
  if (nonzero <= 1) return identity_lut();
  const std::uint64_t step = (total - last_nonzero) / 255;
  if (step == 0) return identity_lut();
  Lut lut{};
  std::uint64_t n = step / 2;
  for (int i = 0; i < 256; ++i) {
    lut[i] = static_cast<std::uint8_t>(std::min<std::uint64_t>(255, n / step));
    n += hist[i];
  }
  return lut;
}

inline double luma(const RasterImage& img, int x, int y) noexcept {
  return 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2);
}

// Blend `img` away from a degenerate image: d + factor * (img - d).
template <class DegenerateFn>
RasterImage blend_from(const RasterImage& img, double factor, DegenerateFn degenerate) {
  if (factor == 1.0) return img;
  RasterImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) {
        const double d = degenerate(x, y, c);
        out.at(x, y, c) = to_channel(d + factor * (img.at(x, y, c) - d));
      }
  return out;
}

inline RasterImage enhance(const RasterImage& img, OpKind kind, double factor) {
  switch (kind) {
    case OpKind::Color:
      return blend_from(img, factor, [&](int x, int y, int) { return luma(img, x, y); });
    case OpKind::Contrast: {
      double mean = 0.0;
      for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) mean += luma(img, x, y);
      mean /= static_cast<double>(img.pixel_count());
      return blend_from(img, factor, [mean](int, int, int) { return mean; });
    }
    case OpKind::Brightness:
      return blend_from(img, factor, [](int, int, int) { return 0.0; });
    case OpKind::Sharpness: {
      // Smoothed interior, original border.
      const int w = img.width();
      const int h = img.height();
      const double div = kernel_sum(kSmoothKernel);
      return blend_from(img, factor, [&](int x, int y, int c) -> double {
        if (x == 0 || y == 0 || x == w - 1 || y == h - 1) return img.at(x, y, c);
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            acc += kSmoothKernel[(dy + 1) * 3 + (dx + 1)] * img.at(x + dx, y + dy, c);
        return acc / div;
      });
    }
    default:
      throw std::logic_error("enhance: not an enhancement op");
  }
}

}  // namespace detail

/// Per-channel autocontrast dropping `cutoff` (fraction) of pixels at each end.
inline RasterImage autocontrast(const RasterImage& img, double cutoff = 0.0) {
  const auto hist = detail::histograms(img);
  return detail::apply_luts(img, {detail::autocontrast_lut(hist[0], cutoff),
                                  detail::autocontrast_lut(hist[1], cutoff),
                                  detail::autocontrast_lut(hist[2], cutoff)});
}

inline RasterImage equalize(const RasterImage& img) {
  const auto hist = detail::histograms(img);
  return detail::apply_luts(img, {detail::equalize_lut(hist[0]), detail::equalize_lut(hist[1]),
                                  detail::equalize_lut(hist[2])});
}

/// Applies one operation at magnitude `m`. Output has the input's dimensions.
inline RasterImage apply_op(const RasterImage& img, OpKind kind, Magnitude m, Rng& rng) {
  using namespace detail;
  const double v = m.value;
  switch (kind) {
    case OpKind::Flip:
      return flip(img);
    case OpKind::Mirror:
      return mirror(img);
    case OpKind::EdgeEnhance:
      return convolve3x3(img, kEdgeEnhanceKernel, kernel_sum(kEdgeEnhanceKernel));
    case OpKind::Detail:
      return convolve3x3(img, kDetailKernel, kernel_sum(kDetailKernel));
    case OpKind::Smooth:
      return convolve3x3(img, kSmoothKernel, kernel_sum(kSmoothKernel));
    case OpKind::AutoContrast:
      return autocontrast(img);
    case OpKind::Equalize:
      return equalize(img);
    case OpKind::Invert: {
      RasterImage out = img;
      for (auto& b : out.bytes()) b = static_cast<std::uint8_t>(255 - b);
      return out;
    }
    case OpKind::GaussianBlur:
      return gaussian_blur(img, v);
    case OpKind::ResizeCrop:
      return resize_crop(img, v, rng);
    case OpKind::Rotate:
      return rotate(img, v);
    case OpKind::Posterize: {
      const int bits = std::clamp(static_cast<int>(std::nearbyint(v)), 0, 8);
      const auto mask = static_cast<std::uint8_t>(0xFF << bits);
      RasterImage out = img;
      for (auto& b : out.bytes()) b &= mask;
      return out;
    }
    case OpKind::Solarize: {
      RasterImage out = img;
      for (auto& b : out.bytes())
        if (b >= v) b = static_cast<std::uint8_t>(255 - b);
      return out;
    }
    case OpKind::SolarizeAdd: {
      RasterImage out = img;
      for (auto& b : out.bytes())
        if (b < 128) b = to_channel(b + v);
      return out;
    }
    case OpKind::Color:
    case OpKind::Contrast:
    case OpKind::Brightness:
    case OpKind::Sharpness: {
      const double factor = rng.uniform01() < 0.5 ? v : 2.0 - v;
      return enhance(img, kind, factor);
    }
    case OpKind::ShearX:
      if (is_single_pixel(img) || v == 0.0) return img;
      return warp(img, [v](double x, double y) { return std::pair{x - v * y, y}; });
    case OpKind::ShearY:
      if (is_single_pixel(img) || v == 0.0) return img;
      return warp(img, [v](double x, double y) { return std::pair{x, y - v * x}; });
    case OpKind::TranslateX: {
      const double t = std::min(v, static_cast<double>(img.width() - 1));
      if (t == 0.0) return img;
      return warp(img, [t](double x, double y) { return std::pair{x - t, y}; });
    }
    case OpKind::TranslateY: {
      const double t = std::min(v, static_cast<double>(img.height() - 1));
      if (t == 0.0) return img;
      return warp(img, [t](double x, double y) { return std::pair{x, y - t}; });
    }
  }
  throw std::logic_error("apply_op: unknown op kind");
}

}  // namespace curaug
