#pragma once

// Line chart of LoL trajectories: one line per class decile (classes ordered
// by id, i.e. head to tail), mean level per epoch.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "curaug/image.hpp"
#include "curaug/lol.hpp"

namespace curaug {

/// Mean level per epoch for each of `groups` contiguous class groups.
inline std::vector<std::vector<double>> group_means(const LoLTable& table, int groups = 10) {
  std::vector<std::vector<double>> means(static_cast<std::size_t>(groups));
  for (const auto& snapshot : table.history) {
    const auto C = snapshot.size();
    for (int g = 0; g < groups; ++g) {
      const auto lo = C * static_cast<std::size_t>(g) / static_cast<std::size_t>(groups);
      const auto hi = C * static_cast<std::size_t>(g + 1) / static_cast<std::size_t>(groups);
      double sum = 0.0;
      for (auto c = lo; c < hi; ++c) sum += snapshot[c];
      means[static_cast<std::size_t>(g)].push_back(hi > lo ? sum / static_cast<double>(hi - lo) : 0.0);
    }
  }
  return means;
}

namespace detail {

inline void draw_line(RasterImage& img, int x0, int y0, int x1, int y1, Rgb color) {
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (x0 >= 0 && y0 >= 0 && x0 < img.width() && y0 < img.height()) img.set_pixel(x0, y0, color);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

}  // namespace detail

/// Renders decile-mean trajectories; head decile red through tail decile blue.
inline RasterImage plot_trajectories(const LoLTable& table, int width = 640, int height = 360,
                                     int max_level = kMaxStrength) {
  constexpr int kMargin = 20;
  RasterImage img(width, height, Rgb{255, 255, 255});
  const Rgb axis{0, 0, 0};
  detail::draw_line(img, kMargin, height - kMargin, width - kMargin, height - kMargin, axis);
  detail::draw_line(img, kMargin, kMargin, kMargin, height - kMargin, axis);
  const auto means = group_means(table);
  const auto epochs = table.history.size();
  if (epochs < 2) return img;
  const auto to_x = [&](std::size_t e) {
    return kMargin + static_cast<int>(std::lround(static_cast<double>(e) * (width - 2 * kMargin) / (epochs - 1)));
  };
  const auto to_y = [&](double level) {
    return height - kMargin - static_cast<int>(std::lround(level * (height - 2 * kMargin) / max_level));
  };
  for (std::size_t g = 0; g < means.size(); ++g) {
    const double t = means.size() > 1 ? static_cast<double>(g) / static_cast<double>(means.size() - 1) : 0.0;
    const Rgb color{static_cast<std::uint8_t>(std::lround(220 * (1 - t))), 40,
                    static_cast<std::uint8_t>(std::lround(220 * t))};
    for (std::size_t e = 1; e < epochs; ++e) {
      detail::draw_line(img, to_x(e - 1), to_y(means[g][e - 1]), to_x(e), to_y(means[g][e]), color);
    }
  }
  return img;
}

}  // namespace curaug
