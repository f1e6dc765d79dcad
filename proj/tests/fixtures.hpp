#pragma once

// Shared test inputs.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "curaug/image.hpp"
#include "curaug/rng.hpp"

namespace curaug::test {

// Golden inputs. Changing these invalidates tests/golden/.
inline constexpr int kGoldenWidth = 32;
inline constexpr int kGoldenHeight = 24;
inline constexpr int kGoldenStrength = 20;
inline constexpr std::uint64_t kGoldenSeed = 20230501;

/// Gradients plus a bright square, so every op has something to act on.
inline RasterImage golden_input() {
  RasterImage img(kGoldenWidth, kGoldenHeight);
  for (int y = 0; y < kGoldenHeight; ++y)
    for (int x = 0; x < kGoldenWidth; ++x) {
      Rgb p{static_cast<std::uint8_t>(8 * x), static_cast<std::uint8_t>(10 * y),
            static_cast<std::uint8_t>(255 - 4 * (x + y))};
      if (x >= 10 && x < 18 && y >= 6 && y < 14) p = {240, 220, 30};
      img.set_pixel(x, y, p);
    }
  return img;
}

inline RasterImage random_image(Rng& rng, int max_side = 40) {
  const int w = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_side)));
  const int h = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(max_side)));
  RasterImage img(w, h);
  for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(rng.next_u64() >> 56);
  return img;
}

inline std::string golden_name(std::string_view op) { return std::string(op) + ".png"; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() /
             ("curaug_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace curaug::test
