#pragma once

// Long-tailed class profiles, subsampling, and Many/Med/Few categories.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curaug/rng.hpp"

namespace curaug {

/// Per-class sample counts, non-increasing.
struct ClassProfile {
  std::vector<std::int64_t> counts;

  std::size_t num_classes() const noexcept { return counts.size(); }
  std::int64_t n_max() const { return counts.front(); }
  std::int64_t n_min() const { return counts.back(); }
  double imbalance_ratio() const { return static_cast<double>(n_max()) / static_cast<double>(n_min()); }
  std::int64_t total() const noexcept {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }

  void validate() const {
    if (counts.empty()) throw std::invalid_argument("profile: no classes");
    for (std::size_t k = 0; k < counts.size(); ++k) {
      if (counts[k] < 1) {
        throw std::invalid_argument("profile: class " + std::to_string(k) + " has count " +
                                    std::to_string(counts[k]));
      }
      if (k > 0 && counts[k] > counts[k - 1]) {
        throw std::invalid_argument("profile: counts increase at class " + std::to_string(k));
      }
    }
  }
};

inline std::int64_t round_half_even(double v) { return static_cast<std::int64_t>(std::nearbyint(v)); }

/// Exponential decay from n_max to n_max / ir over C classes:
/// counts[k] = round(n_max * ir^(-k/(C-1))).
inline ClassProfile exp_profile(int num_classes, std::int64_t n_max, double ir) {
  if (num_classes < 2) throw std::invalid_argument("exp_profile: need at least 2 classes");
  if (!(ir >= 1.0)) throw std::invalid_argument("exp_profile: imbalance ratio must be >= 1");
  if (static_cast<double>(n_max) < ir) throw std::invalid_argument("exp_profile: n_max must be >= imbalance ratio");
  ClassProfile p;
  p.counts.resize(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) {
    p.counts[k] = round_half_even(static_cast<double>(n_max) *
                                  std::pow(ir, -static_cast<double>(k) / (num_classes - 1)));
  }
  p.counts.front() = n_max;
  p.counts.back() = round_half_even(static_cast<double>(n_max) / ir);
  for (std::size_t k = 0; k < p.counts.size(); ++k) {
    if (p.counts[k] < 1) throw std::invalid_argument("exp_profile: class " + std::to_string(k) + " gets zero samples");
  }
  return p;
}

/// Rank-power profile: counts[k] follows (k+1)^(-1/alpha), affinely rescaled so
/// that counts[0] = n_max and counts[C-1] = n_min.
inline ClassProfile pareto_profile(int num_classes, std::int64_t n_max, std::int64_t n_min,
                                   double alpha = 0.6) {
  if (num_classes < 2) throw std::invalid_argument("pareto_profile: need at least 2 classes");
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("pareto_profile: need n_max >= n_min >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("pareto_profile: alpha must be positive");
  const auto shape = [alpha](int k) { return std::pow(static_cast<double>(k + 1), -1.0 / alpha); };
  const double top = shape(0);
  const double bottom = shape(num_classes - 1);
  ClassProfile p;
  p.counts.resize(static_cast<std::size_t>(num_classes));
  for (int k = 0; k < num_classes; ++k) {
    const double t = (shape(k) - bottom) / (top - bottom);
    p.counts[k] = round_half_even(static_cast<double>(n_min) + t * static_cast<double>(n_max - n_min));
  }
  p.counts.front() = n_max;
  p.counts.back() = n_min;
  for (std::size_t k = 1; k < p.counts.size(); ++k) p.counts[k] = std::min(p.counts[k], p.counts[k - 1]);
  for (auto& c : p.counts) c = std::max(c, n_min);
  return p;
}

/// Keeps exactly counts[c] samples of each class c, uniformly without
/// replacement. Returns kept sample ids in ascending order.
inline std::vector<std::size_t> subsample(std::span<const int> labels, const ClassProfile& profile,
                                          Rng& rng) {
  const std::size_t C = profile.num_classes();
  std::vector<std::vector<std::size_t>> by_class(C);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= C) {
      throw std::out_of_range("subsample: label " + std::to_string(labels[i]) + " of sample " +
                              std::to_string(i) + " outside profile");
    }
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < C; ++c) {
    auto& pool = by_class[c];
    const auto want = static_cast<std::size_t>(profile.counts[c]);
    if (pool.size() < want) {
      throw std::invalid_argument("subsample: class " + std::to_string(c) + " has " +
                                  std::to_string(pool.size()) + " samples, profile needs " +
                                  std::to_string(want));
    }
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < want; ++i) {
      const auto j = i + rng.uniform_index(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    kept.insert(kept.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(want));
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

inline constexpr std::int64_t kManyThreshold = 100;
inline constexpr std::int64_t kFewThreshold = 20;

struct CategoryMasks {
  std::vector<int> many;  // count > 100
  std::vector<int> med;   // 20 <= count <= 100
  std::vector<int> few;   // count < 20
};

enum class Category { Many, Med, Few };

inline Category category_of(std::int64_t count) noexcept {
  if (count > kManyThreshold) return Category::Many;
  if (count >= kFewThreshold) return Category::Med;
  return Category::Few;
}

inline CategoryMasks categorize(const ClassProfile& profile) {
  CategoryMasks m;
  for (std::size_t c = 0; c < profile.counts.size(); ++c) {
    switch (category_of(profile.counts[c])) {
      case Category::Many: m.many.push_back(static_cast<int>(c)); break;
      case Category::Med: m.med.push_back(static_cast<int>(c)); break;
      case Category::Few: m.few.push_back(static_cast<int>(c)); break;
    }
  }
  return m;
}

/// Labels of a dataset laid out class by class following the profile.
inline std::vector<int> labels_from_profile(const ClassProfile& profile) {
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(profile.total()));
  for (std::size_t c = 0; c < profile.counts.size(); ++c)
    labels.insert(labels.end(), static_cast<std::size_t>(profile.counts[c]), static_cast<int>(c));
  return labels;
}

}  // namespace curaug
