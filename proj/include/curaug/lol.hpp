#pragma once

// Level-of-Learning (LoL) scores: probe planning, correct counting and the
// per-class level update.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curaug/compose.hpp"
#include "curaug/image.hpp"
#include "curaug/rng.hpp"

namespace curaug {

/// How a level's correct count is compared with gamma * T * (l + 1).
enum class ThresholdRule {
  Strict,     // pass iff v >  gamma*T*(l+1); fails on equality
  Inclusive,  // pass iff v >= gamma*T*(l+1)
};

inline constexpr double kDefaultGamma = 0.6;
inline constexpr double kLargeScaleGamma = 0.4;
inline constexpr int kAutoTuneEpoch = 20;
inline constexpr double kAutoTuneStep = 0.1;

/// Probes for one level: T*(l+1) sample refs, each with its augmentation seed.
struct ProbeLevel {
  int level = 0;
  std::vector<std::size_t> samples;
  std::vector<std::uint64_t> seeds;

  std::size_t size() const noexcept { return samples.size(); }
};

struct ProbePlan {
  int class_id = 0;
  std::vector<ProbeLevel> entries;  // levels 0..L

  std::size_t total_probes() const noexcept {
    std::size_t n = 0;
    for (const auto& e : entries) n += e.size();
    return n;
  }
};

/// Correct counts v_l for levels 0..k. A vector shorter than L+1 is allowed
/// only when its last level fails (the evaluation stopped there).
struct ProbeOutcome {
  int class_id = 0;
  std::vector<int> counts;
};

struct LoLTable {
  std::vector<int> levels;
  int epoch = 0;
  std::vector<std::vector<int>> history;  // levels after each epoch's update

  LoLTable() = default;
  explicit LoLTable(std::size_t num_classes) : levels(num_classes, 0) {}

  std::size_t num_classes() const noexcept { return levels.size(); }
};

inline std::size_t probes_at_level(int T, int l) noexcept {
  return static_cast<std::size_t>(T) * static_cast<std::size_t>(l + 1);
}

inline std::size_t probe_total(int T, int L) noexcept {
  return static_cast<std::size_t>(T) * static_cast<std::size_t>(L + 1) *
         static_cast<std::size_t>(L + 2) / 2;
}

/// Plans the probes of one level from its own stream. Samples are drawn
/// uniformly with replacement.
inline ProbeLevel plan_level(std::span<const std::size_t> class_samples, int l, int T,
                             std::uint64_t level_seed) {
  if (class_samples.empty()) throw std::invalid_argument("plan_probes: class has no samples");
  if (T < 1) throw std::invalid_argument("plan_probes: T must be >= 1");
  Rng rng(level_seed);
  ProbeLevel entry{l, {}, {}};
  const auto n = probes_at_level(T, l);
  entry.samples.reserve(n);
  entry.seeds.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    entry.samples.push_back(class_samples[rng.uniform_index(class_samples.size())]);
    entry.seeds.push_back(rng.next_u64());
  }
  return entry;
}

/// Seed of level l given the class's base draw. Levels are independent
/// streams, so planning all levels or stopping early yields the same probes.
inline std::uint64_t level_seed(std::uint64_t base, int l) noexcept {
  return derive_seed(base, {static_cast<std::uint64_t>(l)});
}

/// Plans probes for levels 0..L. Consumes one draw from `rng`.
inline ProbePlan plan_probes(int class_id, std::span<const std::size_t> class_samples, int L,
                             int T, Rng& rng) {
  if (class_samples.empty()) throw std::invalid_argument("plan_probes: class has no samples");
  if (T < 1) throw std::invalid_argument("plan_probes: T must be >= 1");
  check_strength(L);
  const std::uint64_t base = rng.next_u64();
  ProbePlan plan{class_id, {}};
  plan.entries.reserve(static_cast<std::size_t>(L) + 1);
  for (int l = 0; l <= L; ++l) plan.entries.push_back(plan_level(class_samples, l, T, level_seed(base, l)));
  return plan;
}

using Predictor = std::function<int(const RasterImage&)>;
/// Image of a sample, or nullptr when the source has none.
using ImageSource = std::function<const RasterImage*(std::size_t sample_id)>;

inline const RasterImage& require_image(const ImageSource& images, std::size_t sample_id) {
  const RasterImage* img = images ? images(sample_id) : nullptr;
  if (img == nullptr) throw std::out_of_range("missing image for sample_id " + std::to_string(sample_id));
  return *img;
}

/// Counts probes whose augmented image the predictor assigns to `class_id`.
/// Probe i is augmented at strength `probes.level` with seed probes.seeds[i].
inline int v_correct(const Predictor& predict, int class_id, const ProbeLevel& probes,
                     const ImageSource& images) {
  int correct = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    Rng rng(probes.seeds[i]);
    const auto augmented =
        apply_strength(require_image(images, probes.samples[i]), probes.level, rng);
    if (predict(augmented) == class_id) ++correct;
  }
  return correct;
}

inline bool level_passes(int v, int l, double gamma, int T, ThresholdRule rule) noexcept {
  // Counts are integers; a threshold within rounding error of v counts as equal.
  const double threshold = gamma * T * (l + 1);
  const double diff = v - threshold;
  const double eps = 1e-9 * std::max(1.0, threshold);
  return rule == ThresholdRule::Strict ? diff > eps : diff >= -eps;
}

/// New level: L+1 if every level in 0..L passes, else L-1; clamped to [0, max_level].
inline int update_level(int L, const ProbeOutcome& outcome, double gamma, int T,
                        ThresholdRule rule = ThresholdRule::Strict,
                        int max_level = kMaxStrength) {
  if (L < 0 || L > max_level) throw std::out_of_range("update_level: level out of range");
  if (gamma < 0.0 || gamma > 1.0) throw std::out_of_range("update_level: gamma outside [0,1]");
  if (T < 1) throw std::invalid_argument("update_level: T must be >= 1");
  const auto& v = outcome.counts;
  if (v.size() > static_cast<std::size_t>(L) + 1) {
    throw std::invalid_argument("update_level: outcome has levels beyond L");
  }
  for (std::size_t l = 0; l < v.size(); ++l) {
    if (v[l] < 0 || static_cast<std::size_t>(v[l]) > probes_at_level(T, static_cast<int>(l))) {
      throw std::invalid_argument("update_level: count outside [0, T(l+1)] at level " +
                                  std::to_string(l));
    }
    if (!level_passes(v[l], static_cast<int>(l), gamma, T, rule)) {
      return std::max(L - 1, 0);
    }
  }
  if (v.size() != static_cast<std::size_t>(L) + 1) {
    throw std::invalid_argument("update_level: missing level " + std::to_string(v.size()) +
                                " for class " + std::to_string(outcome.class_id));
  }
  return std::min(L + 1, max_level);
}

/// Applies update_level to every class, appends a history snapshot and advances the epoch.
inline LoLTable update_table(LoLTable table, std::span<const ProbeOutcome> outcomes, double gamma,
                             int T, ThresholdRule rule = ThresholdRule::Strict,
                             int max_level = kMaxStrength) {
  if (outcomes.size() != table.num_classes()) {
    throw std::invalid_argument("update_table: " + std::to_string(outcomes.size()) +
                                " outcomes for " + std::to_string(table.num_classes()) +
                                " classes");
  }
  std::vector<int> next(table.num_classes());
  std::vector<bool> seen(table.num_classes(), false);
  for (const auto& outcome : outcomes) {
    if (outcome.class_id < 0 || static_cast<std::size_t>(outcome.class_id) >= next.size()) {
      throw std::invalid_argument("update_table: class id out of range");
    }
    const auto c = static_cast<std::size_t>(outcome.class_id);
    if (seen[c]) throw std::invalid_argument("update_table: duplicate outcome for class " + std::to_string(c));
    seen[c] = true;
    next[c] = update_level(table.levels[c], outcome, gamma, T, rule, max_level);
  }
  table.levels = std::move(next);
  table.history.push_back(table.levels);
  ++table.epoch;
  return table;
}

/// Lowers gamma by 0.1 (floored at 0) when no class has left level 0 by
/// `epoch` <= 20; otherwise returns gamma unchanged.
inline double auto_tune_gamma(std::span<const std::vector<int>> history, double gamma, int epoch) {
  if (gamma < 0.0 || gamma > 1.0) throw std::out_of_range("auto_tune_gamma: gamma outside [0,1]");
  if (epoch > kAutoTuneEpoch) return gamma;
  for (const auto& snapshot : history) {
    if (std::any_of(snapshot.begin(), snapshot.end(), [](int l) { return l > 0; })) return gamma;
  }
  // Snap to a 1e-9 grid so repeated steps stay on tenths.
  return std::max(0.0, std::round((gamma - kAutoTuneStep) * 1e9) / 1e9);
}

/// History CSV: "epoch,class_id,level", one row per (epoch, class); epochs are 1-based.
inline void write_history_csv(std::ostream& os, const LoLTable& table) {
  os << "epoch,class_id,level\n";
  for (std::size_t e = 0; e < table.history.size(); ++e)
    for (std::size_t c = 0; c < table.history[e].size(); ++c)
      os << (e + 1) << ',' << c << ',' << table.history[e][c] << '\n';
}

}  // namespace curaug
