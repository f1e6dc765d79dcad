#pragma once

// Epoch driver: per epoch, probe and update the LoL table, then build the
// p_aug-gated augmented view of the dataset and hand it to the trainer.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "curaug/compose.hpp"
#include "curaug/lol.hpp"
#include "curaug/rng.hpp"

namespace curaug {

struct CurriculumConfig {
  double p_aug = 0.5;
  double gamma = kDefaultGamma;
  int T = 10;
  int epochs = 0;
  int max_strength = kMaxStrength;
  std::uint64_t seed = 0;
  bool gamma_auto_tune = false;
  ThresholdRule rule = ThresholdRule::Strict;

  void validate() const {
    if (!(p_aug >= 0.0 && p_aug <= 1.0)) throw std::invalid_argument("p_aug must be in [0,1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0,1]");
    if (T < 1) throw std::invalid_argument("T must be >= 1");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (max_strength < 0 || max_strength > kMaxStrength) {
      throw std::invalid_argument("max_strength must be in [0," + std::to_string(kMaxStrength) + "]");
    }
  }
};

enum class Action : std::uint8_t { Original, Augment };

struct Directive {
  std::size_t sample_id = 0;
  int class_id = 0;
  Action action = Action::Original;
  int strength = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const Directive&, const Directive&) = default;
};

struct EpochPlan {
  int epoch = 0;
  std::vector<Directive> directives;

  std::size_t augmented_count() const noexcept {
    std::size_t n = 0;
    for (const auto& d : directives) n += d.action == Action::Augment;
    return n;
  }
};

/// One Bernoulli(p_aug) per sample, in sample order; an Augment directive
/// also draws its sequence seed immediately after.
inline EpochPlan build_epoch_plan(std::span<const int> labels, const LoLTable& table,
                                  const CurriculumConfig& cfg, Rng& rng) {
  EpochPlan plan{table.epoch, {}};
  plan.directives.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || static_cast<std::size_t>(c) >= table.num_classes()) {
      throw std::out_of_range("build_epoch_plan: label " + std::to_string(c) + " of sample " +
                              std::to_string(i) + " has no LoL entry");
    }
    Directive d{i, c, Action::Original, 0, 0};
    if (rng.uniform01() < cfg.p_aug) {
      d.action = Action::Augment;
      d.strength = table.levels[static_cast<std::size_t>(c)];
      d.seed = rng.next_u64();
    }
    plan.directives.push_back(d);
  }
  return plan;
}

struct AugmentedSample {
  std::size_t sample_id = 0;
  int class_id = 0;
  RasterImage image;
  std::optional<OpSequence> sequence;  // set for Augment directives
};

inline AugmentedSample materialize_one(const Directive& d, const ImageSource& images) {
  const RasterImage& src = require_image(images, d.sample_id);
  if (d.action == Action::Original) return {d.sample_id, d.class_id, src, std::nullopt};
  auto result = augment_seeded(src, d.strength, d.seed);
  return {d.sample_id, d.class_id, std::move(result.image), std::move(result.sequence)};
}

/// Lazy, plan-ordered stream of the epoch's images.
class EpochStream {
 public:
  EpochStream(const EpochPlan& plan, ImageSource images)
      : plan_(&plan), images_(std::move(images)) {}

  std::optional<AugmentedSample> next() {
    if (pos_ >= plan_->directives.size()) return std::nullopt;
    return materialize_one(plan_->directives[pos_++], images_);
  }

  std::size_t remaining() const noexcept { return plan_->directives.size() - pos_; }

 private:
  const EpochPlan* plan_;
  ImageSource images_;
  std::size_t pos_ = 0;
};

inline EpochStream materialize(const EpochPlan& plan, ImageSource images) {
  return EpochStream(plan, std::move(images));
}

/// Runs `fn(i)` for i in [0, n) on up to `threads` workers. The first
/// exception thrown is rethrown after all workers join.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Materializes the whole plan on `threads` workers; output is in plan order.
inline std::vector<AugmentedSample> materialize_all(const EpochPlan& plan, const ImageSource& images,
                                                    unsigned threads = 1) {
  std::vector<AugmentedSample> out(plan.directives.size());
  parallel_for(out.size(), threads,
               [&](std::size_t i) { out[i] = materialize_one(plan.directives[i], images); });
  return out;
}

// Stream ids under the master seed.
inline constexpr std::uint64_t kProbeStreamId = 1;
inline constexpr std::uint64_t kPlanStreamId = 2;

/**
 * Curriculum state shared by the in-process driver and the sidecar service.
 *
 * All randomness derives from cfg.seed: probes of epoch e and class c come from
 * the stream (probe, e, c) and the epoch plan from (plan, e), so the two entry
 * points produce identical plans for identical inputs.
 */
class CurriculumState {
 public:
  CurriculumState(CurriculumConfig cfg, std::vector<int> labels, int num_classes)
      : cfg_(cfg), labels_(std::move(labels)), table_(static_cast<std::size_t>(num_classes)),
        gamma_(cfg.gamma) {
    cfg_.validate();
    if (num_classes < 1) throw std::invalid_argument("num_classes must be >= 1");
    class_samples_.resize(static_cast<std::size_t>(num_classes));
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      const int c = labels_[i];
      if (c < 0 || c >= num_classes) {
        throw std::out_of_range("label " + std::to_string(c) + " of sample " + std::to_string(i) +
                                " outside 0.." + std::to_string(num_classes - 1));
      }
      class_samples_[static_cast<std::size_t>(c)].push_back(i);
    }
    for (std::size_t c = 0; c < class_samples_.size(); ++c) {
      if (class_samples_[c].empty()) {
        throw std::invalid_argument("class " + std::to_string(c) + " has no samples");
      }
    }
  }

  const CurriculumConfig& config() const noexcept { return cfg_; }
  const LoLTable& table() const noexcept { return table_; }
  double gamma() const noexcept { return gamma_; }
  int epoch() const noexcept { return table_.epoch; }
  int num_classes() const noexcept { return static_cast<int>(table_.num_classes()); }
  std::span<const int> labels() const noexcept { return labels_; }
  std::span<const std::size_t> class_samples(int c) const {
    return class_samples_.at(static_cast<std::size_t>(c));
  }

  /// Probe plan of class c for the upcoming epoch (levels 0..L_c).
  ProbePlan plan_class_probes(int c) const {
    Rng rng(probe_stream(c));
    return plan_probes(c, class_samples(c), table_.levels.at(static_cast<std::size_t>(c)), cfg_.T,
                       rng);
  }

  std::vector<ProbePlan> plan_all_probes() const {
    std::vector<ProbePlan> plans;
    plans.reserve(table_.num_classes());
    for (int c = 0; c < num_classes(); ++c) plans.push_back(plan_class_probes(c));
    return plans;
  }

  /// Level l of plan_class_probes(c), planned on its own.
  ProbeLevel plan_class_level(int c, int l) const {
    Rng rng(probe_stream(c));
    return plan_level(class_samples(c), l, cfg_.T, level_seed(rng.next_u64(), l));
  }

  /// Updates levels for the upcoming epoch and applies the gamma rule at epoch 20.
  void apply_outcomes(std::span<const ProbeOutcome> outcomes) {
    // Copy in: a rejected outcome set leaves the table untouched.
    table_ = update_table(table_, outcomes, gamma_, cfg_.T, cfg_.rule, cfg_.max_strength);
    if (cfg_.gamma_auto_tune && table_.epoch == kAutoTuneEpoch) {
      gamma_ = auto_tune_gamma(table_.history, gamma_, table_.epoch);
    }
  }

  /// Augmentation plan of the current (already updated) epoch.
  EpochPlan epoch_plan() const {
    Rng rng(derive_seed(cfg_.seed, {kPlanStreamId, static_cast<std::uint64_t>(table_.epoch)}));
    return build_epoch_plan(labels_, table_, cfg_, rng);
  }

 private:
  std::uint64_t probe_stream(int c) const {
    return derive_seed(cfg_.seed, {kProbeStreamId, static_cast<std::uint64_t>(table_.epoch + 1),
                                   static_cast<std::uint64_t>(c)});
  }

  CurriculumConfig cfg_;
  std::vector<int> labels_;
  std::vector<std::vector<std::size_t>> class_samples_;
  LoLTable table_;
  double gamma_;
};

struct Dataset {
  std::vector<int> labels;
  int num_classes = 0;
  ImageSource images;  // may be empty when the trainer never streams images
};

/// What the trainer receives each epoch.
struct EpochView {
  int epoch;
  const EpochPlan& plan;
  const LoLTable& table;
  const ImageSource& images;

  EpochStream stream() const { return EpochStream(plan, images); }
};

/// Correct count for one class's probes at one level.
using LevelScorer = std::function<int(int class_id, const ProbeLevel& probes)>;
using Trainer = std::function<void(const EpochView&)>;

/// Scorer that augments each probe image and asks `predict` for its class.
inline LevelScorer image_scorer(Predictor predict, ImageSource images) {
  return [predict = std::move(predict), images = std::move(images)](int c, const ProbeLevel& probes) {
    return v_correct(predict, c, probes, images);
  };
}

struct EpochMetrics {
  int epoch = 0;
  double gamma = 0.0;  // threshold used for this epoch's update
  std::size_t probes = 0;
  std::size_t augmented = 0;
  double seconds = 0.0;
};

struct RunResult {
  LoLTable table;
  std::vector<EpochMetrics> metrics;
  double final_gamma = 0.0;
};

/// Probes one class, stopping at the first failing level.
inline ProbeOutcome probe_class(const CurriculumState& state, int c, const LevelScorer& scorer,
                                std::size_t* probe_count = nullptr) {
  const auto& cfg = state.config();
  ProbeOutcome outcome{c, {}};
  const int L = state.table().levels.at(static_cast<std::size_t>(c));
  for (int l = 0; l <= L; ++l) {
    const ProbeLevel probes = state.plan_class_level(c, l);
    if (probe_count) *probe_count += probes.size();
    const int v = scorer(c, probes);
    outcome.counts.push_back(v);
    if (!level_passes(v, l, state.gamma(), cfg.T, cfg.rule)) break;
  }
  return outcome;
}

/// The epoch loop. Within each epoch probes precede training, so probes see
/// the model as left by the previous epoch.
inline RunResult run(const Dataset& data, const CurriculumConfig& cfg, const Trainer& trainer,
                     const LevelScorer& scorer) {
  CurriculumState state(cfg, data.labels, data.num_classes);
  RunResult result;
  result.metrics.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int e = 1; e <= cfg.epochs; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochMetrics m;
    m.epoch = e;
    m.gamma = state.gamma();
    try {
      std::vector<ProbeOutcome> outcomes;
      outcomes.reserve(static_cast<std::size_t>(state.num_classes()));
      for (int c = 0; c < state.num_classes(); ++c) outcomes.push_back(probe_class(state, c, scorer, &m.probes));
      state.apply_outcomes(outcomes);
      const EpochPlan plan = state.epoch_plan();
      m.augmented = plan.augmented_count();
      if (trainer) trainer(EpochView{e, plan, state.table(), data.images});
    } catch (const std::exception& ex) {
      throw std::runtime_error("epoch " + std::to_string(e) + ": " + ex.what());
    }
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.metrics.push_back(m);
  }
  result.table = state.table();
  result.final_gamma = state.gamma();
  return result;
}

}  // namespace curaug
