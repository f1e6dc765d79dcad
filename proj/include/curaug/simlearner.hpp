#pragma once

// Closed-form stand-in for a classifier: per-class correctness probability
// sigma(kappa_c * e - beta * s). Used to exercise the curriculum without a model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "curaug/curriculum.hpp"
#include "curaug/longtail.hpp"
#include "curaug/rng.hpp"

namespace curaug {

struct SimLearnerParams {
  std::vector<double> kappa;  // per-class learning rate, > 0
  double beta = 0.5;          // probability decay per strength level
  std::uint64_t seed = 0;

  void validate() const {
    for (double k : kappa)
      if (!(k > 0.0)) throw std::invalid_argument("simlearner: kappa must be positive");
    if (!(beta >= 0.0)) throw std::invalid_argument("simlearner: beta must be >= 0");
  }
};

inline constexpr double kDefaultKappaScale = 0.01;
inline constexpr double kDefaultBeta = 0.5;

/// Head-biased learning rates: kappa_c = scale * log(1 + counts[c]).
inline SimLearnerParams params_from_profile(const ClassProfile& profile,
                                            double kappa_scale = kDefaultKappaScale,
                                            double beta = kDefaultBeta, std::uint64_t seed = 0) {
  SimLearnerParams p;
  p.kappa.reserve(profile.num_classes());
  for (auto n : profile.counts) p.kappa.push_back(kappa_scale * std::log1p(static_cast<double>(n)));
  p.beta = beta;
  p.seed = seed;
  p.validate();
  return p;
}

inline double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

inline double sim_accuracy(int c, int s, int epoch, const SimLearnerParams& params) {
  if (s < 0 || epoch < 0) throw std::out_of_range("sim_accuracy: negative strength or epoch");
  const double p = logistic(params.kappa.at(static_cast<std::size_t>(c)) * epoch - params.beta * s);
  return std::clamp(p, 0.0, 1.0);
}

/// Returns c with probability sim_accuracy, otherwise a uniformly chosen wrong class.
inline int sim_predict(int c, int s, int epoch, const SimLearnerParams& params, int num_classes,
                       Rng& rng) {
  if (rng.bernoulli(sim_accuracy(c, s, epoch, params)) || num_classes < 2) return c;
  const auto wrong = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(num_classes - 1)));
  return wrong >= c ? wrong + 1 : wrong;
}

/// Probe scorer for the simulator. Probe i is correct iff a uniform derived
/// from (params.seed, probe seed) falls below sim_accuracy, so runs sharing
/// seeds share random numbers across parameter changes.
inline LevelScorer sim_scorer(const SimLearnerParams& params, const int& trained_epochs) {
  return [&params, &trained_epochs](int c, const ProbeLevel& probes) {
    const double p = sim_accuracy(c, probes.level, trained_epochs, params);
    const std::uint64_t salt = mix64(params.seed ^ 0x5851F42D4C957F2DULL);
    int correct = 0;
    for (auto seed : probes.seeds) correct += unit_from_bits(mix64(seed ^ salt)) < p;
    return correct;
  };
}

/// Drives the curriculum with the simulator as both trainer and probe
/// predictor. The simulated model has trained e-1 epochs when epoch e's
/// probes run.
inline RunResult run_dynamics(const ClassProfile& profile, const CurriculumConfig& cfg,
                              const SimLearnerParams& params) {
  profile.validate();
  params.validate();
  if (params.kappa.size() != profile.num_classes()) {
    throw std::invalid_argument("run_dynamics: kappa has " + std::to_string(params.kappa.size()) +
                                " entries for " + std::to_string(profile.num_classes()) + " classes");
  }
  Dataset data{labels_from_profile(profile), static_cast<int>(profile.num_classes()), {}};
  int trained_epochs = 0;
  const Trainer trainer = [&trained_epochs](const EpochView&) { ++trained_epochs; };
  return run(data, cfg, trainer, sim_scorer(params, trained_epochs));
}

}  // namespace curaug
