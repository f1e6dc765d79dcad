#pragma once

// Diagnostics over trainer-supplied arrays: classifier weight-norm variance,
// per-class feature alignment, and Many/Med/Few accuracy.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "curaug/longtail.hpp"

namespace curaug {

/// Row-major matrix of reals.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, std::vector<double> values)
      : rows(r), cols(c), data(std::move(values)) {
    if (data.size() != rows * cols) throw std::invalid_argument("Matrix: size mismatch");
  }

  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// Population variance of the per-row L1 norms.
inline double weight_norm_variance(const Matrix& weights) {
  if (weights.rows < 2) throw std::invalid_argument("weight_norm_variance: need at least 2 classes");
  std::vector<double> norms(weights.rows, 0.0);
  for (std::size_t r = 0; r < weights.rows; ++r) {
    for (double v : weights.row(r)) {
      if (!std::isfinite(v)) throw std::invalid_argument("weight_norm_variance: non-finite weight");
      norms[r] += std::abs(v);
    }
  }
  double mean = 0.0;
  for (double n : norms) mean += n;
  mean /= static_cast<double>(norms.size());
  double var = 0.0;
  for (double n : norms) var += (n - mean) * (n - mean);
  return var / static_cast<double>(norms.size());
}

struct FeatureBatch {
  Matrix vectors;           // N x D
  std::vector<int> labels;  // N

  void validate() const {
    if (labels.size() != vectors.rows) throw std::invalid_argument("FeatureBatch: label count mismatch");
    for (std::size_t i = 0; i < vectors.rows; ++i) {
      double sq = 0.0;
      for (double v : vectors.row(i)) sq += v * v;
      if (!(sq > 0.0)) throw std::invalid_argument("FeatureBatch: zero vector at row " + std::to_string(i));
    }
  }
};

struct AlignmentReport {
  std::map<int, double> per_class;  // mean pairwise cosine
  std::vector<std::string> warnings;
};

/// Mean cosine similarity over unordered same-class pairs. Classes with fewer
/// than two samples are omitted and reported in `warnings`.
inline AlignmentReport feature_alignment(const FeatureBatch& batch) {
  batch.validate();
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < batch.labels.size(); ++i) members[batch.labels[i]].push_back(i);

  // Normalise once; the pairwise sum is then a sum of dot products.
  const std::size_t D = batch.vectors.cols;
  std::vector<double> unit(batch.vectors.data.size());
  for (std::size_t i = 0; i < batch.vectors.rows; ++i) {
    const auto row = batch.vectors.row(i);
    double sq = 0.0;
    for (double v : row) sq += v * v;
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t d = 0; d < D; ++d) unit[i * D + d] = row[d] * inv;
  }

  AlignmentReport report;
  for (const auto& [c, idx] : members) {
    if (idx.size() < 2) {
      report.warnings.push_back("class " + std::to_string(c) + " has " + std::to_string(idx.size()) +
                                " sample(s); alignment omitted");
      continue;
    }
    double sum = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        double dot = 0.0;
        for (std::size_t d = 0; d < D; ++d) dot += unit[idx[a] * D + d] * unit[idx[b] * D + d];
        sum += dot;
      }
    const double pairs = static_cast<double>(idx.size() * (idx.size() - 1) / 2);
    report.per_class[c] = sum / pairs;
  }
  return report;
}

/// treated - base, per class.
inline std::map<int, double> alignment_gain(const std::map<int, double>& base,
                                            const std::map<int, double>& treated) {
  if (base.size() != treated.size()) throw std::invalid_argument("alignment_gain: class sets differ");
  std::map<int, double> gain;
  for (const auto& [c, b] : base) {
    const auto it = treated.find(c);
    if (it == treated.end()) {
      throw std::invalid_argument("alignment_gain: class " + std::to_string(c) + " missing from treated");
    }
    gain[c] = it->second - b;
  }
  return gain;
}

/// Sample-averaged accuracy overall and within each category. A category
/// without samples is absent, not zero.
struct AccuracyBreakdown {
  std::optional<double> many;
  std::optional<double> med;
  std::optional<double> few;
  double all = 0.0;
};

inline AccuracyBreakdown accuracy_breakdown(std::span<const int> predictions, std::span<const int> labels,
                                            const CategoryMasks& masks) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("accuracy_breakdown: length mismatch");
  if (labels.empty()) throw std::invalid_argument("accuracy_breakdown: no samples");
  std::map<int, Category> cat;
  const auto assign = [&cat](const std::vector<int>& ids, Category k) {
    for (int c : ids)
      if (!cat.emplace(c, k).second)
        throw std::invalid_argument("accuracy_breakdown: class " + std::to_string(c) + " in two categories");
  };
  assign(masks.many, Category::Many);
  assign(masks.med, Category::Med);
  assign(masks.few, Category::Few);

  std::size_t correct[3] = {0, 0, 0};
  std::size_t seen[3] = {0, 0, 0};
  std::size_t total_correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto it = cat.find(labels[i]);
    if (it == cat.end()) {
      throw std::invalid_argument("accuracy_breakdown: class " + std::to_string(labels[i]) + " not in any category");
    }
    const bool ok = predictions[i] == labels[i];
    const auto k = static_cast<std::size_t>(it->second);
    ++seen[k];
    correct[k] += ok;
    total_correct += ok;
  }
  const auto frac = [&](std::size_t k) -> std::optional<double> {
    if (seen[k] == 0) return std::nullopt;
    return static_cast<double>(correct[k]) / static_cast<double>(seen[k]);
  };
  return {frac(0), frac(1), frac(2), static_cast<double>(total_correct) / static_cast<double>(labels.size())};
}

}  // namespace curaug
