#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curaug/image.hpp"
#include "curaug/ops.hpp"
#include "curaug/rng.hpp"

namespace curaug {

inline constexpr int kMaxStrength = kMagnitudeLevels;

struct SequenceStep {
  OpKind kind;
  Magnitude magnitude;

  friend bool operator==(const SequenceStep&, const SequenceStep&) = default;
};

/// The s operations drawn for one strength-s augmentation, in draw order.
struct OpSequence {
  int strength = 0;
  std::vector<SequenceStep> steps;

  friend bool operator==(const OpSequence&, const OpSequence&) = default;
};

enum class ApplyOrder { AsDrawn, SortedByIndex };

inline void check_strength(int s) {
  if (s < 0 || s > kMaxStrength) {
    throw std::out_of_range("strength " + std::to_string(s) + " outside 0.." +
                            std::to_string(kMaxStrength));
  }
}

/// Draws s op kinds i.i.d. uniform over `catalog` (with replacement), each at magnitude(kind, s).
inline OpSequence sample_sequence(int s, std::span<const OpSpec> catalog, Rng& rng) {
  check_strength(s);
  if (catalog.empty()) throw std::invalid_argument("sample_sequence: empty catalog");
  OpSequence seq{s, {}};
  seq.steps.reserve(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) {
    const OpKind kind = catalog[rng.uniform_index(catalog.size())].kind;
    seq.steps.push_back({kind, magnitude(kind, s)});
  }
  return seq;
}

inline OpSequence sample_sequence(int s, Rng& rng) { return sample_sequence(s, op_catalog(), rng); }

/// Applies a drawn sequence. Per-op internal draws continue on `rng`.
inline RasterImage apply_strength_ordered(const RasterImage& img, const OpSequence& seq,
                                          ApplyOrder order, Rng& rng) {
  std::vector<SequenceStep> steps = seq.steps;
  if (order == ApplyOrder::SortedByIndex) {
    std::stable_sort(steps.begin(), steps.end(), [](const auto& a, const auto& b) {
      return catalog_index(a.kind) < catalog_index(b.kind);
    });
  }
  RasterImage out = img;
  for (const auto& step : steps) out = apply_op(out, step.kind, step.magnitude, rng);
  return out;
}

inline RasterImage apply_sequence(const RasterImage& img, const OpSequence& seq, Rng& rng) {
  return apply_strength_ordered(img, seq, ApplyOrder::AsDrawn, rng);
}

struct AugmentResult {
  RasterImage image;
  OpSequence sequence;
};

/// O(x; s): sequence draws first, then the ops in draw order on the same stream.
inline AugmentResult augment(const RasterImage& img, int s, Rng& rng) {
  auto seq = sample_sequence(s, rng);
  auto out = apply_sequence(img, seq, rng);
  return {std::move(out), std::move(seq)};
}

inline RasterImage apply_strength(const RasterImage& img, int s, Rng& rng) {
  return augment(img, s, rng).image;
}

/// Convenience overload that owns its stream.
inline AugmentResult augment_seeded(const RasterImage& img, int s, std::uint64_t seed) {
  Rng rng(seed);
  return augment(img, s, rng);
}

/// Re-applies a logged sequence for `seed`. The sequence draws are re-made to
/// position the stream and must match the log.
inline RasterImage replay_sequence(const RasterImage& img, const OpSequence& logged,
                                   std::uint64_t seed) {
  Rng rng(seed);
  if (sample_sequence(logged.strength, rng) != logged) {
    throw std::invalid_argument("replay_sequence: logged sequence does not match seed");
  }
  return apply_sequence(img, logged, rng);
}

// Sequence log lines: "sample_id,s,k_1,...,k_s" with 1-based catalog indices.

inline std::string format_sequence_line(std::uint64_t sample_id, const OpSequence& seq) {
  std::string line = std::to_string(sample_id) + "," + std::to_string(seq.strength);
  for (const auto& step : seq.steps) line += "," + std::to_string(catalog_index(step.kind));
  return line;
}

struct SequenceRecord {
  std::uint64_t sample_id = 0;
  OpSequence sequence;
};

inline SequenceRecord parse_sequence_line(std::string_view line) {
  std::vector<long long> fields;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto comma = line.find(',', pos);
    const auto token = line.substr(pos, comma == std::string_view::npos ? line.size() - pos
                                                                        : comma - pos);
    long long value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || end != token.data() + token.size()) {
      throw std::invalid_argument("sequence log: bad field '" + std::string(token) + "'");
    }
    fields.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (fields.size() < 2 || fields[0] < 0) throw std::invalid_argument("sequence log: short line");
  const auto s = static_cast<int>(fields[1]);
  check_strength(s);
  if (fields.size() != static_cast<std::size_t>(s) + 2) {
    throw std::invalid_argument("sequence log: expected " + std::to_string(s) + " op indices");
  }
  SequenceRecord rec{static_cast<std::uint64_t>(fields[0]), {s, {}}};
  for (std::size_t i = 2; i < fields.size(); ++i) {
    const OpKind kind = op_from_index(static_cast<int>(fields[i]));
    rec.sequence.steps.push_back({kind, magnitude(kind, s)});
  }
  return rec;
}

}  // namespace curaug
