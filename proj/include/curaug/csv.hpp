#pragma once

// Plain CSV readers/writers for the file formats exchanged with other tools.
// No quoting: every field is a number or a bare file name.

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "curaug/analysis.hpp"
#include "curaug/lol.hpp"
#include "curaug/longtail.hpp"

namespace curaug {

class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    auto field = line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    fields.push_back(field);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return fields;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && end == s.data() + s.size();
}

/// Iterates data rows, skipping blank lines and a header row whose first
/// field is not numeric. `fn(line_number, fields)`.
template <class Fn>
void for_each_row(std::istream& in, Fn fn, bool first_field_numeric = true) {
  std::string line;
  std::size_t n = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    if (first) {
      first = false;
      double probe = 0;
      if (first_field_numeric && !parse_number(fields[0], probe)) continue;
      if (!first_field_numeric && fields.size() > 1 && !parse_number(fields[1], probe)) continue;
    }
    fn(n, fields);
  }
}

template <class T>
T field_as(std::size_t line, std::string_view field, const char* what) {
  T v{};
  if (!parse_number(field, v)) throw CsvError(line, std::string("bad ") + what + " '" + std::string(field) + "'");
  return v;
}

// Profile: "class_id,count".

inline void write_profile_csv(std::ostream& os, const ClassProfile& p) {
  os << "class_id,count\n";
  for (std::size_t c = 0; c < p.counts.size(); ++c) os << c << ',' << p.counts[c] << '\n';
}

inline ClassProfile read_profile_csv(std::istream& in) {
  ClassProfile p;
  for_each_row(in, [&](std::size_t n, const auto& f) {
    if (f.size() != 2) throw CsvError(n, "expected class_id,count");
    const auto id = field_as<std::size_t>(n, f[0], "class_id");
    if (id != p.counts.size()) throw CsvError(n, "class ids must be 0..C-1 in order");
    p.counts.push_back(field_as<std::int64_t>(n, f[1], "count"));
  });
  p.validate();
  return p;
}

// Labels: "<sample>,class_id" where <sample> is a sample id or a file name.

inline std::vector<std::pair<std::string, int>> read_labels_csv(std::istream& in) {
  std::vector<std::pair<std::string, int>> rows;
  for_each_row(
      in,
      [&](std::size_t n, const auto& f) {
        if (f.size() != 2) throw CsvError(n, "expected sample,class_id");
        rows.emplace_back(std::string(f[0]), field_as<int>(n, f[1], "class_id"));
      },
      false);
  return rows;
}

/// Labels keyed by integer sample id 0..N-1 (in order).
inline std::vector<int> read_sample_labels_csv(std::istream& in) {
  std::vector<int> labels;
  for_each_row(in, [&](std::size_t n, const auto& f) {
    if (f.size() == 1) {
      labels.push_back(field_as<int>(n, f[0], "class_id"));
      return;
    }
    if (f.size() != 2) throw CsvError(n, "expected sample_id,class_id");
    if (field_as<std::size_t>(n, f[0], "sample_id") != labels.size()) {
      throw CsvError(n, "sample ids must be 0..N-1 in order");
    }
    labels.push_back(field_as<int>(n, f[1], "class_id"));
  });
  return labels;
}

// LoL history: "epoch,class_id,level".

/// Levels of the last epoch present in a history CSV, indexed by class.
inline std::vector<int> read_latest_levels_csv(std::istream& in) {
  std::map<int, std::map<int, int>> by_epoch;
  for_each_row(in, [&](std::size_t n, const auto& f) {
    if (f.size() != 3) throw CsvError(n, "expected epoch,class_id,level");
    const int level = field_as<int>(n, f[2], "level");
    if (level < 0 || level > kMaxStrength) throw CsvError(n, "level out of range");
    by_epoch[field_as<int>(n, f[0], "epoch")][field_as<int>(n, f[1], "class_id")] = level;
  });
  if (by_epoch.empty()) throw std::invalid_argument("LoL CSV has no rows");
  const auto& last = by_epoch.rbegin()->second;
  std::vector<int> levels;
  for (const auto& [c, l] : last) {
    if (c != static_cast<int>(levels.size())) throw std::invalid_argument("LoL CSV: class ids not contiguous");
    levels.push_back(l);
  }
  return levels;
}

inline LoLTable read_history_csv(std::istream& in) {
  std::map<int, std::map<int, int>> by_epoch;
  for_each_row(in, [&](std::size_t n, const auto& f) {
    if (f.size() != 3) throw CsvError(n, "expected epoch,class_id,level");
    by_epoch[field_as<int>(n, f[0], "epoch")][field_as<int>(n, f[1], "class_id")] = field_as<int>(n, f[2], "level");
  });
  LoLTable t;
  for (const auto& [e, row] : by_epoch) {
    std::vector<int> levels;
    for (const auto& [c, l] : row) levels.push_back(l);
    t.history.push_back(std::move(levels));
    t.epoch = e;
  }
  if (!t.history.empty()) t.levels = t.history.back();
  return t;
}

// Numeric matrices: one row per line, optional header.

inline Matrix read_matrix_csv(std::istream& in) {
  Matrix m;
  for_each_row(in, [&](std::size_t n, const auto& f) {
    if (m.rows == 0) m.cols = f.size();
    if (f.size() != m.cols) throw CsvError(n, "expected " + std::to_string(m.cols) + " columns");
    for (auto field : f) m.data.push_back(field_as<double>(n, field, "value"));
    ++m.rows;
  });
  return m;
}

/// Feature rows: D vector columns followed by a label column.
inline FeatureBatch read_features_csv(std::istream& in) {
  const Matrix raw = read_matrix_csv(in);
  if (raw.cols < 2) throw std::invalid_argument("features CSV needs vector columns and a label column");
  FeatureBatch batch;
  batch.vectors.rows = raw.rows;
  batch.vectors.cols = raw.cols - 1;
  for (std::size_t r = 0; r < raw.rows; ++r) {
    const auto row = raw.row(r);
    batch.vectors.data.insert(batch.vectors.data.end(), row.begin(), row.end() - 1);
    const double label = row.back();
    if (label != static_cast<int>(label)) throw CsvError(r + 1, "label column must hold integers");
    batch.labels.push_back(static_cast<int>(label));
  }
  return batch;
}

}  // namespace curaug
