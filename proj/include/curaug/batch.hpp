#pragma once

// Batch augmentation of a directory of PNG files.
//
// Files are the *.png entries of the input directory sorted by name; sample
// ids are positions in that order. Sample i is augmented with its own stream
// derive_seed(seed, {3, i}), so results do not depend on the thread count.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curaug/compose.hpp"
#include "curaug/curriculum.hpp"
#include "curaug/png_io.hpp"

namespace curaug {

namespace fs = std::filesystem;

inline constexpr std::uint64_t kBatchStreamId = 3;

struct AugmentJob {
  fs::path in_dir;
  fs::path out_dir;
  std::optional<int> strength;            // fixed strength for every file, or
  std::vector<int> class_levels;          // per-class levels (from a LoL CSV) with
  std::map<std::string, int> file_class;  // file name -> class id
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct ManifestEntry {
  std::size_t sample_id = 0;
  std::string file;
  std::uint64_t seed = 0;
  OpSequence sequence;
};

struct AugmentReport {
  std::vector<ManifestEntry> entries;  // successful files, by sample id
  std::vector<std::string> errors;     // "file: message", by sample id
};

inline std::uint64_t batch_sample_seed(std::uint64_t seed, std::size_t sample_id) noexcept {
  return derive_seed(seed, {kBatchStreamId, static_cast<std::uint64_t>(sample_id)});
}

inline std::vector<fs::path> list_png_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

inline AugmentReport augment_directory(const AugmentJob& job) {
  if (!job.strength && job.class_levels.empty()) {
    throw std::invalid_argument("augment: need a strength or per-class levels");
  }
  if (job.strength) check_strength(*job.strength);
  const auto files = list_png_files(job.in_dir);
  fs::create_directories(job.out_dir);

  std::vector<std::optional<ManifestEntry>> done(files.size());
  std::vector<std::string> failures(files.size());
  parallel_for(files.size(), job.threads, [&](std::size_t i) {
    const auto name = files[i].filename().string();
    try {
      int s = 0;
      if (job.strength) {
        s = *job.strength;
      } else {
        const auto it = job.file_class.find(name);
        if (it == job.file_class.end()) throw std::runtime_error("no class label");
        if (it->second < 0 || static_cast<std::size_t>(it->second) >= job.class_levels.size()) {
          throw std::runtime_error("class " + std::to_string(it->second) + " has no LoL level");
        }
        s = job.class_levels[static_cast<std::size_t>(it->second)];
      }
      const auto bytes = read_file_bytes(files[i]);
      const RasterImage img = decode_png(bytes);
      const std::uint64_t seed = batch_sample_seed(job.seed, i);
      auto result = augment_seeded(img, s, seed);
      if (result.sequence.steps.empty()) {
        write_file_bytes(job.out_dir / name, bytes);  // s = 0: pass bytes through
      } else {
        write_png(job.out_dir / name, result.image);
      }
      done[i] = ManifestEntry{i, name, seed, std::move(result.sequence)};
    } catch (const std::exception& e) {
      failures[i] = name + ": " + e.what();
    }
  });

  AugmentReport report;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (done[i]) report.entries.push_back(std::move(*done[i]));
    if (!failures[i].empty()) report.errors.push_back(std::move(failures[i]));
  }
  return report;
}

inline nlohmann::json manifest_json(const AugmentJob& job, const AugmentReport& report) {
  nlohmann::json files = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& step : e.sequence.steps) ops.push_back(op_name(step.kind));
    files.push_back({{"sample_id", e.sample_id}, {"file", e.file}, {"seed", e.seed},
                     {"s", e.sequence.strength}, {"ops", ops}});
  }
  nlohmann::json j = {{"seed", job.seed}, {"files", files}, {"errors", report.errors}};
  if (job.strength) j["strength"] = *job.strength;
  else j["class_levels"] = job.class_levels;
  return j;
}

/// Writes manifest.json and sequences.log ("sample_id,s,k_1,...,k_s") into `dir`.
inline void write_manifest(const fs::path& dir, const AugmentJob& job, const AugmentReport& report) {
  std::ofstream(dir / "manifest.json") << manifest_json(job, report).dump(2) << '\n';
  std::ofstream log(dir / "sequences.log");
  for (const auto& e : report.entries) log << format_sequence_line(e.sample_id, e.sequence) << '\n';
}

}  // namespace curaug
