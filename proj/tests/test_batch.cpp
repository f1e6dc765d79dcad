#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "curaug/batch.hpp"
#include "fixtures.hpp"

using namespace curaug;

namespace {

struct Corpus {
  fs::path root;
  fs::path in;
  std::vector<RasterImage> images;

  explicit Corpus(int n, const std::string& tag) : root(test::scratch_dir(tag)), in(root / "in") {
    fs::create_directories(in);
    Rng gen(static_cast<std::uint64_t>(n));
    for (int i = 0; i < n; ++i) {
      images.push_back(test::random_image(gen, 20));
      char name[32];
      std::snprintf(name, sizeof name, "img_%03d.png", i);
      write_png(in / name, images.back());
    }
  }
  ~Corpus() { fs::remove_all(root); }
};

std::map<std::string, std::vector<std::uint8_t>> tree(const fs::path& dir) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_file_bytes(e.path());
  return out;
}

}  // namespace

TEST(Batch, ListsPngFilesSorted) {
  Corpus c(3, "list");
  std::ofstream(c.in / "notes.txt") << "x";
  write_file_bytes(c.in / "Z.PNG", encode_png(c.images[0]));
  const auto files = list_png_files(c.in);
  ASSERT_EQ(files.size(), 4u);
  EXPECT_EQ(files[0].filename(), "Z.PNG");  // uppercase sorts first
  EXPECT_EQ(files[1].filename(), "img_000.png");
}

TEST(Batch, StrengthZeroCopiesBytes) {
  Corpus c(6, "s0");
  AugmentJob job{c.in, c.root / "out", 0, {}, {}, 5, 2};
  const auto report = augment_directory(job);
  EXPECT_TRUE(report.errors.empty());
  EXPECT_EQ(tree(job.out_dir), tree(c.in));
}

TEST(Batch, ThreadCountDoesNotChangeOutput) {
  Corpus c(24, "threads");
  AugmentJob one{c.in, c.root / "one", 9, {}, {}, 77, 1};
  AugmentJob many = one;
  many.out_dir = c.root / "many";
  many.threads = 8;
  const auto r1 = augment_directory(one);
  const auto r8 = augment_directory(many);
  EXPECT_EQ(tree(one.out_dir), tree(many.out_dir));
  ASSERT_EQ(r1.entries.size(), r8.entries.size());
  for (std::size_t i = 0; i < r1.entries.size(); ++i) EXPECT_EQ(r1.entries[i].sequence, r8.entries[i].sequence);
}

TEST(Batch, ManifestReplayReproducesOutputs) {
  Corpus c(8, "replay");
  AugmentJob job{c.in, c.root / "out", 12, {}, {}, 3, 3};
  const auto report = augment_directory(job);
  write_manifest(job.out_dir, job, report);
  std::ifstream log(job.out_dir / "sequences.log");
  std::string line;
  std::size_t n = 0;
  const auto files = list_png_files(c.in);
  while (std::getline(log, line)) {
    const auto rec = parse_sequence_line(line);
    const auto& file = files.at(rec.sample_id);
    const auto replayed = replay_sequence(read_png(file), rec.sequence, batch_sample_seed(job.seed, rec.sample_id));
    EXPECT_EQ(replayed, read_png(job.out_dir / file.filename()));
    ++n;
  }
  EXPECT_EQ(n, 8u);
  const auto manifest = nlohmann::json::parse(std::ifstream(job.out_dir / "manifest.json"));
  EXPECT_EQ(manifest["files"].size(), 8u);
  EXPECT_EQ(manifest["strength"], 12);
  EXPECT_EQ(manifest["files"][0]["ops"].size(), 12u);
}

TEST(Batch, PerFileErrorsDoNotStopTheRun) {
  Corpus c(4, "errors");
  write_file_bytes(c.in / "img_001.png", std::vector<std::uint8_t>{1, 2, 3});
  AugmentJob job{c.in, c.root / "out", 3, {}, {}, 1, 2};
  const auto report = augment_directory(job);
  EXPECT_EQ(report.entries.size(), 3u);
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0].rfind("img_001.png:", 0), 0u);
  EXPECT_FALSE(fs::exists(job.out_dir / "img_001.png"));
}

TEST(Batch, PerClassLevels) {
  Corpus c(4, "lol");
  AugmentJob job{c.in, c.root / "out", std::nullopt, {0, 5}, {}, 4, 1};
  job.file_class = {{"img_000.png", 0}, {"img_001.png", 1}, {"img_002.png", 0}, {"img_003.png", 1}};
  const auto report = augment_directory(job);
  ASSERT_TRUE(report.errors.empty());
  for (const auto& e : report.entries) EXPECT_EQ(e.sequence.strength, e.sample_id % 2 ? 5 : 0);
  EXPECT_EQ(read_file_bytes(job.out_dir / "img_000.png"), read_file_bytes(c.in / "img_000.png"));

  job.file_class.erase("img_003.png");
  job.file_class["img_002.png"] = 9;
  const auto bad = augment_directory(job);
  ASSERT_EQ(bad.errors.size(), 2u);
  EXPECT_NE(bad.errors[0].find("no LoL level"), std::string::npos);
  EXPECT_NE(bad.errors[1].find("no class label"), std::string::npos);
}

TEST(Batch, NeedsStrengthOrLevels) {
  Corpus c(1, "none");
  AugmentJob job{c.in, c.root / "out", std::nullopt, {}, {}, 0, 1};
  EXPECT_THROW(augment_directory(job), std::invalid_argument);
  job.strength = 31;
  EXPECT_THROW(augment_directory(job), std::out_of_range);
}
