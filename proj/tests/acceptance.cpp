// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "curaug/analysis.hpp"
#include "curaug/batch.hpp"
#include "curaug/simlearner.hpp"
#include "fixtures.hpp"

using namespace curaug;

namespace {

struct Verdict {
  bool ok = true;
  std::string detail;

  void fail(std::string why) {
    if (ok) detail = std::move(why);
    ok = false;
  }
};

int failures = 0;

void criterion(const char* name, double budget_seconds, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_seconds > 0 && secs >= budget_seconds) v.fail("took " + std::to_string(secs) + " s");
  std::printf("%s %-28s %8.3f s  %s\n", v.ok ? "PASS" : "FAIL", name, secs, v.detail.c_str());
  std::fflush(stdout);
  failures += !v.ok;
}

// Written from the algorithm text, no shared code: every level l in 0..L is
// checked (no early exit), with gamma = k/20 kept as an integer ratio.
int oracle_next_level(int L, const std::vector<int>& v, int k, int T, bool inclusive) {
  bool all = true;
  for (int l = 0; l <= L; ++l) {
    const long lhs = 20L * v[static_cast<std::size_t>(l)];
    const long rhs = static_cast<long>(k) * T * (l + 1);
    all = all && (inclusive ? lhs >= rhs : lhs > rhs);
  }
  return all ? std::min(L + 1, 30) : std::max(L - 1, 0);
}

std::vector<int> coarse_grid(int n, int k) {
  const int edge = k * n / 20;  // floor(gamma n)
  std::vector<int> g{0, n, edge, edge + 1};
  std::vector<int> out;
  for (int x : g) {
    x = std::clamp(x, 0, n);
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  return out;
}

}  // namespace

int main() {
  criterion("magnitude rule", 1.0, [] {
    Verdict v;
    if (magnitude(OpKind::ShearX, 1).value != 0.01) v.fail("ShearX(1) != 0.01");
    int ranged = 0;
    for (const auto& spec : op_catalog()) {
      if (spec.param_class != ParamClass::Ranged) continue;
      ++ranged;
      const double lo = magnitude(spec.kind, 0).value, hi = magnitude(spec.kind, 30).value;
      if (std::abs(lo - spec.weakest) > 1e-12 || std::abs(hi - spec.strongest) > 1e-12)
        v.fail(std::string(spec.name) + " misses its endpoints");
      if (is_enhancement(spec.kind)) {
        // The drawn sign mirrors the factor about 1.0, reaching the tabulated minimum.
        if (std::abs((2.0 - hi) - spec.table_min) > 1e-12) v.fail(std::string(spec.name) + " mirror misses table_min");
      } else if (std::abs(std::min(lo, hi) - spec.table_min) > 1e-12 || std::abs(std::max(lo, hi) - spec.table_max) > 1e-12) {
        v.fail(std::string(spec.name) + " range differs from table");
      }
    }
    if (ranged != 14) v.fail(std::to_string(ranged) + " ranged ops");
    v.detail = v.ok ? "14 ranged ops, ShearX(1)=0.01" : v.detail;
    return v;
  });

  criterion("identity law", 1.0, [] {
    Verdict v;
    Rng gen(101);
    for (int i = 0; i < 100; ++i) {
      const auto img = test::random_image(gen);
      Rng rng(gen.next_u64());
      if (!(apply_strength(img, 0, rng) == img)) v.fail("image " + std::to_string(i) + " changed");
    }
    v.detail = v.ok ? "100 images" : v.detail;
    return v;
  });

  criterion("level update oracle", 10.0, [] {
    Verdict v;
    long checked = 0, mismatches = 0;
    for (int T : {1, 5, 10})
      for (int L = 0; L <= 6; ++L)
        for (int k = 0; k <= 20; ++k)
          for (bool inclusive : {false, true}) {
            std::vector<std::vector<int>> grids;
            for (int l = 0; l <= L; ++l) grids.push_back(coarse_grid(T * (l + 1), k));
            std::vector<std::size_t> idx(static_cast<std::size_t>(L) + 1, 0);
            std::vector<int> counts(idx.size());
            while (true) {
              for (std::size_t l = 0; l < idx.size(); ++l) counts[l] = grids[l][idx[l]];
              const int got = update_level(L, {0, counts}, k / 20.0, T,
                                           inclusive ? ThresholdRule::Inclusive : ThresholdRule::Strict);
              mismatches += got != oracle_next_level(L, counts, k, T, inclusive);
              ++checked;
              std::size_t pos = 0;
              while (pos < idx.size() && ++idx[pos] == grids[pos].size()) idx[pos++] = 0;
              if (pos == idx.size()) break;
            }
          }
    if (mismatches) v.fail(std::to_string(mismatches) + " mismatches");
    v.detail = std::to_string(checked) + " cases, " + std::to_string(mismatches) + " mismatches";
    return v;
  });

  criterion("probe budget", 0, [] {
    Verdict v;
    std::vector<std::size_t> samples(50);
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = i;
    for (int T : {1, 3, 10})
      for (int L = 0; L <= 30; ++L) {
        Rng rng(static_cast<std::uint64_t>(L * 100 + T));
        const auto plan = plan_probes(0, samples, L, T, rng);
        if (plan.total_probes() != static_cast<std::size_t>(T * (L + 1) * (L + 2) / 2))
          v.fail("T=" + std::to_string(T) + " L=" + std::to_string(L));
      }
    v.detail = v.ok ? "T in {1,3,10}, L 0..30" : v.detail;
    return v;
  });

  criterion("level dynamics bounds", 0, [] {
    Verdict v;
    Rng meta(7);
    for (int run_id = 0; run_id < 1000 && v.ok; ++run_id) {
      const int classes = 2 + static_cast<int>(meta.uniform_index(9));
      const auto n_max = static_cast<std::int64_t>(20 + meta.uniform_index(500));
      const double ir = 1.0 + meta.uniform01() * (static_cast<double>(std::min<std::int64_t>(n_max, 100)) - 1.0);
      const auto prof = exp_profile(classes, n_max, ir);
      CurriculumConfig cfg;
      cfg.epochs = 10 + static_cast<int>(meta.uniform_index(51));
      cfg.T = 1 + static_cast<int>(meta.uniform_index(5));
      cfg.gamma = meta.uniform01();
      cfg.seed = meta.next_u64();
      cfg.rule = meta.bernoulli(0.5) ? ThresholdRule::Strict : ThresholdRule::Inclusive;
      const auto params = params_from_profile(prof, 0.005 + meta.uniform01() * 0.1, meta.uniform01() * 2.0, meta.next_u64());
      const auto r = run_dynamics(prof, cfg, params);
      std::vector<int> prev(static_cast<std::size_t>(classes), 0);
      for (const auto& snap : r.table.history) {
        for (std::size_t c = 0; c < snap.size(); ++c)
          if (snap[c] < 0 || snap[c] > 30 || std::abs(snap[c] - prev[c]) > 1) v.fail("run " + std::to_string(run_id));
        prev = snap;
      }
    }
    const std::vector<int> labels{0, 0, 1, 1, 1, 2};
    const LevelScorer perfect = [](int, const ProbeLevel& p) { return static_cast<int>(p.size()); };
    for (int E = 0; E <= 30; ++E) {
      CurriculumConfig cfg;
      cfg.epochs = E;
      cfg.seed = static_cast<std::uint64_t>(E);
      const auto r = run({labels, 3, {}}, cfg, nullptr, perfect);
      if (r.table.levels != std::vector<int>(3, E)) v.fail("perfect predictor misses L=E at E=" + std::to_string(E));
    }
    v.detail = v.ok ? "1000 runs in bounds; perfect predictor L=E for E<=30" : v.detail;
    return v;
  });

  criterion("long-tailed profile", 1.0, [] {
    Verdict v;
    const auto p = exp_profile(100, 500, 100);
    if (p.counts.size() != 100 || p.counts[0] != 500 || p.counts[99] != 5) v.fail("endpoints");
    for (std::size_t k = 0; k < p.counts.size(); ++k) {
      if (k && p.counts[k] > p.counts[k - 1]) v.fail("increase at " + std::to_string(k));
      const double exact = 500.0 * std::pow(100.0, -static_cast<double>(k) / 99.0);
      if (std::abs(static_cast<double>(p.counts[k]) - exact) > 0.5) v.fail("not log-affine at " + std::to_string(k));
    }
    v.detail = v.ok ? "500 .. 5" : v.detail;
    return v;
  });

  criterion("head vs tail dynamics", 120.0, [] {
    Verdict v;
    const auto prof = exp_profile(100, 500, 100);
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      CurriculumConfig cfg;
      cfg.epochs = 200;
      cfg.T = 10;
      cfg.gamma = 0.6;
      cfg.seed = seed;
      const auto r = run_dynamics(prof, cfg, params_from_profile(prof, kDefaultKappaScale, kDefaultBeta, seed));
      double head = 0, tail = 0;
      for (int c = 0; c < 10; ++c) {
        head += r.table.levels[static_cast<std::size_t>(c)];
        tail += r.table.levels[static_cast<std::size_t>(90 + c)];
      }
      wins += head > tail;
    }
    if (wins < 95) v.fail(std::to_string(wins) + "/100");
    v.detail = std::to_string(wins) + "/100 runs head > tail";
    return v;
  });

  criterion("p_aug gating", 0, [] {
    Verdict v;
    const std::size_t n = 100000;
    const std::vector<int> labels(n, 0);
    LoLTable table(1);
    table.levels[0] = 5;
    CurriculumConfig cfg;
    Rng rng(99);
    const auto plan = build_epoch_plan(labels, table, cfg, rng);
    const double frac = static_cast<double>(plan.augmented_count()) / static_cast<double>(n);
    if (std::abs(frac - 0.5) > 0.01) v.fail("fraction " + std::to_string(frac));

    Rng gen(5);
    std::vector<RasterImage> images;
    for (int i = 0; i < 200; ++i) images.push_back(test::random_image(gen, 16));
    const std::vector<int> small(images.size(), 0);
    cfg.p_aug = 0.0;
    const auto none = build_epoch_plan(small, table, cfg, rng);
    auto stream = materialize(none, [&](std::size_t i) { return &images.at(i); });
    std::size_t i = 0;
    while (auto s = stream.next()) {
      if (!(s->image == images[i]) || s->sample_id != i) v.fail("p_aug=0 sample " + std::to_string(i) + " differs");
      ++i;
    }
    if (i != images.size()) v.fail("stream length");
    v.detail = "fraction " + std::to_string(frac) + (v.ok ? "; p_aug=0 identical" : "; " + v.detail);
    return v;
  });

  criterion("parallel determinism", 60.0, [] {
    Verdict v;
    const auto root = test::scratch_dir("acceptance_det");
    const auto in = root / "in";
    std::filesystem::create_directories(in);
    Rng gen(500);
    for (int i = 0; i < 500; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "img_%03d.png", i);
      write_png(in / name, test::random_image(gen, 32));
    }
    AugmentJob one{in, root / "t1", 12, {}, {}, 2024, 1};
    AugmentJob eight = one;
    eight.out_dir = root / "t8";
    eight.threads = 8;
    const auto r1 = augment_directory(one);
    const auto r8 = augment_directory(eight);
    write_manifest(one.out_dir, one, r1);
    write_manifest(eight.out_dir, eight, r8);
    if (!r1.errors.empty() || !r8.errors.empty()) v.fail("augment errors");
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(one.out_dir)) {
      const auto other = eight.out_dir / e.path().filename();
      if (!std::filesystem::exists(other) || read_file_bytes(e.path()) != read_file_bytes(other))
        v.fail(e.path().filename().string() + " differs");
      ++files;
    }
    std::size_t files8 = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(eight.out_dir)) ++files8;
    if (files != files8) v.fail("file counts differ");
    std::filesystem::remove_all(root);
    v.detail = v.ok ? std::to_string(files) + " files identical" : v.detail;
    return v;
  });

  criterion("golden suite", 0, [] {
    Verdict v;
    const std::filesystem::path dir = CURAUG_GOLDEN_DIR;
    const auto input = test::golden_input();
    if (!(read_png(dir / "input.png") == input)) v.fail("input.png differs");
    int matched = 0;
    for (const auto& spec : op_catalog()) {
      Rng rng(test::kGoldenSeed);
      const auto out = apply_op(input, spec.kind, magnitude(spec.kind, test::kGoldenStrength), rng);
      if (read_png(dir / test::golden_name(spec.name)) == out) ++matched;
      else v.fail(std::string(spec.name) + " differs");
    }
    v.detail = std::to_string(matched) + "/22 ops match" + (v.ok ? "" : "; " + v.detail);
    return v;
  });

  criterion("analysis oracles", 0, [] {
    Verdict v;
    if (weight_norm_variance(Matrix(2, 2, {0.5, -0.5, 1.0, 2.0})) != 1.0) v.fail("weight variance");
    Rng rng(3);
    double worst = 0;
    for (int trial = 0; trial < 20; ++trial) {
      FeatureBatch b;
      const std::size_t n = 80, d = 6;
      b.vectors = Matrix(n, d, std::vector<double>(n * d));
      for (auto& x : b.vectors.data) x = rng.uniform01() * 2.0 - 1.0;
      for (std::size_t i = 0; i < n; ++i) b.labels.push_back(static_cast<int>(rng.uniform_index(6)));
      std::map<int, std::pair<double, int>> acc;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (i == j || b.labels[i] != b.labels[j]) continue;
          double dot = 0, ni = 0, nj = 0;
          for (std::size_t t = 0; t < d; ++t) {
            dot += b.vectors.row(i)[t] * b.vectors.row(j)[t];
            ni += b.vectors.row(i)[t] * b.vectors.row(i)[t];
            nj += b.vectors.row(j)[t] * b.vectors.row(j)[t];
          }
          acc[b.labels[i]].first += dot / std::sqrt(ni * nj);
          ++acc[b.labels[i]].second;
        }
      const auto got = feature_alignment(b).per_class;
      if (got.size() != acc.size()) v.fail("class sets differ");
      for (const auto& [c, sc] : acc) worst = std::max(worst, std::abs(got.at(c) - sc.first / sc.second));
    }
    if (worst > 1e-12) v.fail("alignment error " + std::to_string(worst));

    const auto profile = exp_profile(30, 500, 100);
    std::vector<int> labels, preds;
    for (int i = 0; i < 5000; ++i) {
      labels.push_back(static_cast<int>(rng.uniform_index(30)));
      preds.push_back(rng.bernoulli(0.5) ? labels.back() : static_cast<int>(rng.uniform_index(30)));
    }
    std::size_t right[3] = {0, 0, 0}, seen[3] = {0, 0, 0}, total = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto k = static_cast<std::size_t>(category_of(profile.counts[static_cast<std::size_t>(labels[i])]));
      ++seen[k];
      right[k] += preds[i] == labels[i];
      total += preds[i] == labels[i];
    }
    const auto b = accuracy_breakdown(preds, labels, categorize(profile));
    const std::optional<double>* parts[3] = {&b.many, &b.med, &b.few};
    for (int k = 0; k < 3; ++k)
      if (!*parts[k] || **parts[k] != static_cast<double>(right[k]) / static_cast<double>(seen[k])) v.fail("breakdown category");
    if (b.all != static_cast<double>(total) / static_cast<double>(labels.size())) v.fail("breakdown all");
    char buf[64];
    std::snprintf(buf, sizeof buf, "alignment max err %.2e", worst);
    v.detail = v.ok ? buf : v.detail;
    return v;
  });

  criterion("gamma auto-tune", 0, [] {
    Verdict v;
    const std::vector<int> labels{0, 0, 1, 1};
    CurriculumConfig cfg;
    cfg.epochs = 25;
    cfg.gamma = 0.6;
    cfg.gamma_auto_tune = true;
    const LevelScorer wrong = [](int, const ProbeLevel&) { return 0; };
    const auto r = run({labels, 2, {}}, cfg, nullptr, wrong);
    if (r.metrics[19].gamma != 0.6 || r.metrics[20].gamma != 0.5 || r.final_gamma != 0.5)
      v.fail("always-wrong run ends at gamma " + std::to_string(r.final_gamma));
    const LevelScorer first_only = [](int c, const ProbeLevel& p) { return c == 0 ? static_cast<int>(p.size()) : 0; };
    const auto s = run({labels, 2, {}}, cfg, nullptr, first_only);
    if (s.final_gamma != 0.6 || s.table.history[0][0] != 1) v.fail("gamma moved although class 0 reached level 1");
    v.detail = v.ok ? "0.6 -> 0.5 at epoch 20; unchanged once a class learns" : v.detail;
    return v;
  });

  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
