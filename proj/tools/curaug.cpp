// curaug: command-line front end for the curriculum augmentation engine.
//
// Exit codes: 0 success, 1 usage error, 2 data error.
// Log level from CURAUG_LOG_LEVEL (trace, debug, info, warn, error, off).

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "curaug/analysis.hpp"
#include "curaug/batch.hpp"
#include "curaug/config.hpp"
#include "curaug/csv.hpp"
#include "curaug/longtail.hpp"
#include "curaug/plot.hpp"
#include "curaug/png_io.hpp"
#include "curaug/protocol.hpp"
#include "curaug/simlearner.hpp"

namespace fs = std::filesystem;
using namespace curaug;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

// Thrown for problems with input data (as opposed to command-line usage).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("curaug");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("CURAUG_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

// Writes to `path`, or stdout when empty or "-".
template <class Fn>
void with_output(const std::string& path, Fn fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  fn(out);
}

// --- augment -------------------------------------------------------------

struct AugmentArgs {
  std::string in_dir, out_dir, lol_csv, labels_csv, manifest_dir;
  std::optional<int> strength;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

int cmd_augment(const AugmentArgs& a) {
  AugmentJob job;
  job.in_dir = a.in_dir;
  job.out_dir = a.out_dir;
  job.seed = a.seed;
  job.threads = a.threads;
  job.strength = a.strength;
  if (!a.strength) {
    auto lol = open_in(a.lol_csv);
    job.class_levels = read_latest_levels_csv(lol);
    auto labels = open_in(a.labels_csv);
    for (auto& [file, c] : read_labels_csv(labels)) job.file_class[file] = c;
  }
  if (!fs::is_directory(job.in_dir)) throw DataError("not a directory: " + a.in_dir);
  const auto report = augment_directory(job);
  const fs::path manifest_dir = a.manifest_dir.empty() ? job.out_dir : fs::path(a.manifest_dir);
  fs::create_directories(manifest_dir);
  write_manifest(manifest_dir, job, report);
  spdlog::info("augmented {} file(s) into {}", report.entries.size(), a.out_dir);
  for (const auto& e : report.errors) spdlog::error("{}", e);
  return report.errors.empty() ? kExitOk : kExitData;
}

// --- profile -------------------------------------------------------------

struct ProfileArgs {
  int classes = 100;
  std::int64_t n_max = 500;
  double ir = 100.0;
  bool pareto = false;
  std::int64_t n_min = 5;
  double alpha = 0.6;
  std::string out;
};

int cmd_profile(const ProfileArgs& a) {
  ClassProfile p;
  try {
    p = a.pareto ? pareto_profile(a.classes, a.n_max, a.n_min, a.alpha) : exp_profile(a.classes, a.n_max, a.ir);
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  with_output(a.out, [&](std::ostream& os) { write_profile_csv(os, p); });
  spdlog::debug("profile: {} classes, total {}, IR {}", p.num_classes(), p.total(), p.imbalance_ratio());
  return kExitOk;
}

// --- subsample -----------------------------------------------------------

int cmd_subsample(const std::string& labels_csv, const std::string& profile_csv, std::uint64_t seed,
                  const std::string& out) {
  auto lin = open_in(labels_csv);
  const auto labels = read_sample_labels_csv(lin);
  auto pin = open_in(profile_csv);
  const auto profile = read_profile_csv(pin);
  Rng rng(seed);
  const auto kept = subsample(labels, profile, rng);
  with_output(out, [&](std::ostream& os) {
    for (auto id : kept) os << id << '\n';
  });
  return kExitOk;
}

// --- simulate ------------------------------------------------------------

int cmd_simulate(const std::string& config_path, std::string csv, std::string plot, const std::string& manifest) {
  const auto cfg = load_simulation_config(config_path);
  if (csv.empty()) csv = cfg.csv_path;
  if (plot.empty()) plot = cfg.plot_path;
  const auto result = run_dynamics(cfg.profile, cfg.curriculum, cfg.learner);
  with_output(csv, [&](std::ostream& os) { write_history_csv(os, result.table); });
  if (!plot.empty()) write_png(plot, plot_trajectories(result.table));
  if (!manifest.empty()) {
    with_output(manifest, [&](std::ostream& os) { os << run_manifest_json(cfg.curriculum, result).dump(2) << '\n'; });
  }
  spdlog::info("simulated {} epochs over {} classes", result.metrics.size(), cfg.profile.num_classes());
  return kExitOk;
}

// --- analyze -------------------------------------------------------------

int cmd_analyze_weights(const std::string& weights_csv, const std::string& out) {
  auto in = open_in(weights_csv);
  const double v = weight_norm_variance(read_matrix_csv(in));
  with_output(out, [&](std::ostream& os) {
    os.precision(17);
    os << "weight_norm_variance\n" << v << '\n';
  });
  return kExitOk;
}

int cmd_analyze_alignment(const std::string& features_csv, const std::string& baseline_csv, const std::string& out) {
  auto in = open_in(features_csv);
  const auto treated = feature_alignment(read_features_csv(in));
  for (const auto& w : treated.warnings) spdlog::warn("{}", w);
  std::optional<AlignmentReport> base;
  if (!baseline_csv.empty()) {
    auto bin = open_in(baseline_csv);
    base = feature_alignment(read_features_csv(bin));
    for (const auto& w : base->warnings) spdlog::warn("baseline: {}", w);
  }
  with_output(out, [&](std::ostream& os) {
    os.precision(17);
    if (!base) {
      os << "class_id,alignment\n";
      for (const auto& [c, v] : treated.per_class) os << c << ',' << v << '\n';
      return;
    }
    os << "class_id,baseline,treated,gain\n";
    for (const auto& [c, g] : alignment_gain(base->per_class, treated.per_class)) {
      os << c << ',' << base->per_class.at(c) << ',' << treated.per_class.at(c) << ',' << g << '\n';
    }
  });
  return kExitOk;
}

int cmd_analyze_breakdown(const std::string& pred_csv, const std::string& labels_csv, const std::string& profile_csv,
                          const std::string& out) {
  auto pin = open_in(pred_csv);
  const auto predictions = read_sample_labels_csv(pin);
  auto lin = open_in(labels_csv);
  const auto labels = read_sample_labels_csv(lin);
  auto prof = open_in(profile_csv);
  const auto masks = categorize(read_profile_csv(prof));
  const auto b = accuracy_breakdown(predictions, labels, masks);
  with_output(out, [&](std::ostream& os) {
    os.precision(17);
    os << "all,many,med,few\n" << b.all;
    for (const auto* part : {&b.many, &b.med, &b.few}) {
      os << ',';
      if (*part) os << **part;  // empty cell: no samples in that category
    }
    os << '\n';
  });
  return kExitOk;
}

// --- serve ---------------------------------------------------------------

bool send_all(int fd, const std::string& data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const auto n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) return false;
    sent += static_cast<std::size_t>(n);
  }
  return true;
}

void serve_connection(int fd) {
  ServeSession session;
  std::string buffer;
  char chunk[65536];
  while (true) {
    const auto n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t pos;
    while ((pos = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, pos);
      buffer.erase(0, pos + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      if (!send_all(fd, session.handle_line(line) + "\n")) {
        ::close(fd);
        return;
      }
    }
  }
  ::close(fd);
}

int serve_tcp(const std::string& host, int port) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw DataError("socket() failed");
  const int one = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) throw DataError("bad host " + host);
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    throw DataError("cannot bind " + host + ":" + std::to_string(port));
  }
  if (::listen(listener, 16) < 0) throw DataError("listen() failed");
  spdlog::info("serving protocol v{} on {}:{}", kProtocolVersion, host, port);
  while (true) {
    const int fd = ::accept(listener, nullptr, nullptr);
    if (fd < 0) continue;
    spdlog::debug("connection accepted");
    std::thread(serve_connection, fd).detach();
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Curriculum of data augmentation engine"};
  app.require_subcommand(1);

  AugmentArgs aug;
  auto* augment = app.add_subcommand("augment", "Augment a directory of PNG files");
  augment->add_option("--in", aug.in_dir, "Input directory")->required();
  augment->add_option("--out", aug.out_dir, "Output directory")->required();
  auto* strength_opt = augment->add_option("--strength", aug.strength, "Fixed strength 0..30")->check(CLI::Range(0, 30));
  auto* lol_opt = augment->add_option("--lol", aug.lol_csv, "LoL history CSV (epoch,class_id,level)");
  augment->add_option("--labels", aug.labels_csv, "Labels CSV (file,class_id)")->needs(lol_opt);
  lol_opt->excludes(strength_opt);
  augment->add_option("--seed", aug.seed, "Master seed");
  augment->add_option("--threads", aug.threads, "Worker threads")->check(CLI::PositiveNumber);
  augment->add_option("--manifest-dir", aug.manifest_dir, "Where to write manifest.json and sequences.log");

  ProfileArgs prof;
  auto* profile = app.add_subcommand("profile", "Write a long-tailed class profile CSV");
  profile->add_option("--classes", prof.classes, "Number of classes");
  profile->add_option("--nmax", prof.n_max, "Largest class size");
  profile->add_option("--ir", prof.ir, "Imbalance ratio (exponential profile)");
  profile->add_flag("--pareto", prof.pareto, "Use the rank-power (Pareto) profile");
  profile->add_option("--nmin", prof.n_min, "Smallest class size (Pareto)");
  profile->add_option("--alpha", prof.alpha, "Pareto power");
  profile->add_option("--out", prof.out, "Output CSV (default stdout)");

  std::string sub_labels, sub_profile, sub_out;
  std::uint64_t sub_seed = 0;
  auto* sub = app.add_subcommand("subsample", "Select a long-tailed subset of a labelled dataset");
  sub->add_option("--labels", sub_labels, "Labels CSV (sample_id,class_id)")->required();
  sub->add_option("--profile", sub_profile, "Profile CSV (class_id,count)")->required();
  sub->add_option("--seed", sub_seed, "Seed");
  sub->add_option("--out", sub_out, "Kept sample ids (default stdout)");

  std::string sim_config, sim_csv, sim_plot, sim_manifest;
  auto* simulate = app.add_subcommand("simulate", "Simulate LoL dynamics with a synthetic learner");
  simulate->add_option("config", sim_config, "Config file (TOML)")->required();
  simulate->add_option("--out", sim_csv, "History CSV (epoch,class_id,level)");
  simulate->add_option("--plot", sim_plot, "Decile trajectory PNG");
  simulate->add_option("--manifest", sim_manifest, "Run manifest JSON");

  auto* analyze = app.add_subcommand("analyze", "Diagnostic metrics over trainer outputs");
  analyze->require_subcommand(1);
  std::string an_weights, an_features, an_baseline, an_pred, an_labels, an_profile, an_out;
  auto* weights = analyze->add_subcommand("weights", "Variance of per-class weight L1 norms");
  weights->add_option("--weights", an_weights, "Weights CSV, one row per class")->required();
  weights->add_option("--out", an_out, "Output CSV");
  auto* alignment = analyze->add_subcommand("alignment", "Per-class feature alignment (and gain)");
  alignment->add_option("--features", an_features, "Features CSV (vector columns, label)")->required();
  alignment->add_option("--baseline", an_baseline, "Baseline features CSV; reports gain");
  alignment->add_option("--out", an_out, "Output CSV");
  auto* breakdown = analyze->add_subcommand("breakdown", "Many/Med/Few accuracy");
  breakdown->add_option("--predictions", an_pred, "Predictions CSV (sample_id,class_id)")->required();
  breakdown->add_option("--labels", an_labels, "Labels CSV (sample_id,class_id)")->required();
  breakdown->add_option("--profile", an_profile, "Training profile CSV")->required();
  breakdown->add_option("--out", an_out, "Output CSV");

  bool serve_stdio = false;
  int serve_port = 0;
  std::string serve_host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "Run the line-delimited JSON sidecar");
  auto* stdio_flag = serve->add_flag("--stdio", serve_stdio, "Serve one session on stdin/stdout (default)");
  serve->add_option("--port", serve_port, "TCP port")->excludes(stdio_flag)->check(CLI::Range(1, 65535));
  serve->add_option("--host", serve_host, "TCP bind address");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*augment) {
      if (!aug.strength && (aug.lol_csv.empty() || aug.labels_csv.empty())) {
        std::cerr << "augment: give --strength, or --lol with --labels\n";
        return kExitUsage;
      }
      return cmd_augment(aug);
    }
    if (*profile) return cmd_profile(prof);
    if (*sub) return cmd_subsample(sub_labels, sub_profile, sub_seed, sub_out);
    if (*simulate) return cmd_simulate(sim_config, sim_csv, sim_plot, sim_manifest);
    if (*weights) return cmd_analyze_weights(an_weights, an_out);
    if (*alignment) return cmd_analyze_alignment(an_features, an_baseline, an_out);
    if (*breakdown) return cmd_analyze_breakdown(an_pred, an_labels, an_profile, an_out);
    if (*serve) {
      if (serve_port > 0) return serve_tcp(serve_host, serve_port);
      serve_stream(std::cin, std::cout);
      return kExitOk;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return kExitUsage;
}
