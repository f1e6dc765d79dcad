#pragma once

// Line-delimited JSON sidecar protocol, version 1.
//
// One JSON object per line. Every request carries "type" and a client-assigned
// integer "id"; the reply carries the same id. Session order:
//
//   hello -> { plan_probes -> probe_results (reply: lol_snapshot) -> epoch_plan }*
//
// augment_batch, lol_snapshot and metrics are accepted at any point after
// hello. Out-of-order requests get an error and leave the session state as it
// was. Malformed lines get an error with id -1.
//
// Probes and epoch directives carry (s, seed); the trainer sends the images
// through augment_batch to obtain the augmented versions.

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "curaug/base64.hpp"
#include "curaug/compose.hpp"
#include "curaug/curriculum.hpp"
#include "curaug/png_io.hpp"

namespace curaug {

inline constexpr int kProtocolVersion = 1;

using json = nlohmann::json;

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline json config_to_json(const CurriculumConfig& c) {
  return {{"p_aug", c.p_aug},
          {"gamma", c.gamma},
          {"T", c.T},
          {"epochs", c.epochs},
          {"max_strength", c.max_strength},
          {"seed", c.seed},
          {"gamma_auto_tune", c.gamma_auto_tune},
          {"threshold", c.rule == ThresholdRule::Strict ? "strict" : "inclusive"}};
}

inline CurriculumConfig config_from_json(const json& j) {
  CurriculumConfig c;
  if (!j.is_object()) throw ProtocolError("invalid", "config must be an object");
  c.p_aug = j.value("p_aug", c.p_aug);
  c.gamma = j.value("gamma", c.gamma);
  c.T = j.value("T", c.T);
  c.epochs = j.value("epochs", c.epochs);
  c.max_strength = j.value("max_strength", c.max_strength);
  c.seed = j.value("seed", c.seed);
  c.gamma_auto_tune = j.value("gamma_auto_tune", c.gamma_auto_tune);
  const auto rule = j.value("threshold", std::string("strict"));
  if (rule == "strict") c.rule = ThresholdRule::Strict;
  else if (rule == "inclusive") c.rule = ThresholdRule::Inclusive;
  else throw ProtocolError("invalid", "threshold must be \"strict\" or \"inclusive\"");
  c.validate();
  return c;
}

/// Run manifest: config, seed and per-epoch timing of a curriculum run.
inline json run_manifest_json(const CurriculumConfig& cfg, const RunResult& result) {
  json epochs = json::array();
  for (const auto& m : result.metrics) {
    epochs.push_back({{"epoch", m.epoch}, {"gamma", m.gamma}, {"probes", m.probes},
                      {"augmented", m.augmented}, {"seconds", m.seconds}});
  }
  return {{"config", config_to_json(cfg)}, {"seed", cfg.seed}, {"final_gamma", result.final_gamma},
          {"final_levels", result.table.levels}, {"epochs", epochs}};
}

inline json probe_plan_to_json(const ProbePlan& plan, int level) {
  json entries = json::array();
  for (const auto& e : plan.entries) {
    entries.push_back({{"level", e.level}, {"samples", e.samples}, {"seeds", e.seeds}});
  }
  return {{"class_id", plan.class_id}, {"level", level}, {"entries", entries}};
}

inline json epoch_plan_to_json(const EpochPlan& plan) {
  json directives = json::array();
  for (const auto& d : plan.directives) {
    if (d.action == Action::Augment) {
      directives.push_back({{"sample_id", d.sample_id}, {"class_id", d.class_id}, {"action", "augment"},
                            {"s", d.strength}, {"seed", d.seed}});
    } else {
      directives.push_back({{"sample_id", d.sample_id}, {"class_id", d.class_id}, {"action", "original"}});
    }
  }
  return directives;
}

/// Augments one PNG payload. s = 0 returns the payload bytes unchanged.
inline std::vector<std::uint8_t> augment_png(std::span<const std::uint8_t> png, int s, std::uint64_t seed,
                                             OpSequence* sequence = nullptr) {
  check_strength(s);
  auto result = augment_seeded(decode_png(png), s, seed);
  if (sequence) *sequence = result.sequence;
  if (result.sequence.steps.empty()) return {png.begin(), png.end()};
  return encode_png(result.image);
}

class ServeSession {
 public:
  enum class Phase { AwaitHello, Idle, Probing, Updated };

  Phase phase() const noexcept { return phase_; }
  const CurriculumState* state() const noexcept { return state_ ? &*state_ : nullptr; }

  /// Handles one request line and returns the reply line (without newline).
  std::string handle_line(std::string_view line) {
    json request;
    try {
      request = json::parse(line);
    } catch (const json::parse_error& e) {
      return error_reply(-1, "malformed", std::string("unparseable JSON: ") + e.what());
    }
    if (!request.is_object() || !request.contains("type") || !request["type"].is_string()) {
      return error_reply(-1, "malformed", "request must be an object with a string \"type\"");
    }
    if (!request.contains("id") || !request["id"].is_number_integer()) {
      return error_reply(-1, "malformed", "request must carry an integer \"id\"");
    }
    const auto id = request["id"].get<std::int64_t>();
    try {
      if (request.contains("v") && request["v"] != kProtocolVersion) {
        throw ProtocolError("version", "unsupported protocol version " + request["v"].dump());
      }
      return dispatch(request["type"].get<std::string>(), request, id)
          .dump(-1, ' ', false, json::error_handler_t::replace);
    } catch (const ProtocolError& e) {
      return error_reply(id, e.code(), e.what());
    } catch (const json::exception& e) {
      return error_reply(id, "invalid", std::string("bad payload: ") + e.what());
    } catch (const std::exception& e) {
      return error_reply(id, "invalid", e.what());
    }
  }

 private:
  static json reply(std::string_view type, std::int64_t id) {
    return {{"v", kProtocolVersion}, {"type", type}, {"id", id}};
  }

  static std::string error_reply(std::int64_t id, std::string_view code, const std::string& message) {
    json j = reply("error", id);
    j["code"] = code;
    j["message"] = message;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
  }

  void require_phase(std::string_view type, std::initializer_list<Phase> allowed) const {
    for (auto p : allowed)
      if (p == phase_) return;
    throw ProtocolError("protocol", std::string(type) + " not allowed in phase " + phase_name());
  }

  std::string phase_name() const {
    switch (phase_) {
      case Phase::AwaitHello: return "await_hello";
      case Phase::Idle: return "idle";
      case Phase::Probing: return "probing";
      case Phase::Updated: return "updated";
    }
    return "?";
  }

  json snapshot(std::int64_t id) const {
    json j = reply("lol_snapshot", id);
    j["epoch"] = state_->epoch();
    j["gamma"] = state_->gamma();
    j["levels"] = state_->table().levels;
    return j;
  }

  json dispatch(const std::string& type, const json& req, std::int64_t id) {
    if (type == "hello") return on_hello(req, id);
    if (type == "plan_probes") return on_plan_probes(id);
    if (type == "probe_results") return on_probe_results(req, id);
    if (type == "epoch_plan") return on_epoch_plan(id);
    if (type == "augment_batch") return on_augment_batch(req, id);
    if (type == "lol_snapshot") {
      require_phase(type, {Phase::Idle, Phase::Probing, Phase::Updated});
      return snapshot(id);
    }
    if (type == "metrics") return on_metrics(id);
    throw ProtocolError("unknown_type", "unknown message type '" + type + "'");
  }

  json on_hello(const json& req, std::int64_t id) {
    require_phase("hello", {Phase::AwaitHello});
    const auto cfg = config_from_json(req.value("config", json::object()));
    const auto labels = req.at("labels").get<std::vector<int>>();
    int num_classes = req.value("num_classes", 0);
    if (num_classes == 0) {
      for (int l : labels) num_classes = std::max(num_classes, l + 1);
    }
    state_.emplace(cfg, labels, num_classes);
    phase_ = Phase::Idle;
    json j = reply("hello", id);
    j["server"] = "curaug";
    j["num_classes"] = num_classes;
    j["num_samples"] = labels.size();
    j["config"] = config_to_json(cfg);
    return j;
  }

  json on_plan_probes(std::int64_t id) {
    require_phase("plan_probes", {Phase::Idle});
    const auto& cfg = state_->config();
    if (cfg.epochs > 0 && state_->epoch() >= cfg.epochs) {
      throw ProtocolError("protocol", "run complete after " + std::to_string(cfg.epochs) + " epochs");
    }
    pending_ = state_->plan_all_probes();
    json classes = json::array();
    for (const auto& plan : pending_) {
      classes.push_back(probe_plan_to_json(plan, state_->table().levels[static_cast<std::size_t>(plan.class_id)]));
    }
    phase_ = Phase::Probing;
    json j = reply("plan_probes", id);
    j["epoch"] = state_->epoch() + 1;
    j["gamma"] = state_->gamma();
    j["T"] = cfg.T;
    j["classes"] = classes;
    return j;
  }

  json on_probe_results(const json& req, std::int64_t id) {
    require_phase("probe_results", {Phase::Probing});
    std::vector<ProbeOutcome> outcomes;
    for (const auto& r : req.at("results")) {
      outcomes.push_back({r.at("class_id").get<int>(), r.at("counts").get<std::vector<int>>()});
    }
    std::sort(outcomes.begin(), outcomes.end(),
              [](const auto& a, const auto& b) { return a.class_id < b.class_id; });
    state_->apply_outcomes(outcomes);  // throws without mutating on bad input
    probes_answered_ += pending_.size();
    pending_.clear();
    phase_ = Phase::Updated;
    return snapshot(id);
  }

  json on_epoch_plan(std::int64_t id) {
    require_phase("epoch_plan", {Phase::Updated});
    const auto plan = state_->epoch_plan();
    phase_ = Phase::Idle;
    json j = reply("epoch_plan", id);
    j["epoch"] = plan.epoch;
    j["directives"] = epoch_plan_to_json(plan);
    return j;
  }

  json on_augment_batch(const json& req, std::int64_t id) {
    require_phase("augment_batch", {Phase::Idle, Phase::Probing, Phase::Updated});
    json items = json::array();
    for (const auto& item : req.at("items")) {
      const auto png = base64_decode(item.at("png").get<std::string>());
      OpSequence seq;
      const auto out = augment_png(png, item.at("s").get<int>(), item.at("seed").get<std::uint64_t>(), &seq);
      json ops = json::array();
      for (const auto& step : seq.steps) ops.push_back(catalog_index(step.kind));
      items.push_back({{"sample_id", item.value("sample_id", json())}, {"png", base64_encode(out)}, {"ops", ops}});
    }
    json j = reply("augmented_batch", id);
    j["items"] = items;
    return j;
  }

  json on_metrics(std::int64_t id) const {
    require_phase("metrics", {Phase::Idle, Phase::Probing, Phase::Updated});
    json j = reply("metrics", id);
    j["epoch"] = state_->epoch();
    j["gamma"] = state_->gamma();
    j["history"] = state_->table().history;
    j["probe_rounds_answered"] = probes_answered_;
    return j;
  }

  Phase phase_ = Phase::AwaitHello;
  std::optional<CurriculumState> state_;
  std::vector<ProbePlan> pending_;
  std::size_t probes_answered_ = 0;
};

/// Serves one session over a pair of streams until EOF.
inline void serve_stream(std::istream& in, std::ostream& out) {
  ServeSession session;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << session.handle_line(line) << '\n' << std::flush;
  }
}

}  // namespace curaug
