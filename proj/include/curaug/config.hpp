#pragma once

// Simulation config files: a TOML subset of [tables] and `key = value` lines
// with integer, float, boolean and double-quoted string values, plus `#` comments.
//
//   [curriculum]   p_aug, gamma, T, epochs, seed, gamma_auto_tune, threshold ("strict"|"inclusive")
//   [profile]      kind ("exp"|"pareto"), classes, n_max, imbalance_ratio, n_min, alpha
//   [simlearner]   kappa_scale, beta, seed
//   [output]       csv, plot

#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "curaug/csv.hpp"
#include "curaug/curriculum.hpp"
#include "curaug/longtail.hpp"
#include "curaug/simlearner.hpp"

namespace curaug {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "config line " + std::to_string(line) + ": " + what : "config: " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

using ConfigValue = std::variant<std::int64_t, double, bool, std::string>;

struct ConfigEntry {
  ConfigValue value;
  std::size_t line = 0;
};

/// "table.key" -> value. Keys outside any table have no prefix.
using ConfigDoc = std::map<std::string, ConfigEntry>;

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  for (char ch : k)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) return false;
  return true;
}

// Strips a trailing comment that is not inside a string.
inline std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

inline ConfigValue parse_value(std::string_view v, std::size_t line) {
  if (v.empty()) throw ConfigError(line, "missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw ConfigError(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        const char e = v[++i];
        out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
      } else {
        out += v[i];
      }
    }
    return out;
  }
  if (v == "true") return true;
  if (v == "false") return false;
  std::string digits;
  for (char ch : v)
    if (ch != '_') digits += ch;
  std::int64_t i = 0;
  if (parse_number(digits, i)) return i;
  double d = 0;
  if (parse_number(digits, d)) return d;
  throw ConfigError(line, "cannot parse value '" + std::string(v) + "'");
}

}  // namespace detail

inline ConfigDoc parse_config(std::istream& in) {
  ConfigDoc doc;
  std::string table;
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const auto line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(n, "unterminated table header");
      const auto name = detail::trim(line.substr(1, line.size() - 2));
      if (!detail::valid_key(name)) throw ConfigError(n, "bad table name '" + std::string(name) + "'");
      table = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(n, "expected key = value");
    const auto key = detail::trim(line.substr(0, eq));
    if (!detail::valid_key(key)) throw ConfigError(n, "bad key '" + std::string(key) + "'");
    const std::string full = table.empty() ? std::string(key) : table + "." + std::string(key);
    if (doc.contains(full)) throw ConfigError(n, "duplicate key '" + full + "'");
    doc.emplace(full, ConfigEntry{detail::parse_value(detail::trim(line.substr(eq + 1)), n), n});
  }
  return doc;
}

inline ConfigDoc parse_config(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

/// Typed access with line-numbered errors; marks keys as used.
class ConfigReader {
 public:
  explicit ConfigReader(ConfigDoc doc) : doc_(std::move(doc)) {}

  double get_double(const std::string& key, double fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    if (const auto* i = std::get_if<std::int64_t>(&e->value)) return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&e->value)) return *d;
    throw ConfigError(e->line, key + " must be a number");
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    if (const auto* i = std::get_if<std::int64_t>(&e->value)) return *i;
    throw ConfigError(e->line, key + " must be an integer");
  }

  bool get_bool(const std::string& key, bool fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    if (const auto* b = std::get_if<bool>(&e->value)) return *b;
    throw ConfigError(e->line, key + " must be true or false");
  }

  std::string get_string(const std::string& key, std::string fallback) {
    const auto* e = find(key);
    if (!e) return fallback;
    if (const auto* s = std::get_if<std::string>(&e->value)) return *s;
    throw ConfigError(e->line, key + " must be a string");
  }

  std::size_t line_of(const std::string& key) const {
    const auto it = doc_.find(key);
    return it == doc_.end() ? 0 : it->second.line;
  }

  /// Rejects keys nobody asked for (typos).
  void check_all_used() const {
    for (const auto& [key, entry] : doc_)
      if (!used_.contains(key)) throw ConfigError(entry.line, "unknown key '" + key + "'");
  }

 private:
  const ConfigEntry* find(const std::string& key) {
    used_[key] = true;
    const auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &it->second;
  }

  ConfigDoc doc_;
  std::map<std::string, bool> used_;
};

struct SimulationConfig {
  CurriculumConfig curriculum;
  ClassProfile profile;
  SimLearnerParams learner;
  std::string csv_path;
  std::string plot_path;
};

inline CurriculumConfig read_curriculum_section(ConfigReader& r) {
  CurriculumConfig c;
  c.p_aug = r.get_double("curriculum.p_aug", c.p_aug);
  c.gamma = r.get_double("curriculum.gamma", c.gamma);
  c.T = static_cast<int>(r.get_int("curriculum.T", c.T));
  c.epochs = static_cast<int>(r.get_int("curriculum.epochs", 200));
  c.seed = static_cast<std::uint64_t>(r.get_int("curriculum.seed", 0));
  c.gamma_auto_tune = r.get_bool("curriculum.gamma_auto_tune", false);
  const auto rule = r.get_string("curriculum.threshold", "strict");
  if (rule == "strict") {
    c.rule = ThresholdRule::Strict;
  } else if (rule == "inclusive") {
    c.rule = ThresholdRule::Inclusive;
  } else {
    throw ConfigError(r.line_of("curriculum.threshold"), "threshold must be \"strict\" or \"inclusive\"");
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  return c;
}

inline SimulationConfig load_simulation_config(std::istream& in) {
  ConfigReader r(parse_config(in));
  SimulationConfig cfg;
  cfg.curriculum = read_curriculum_section(r);

  const auto kind = r.get_string("profile.kind", "exp");
  const auto classes = static_cast<int>(r.get_int("profile.classes", 100));
  const auto n_max = r.get_int("profile.n_max", 500);
  try {
    if (kind == "exp") {
      cfg.profile = exp_profile(classes, n_max, r.get_double("profile.imbalance_ratio", 100.0));
    } else if (kind == "pareto") {
      cfg.profile = pareto_profile(classes, n_max, r.get_int("profile.n_min", 5), r.get_double("profile.alpha", 0.6));
    } else {
      throw ConfigError(r.line_of("profile.kind"), "profile.kind must be \"exp\" or \"pareto\"");
    }
    cfg.learner = params_from_profile(cfg.profile, r.get_double("simlearner.kappa_scale", kDefaultKappaScale),
                                      r.get_double("simlearner.beta", kDefaultBeta),
                                      static_cast<std::uint64_t>(r.get_int("simlearner.seed", 0)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  cfg.csv_path = r.get_string("output.csv", "");
  cfg.plot_path = r.get_string("output.plot", "");
  r.check_all_used();
  return cfg;
}

inline SimulationConfig load_simulation_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  return load_simulation_config(in);
}

}  // namespace curaug
