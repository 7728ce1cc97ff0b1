#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "blowup/evolution.hpp"
#include "blowup/profiles.hpp"

namespace blowup {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat TOML subset: [section] headers, key = value with numbers, booleans,
// basic strings and arrays of numbers, '#' comments.
namespace toml {

using Array = std::vector<double>;
using Value = std::variant<bool, std::int64_t, double, std::string, Array>;

struct Document {
  // "section.key" -> value, in insertion order of sections
  std::map<std::string, Value> values;
  std::vector<std::string> order;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  double number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  bool boolean(const std::string& key) const;
  const std::string& string(const std::string& key) const;
  Array array(const std::string& key) const;
  void set(const std::string& key, Value v);
};

Document parse(const std::string& text);
std::string dump(const Document& doc);

}  // namespace toml

struct LabConfig {
  double grid_h = 1e-3;
  double grid_ymax = 20.0;
  SimConfig sim;
  std::vector<double> sweep_betas{-0.95, -0.5, 0.0, 0.5, 0.95};
  int sweep_n = 20;
  double sweep_t_end = -0.2;
  double sweep_s_min = 5.0;
  std::vector<double> scan_s{20.0, 40.0, 80.0};
  int scan_samples = 16;
  std::uint64_t seed = 20240611;

  toml::Document to_toml() const;
  static LabConfig from_toml(const toml::Document& doc);
  static LabConfig load(const std::string& path);
};

// "h,ymax" -> (h, ymax); throws ConfigError on malformed input.
std::pair<double, double> parse_grid(const std::string& s);
std::vector<double> parse_list(const std::string& s);

}  // namespace blowup
