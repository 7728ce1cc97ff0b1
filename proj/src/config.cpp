#include "blowup/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace blowup {

namespace toml {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// strip a trailing comment that is not inside a string
std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

bool bare_key(const std::string& k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; });
}

Value parse_scalar(const std::string& raw, int line) {
  std::string v = trim(raw);
  if (v.empty()) throw ConfigError(fmt::format("toml line {}: missing value", line));
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') throw ConfigError(fmt::format("toml line {}: unterminated string", line));
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        char n = v[++i];
        out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
      } else {
        out += v[i];
      }
    }
    return out;
  }
  if (v.front() == '[') {
    if (v.back() != ']') throw ConfigError(fmt::format("toml line {}: unterminated array", line));
    Array arr;
    std::string body = v.substr(1, v.size() - 2);
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      Value x = parse_scalar(item, line);
      if (auto* d = std::get_if<double>(&x)) arr.push_back(*d);
      else if (auto* i = std::get_if<std::int64_t>(&x)) arr.push_back(static_cast<double>(*i));
      else throw ConfigError(fmt::format("toml line {}: only numeric arrays are supported", line));
    }
    return arr;
  }
  std::string num;
  for (char c : v)
    if (c != '_') num += c;
  bool is_float = num.find_first_of(".eE") != std::string::npos || num == "inf" || num == "nan";
  if (!is_float) {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), i);
    if (ec == std::errc() && p == num.data() + num.size()) return i;
  }
  double d = 0;
  auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
  if (ec != std::errc() || p != num.data() + num.size())
    throw ConfigError(fmt::format("toml line {}: cannot parse value '{}'", line, v));
  return d;
}

std::string fmt_double(double d) {
  std::string s = fmt::format("{}", d);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

double Document::number(const std::string& key) const {
  const Value& v = values.at(key);
  if (auto* d = std::get_if<double>(&v)) return *d;
  if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw ConfigError(fmt::format("config: '{}' must be a number", key));
}

std::int64_t Document::integer(const std::string& key) const {
  const Value& v = values.at(key);
  if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (auto* d = std::get_if<double>(&v); d && std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
  throw ConfigError(fmt::format("config: '{}' must be an integer", key));
}

bool Document::boolean(const std::string& key) const {
  if (auto* b = std::get_if<bool>(&values.at(key))) return *b;
  throw ConfigError(fmt::format("config: '{}' must be a boolean", key));
}

const std::string& Document::string(const std::string& key) const {
  if (auto* s = std::get_if<std::string>(&values.at(key))) return *s;
  throw ConfigError(fmt::format("config: '{}' must be a string", key));
}

Array Document::array(const std::string& key) const {
  if (auto* a = std::get_if<Array>(&values.at(key))) return *a;
  throw ConfigError(fmt::format("config: '{}' must be an array of numbers", key));
}

void Document::set(const std::string& key, Value v) {
  if (!values.count(key)) order.push_back(key);
  values[key] = std::move(v);
}

Document parse(const std::string& text) {
  Document doc;
  std::stringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw ConfigError(fmt::format("toml line {}: malformed section header", line));
      section = trim(s.substr(1, s.size() - 2));
      if (!bare_key(section)) throw ConfigError(fmt::format("toml line {}: unsupported section name", line));
      continue;
    }
    auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("toml line {}: expected key = value", line));
    std::string key = trim(s.substr(0, eq));
    if (!bare_key(key)) throw ConfigError(fmt::format("toml line {}: unsupported key '{}'", line, key));
    std::string full = section.empty() ? key : section + "." + key;
    if (doc.has(full)) throw ConfigError(fmt::format("toml line {}: duplicate key '{}'", line, full));
    doc.set(full, parse_scalar(s.substr(eq + 1), line));
  }
  return doc;
}

std::string dump(const Document& doc) {
  std::string out, current;
  bool first = true;
  for (const auto& full : doc.order) {
    auto dot = full.find('.');
    std::string sec = dot == std::string::npos ? "" : full.substr(0, dot);
    std::string key = dot == std::string::npos ? full : full.substr(dot + 1);
    if (first || sec != current) {
      if (!sec.empty()) out += fmt::format("{}[{}]\n", first ? "" : "\n", sec);
      current = sec;
      first = false;
    }
    const Value& v = doc.values.at(full);
    std::string val;
    if (auto* b = std::get_if<bool>(&v)) val = *b ? "true" : "false";
    else if (auto* i = std::get_if<std::int64_t>(&v)) val = fmt::format("{}", *i);
    else if (auto* d = std::get_if<double>(&v)) val = fmt_double(*d);
    else if (auto* s = std::get_if<std::string>(&v)) val = fmt::format("\"{}\"", *s);
    else {
      const auto& a = std::get<Array>(v);
      std::vector<std::string> parts;
      for (double x : a) parts.push_back(fmt_double(x));
      val = fmt::format("[{}]", fmt::join(parts, ", "));
    }
    out += fmt::format("{} = {}\n", key, val);
  }
  return out;
}

}  // namespace toml

toml::Document LabConfig::to_toml() const {
  toml::Document d;
  d.set("grid.h", grid_h);
  d.set("grid.ymax", grid_ymax);
  d.set("sim.n", static_cast<std::int64_t>(sim.n));
  d.set("sim.beta", sim.beta);
  d.set("sim.delta", sim.delta);
  d.set("sim.L", sim.L);
  d.set("sim.N", static_cast<std::int64_t>(sim.N));
  d.set("sim.c_dt", sim.c_dt);
  d.set("sim.t_end", sim.t_end);
  d.set("sim.decompose_every", static_cast<std::int64_t>(sim.decompose_every));
  d.set("sim.snapshots", static_cast<std::int64_t>(sim.snapshots));
  d.set("sim.tail_limit", sim.tail_limit);
  d.set("sweep.n", static_cast<std::int64_t>(sweep_n));
  d.set("sweep.betas", sweep_betas);
  d.set("sweep.t_end", sweep_t_end);
  d.set("sweep.s_min", sweep_s_min);
  d.set("scan.s", scan_s);
  d.set("scan.samples", static_cast<std::int64_t>(scan_samples));
  d.set("misc.seed", static_cast<std::int64_t>(seed));
  return d;
}

LabConfig LabConfig::from_toml(const toml::Document& doc) {
  LabConfig c;
  const toml::Document defaults = c.to_toml();
  for (const auto& k : doc.order)
    if (!defaults.has(k)) throw ConfigError(fmt::format("config: unknown key '{}'", k));
  auto num = [&](const char* k, double& dst) { if (doc.has(k)) dst = doc.number(k); };
  auto integer = [&](const char* k, auto& dst) {
    if (doc.has(k)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(doc.integer(k));
  };
  num("grid.h", c.grid_h);
  num("grid.ymax", c.grid_ymax);
  integer("sim.n", c.sim.n);
  num("sim.beta", c.sim.beta);
  num("sim.delta", c.sim.delta);
  num("sim.L", c.sim.L);
  integer("sim.N", c.sim.N);
  num("sim.c_dt", c.sim.c_dt);
  num("sim.t_end", c.sim.t_end);
  integer("sim.decompose_every", c.sim.decompose_every);
  integer("sim.snapshots", c.sim.snapshots);
  num("sim.tail_limit", c.sim.tail_limit);
  integer("sweep.n", c.sweep_n);
  if (doc.has("sweep.betas")) c.sweep_betas = doc.array("sweep.betas");
  num("sweep.t_end", c.sweep_t_end);
  num("sweep.s_min", c.sweep_s_min);
  if (doc.has("scan.s")) c.scan_s = doc.array("scan.s");
  integer("scan.samples", c.scan_samples);
  integer("misc.seed", c.seed);
  try {
    c.sim.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(c.grid_h > 0) || !(c.grid_ymax > 1)) throw ConfigError("config: grid.h must be positive and grid.ymax > 1");
  return c;
}

LabConfig LabConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("config: cannot open '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return from_toml(toml::parse(ss.str()));
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t;
    for (char c : item)
      if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    double d = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), d);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size())
      throw ConfigError(fmt::format("malformed number '{}' in list '{}'", item, s));
    out.push_back(d);
  }
  if (out.empty()) throw ConfigError(fmt::format("empty list '{}'", s));
  return out;
}

std::pair<double, double> parse_grid(const std::string& s) {
  auto v = parse_list(s);
  if (v.size() != 2) throw ConfigError(fmt::format("grid must be 'h,ymax', got '{}'", s));
  if (!(v[0] > 0) || !(v[1] > 1) || v[0] >= v[1]) throw ConfigError(fmt::format("grid '{}' must satisfy 0 < h < ymax", s));
  return {v[0], v[1]};
}

}  // namespace blowup
