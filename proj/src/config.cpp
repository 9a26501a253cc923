// Copyright 2026 The probmesh Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "probmesh/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "probmesh/errors.hpp"

namespace probmesh {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::optional<double> to_double(const std::string& s) {
  const std::string t = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

const std::vector<std::string>& ExperimentConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "problem",
      "seed",
      "out",
      "kernel.family",
      "kernel.scale",
      "kernel.base",
      "kernel.quadrature",
      "design.source",
      "design.m",
      "design.m_list",
      "design.file",
      "design.initial",
      "design.sweeps",
      "design.candidates",
      "design.loss",
      "design.theta",
      "design.boundary_per_edge",
      "design.threads",
      "obs.locations",
      "obs.grid",
      "obs.gamma",
      "obs.data_file",
      "obs.theta_true",
      "obs.solution",
      "obs.data_grid_n",
      "inference.method",
      "inference.prior",
      "inference.theta_lo",
      "inference.theta_hi",
      "inference.iters",
      "inference.proposal_sd",
      "inference.lambda",
      "inference.initial_theta",
      "inference.lengthscale",
      "inference.lengthscale_value",
      "inference.lengthscale_grid",
      "inference.lengthscale_scale",
      "inference.n_importance",
      "inference.importance_scale",
      "inference.importance_ladder",
      "inference.bins",
      "crude.theta",
      "crude.grid_n",
      "crude.resolution",
      "forward.theta",
      "forward.grid_points",
      "forward.samples",
  };
  return keys;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& source) {
  ExperimentConfig c;
  c.source_ = source;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  const auto& keys = known_keys();
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key");
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (c.values_.count(key) != 0) throw ConfigError(where + "duplicate key '" + key + "'");
    c.values_[key] = value;
    c.lines_[key] = lineno;
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

std::string ExperimentConfig::serialise() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

bool ExperimentConfig::has(const std::string& key) const { return values_.count(key) != 0; }

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown key '" + key + "'");
  values_[key] = value;
  lines_.erase(key);
}

void ExperimentConfig::fail(const std::string& key, const std::string& what) const {
  const auto it = lines_.find(key);
  const std::string where = it != lines_.end() ? source_ + ":" + std::to_string(it->second) + ": " : source_ + ": ";
  throw ConfigError(where + key + ": " + what);
}

std::string ExperimentConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::string ExperimentConfig::require_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) throw ConfigError(source_ + ": missing required key '" + key + "'");
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto v = to_double(it->second);
  if (!v) fail(key, "expected a number, got '" + it->second + "'");
  return *v;
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string t = trim(it->second);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    fail(key, "expected an integer, got '" + it->second + "'");
  return v;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  fail(key, "expected true or false, got '" + it->second + "'");
}

std::vector<double> ExperimentConfig::get_list(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const std::string& item : split(it->second, ',')) {
    const auto v = to_double(item);
    if (!v) fail(key, "expected comma-separated numbers, got '" + it->second + "'");
    out.push_back(*v);
  }
  if (out.empty()) fail(key, "empty list");
  return out;
}

std::vector<std::pair<double, double>> ExperimentConfig::get_points(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return {};
  std::vector<std::pair<double, double>> out;
  for (const std::string& item : split(it->second, ';')) {
    if (item.empty()) continue;
    const auto parts = split(item, ',');
    if (parts.size() > 2) fail(key, "points are 'x' or 'x,y' separated by ';'");
    const auto x = to_double(parts[0]);
    const auto y = parts.size() == 2 ? to_double(parts[1]) : std::optional<double>(0.0);
    if (!x || !y) fail(key, "bad point '" + item + "'");
    out.emplace_back(*x, *y);
  }
  return out;
}

}  // namespace probmesh
