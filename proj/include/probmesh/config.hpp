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

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace probmesh {

/// Flat `key = value` settings, one per line; `#` starts a comment. Keys are
/// grouped by prefix (kernel.*, design.*, obs.*, inference.*, crude.*,
/// forward.*). Unknown keys are rejected with their line number.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(const std::string& text, const std::string& source = "config");
  static ExperimentConfig load(const std::string& path);
  /// Keys in sorted order, `key = value` per line.
  std::string serialise() const;

  static const std::vector<std::string>& known_keys();

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& values() const { return values_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated numbers.
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
  /// Semicolon-separated points, each `x` or `x,y`.
  std::vector<std::pair<double, double>> get_points(const std::string& key) const;

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) { return a.values_ == b.values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  std::string source_ = "config";

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;
};

}  // namespace probmesh
