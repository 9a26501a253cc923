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

#include <functional>
#include <string>
#include <vector>

namespace probmesh {

struct SelfCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Oracle and property suites: quadrature against closed forms, the natural
/// kernel against nested quadrature, the marginal likelihood against a dense
/// formula, pCN prior preservation, Gram symmetry and PSD, interpolation
/// exactness, nested-design variance monotonicity, the local error bound,
/// fill distance against brute force, and derivative blocks against finite
/// differences. `progress` is called after each check.
std::vector<SelfCheck> run_selftest(const std::function<void(const SelfCheck&)>& progress = {});

}  // namespace probmesh
