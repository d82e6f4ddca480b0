// Copyright 2026 The wfsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configs as JSON.
//
//   {
//     "name": "...",
//     "registry": [{"label": "C", "dim": 2, "basis_labels": ["h", "t"]}],
//     "initial": {"h": [re, im], "t": [re, im]},
//     "steps": [
//       {"time": 1, "agent": "F1", "type": "measure", "targets": ["C"],
//        "basis": [[[re, im], [re, im]], ...], "outcome_labels": ["H", "T"],
//        "memory_label": "F1"},
//       {"time": 1, "agent": "F1", "type": "prepare", "targets": ["F1"],
//        "memory_label": "S", "output_basis_labels": ["up", "down"],
//        "basis": [[[re, im], [re, im]], ...]}
//     ],
//     "halting": [{"agent": "A", "outcome": "o"}],
//     "reports": [{"name": "x", "from": "F", "to": "W", "time": 1, "alphabet": ["0", "1"]}]
//   }
//
// "initial" keys join one basis label per registered subsystem with ','.
// Measurement basis vectors are indexed over the targets in the listed order
// and only the given vectors are stored (completion is recomputed). For a
// preparation, basis[c] is the state prepared on the output subsystem
// "memory_label" for control basis state c.

#pragma once

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "wfsim/experiment.hpp"

namespace wfsim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json experiment_to_json(const ExperimentSpec& spec);
/// Throws ConfigError for malformed documents and for documents describing
/// an invalid experiment.
ExperimentSpec experiment_from_json(const nlohmann::json& doc);
ExperimentSpec load_experiment(const std::string& path);

/// Deterministic rendering: sorted keys, two-space indent, floating-point
/// numbers with 17 significant digits, arrays of scalars on one line.
std::string dump_stable(const nlohmann::json& doc);

}  // namespace wfsim
