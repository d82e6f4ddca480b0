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

// Certainty deductions, deduction chains and the two contradiction scenarios.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wfsim/experiment.hpp"
#include "wfsim/presets.hpp"
#include "wfsim/storyplot.hpp"

namespace wfsim {

inline constexpr double kCertaintyThreshold = 1.0 - tol::kCertainty;

/// reasoner:given ⊢ target=deduced, inferred under `model_tag`.
struct DeductionRule {
  std::string reasoner;
  std::string given_outcome;
  std::string target;
  std::string deduced;
  std::string model_tag;
  double certainty = 1.0;

  std::string render() const;
  bool operator==(const DeductionRule&) const = default;
};

/// One rule per present column that puts >= kCertaintyThreshold on a single outcome.
std::vector<DeductionRule> certainty_deductions(const ConditionalTable& table);

struct DeductionChain {
  AgentOutcome start;
  std::vector<DeductionRule> links;

  std::size_t size() const { return links.size(); }
  bool empty() const { return links.empty(); }
  /// "A:o ⊢ F2=U [ism] ⊢ F1=T [ism]".
  std::string render() const;
};

/// Follows certainty links from `start` until no rule applies. The first
/// matching rule in `rules` is taken. Throws InvariantError when a link would
/// revisit an agent already in the chain.
DeductionChain chain(const std::vector<DeductionRule>& rules, const AgentOutcome& start);

struct ContradictionReport {
  std::string scenario;
  OutcomeAssignment post_selection;
  double post_selection_probability = 1.0;
  CompatibilityConstraint constraint;
  Violation violation;
  Event left_event;
  Event right_event;
  std::string left_rendered;
  std::string right_rendered;
  DeductionChain chain;
  std::optional<DeductionRule> offending_link;
  std::string offending_model;
  std::vector<std::string> derivations;
};

struct ConstraintCheck {
  CompatibilityConstraint constraint;
  CompatibilityVerdict verdict;
};

struct ScenarioResult {
  std::string scenario;
  std::map<std::string, Plot> plots;  // by owning agent
  std::vector<DeductionRule> rules;
  DeductionChain chain;
  std::vector<ConstraintCheck> checks;
  std::vector<std::string> derivations;
  std::optional<ContradictionReport> contradiction;

  bool consistent() const { return !contradiction.has_value(); }
};

struct FrScenarioOptions {
  CollapseModel model_A = CollapseModel::no_collapse();
  CollapseModel model_F2 = CollapseModel::no_collapse();
  CollapseModel model_F1 = CollapseModel::subjective("F1");
  CollapseModel model_W = CollapseModel::no_collapse();
  /// Condition on the halting round {A: o, W: O}.
  bool post_select = true;
};

ScenarioResult run_fr_scenario(const FrScenarioOptions& options = {});
/// run_fr_scenario with defaults except F1's model.
ScenarioResult run_fr_contradiction(const CollapseModel& model_for_F1);

struct DeutschOptions {
  CollapseModel friend_model = CollapseModel::subjective("F");
  CollapseModel wigner_model = CollapseModel::no_collapse();
  presets::WignerBasis wigner_basis = presets::WignerBasis::kSuperposition;
  std::string friend_outcome = "u";
};

ScenarioResult run_deutsch_contradiction(const DeutschOptions& options = {});

nlohmann::json to_json(const DeductionRule& rule);
nlohmann::json to_json(const DeductionChain& chain);
nlohmann::json to_json(const ContradictionReport& report);
nlohmann::json to_json(const ScenarioResult& result);
std::string render_text(const ContradictionReport& report);
std::string render_text(const ScenarioResult& result);

}  // namespace wfsim
