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

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wfsim/channels.hpp"
#include "wfsim/qstate.hpp"

namespace wfsim {

struct ExperimentStep {
  int time = 0;
  Isometry action;

  const std::string& agent() const;
  bool is_measurement() const { return std::holds_alternative<MeasurementIsometry>(action); }
};

struct AgentOutcome {
  std::string agent;
  std::string outcome;

  bool operator==(const AgentOutcome&) const = default;
  auto operator<=>(const AgentOutcome&) const = default;
};

/// A classical bit (or small alphabet) one agent reports to another. Carried
/// as metadata for the story-plot analysis; no physical channel is simulated.
struct ReportChannel {
  std::string name;
  std::string from;
  std::string to;
  int time = 0;
  std::vector<std::string> alphabet;

  bool operator==(const ReportChannel&) const = default;
};

/// Initial state, ordered steps and an optional halting (post-selection)
/// condition.
///
/// Measurement steps have strictly increasing times and each agent measures
/// at most once; a preparation may share the time of the measurement that
/// precedes it (an agent measuring and then preparing within one protocol
/// step).
class ExperimentSpec {
 public:
  ExperimentSpec(std::string name, StateVector initial, std::vector<ExperimentStep> steps,
                 std::vector<AgentOutcome> halting = {}, std::vector<ReportChannel> reports = {});

  const std::string& name() const { return name_; }
  const StateVector& initial() const { return initial_; }
  const SubsystemRegistry& registry() const { return initial_.registry(); }
  const std::vector<ExperimentStep>& steps() const { return steps_; }
  const std::vector<AgentOutcome>& halting() const { return halting_; }
  const std::vector<ReportChannel>& reports() const { return reports_; }

  /// Registry after every step has appended its subsystem.
  const SubsystemRegistry& final_registry() const { return final_registry_; }
  /// Measuring agents in step order.
  const std::vector<std::string>& agents() const { return agents_; }
  bool has_agent(const std::string& agent) const;
  const MeasurementIsometry& measurement(const std::string& agent) const;
  std::size_t step_index(const std::string& agent) const;
  int time_of(const std::string& agent) const;
  /// Exact match first, then a unique case-insensitive match ("f2" -> "F2").
  std::string resolve_agent(const std::string& name) const;

 private:
  std::string name_;
  StateVector initial_;
  std::vector<ExperimentStep> steps_;
  std::vector<AgentOutcome> halting_;
  std::vector<ReportChannel> reports_;
  SubsystemRegistry final_registry_;
  std::vector<std::string> agents_;
};

using OutcomeAssignment = std::map<std::string, std::string>;

/// Distribution over outcomes of one agent, in memory-basis order.
struct OutcomeDistribution {
  std::string agent;
  std::vector<std::string> outcomes;
  std::vector<double> probabilities;

  double at(const std::string& outcome) const;
};

/// Exact joint distribution over a set of agents' outcomes, stored densely in
/// mixed-radix order (agents in step order, outcomes in memory-basis order).
class JointDistribution {
 public:
  JointDistribution(std::vector<std::string> agents, std::vector<std::vector<std::string>> outcomes,
                    std::vector<double> probabilities, std::string model_tag);

  const std::vector<std::string>& agents() const { return agents_; }
  bool has_agent(const std::string& agent) const;
  std::size_t agent_position(const std::string& agent) const;
  const std::vector<std::string>& outcomes(const std::string& agent) const;
  const std::vector<std::vector<std::string>>& all_outcomes() const { return outcomes_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  const std::string& model_tag() const { return model_tag_; }
  std::size_t size() const { return probabilities_.size(); }

  std::vector<std::size_t> outcome_indices(std::size_t flat) const;
  OutcomeAssignment assignment(std::size_t flat) const;
  /// Probability of an exact (full) assignment.
  double probability(const OutcomeAssignment& assignment) const;
  /// Probability that every listed agent got the listed outcome; others summed out.
  double event_probability(const OutcomeAssignment& partial) const;

 private:
  std::vector<std::string> agents_;
  std::vector<std::vector<std::string>> outcomes_;
  std::vector<double> probabilities_;
  std::string model_tag_;
};

/// P(target | given) columns, one per conditioning outcome. Columns whose
/// conditioning outcome has zero probability are absent.
struct ConditionalTable {
  std::string target;
  std::string given;
  std::string model_tag;
  std::vector<std::string> target_outcomes;
  std::vector<std::string> given_outcomes;
  std::vector<double> given_marginal;
  std::vector<std::optional<std::vector<double>>> columns;

  std::optional<double> probability(const std::string& target_outcome, const std::string& given_outcome) const;
  const std::optional<std::vector<double>>& column(const std::string& given_outcome) const;
};

/// One leaf of the evolution tree: weight, (normalized) state and the
/// outcomes fixed by collapses along the way.
struct EvolvedBranch {
  double weight;
  StateVector state;
  OutcomeAssignment collapsed;
};

/// Applies the first `step_count` steps, branching at every measurement the
/// model collapses.
std::vector<EvolvedBranch> evolve_branches(const ExperimentSpec& spec, const CollapseModel& model,
                                           std::size_t step_count);

/// Joint distribution of `agents` (all measuring agents by default).
///
/// Steps are applied up to the last step of any requested agent, and
/// outcomes are read there: non-collapsed agents through diagonal projectors
/// on their memory, collapsed agents from their branch label. Later steps do
/// not influence the reading, so superobserver measurements that act on an
/// agent's memory after the horizon cannot disturb it.
JointDistribution evolve(const ExperimentSpec& spec, const CollapseModel& model,
                         const std::optional<std::vector<std::string>>& agents = std::nullopt);

OutcomeDistribution marginal(const JointDistribution& joint, const std::string& agent);
ConditionalTable conditional(const JointDistribution& joint, const std::string& target, const std::string& given);
/// Post-selection: the joint restricted to assignments matching `condition`, renormalized.
JointDistribution condition_on(const JointDistribution& joint, const OutcomeAssignment& condition);

/// P(target | given = given_outcome) obtained by projecting the evolved state
/// on the given agent's memory outcome and applying Born's rule to the
/// renormalized state. If the model collapses `given`, the collapse at that
/// step is the conditioning.
OutcomeDistribution conditional_via_renormalized_state(const ExperimentSpec& spec, const CollapseModel& model,
                                                       const std::string& target, const std::string& given,
                                                       const std::string& given_outcome);

/// Density matrix after the full circuit with `discard` traced out. With
/// `given`, restricted to the branch where that agent obtained that outcome
/// (projected on the memory, or selected by collapse) and renormalized.
DensityMatrix memory_state(const ExperimentSpec& spec, const CollapseModel& model,
                           const std::set<std::string>& discard,
                           const std::optional<AgentOutcome>& given = std::nullopt);

/// Checks the model against the experiment (a subjective agent must measure in it).
void validate_model(const ExperimentSpec& spec, const CollapseModel& model);

}  // namespace wfsim
