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

#include "wfsim/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace wfsim {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

void require_subsystem(const SubsystemRegistry& registry, const Subsystem& expected, const std::string& agent) {
  if (!registry.contains(expected.label)) {
    throw LabelError("step of " + agent + " acts on '" + expected.label + "', which does not exist yet");
  }
  if (!(registry.at(expected.label) == expected)) {
    throw LabelError("step of " + agent + " disagrees with the registry about '" + expected.label + "'");
  }
}

StateVector memory_basis_state(const Subsystem& memory, const std::string& outcome) {
  return StateVector::basis(SubsystemRegistry({memory}), {outcome});
}

std::size_t horizon_for(const ExperimentSpec& spec, const std::vector<std::string>& agents) {
  std::size_t horizon = 0;
  for (const auto& a : agents) horizon = std::max(horizon, spec.step_index(a) + 1);
  return horizon;
}

// Branches restricted to `given` = outcome, with renormalized weights.
// A collapsed `given` selects by branch label; otherwise each branch is
// projected on the memory outcome.
std::vector<EvolvedBranch> condition_branches(const ExperimentSpec& spec, const CollapseModel& model,
                                              std::vector<EvolvedBranch> branches, const std::string& given,
                                              const std::string& outcome) {
  std::vector<EvolvedBranch> kept;
  double total = 0.0;
  if (model.collapses(given)) {
    for (auto& b : branches) {
      if (b.collapsed.at(given) == outcome) {
        total += b.weight;
        kept.push_back(std::move(b));
      }
    }
  } else {
    const auto& iso = spec.measurement(given);
    for (auto& b : branches) {
      auto proj = projector_from_basis_vector(memory_basis_state(iso.memory(), outcome), b.state.registry());
      auto projected = proj.apply(b.state);
      const double w = b.weight * projected.norm_squared();
      if (w <= tol::kZeroBranch * tol::kZeroBranch) continue;
      total += w;
      kept.push_back({w, projected.normalized(), std::move(b.collapsed)});
    }
  }
  if (!(total > tol::kZeroBranch)) {
    throw ZeroProbabilityError("conditioning on " + given + "=" + outcome + ", which has probability 0");
  }
  for (auto& b : kept) b.weight /= total;
  return kept;
}

}  // namespace

const std::string& ExperimentStep::agent() const {
  return std::visit([](const auto& iso) -> const std::string& { return iso.agent(); }, action);
}

ExperimentSpec::ExperimentSpec(std::string name, StateVector initial, std::vector<ExperimentStep> steps,
                               std::vector<AgentOutcome> halting, std::vector<ReportChannel> reports)
    : name_(std::move(name)),
      initial_(std::move(initial)),
      steps_(std::move(steps)),
      halting_(std::move(halting)),
      reports_(std::move(reports)) {
  if (initial_.normalization() != Normalization::kNormalized) {
    throw InvariantError("initial state must be normalized");
  }
  SubsystemRegistry registry = initial_.registry();
  std::optional<int> last_time;
  std::optional<int> last_measurement_time;
  for (const auto& step : steps_) {
    const std::string& agent = step.agent();
    if (agent.empty()) throw LabelError("step without an agent");
    if (last_time && step.time < *last_time) throw InvariantError("step times must not decrease");
    Subsystem appended;
    if (const auto* m = std::get_if<MeasurementIsometry>(&step.action)) {
      if (last_measurement_time && step.time <= *last_measurement_time) {
        throw InvariantError("measurement times must be strictly increasing");
      }
      if (has_agent(agent)) throw LabelError("agent '" + agent + "' measures more than once");
      for (const auto& s : m->measured().subsystems()) require_subsystem(registry, s, agent);
      appended = m->memory();
      agents_.push_back(agent);
      last_measurement_time = step.time;
    } else {
      const auto& p = std::get<PreparationIsometry>(step.action);
      for (const auto& s : p.control().subsystems()) require_subsystem(registry, s, agent);
      appended = p.output();
    }
    if (registry.contains(appended.label)) {
      throw LabelError("subsystem '" + appended.label + "' appended twice");
    }
    registry = registry.appended(appended);
    last_time = step.time;
  }
  final_registry_ = std::move(registry);

  std::set<std::string> halting_agents;
  for (const auto& h : halting_) {
    measurement(h.agent).outcome_index(h.outcome);
    if (!halting_agents.insert(h.agent).second) {
      throw LabelError("halting condition names " + h.agent + " twice");
    }
  }
  for (const auto& r : reports_) {
    if (r.name.empty() || r.from.empty() || r.to.empty() || r.alphabet.empty()) {
      throw InvariantError("incomplete report channel '" + r.name + "'");
    }
  }
}

bool ExperimentSpec::has_agent(const std::string& agent) const {
  return std::find(agents_.begin(), agents_.end(), agent) != agents_.end();
}

std::size_t ExperimentSpec::step_index(const std::string& agent) const {
  for (std::size_t i = 0; i < steps_.size(); ++i) {
    if (steps_[i].is_measurement() && steps_[i].agent() == agent) return i;
  }
  throw LabelError("no measuring agent '" + agent + "' in experiment " + name_);
}

const MeasurementIsometry& ExperimentSpec::measurement(const std::string& agent) const {
  return std::get<MeasurementIsometry>(steps_[step_index(agent)].action);
}

int ExperimentSpec::time_of(const std::string& agent) const { return steps_[step_index(agent)].time; }

std::string ExperimentSpec::resolve_agent(const std::string& name) const {
  if (has_agent(name)) return name;
  std::vector<std::string> matches;
  for (const auto& a : agents_) {
    if (lower(a) == lower(name)) matches.push_back(a);
  }
  if (matches.size() != 1) throw LabelError("unknown agent '" + name + "' in experiment " + name_);
  return matches.front();
}

void validate_model(const ExperimentSpec& spec, const CollapseModel& model) {
  if (model.kind() == CollapseModel::Kind::kSubjective && !spec.has_agent(model.agent())) {
    throw LabelError("collapse model names agent '" + model.agent() + "', who does not measure in " + spec.name());
  }
}

double OutcomeDistribution::at(const std::string& outcome) const {
  auto it = std::find(outcomes.begin(), outcomes.end(), outcome);
  if (it == outcomes.end()) throw LabelError("agent " + agent + " has no outcome '" + outcome + "'");
  return probabilities[static_cast<std::size_t>(it - outcomes.begin())];
}

JointDistribution::JointDistribution(std::vector<std::string> agents, std::vector<std::vector<std::string>> outcomes,
                                     std::vector<double> probabilities, std::string model_tag)
    : agents_(std::move(agents)),
      outcomes_(std::move(outcomes)),
      probabilities_(std::move(probabilities)),
      model_tag_(std::move(model_tag)) {
  if (agents_.size() != outcomes_.size()) throw InvariantError("one outcome list per agent required");
  std::size_t n = 1;
  for (const auto& o : outcomes_) n *= o.size();
  if (n != probabilities_.size()) throw InvariantError("joint distribution has the wrong number of entries");
  double sum = 0.0;
  for (double p : probabilities_) {
    if (p < 0.0) throw InvariantError("negative probability in joint distribution");
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol::kProbability) {
    throw InvariantError("joint distribution sums to " + std::to_string(sum));
  }
}

bool JointDistribution::has_agent(const std::string& agent) const {
  return std::find(agents_.begin(), agents_.end(), agent) != agents_.end();
}

std::size_t JointDistribution::agent_position(const std::string& agent) const {
  auto it = std::find(agents_.begin(), agents_.end(), agent);
  if (it == agents_.end()) throw LabelError("agent '" + agent + "' is not part of the joint distribution");
  return static_cast<std::size_t>(it - agents_.begin());
}

const std::vector<std::string>& JointDistribution::outcomes(const std::string& agent) const {
  return outcomes_[agent_position(agent)];
}

std::vector<std::size_t> JointDistribution::outcome_indices(std::size_t flat) const {
  std::vector<std::size_t> idx(agents_.size());
  for (std::size_t i = agents_.size(); i-- > 0;) {
    idx[i] = flat % outcomes_[i].size();
    flat /= outcomes_[i].size();
  }
  return idx;
}

OutcomeAssignment JointDistribution::assignment(std::size_t flat) const {
  auto idx = outcome_indices(flat);
  OutcomeAssignment out;
  for (std::size_t i = 0; i < agents_.size(); ++i) out[agents_[i]] = outcomes_[i][idx[i]];
  return out;
}

double JointDistribution::probability(const OutcomeAssignment& assignment) const {
  if (assignment.size() != agents_.size()) {
    throw LabelError("assignment must name every agent of the joint distribution");
  }
  return event_probability(assignment);
}

double JointDistribution::event_probability(const OutcomeAssignment& partial) const {
  std::vector<std::pair<std::size_t, std::size_t>> fixed;
  for (const auto& [agent, outcome] : partial) {
    const std::size_t pos = agent_position(agent);
    const auto& labels = outcomes_[pos];
    auto it = std::find(labels.begin(), labels.end(), outcome);
    if (it == labels.end()) throw LabelError("agent " + agent + " has no outcome '" + outcome + "'");
    fixed.emplace_back(pos, static_cast<std::size_t>(it - labels.begin()));
  }
  double p = 0.0;
  for (std::size_t flat = 0; flat < probabilities_.size(); ++flat) {
    auto idx = outcome_indices(flat);
    bool match = std::all_of(fixed.begin(), fixed.end(), [&](const auto& f) { return idx[f.first] == f.second; });
    if (match) p += probabilities_[flat];
  }
  return p;
}

std::optional<double> ConditionalTable::probability(const std::string& target_outcome,
                                                    const std::string& given_outcome) const {
  const auto& col = column(given_outcome);
  if (!col) return std::nullopt;
  auto it = std::find(target_outcomes.begin(), target_outcomes.end(), target_outcome);
  if (it == target_outcomes.end()) throw LabelError("agent " + target + " has no outcome '" + target_outcome + "'");
  return (*col)[static_cast<std::size_t>(it - target_outcomes.begin())];
}

const std::optional<std::vector<double>>& ConditionalTable::column(const std::string& given_outcome) const {
  auto it = std::find(given_outcomes.begin(), given_outcomes.end(), given_outcome);
  if (it == given_outcomes.end()) throw LabelError("agent " + given + " has no outcome '" + given_outcome + "'");
  return columns[static_cast<std::size_t>(it - given_outcomes.begin())];
}

std::vector<EvolvedBranch> evolve_branches(const ExperimentSpec& spec, const CollapseModel& model,
                                           std::size_t step_count) {
  validate_model(spec, model);
  if (step_count > spec.steps().size()) throw InvariantError("step count exceeds the number of steps");
  std::vector<EvolvedBranch> branches;
  branches.push_back({1.0, spec.initial(), {}});
  for (std::size_t i = 0; i < step_count; ++i) {
    const auto& step = spec.steps()[i];
    std::vector<EvolvedBranch> next;
    for (auto& b : branches) {
      const auto* m = std::get_if<MeasurementIsometry>(&step.action);
      if (m && model.collapses(m->agent())) {
        for (auto& leaf : branch_decomposition(b.state, *m)) {
          if (!leaf.state) continue;
          auto collapsed = b.collapsed;
          collapsed[m->agent()] = leaf.outcome;
          next.push_back({b.weight * leaf.probability, std::move(*leaf.state), std::move(collapsed)});
        }
      } else {
        next.push_back({b.weight, apply_isometry(b.state, step.action), std::move(b.collapsed)});
      }
    }
    branches = std::move(next);
  }
  return branches;
}

JointDistribution evolve(const ExperimentSpec& spec, const CollapseModel& model,
                         const std::optional<std::vector<std::string>>& agents) {
  validate_model(spec, model);
  std::vector<std::string> requested = agents.value_or(spec.agents());
  if (requested.empty()) throw LabelError("no agents requested");
  std::set<std::string> unique;
  for (const auto& a : requested) {
    spec.step_index(a);
    unique.insert(a);
  }
  std::vector<std::string> ordered;
  for (const auto& a : spec.agents()) {
    if (unique.count(a)) ordered.push_back(a);
  }

  const std::size_t horizon = horizon_for(spec, ordered);
  const auto branches = evolve_branches(spec, model, horizon);

  std::vector<std::vector<std::string>> outcomes;
  std::size_t n = 1;
  for (const auto& a : ordered) {
    outcomes.push_back(spec.measurement(a).outcome_labels());
    n *= outcomes.back().size();
  }
  std::vector<double> probs(n, 0.0);

  for (const auto& b : branches) {
    const auto& registry = b.state.registry();
    // Per agent: fixed outcome index (collapsed) or memory position in the registry.
    std::vector<std::optional<std::size_t>> fixed(ordered.size());
    std::vector<std::size_t> memory_pos(ordered.size(), 0);
    for (std::size_t k = 0; k < ordered.size(); ++k) {
      const auto& iso = spec.measurement(ordered[k]);
      auto it = b.collapsed.find(ordered[k]);
      if (it != b.collapsed.end()) {
        fixed[k] = iso.outcome_index(it->second);
      } else {
        memory_pos[k] = registry.position(iso.memory().label);
      }
    }
    const auto& amps = b.state.amplitudes();
    for (std::size_t flat = 0; flat < static_cast<std::size_t>(amps.size()); ++flat) {
      const double p = std::norm(amps[static_cast<Eigen::Index>(flat)]);
      if (p == 0.0) continue;
      const auto multi = registry.multi_index(flat);
      std::size_t joint_index = 0;
      for (std::size_t k = 0; k < ordered.size(); ++k) {
        const std::size_t o = fixed[k] ? *fixed[k] : multi[memory_pos[k]];
        joint_index = joint_index * outcomes[k].size() + o;
      }
      probs[joint_index] += b.weight * p;
    }
  }
  return JointDistribution(std::move(ordered), std::move(outcomes), std::move(probs), model.tag());
}

OutcomeDistribution marginal(const JointDistribution& joint, const std::string& agent) {
  const std::size_t pos = joint.agent_position(agent);
  OutcomeDistribution out{agent, joint.all_outcomes()[pos], {}};
  out.probabilities.assign(out.outcomes.size(), 0.0);
  for (std::size_t flat = 0; flat < joint.size(); ++flat) {
    out.probabilities[joint.outcome_indices(flat)[pos]] += joint.probabilities()[flat];
  }
  return out;
}

ConditionalTable conditional(const JointDistribution& joint, const std::string& target, const std::string& given) {
  const std::size_t tp = joint.agent_position(target);
  const std::size_t gp = joint.agent_position(given);
  ConditionalTable table;
  table.target = target;
  table.given = given;
  table.model_tag = joint.model_tag();
  table.target_outcomes = joint.all_outcomes()[tp];
  table.given_outcomes = joint.all_outcomes()[gp];
  const std::size_t nt = table.target_outcomes.size();
  const std::size_t ng = table.given_outcomes.size();

  std::vector<double> pair(nt * ng, 0.0);
  for (std::size_t flat = 0; flat < joint.size(); ++flat) {
    auto idx = joint.outcome_indices(flat);
    pair[idx[tp] * ng + idx[gp]] += joint.probabilities()[flat];
  }
  table.given_marginal.assign(ng, 0.0);
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t t = 0; t < nt; ++t) {
      // target == given: the pair table is diagonal.
      table.given_marginal[g] += (tp == gp) ? (t == g ? pair[t * ng + g] : 0.0) : pair[t * ng + g];
    }
  }
  for (std::size_t g = 0; g < ng; ++g) {
    const double pg = table.given_marginal[g];
    if (!(pg > tol::kZeroBranch)) {
      table.columns.emplace_back(std::nullopt);
      continue;
    }
    std::vector<double> col(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      col[t] = (tp == gp) ? (t == g ? 1.0 : 0.0) : pair[t * ng + g] / pg;
    }
    table.columns.emplace_back(std::move(col));
  }
  return table;
}

JointDistribution condition_on(const JointDistribution& joint, const OutcomeAssignment& condition) {
  const double pc = joint.event_probability(condition);
  if (!(pc > tol::kZeroBranch)) throw ZeroProbabilityError("post-selection condition has probability 0");
  std::vector<double> probs(joint.size(), 0.0);
  for (std::size_t flat = 0; flat < joint.size(); ++flat) {
    auto a = joint.assignment(flat);
    bool match = std::all_of(condition.begin(), condition.end(),
                             [&](const auto& kv) { return a.at(kv.first) == kv.second; });
    if (match) probs[flat] = joint.probabilities()[flat] / pc;
  }
  return JointDistribution(joint.agents(), joint.all_outcomes(), std::move(probs), joint.model_tag());
}

OutcomeDistribution conditional_via_renormalized_state(const ExperimentSpec& spec, const CollapseModel& model,
                                                       const std::string& target, const std::string& given,
                                                       const std::string& given_outcome) {
  validate_model(spec, model);
  const auto& target_iso = spec.measurement(target);
  const auto& given_iso = spec.measurement(given);
  given_iso.outcome_index(given_outcome);
  const std::size_t horizon = horizon_for(spec, {target, given});
  auto branches = condition_branches(spec, model, evolve_branches(spec, model, horizon), given, given_outcome);

  OutcomeDistribution out{target, target_iso.outcome_labels(), {}};
  out.probabilities.assign(out.outcomes.size(), 0.0);
  for (const auto& b : branches) {
    auto it = b.collapsed.find(target);
    if (it != b.collapsed.end()) {
      out.probabilities[target_iso.outcome_index(it->second)] += b.weight;
      continue;
    }
    for (std::size_t k = 0; k < out.outcomes.size(); ++k) {
      auto proj = projector_from_basis_vector(memory_basis_state(target_iso.memory(), out.outcomes[k]),
                                              b.state.registry());
      out.probabilities[k] += b.weight * born_probability(b.state, proj);
    }
  }
  return out;
}

DensityMatrix memory_state(const ExperimentSpec& spec, const CollapseModel& model,
                           const std::set<std::string>& discard, const std::optional<AgentOutcome>& given) {
  auto branches = evolve_branches(spec, model, spec.steps().size());
  if (given) {
    spec.measurement(given->agent).outcome_index(given->outcome);
    branches = condition_branches(spec, model, std::move(branches), given->agent, given->outcome);
  }
  std::vector<std::pair<double, StateVector>> terms;
  for (auto& b : branches) terms.emplace_back(b.weight, std::move(b.state));
  auto rho = DensityMatrix::mixture(terms);

  std::set<std::string> keep;
  for (const auto& label : rho.registry().labels()) {
    if (!discard.count(label)) keep.insert(label);
  }
  for (const auto& label : discard) rho.registry().position(label);
  if (discard.empty()) return rho;
  return partial_trace(rho, keep);
}

}  // namespace wfsim
