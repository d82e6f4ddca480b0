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

// Observer measurements as memory-entangling isometries, controlled state
// preparation, and the Lüders update rule.

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wfsim/qstate.hpp"

namespace wfsim {

/// Isometry |m_i> -> |m_i> ⊗ |z_i> on the measured subsystems, recording the
/// outcome in a fresh memory subsystem appended at the end of the registry.
///
/// A basis spanning only part of the measured space is completed by
/// Gram-Schmidt over the computational basis; completion outcomes are
/// labelled "perp1", "perp2", ...
class MeasurementIsometry {
 public:
  /// `basis` vectors must all be defined over the same registry (the measured
  /// subsystems, in the order the isometry addresses them) and be pairwise
  /// orthonormal within 1e-9. `outcome_labels` names one memory basis state
  /// per given basis vector.
  static MeasurementIsometry build(std::string agent, std::vector<StateVector> basis,
                                   std::vector<std::string> outcome_labels, std::string memory_label);

  const std::string& agent() const { return agent_; }
  const SubsystemRegistry& measured() const { return measured_; }
  std::vector<std::string> measured_labels() const { return measured_.labels(); }
  /// Completed basis, given vectors first.
  const std::vector<StateVector>& basis() const { return basis_; }
  std::size_t given_count() const { return given_count_; }
  bool is_completion(std::size_t outcome) const { return outcome >= given_count_; }
  const Subsystem& memory() const { return memory_; }
  const std::vector<std::string>& outcome_labels() const { return memory_.basis_labels; }
  std::size_t outcome_index(const std::string& outcome) const { return memory_.basis_index(outcome); }
  /// (d_measured * d_memory) x d_measured, rows ordered (measured, memory).
  const Matrix& matrix() const { return matrix_; }

 private:
  std::string agent_;
  SubsystemRegistry measured_;
  std::vector<StateVector> basis_;
  std::size_t given_count_ = 0;
  Subsystem memory_;
  Matrix matrix_;
};

/// |c> -> |c> ⊗ |phi_c> for every computational basis state c of the
/// control subsystems; |phi_c> lives on a fresh output subsystem.
class PreparationIsometry {
 public:
  static PreparationIsometry build(std::string agent, SubsystemRegistry control, Subsystem output,
                                   std::vector<StateVector> prepared);

  const std::string& agent() const { return agent_; }
  const SubsystemRegistry& control() const { return control_; }
  std::vector<std::string> control_labels() const { return control_.labels(); }
  const Subsystem& output() const { return output_; }
  const std::vector<StateVector>& prepared() const { return prepared_; }
  const Matrix& matrix() const { return matrix_; }

 private:
  std::string agent_;
  SubsystemRegistry control_;
  Subsystem output_;
  std::vector<StateVector> prepared_;
  Matrix matrix_;
};

using Isometry = std::variant<MeasurementIsometry, PreparationIsometry>;

class CollapseModel {
 public:
  enum class Kind { kNoCollapse, kObjective, kSubjective };

  static CollapseModel no_collapse() { return CollapseModel(Kind::kNoCollapse, {}); }
  static CollapseModel objective() { return CollapseModel(Kind::kObjective, {}); }
  static CollapseModel subjective(std::string agent) {
    return CollapseModel(Kind::kSubjective, std::move(agent));
  }
  /// Accepts "ism" / "none", "objective" / "obj", "clps:<agent>".
  static CollapseModel parse(const std::string& text);

  Kind kind() const { return kind_; }
  const std::string& agent() const { return agent_; }
  /// Whether the update rule is applied at `agent`'s measurement.
  bool collapses(const std::string& agent) const;
  /// "ism", "objective" or "clps:<agent>".
  std::string tag() const;

  bool operator==(const CollapseModel&) const = default;

 private:
  CollapseModel(Kind kind, std::string agent) : kind_(kind), agent_(std::move(agent)) {}
  Kind kind_;
  std::string agent_;
};

struct Branch {
  std::string outcome;
  double probability = 0.0;
  std::optional<StateVector> state;  // normalized; empty for null branches
};

StateVector apply_isometry(const StateVector& state, const MeasurementIsometry& iso);
StateVector apply_isometry(const StateVector& state, const PreparationIsometry& iso);
StateVector apply_isometry(const StateVector& state, const Isometry& iso);

/// Lüders update: isometry, projection on the outcome's memory state, renormalization.
StateVector collapse(const StateVector& state, const MeasurementIsometry& iso, const std::string& outcome);

std::vector<Branch> branch_decomposition(const StateVector& state, const MeasurementIsometry& iso);

}  // namespace wfsim
