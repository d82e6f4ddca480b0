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

#include "wfsim/presets.hpp"

#include <cmath>

namespace wfsim::presets {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

Subsystem spin(const std::string& label) { return {label, {"up", "down"}}; }

ExperimentSpec wigner_friend_named(WignerBasis basis, std::string name, std::vector<ReportChannel> reports) {
  const SubsystemRegistry source({spin("S")});
  auto psi = StateVector::from_terms(source, {{kInvSqrt2, {"up"}}, {kInvSqrt2, {"down"}}});

  auto friend_measurement = MeasurementIsometry::build(
      "F", {StateVector::basis(source, {"up"}), StateVector::basis(source, {"down"})}, {"u", "d"}, "F");

  const SubsystemRegistry lab({spin("S"), Subsystem{"F", {"u", "d"}}});
  std::vector<StateVector> wigner_basis;
  std::vector<std::string> wigner_outcomes;
  if (basis == WignerBasis::kProduct) {
    wigner_basis = {StateVector::basis(lab, {"up", "u"}), StateVector::basis(lab, {"down", "d"})};
    wigner_outcomes = {"U", "D"};
  } else {
    wigner_basis = {StateVector::from_terms(lab, {{kInvSqrt2, {"up", "u"}}, {kInvSqrt2, {"down", "d"}}}),
                    StateVector::from_terms(lab, {{kInvSqrt2, {"up", "u"}}, {-kInvSqrt2, {"down", "d"}}})};
    wigner_outcomes = {"+", "-"};
  }
  auto wigner_measurement = MeasurementIsometry::build("W", std::move(wigner_basis), std::move(wigner_outcomes), "W");

  return ExperimentSpec(std::move(name), std::move(psi),
                        {{1, std::move(friend_measurement)}, {2, std::move(wigner_measurement)}}, {},
                        std::move(reports));
}

}  // namespace

ExperimentSpec wigner_friend(WignerBasis basis) {
  return wigner_friend_named(basis,
                             basis == WignerBasis::kProduct ? "wigner_friend_product" : "wigner_friend_superposition",
                             {});
}

ExperimentSpec deutsch_variant() {
  return wigner_friend_named(WignerBasis::kSuperposition, "deutsch_variant",
                             {{"x", "F", "W", 1, {"0", "1"}}, {"y", "F", "W", 2, {"0", "1"}}});
}

ExperimentSpec frauchiger_renner() {
  const SubsystemRegistry coin({Subsystem{"C", {"h", "t"}}});
  auto psi_c = StateVector::from_terms(coin, {{std::sqrt(1.0 / 3.0), {"h"}}, {std::sqrt(2.0 / 3.0), {"t"}}});

  auto f1 = MeasurementIsometry::build("F1", {StateVector::basis(coin, {"h"}), StateVector::basis(coin, {"t"})},
                                       {"H", "T"}, "F1");

  const SubsystemRegistry f1_memory({Subsystem{"F1", {"H", "T"}}});
  const SubsystemRegistry spin_s({spin("S")});
  auto prepare = PreparationIsometry::build(
      "F1", f1_memory, spin("S"),
      {StateVector::basis(spin_s, {"down"}),
       StateVector::from_terms(spin_s, {{kInvSqrt2, {"down"}}, {kInvSqrt2, {"up"}}})});

  auto f2 = MeasurementIsometry::build("F2", {StateVector::basis(spin_s, {"up"}), StateVector::basis(spin_s, {"down"})},
                                       {"U", "D"}, "F2");

  const SubsystemRegistry lab1({Subsystem{"C", {"h", "t"}}, Subsystem{"F1", {"H", "T"}}});
  auto a = MeasurementIsometry::build(
      "A",
      {StateVector::from_terms(lab1, {{kInvSqrt2, {"h", "H"}}, {-kInvSqrt2, {"t", "T"}}}),
       StateVector::from_terms(lab1, {{kInvSqrt2, {"h", "H"}}, {kInvSqrt2, {"t", "T"}}})},
      {"o", "f"}, "A");

  const SubsystemRegistry lab2({spin("S"), Subsystem{"F2", {"U", "D"}}});
  auto w = MeasurementIsometry::build(
      "W",
      {StateVector::from_terms(lab2, {{kInvSqrt2, {"down", "D"}}, {-kInvSqrt2, {"up", "U"}}}),
       StateVector::from_terms(lab2, {{kInvSqrt2, {"down", "D"}}, {kInvSqrt2, {"up", "U"}}})},
      {"O", "F"}, "W");

  std::vector<ExperimentStep> steps;
  steps.push_back({1, std::move(f1)});
  steps.push_back({1, std::move(prepare)});
  steps.push_back({2, std::move(f2)});
  steps.push_back({3, std::move(a)});
  steps.push_back({4, std::move(w)});
  return ExperimentSpec("frauchiger_renner", std::move(psi_c), std::move(steps), {{"A", "o"}, {"W", "O"}});
}

std::vector<std::string> names() {
  return {"wigner_friend_product", "wigner_friend_superposition", "deutsch_variant", "frauchiger_renner"};
}

ExperimentSpec by_name(const std::string& name) {
  if (name == "wigner_friend_product" || name == "wf" || name == "wf-product") {
    return wigner_friend(WignerBasis::kProduct);
  }
  if (name == "wigner_friend_superposition" || name == "wf-superposition") {
    return wigner_friend(WignerBasis::kSuperposition);
  }
  if (name == "deutsch_variant" || name == "deutsch") return deutsch_variant();
  if (name == "frauchiger_renner" || name == "fr") return frauchiger_renner();
  throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace wfsim::presets
