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

#include <cmath>

#include <gtest/gtest.h>

#include "wfsim/channels.hpp"
#include "wfsim/presets.hpp"

namespace wfsim {
namespace {

const double kR = 1.0 / std::sqrt(2.0);

Subsystem spin(const std::string& label) { return {label, {"up", "down"}}; }

MeasurementIsometry friend_measurement() {
  SubsystemRegistry s({spin("S")});
  return MeasurementIsometry::build("F", {StateVector::basis(s, {"up"}), StateVector::basis(s, {"down"})},
                                    {"u", "d"}, "F");
}

StateVector source() {
  return StateVector::from_terms(SubsystemRegistry({spin("S")}), {{1.0, {"up"}}, {1.0, {"down"}}});
}

TEST(Measurement, RecordsBasisVectors) {
  auto v = friend_measurement();
  EXPECT_EQ(v.outcome_labels(), (std::vector<std::string>{"u", "d"}));
  auto up = apply_isometry(StateVector::basis(SubsystemRegistry({spin("S")}), {"up"}), v);
  EXPECT_EQ(up.registry().labels(), (std::vector<std::string>{"S", "F"}));
  EXPECT_NEAR(std::abs(up.amplitude({"up", "u"}) - 1.0), 0.0, 1e-15);
  auto mixed = apply_isometry(source(), v);
  EXPECT_NEAR(mixed.amplitude({"up", "u"}).real(), kR, 1e-15);
  EXPECT_NEAR(mixed.amplitude({"down", "d"}).real(), kR, 1e-15);
  EXPECT_NEAR(std::abs(mixed.amplitude({"up", "d"})), 0.0, 1e-15);
}

TEST(Measurement, IsometryCondition) {
  for (const auto& name : presets::names()) {
    auto spec = presets::by_name(name);
    for (const auto& step : spec.steps()) {
      const Matrix& m = std::visit([](const auto& iso) -> const Matrix& { return iso.matrix(); }, step.action);
      const auto n = m.cols();
      EXPECT_LT((m.adjoint() * m - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12) << name;
    }
  }
}

TEST(Measurement, CompletesPartialBasis) {
  auto spec = presets::wigner_friend(presets::WignerBasis::kSuperposition);
  const auto& w = spec.measurement("W");
  EXPECT_EQ(w.outcome_labels(), (std::vector<std::string>{"+", "-", "perp1", "perp2"}));
  EXPECT_EQ(w.given_count(), 2u);
  EXPECT_TRUE(w.is_completion(2));
  EXPECT_FALSE(w.is_completion(1));
  auto lab = apply_isometry(source(), friend_measurement());
  auto branches = branch_decomposition(lab, w);
  ASSERT_EQ(branches.size(), 4u);
  EXPECT_NEAR(branches[0].probability, 1.0, 1e-12);
  EXPECT_NEAR(branches[1].probability, 0.0, 1e-12);
  EXPECT_FALSE(branches[1].state.has_value());
  EXPECT_LE(branches[2].probability, 1e-12);
  EXPECT_LE(branches[3].probability, 1e-12);
}

TEST(Measurement, OneDimensionalRecord) {
  SubsystemRegistry r({Subsystem{"q", {"0"}}});
  auto v = MeasurementIsometry::build("X", {StateVector::basis(r, {"0"})}, {"z0"}, "X");
  auto out = apply_isometry(StateVector::basis(r, {"0"}), v);
  EXPECT_NEAR(std::abs(out.amplitude({"0", "z0"}) - 1.0), 0.0, 1e-15);
}

TEST(Measurement, RejectsBadBases) {
  SubsystemRegistry s({spin("S")});
  auto up = StateVector::basis(s, {"up"});
  EXPECT_THROW(MeasurementIsometry::build("F", {up, up}, {"u", "d"}, "F"), InvariantError);
  EXPECT_THROW(MeasurementIsometry::build("F", {up}, {"u", "d"}, "F"), LabelError);
  EXPECT_THROW(MeasurementIsometry::build("F", {up}, {"u"}, "S"), LabelError);
  EXPECT_THROW(apply_isometry(apply_isometry(source(), friend_measurement()), friend_measurement()), LabelError);
}

TEST(Preparation, MeasureAndPrepareHandExpansion) {
  auto spec = presets::frauchiger_renner();
  auto state = apply_isometry(apply_isometry(spec.initial(), spec.steps()[0].action), spec.steps()[1].action);
  EXPECT_EQ(state.registry().labels(), (std::vector<std::string>{"C", "F1", "S"}));
  const double third = std::sqrt(1.0 / 3.0);
  // Symbolic expansion: sqrt(1/3)|h,H,down> + sqrt(2/3)|t,T>(|down>+|up>)/sqrt2.
  const std::vector<std::pair<std::vector<std::string>, double>> expected{
      {{"h", "H", "down"}, third}, {{"t", "T", "down"}, third}, {{"t", "T", "up"}, third}};
  double total = 0.0;
  for (const auto& [labels, amp] : expected) {
    EXPECT_NEAR(std::abs(state.amplitude(labels) - amp), 0.0, 1e-15);
    total += amp * amp;
  }
  EXPECT_NEAR(total, 1.0, 1e-15);
  EXPECT_NEAR(state.norm_squared(), 1.0, 1e-15);
}

TEST(Preparation, RejectsUnnormalizedStates) {
  SubsystemRegistry control({Subsystem{"c", {"0", "1"}}});
  Subsystem out = spin("S");
  SubsystemRegistry o({out});
  Vector big(2);
  big << 1.0, 1.0;
  StateVector bad(o, big, Normalization::kUnnormalizedBranch);
  EXPECT_THROW(PreparationIsometry::build("P", control, out, {StateVector::basis(o, {"up"}), bad}), InvariantError);
  EXPECT_THROW(PreparationIsometry::build("P", control, out, {StateVector::basis(o, {"up"})}), InvariantError);
}

TEST(Collapse, FriendSeesUp) {
  auto after = collapse(source(), friend_measurement(), "u");
  EXPECT_NEAR(std::abs(after.amplitude({"up", "u"}) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(after.norm_squared(), 1.0, 1e-15);
  auto eigen = collapse(StateVector::basis(SubsystemRegistry({spin("S")}), {"up"}), friend_measurement(), "u");
  EXPECT_NEAR(std::abs(eigen.amplitude({"up", "u"}) - 1.0), 0.0, 1e-15);
  EXPECT_THROW(collapse(StateVector::basis(SubsystemRegistry({spin("S")}), {"up"}), friend_measurement(), "d"),
               ZeroProbabilityError);
}

TEST(Collapse, CoinTailsPreparesSuperposition) {
  auto spec = presets::frauchiger_renner();
  const auto& f1 = std::get<MeasurementIsometry>(spec.steps()[0].action);
  auto tails = collapse(spec.initial(), f1, "T");
  auto prepared = apply_isometry(tails, spec.steps()[1].action);
  EXPECT_NEAR(std::abs(prepared.amplitude({"t", "T", "down"}) - kR), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(prepared.amplitude({"t", "T", "up"}) - kR), 0.0, 1e-15);
  auto branches = branch_decomposition(spec.initial(), f1);
  EXPECT_NEAR(branches[0].probability, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(branches[1].probability, 2.0 / 3.0, 1e-15);
}

TEST(Collapse, MatchesBranchDecomposition) {
  auto branches = branch_decomposition(source(), friend_measurement());
  for (const auto& b : branches) {
    auto c = collapse(source(), friend_measurement(), b.outcome);
    EXPECT_NEAR(b.probability, 0.5, 1e-15);
    EXPECT_LT((c.amplitudes() - b.state->amplitudes()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Collapse, UnnormalizedBranchKeepsNorm) {
  Vector v(2);
  v << 0.3, Complex(0.0, 0.4);
  StateVector branch(SubsystemRegistry({spin("S")}), v, Normalization::kUnnormalizedBranch);
  auto out = apply_isometry(branch, friend_measurement());
  EXPECT_NEAR(out.norm_squared(), 0.25, 1e-15);
  EXPECT_EQ(out.normalization(), Normalization::kUnnormalizedBranch);
}

TEST(Model, ParseAndTags) {
  EXPECT_EQ(CollapseModel::parse("ism").tag(), "ism");
  EXPECT_EQ(CollapseModel::parse("none"), CollapseModel::no_collapse());
  EXPECT_EQ(CollapseModel::parse("objective").tag(), "objective");
  EXPECT_EQ(CollapseModel::parse("clps:F1"), CollapseModel::subjective("F1"));
  EXPECT_EQ(CollapseModel::subjective("F1").tag(), "clps:F1");
  EXPECT_TRUE(CollapseModel::subjective("F1").collapses("F1"));
  EXPECT_FALSE(CollapseModel::subjective("F1").collapses("A"));
  EXPECT_TRUE(CollapseModel::objective().collapses("A"));
  EXPECT_FALSE(CollapseModel::no_collapse().collapses("A"));
  EXPECT_THROW(CollapseModel::parse("sometimes"), std::invalid_argument);
}

}  // namespace
}  // namespace wfsim
