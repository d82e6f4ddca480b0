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

#include "fr_oracle.hpp"
#include "wfsim/experiment.hpp"
#include "wfsim/presets.hpp"

namespace wfsim {
namespace {

using Agents = std::vector<std::string>;

const CollapseModel kIsm = CollapseModel::no_collapse();

double cell(const ConditionalTable& t, const std::string& target, const std::string& given) {
  auto p = t.probability(target, given);
  EXPECT_TRUE(p.has_value()) << target << "|" << given;
  return p.value_or(-1.0);
}

class FrTest : public ::testing::Test {
 protected:
  ExperimentSpec spec = presets::frauchiger_renner();
};

TEST_F(FrTest, HaltingProbabilityMatchesEnumeration) {
  auto joint = evolve(spec, kIsm);
  const double p = joint.event_probability({{"A", "o"}, {"W", "O"}});
  EXPECT_NEAR(p, oracle::p_a_w(0, 0), 1e-12);
  EXPECT_NEAR(p, 1.0 / 12.0, 1e-12);
  const std::vector<std::string> a{"o", "f"};
  const std::vector<std::string> w{"O", "F"};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(evolve(spec, kIsm, Agents{"A", "W"}).probability({{"A", a[i]}, {"W", w[j]}}), oracle::p_a_w(i, j),
                  1e-12);
    }
}

TEST_F(FrTest, WignerMarginal) {
  auto m = marginal(evolve(spec, kIsm), "W");
  EXPECT_NEAR(m.at("O"), oracle::p_a_w(0, 0) + oracle::p_a_w(1, 0), 1e-12);
  EXPECT_NEAR(m.at("O"), 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(m.at("F"), 5.0 / 6.0, 1e-12);
  EXPECT_NEAR(m.at("perp1") + m.at("perp2"), 0.0, 1e-12);
}

TEST_F(FrTest, AssistantAboutSecondFriend) {
  auto t = conditional(evolve(spec, kIsm, Agents{"F2", "A"}), "F2", "A");
  EXPECT_EQ(t.model_tag, "ism");
  const std::vector<std::string> f2{"U", "D"};
  const std::vector<std::string> a{"o", "f"};
  for (int i = 0; i < 2; ++i) {
    const double pa = oracle::p_f2_a(0, i) + oracle::p_f2_a(1, i);
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(cell(t, f2[k], a[i]), oracle::p_f2_a(k, i) / pa, 1e-12);
  }
  EXPECT_NEAR(cell(t, "U", "o"), 1.0, 1e-9);
  EXPECT_NEAR(cell(t, "D", "o"), 0.0, 1e-9);
  EXPECT_NEAR(cell(t, "U", "f"), 0.2, 1e-9);
  EXPECT_NEAR(cell(t, "D", "f"), 0.8, 1e-9);
  EXPECT_FALSE(t.column("perp1").has_value());
}

TEST_F(FrTest, SecondFriendAboutFirst) {
  auto t = conditional(evolve(spec, kIsm, Agents{"F1", "F2"}), "F1", "F2");
  const std::vector<std::string> f1{"H", "T"};
  const std::vector<std::string> f2{"U", "D"};
  for (int j = 0; j < 2; ++j) {
    const double pj = oracle::p_f1_f2(0, j) + oracle::p_f1_f2(1, j);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(cell(t, f1[i], f2[j]), oracle::p_f1_f2(i, j) / pj, 1e-12);
  }
  EXPECT_NEAR(cell(t, "T", "U"), 1.0, 1e-9);
  EXPECT_NEAR(cell(t, "H", "U"), 0.0, 1e-9);
  EXPECT_NEAR(cell(t, "H", "D"), 0.5, 1e-9);
  EXPECT_NEAR(cell(t, "T", "D"), 0.5, 1e-9);
}

TEST_F(FrTest, FirstFriendAboutWignerUnitary) {
  auto t = conditional(evolve(spec, kIsm, Agents{"W", "F1"}), "W", "F1");
  const std::vector<std::string> f1{"H", "T"};
  const std::vector<std::string> w{"O", "F"};
  for (int i = 0; i < 2; ++i) {
    const double pi = oracle::p_f1_w_unitary(i, 0) + oracle::p_f1_w_unitary(i, 1);
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(cell(t, w[k], f1[i]), oracle::p_f1_w_unitary(i, k) / pi, 1e-12);
    EXPECT_NEAR(cell(t, "F", f1[i]), 5.0 / 6.0, 1e-9);
    EXPECT_NEAR(cell(t, "O", f1[i]), 1.0 / 6.0, 1e-9);
  }
}

TEST_F(FrTest, FirstFriendAboutWignerCollapsed) {
  const auto model = CollapseModel::subjective("F1");
  const std::vector<std::string> f1{"H", "T"};
  const std::vector<std::string> w{"O", "F"};
  auto bayes = conditional(evolve(spec, model, Agents{"W", "F1"}), "W", "F1");
  for (int i = 0; i < 2; ++i) {
    auto renorm = conditional_via_renormalized_state(spec, model, "W", "F1", f1[i]);
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(renorm.at(w[k]), oracle::p_w_given_f1_collapse(k, i), 1e-12);
      EXPECT_NEAR(cell(bayes, w[k], f1[i]), renorm.at(w[k]), 1e-9);
    }
  }
  EXPECT_NEAR(conditional_via_renormalized_state(spec, model, "W", "F1", "T").at("F"), 1.0, 1e-9);
  EXPECT_NEAR(conditional_via_renormalized_state(spec, model, "W", "F1", "H").at("O"), 0.5, 1e-9);
}

TEST_F(FrTest, ObjectiveCollapseTree) {
  const auto model = CollapseModel::objective();
  auto fa = conditional(evolve(spec, model, Agents{"F2", "A"}), "F2", "A");
  auto wf = conditional(evolve(spec, model, Agents{"W", "F1"}), "W", "F1");
  const std::vector<std::string> f2{"U", "D"};
  const std::vector<std::string> a{"o", "f"};
  const std::vector<std::string> w{"O", "F"};
  const std::vector<std::string> f1{"H", "T"};
  for (int i = 0; i < 2; ++i) {
    const double pa = oracle::p_f2_a_objective(0, i) + oracle::p_f2_a_objective(1, i);
    const double pf = oracle::p_f1_w_objective(i, 0) + oracle::p_f1_w_objective(i, 1);
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(cell(fa, f2[k], a[i]), oracle::p_f2_a_objective(k, i) / pa, 1e-12);
      EXPECT_NEAR(cell(wf, w[k], f1[i]), oracle::p_f1_w_objective(i, k) / pf, 1e-12);
    }
  }
  EXPECT_NEAR(cell(fa, "U", "o"), 1.0 / 3.0, 1e-9);
}

TEST_F(FrTest, ModelsAgreeBeforeSuperobservers) {
  auto ism = evolve(spec, kIsm, Agents{"F1", "F2"});
  for (const auto& m : {CollapseModel::objective(), CollapseModel::subjective("F1"), CollapseModel::subjective("F2")}) {
    auto other = evolve(spec, m, Agents{"F1", "F2"});
    for (std::size_t i = 0; i < ism.size(); ++i) EXPECT_NEAR(ism.probabilities()[i], other.probabilities()[i], 1e-9);
  }
}

TEST_F(FrTest, PostSelection) {
  auto halted = condition_on(evolve(spec, kIsm), {{"A", "o"}, {"W", "O"}});
  EXPECT_NEAR(halted.event_probability({{"A", "o"}, {"W", "O"}}), 1.0, 1e-12);
  EXPECT_THROW(condition_on(evolve(spec, kIsm), {{"A", "perp1"}}), ZeroProbabilityError);
}

TEST_F(FrTest, ZeroProbabilityConditioning) {
  EXPECT_THROW(conditional_via_renormalized_state(spec, kIsm, "W", "A", "perp1"), ZeroProbabilityError);
  auto t = conditional(evolve(spec, kIsm, Agents{"W", "A"}), "W", "A");
  EXPECT_FALSE(t.probability("O", "perp2").has_value());
}

TEST_F(FrTest, AgentResolution) {
  EXPECT_EQ(spec.resolve_agent("f2"), "F2");
  EXPECT_EQ(spec.resolve_agent("A"), "A");
  EXPECT_THROW(spec.resolve_agent("B"), LabelError);
  EXPECT_EQ(spec.agents(), (std::vector<std::string>{"F1", "F2", "A", "W"}));
  EXPECT_THROW(evolve(spec, CollapseModel::subjective("Q")), LabelError);
}

TEST(WignerFriend, ProductBasisMemory) {
  auto spec = presets::wigner_friend(presets::WignerBasis::kProduct);
  auto rho = memory_state(spec, kIsm, {"S"});
  const auto& r = rho.registry();
  ASSERT_EQ(r.labels(), (std::vector<std::string>{"F", "W"}));
  Matrix expected = Matrix::Zero(8, 8);
  expected(r.flat_index_of({"u", "U"}), r.flat_index_of({"u", "U"})) = 0.5;
  expected(r.flat_index_of({"d", "D"}), r.flat_index_of({"d", "D"})) = 0.5;
  EXPECT_LE((rho.entries() - expected).cwiseAbs().maxCoeff(), 1e-12);
  auto joint = evolve(spec, kIsm);
  EXPECT_NEAR(joint.probability({{"F", "u"}, {"W", "U"}}), 0.5, 1e-12);
  EXPECT_NEAR(joint.probability({{"F", "u"}, {"W", "D"}}), 0.0, 1e-12);
}

TEST(WignerFriend, SuperpositionBasisMemoryIsProduct) {
  auto spec = presets::wigner_friend(presets::WignerBasis::kSuperposition);
  auto rho = memory_state(spec, kIsm, {"S"});
  const auto& r = rho.registry();
  Matrix expected = Matrix::Zero(8, 8);
  expected(r.flat_index_of({"u", "+"}), r.flat_index_of({"u", "+"})) = 0.5;
  expected(r.flat_index_of({"d", "+"}), r.flat_index_of({"d", "+"})) = 0.5;
  EXPECT_LE((rho.entries() - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(marginal(evolve(spec, kIsm), "W").at("-"), 0.0, 1e-12);
}

TEST(WignerFriend, SubjectiveCollapseOpensMinus) {
  auto spec = presets::wigner_friend(presets::WignerBasis::kSuperposition);
  const auto model = CollapseModel::subjective("F");
  auto d = conditional_via_renormalized_state(spec, model, "W", "F", "u");
  EXPECT_NEAR(d.at("+"), 0.5, 1e-9);
  EXPECT_NEAR(d.at("-"), 0.5, 1e-9);
  // V_W|up,u> = (|+>|W+> + |->|W->)/sqrt2 and tracing S leaves
  // 1/2 |u><u| (x) |a><a| + 1/2 |d><d| (x) |b><b|, a = (+ + -)/sqrt2, b = (+ - -)/sqrt2.
  auto rho = memory_state(spec, model, {"S"}, AgentOutcome{"F", "u"});
  const auto& r = rho.registry();
  const auto up = r.flat_index_of({"u", "+"});
  const auto um = r.flat_index_of({"u", "-"});
  const auto dp = r.flat_index_of({"d", "+"});
  const auto dm = r.flat_index_of({"d", "-"});
  EXPECT_NEAR(rho.entries()(up, up).real(), 0.25, 1e-12);
  EXPECT_NEAR(rho.entries()(um, um).real(), 0.25, 1e-12);
  EXPECT_NEAR(rho.entries()(up, um).real(), 0.25, 1e-12);
  EXPECT_NEAR(rho.entries()(dp, dm).real(), -0.25, 1e-12);
  EXPECT_NEAR(std::abs(rho.entries()(up, dp)), 0.0, 1e-12);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
}

TEST(Eigenstate, PointDistributionUnderEveryModel) {
  SubsystemRegistry s({Subsystem{"S", {"up", "down"}}});
  auto m = MeasurementIsometry::build("F", {StateVector::basis(s, {"up"}), StateVector::basis(s, {"down"})},
                                      {"u", "d"}, "F");
  ExperimentSpec spec("eigen", StateVector::basis(s, {"down"}), {{1, m}});
  for (const auto& model : {kIsm, CollapseModel::objective(), CollapseModel::subjective("F")}) {
    auto joint = evolve(spec, model);
    EXPECT_NEAR(joint.probability({{"F", "d"}}), 1.0, 1e-12);
    EXPECT_NEAR(marginal(joint, "F").at("u"), 0.0, 1e-12);
  }
}

TEST(Spec, ValidatesSteps) {
  SubsystemRegistry s({Subsystem{"S", {"up", "down"}}});
  auto m = MeasurementIsometry::build("F", {StateVector::basis(s, {"up"}), StateVector::basis(s, {"down"})},
                                      {"u", "d"}, "F");
  auto m2 = MeasurementIsometry::build("G", {StateVector::basis(s, {"up"}), StateVector::basis(s, {"down"})},
                                       {"u", "d"}, "G");
  auto initial = StateVector::basis(s, {"up"});
  EXPECT_THROW(ExperimentSpec("bad", initial, {{2, m}, {1, m2}}), InvariantError);
  EXPECT_THROW(ExperimentSpec("bad", initial, {{1, m}, {1, m2}}), InvariantError);
  EXPECT_THROW(ExperimentSpec("bad", initial, {{1, m}, {2, m}}), LabelError);
  EXPECT_THROW(ExperimentSpec("bad", initial, {{1, m}}, {{"X", "u"}}), LabelError);
  EXPECT_NO_THROW(ExperimentSpec("ok", initial, {{1, m}, {2, m2}}));
}

TEST(Joint, Validation) {
  EXPECT_THROW(JointDistribution({"A"}, {{"0", "1"}}, {0.5, 0.6}, "ism"), InvariantError);
  EXPECT_THROW(JointDistribution({"A"}, {{"0", "1"}}, {1.1, -0.1}, "ism"), InvariantError);
  JointDistribution uniform({"A", "B"}, {{"0", "1"}, {"0", "1"}}, {0.25, 0.25, 0.25, 0.25}, "ism");
  EXPECT_NEAR(marginal(uniform, "B").at("1"), 0.5, 1e-15);
  EXPECT_THROW(marginal(uniform, "C"), LabelError);
  EXPECT_THROW(conditional(uniform, "A", "C"), LabelError);
}

}  // namespace
}  // namespace wfsim
