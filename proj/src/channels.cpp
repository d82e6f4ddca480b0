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

#include "wfsim/channels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "wfsim/detail/layout.hpp"

namespace wfsim {

namespace {

// Residual norms below this are treated as "already in the span" during
// basis completion. The preset bases give residuals of 0 or >= 1/2.
constexpr double kCompletionResidual = 1e-8;

void check_isometric(const Matrix& v, const char* what) {
  const auto n = v.cols();
  Matrix gram = v.adjoint() * v;
  if ((gram - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > tol::kConstruction) {
    throw InvariantError(std::string(what) + " is not an isometry");
  }
}

void check_target(const SubsystemRegistry& state_registry, const Subsystem& expected) {
  if (!state_registry.contains(expected.label)) {
    throw LabelError("state has no subsystem '" + expected.label + "'");
  }
  if (!(state_registry.at(expected.label) == expected)) {
    throw LabelError("subsystem '" + expected.label + "' does not match the isometry's definition");
  }
}

// Applies a local isometry `v` ((d_local * d_appended) x d_local) on `targets`
// and appends `appended` at the end of the registry.
StateVector apply_local_isometry(const StateVector& state, const SubsystemRegistry& targets,
                                 const Subsystem& appended, const Matrix& v) {
  const auto& registry = state.registry();
  for (const auto& s : targets.subsystems()) check_target(registry, s);
  if (registry.contains(appended.label)) {
    throw LabelError("subsystem '" + appended.label + "' already exists in the state");
  }
  detail::LocalLayout layout(registry, targets.labels());
  const std::size_t da = appended.dim();
  auto out_registry = registry.appended(appended);
  Vector out = Vector::Zero(static_cast<Eigen::Index>(out_registry.total_dim()));
  const auto& in = state.amplitudes();
  for (std::size_t flat = 0; flat < static_cast<std::size_t>(in.size()); ++flat) {
    const Complex a = in[static_cast<Eigen::Index>(flat)];
    if (a == Complex{}) continue;
    const std::size_t rest = layout.rest_of(flat);
    const auto col = static_cast<Eigen::Index>(layout.local_of(flat));
    for (std::size_t i = 0; i < layout.local_dim(); ++i) {
      const std::size_t base = layout.flat(rest, i) * da;
      for (std::size_t z = 0; z < da; ++z) {
        const Complex m = v(static_cast<Eigen::Index>(i * da + z), col);
        if (m != Complex{}) out[static_cast<Eigen::Index>(base + z)] += m * a;
      }
    }
  }
  return StateVector(std::move(out_registry), std::move(out), state.normalization());
}

// Component of `state` (already carrying the memory as its last subsystem)
// with the memory in basis state `z`.
Vector memory_component(const StateVector& state, std::size_t z) {
  const std::size_t dz = state.registry().subsystems().back().dim();
  Vector out = Vector::Zero(state.amplitudes().size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (static_cast<std::size_t>(i) % dz == z) out[i] = state.amplitudes()[i];
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

MeasurementIsometry MeasurementIsometry::build(std::string agent, std::vector<StateVector> basis,
                                               std::vector<std::string> outcome_labels,
                                               std::string memory_label) {
  if (basis.empty()) throw InvariantError("measurement basis is empty");
  if (outcome_labels.size() != basis.size()) {
    throw LabelError("need exactly one outcome label per basis vector");
  }
  if (memory_label.empty()) throw LabelError("empty memory label");
  const SubsystemRegistry measured = basis.front().registry();
  if (measured.contains(memory_label)) {
    throw LabelError("memory label '" + memory_label + "' collides with a measured subsystem");
  }
  const auto d = static_cast<Eigen::Index>(measured.total_dim());
  if (basis.size() > static_cast<std::size_t>(d)) {
    throw InvariantError("more basis vectors than the measured dimension");
  }

  std::vector<Vector> vecs;
  for (const auto& b : basis) {
    if (!(b.registry() == measured)) throw LabelError("basis vectors use different registries");
    if (std::abs(b.norm_squared() - 1.0) > tol::kBasisNormalization) {
      throw InvariantError("measurement basis vector is not normalized");
    }
    for (const auto& prev : vecs) {
      if (std::abs(prev.dot(b.amplitudes())) > tol::kBasisNormalization) {
        throw InvariantError("measurement basis vectors are not orthogonal");
      }
    }
    vecs.push_back(b.amplitudes());
  }
  // Re-orthonormalize within the accepted tolerance so V†V = 1 holds tightly.
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) vecs[i] -= vecs[j].dot(vecs[i]) * vecs[j];
    vecs[i].normalize();
  }
  const std::size_t given = vecs.size();
  for (Eigen::Index k = 0; k < d && vecs.size() < static_cast<std::size_t>(d); ++k) {
    Vector r = Vector::Unit(d, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& v : vecs) r -= v.dot(r) * v;
    }
    if (r.norm() > kCompletionResidual) vecs.push_back(r / r.norm());
  }

  std::set<std::string> used(outcome_labels.begin(), outcome_labels.end());
  if (used.size() != outcome_labels.size()) throw LabelError("duplicate outcome labels");
  for (std::size_t k = 1; vecs.size() > outcome_labels.size(); ++k) {
    std::string label = "perp" + std::to_string(k);
    if (used.count(label)) continue;
    outcome_labels.push_back(label);
  }

  MeasurementIsometry iso;
  iso.agent_ = std::move(agent);
  iso.measured_ = measured;
  iso.given_count_ = given;
  iso.memory_ = Subsystem{std::move(memory_label), std::move(outcome_labels)};
  const auto dz = static_cast<Eigen::Index>(vecs.size());
  iso.matrix_ = Matrix::Zero(d * dz, d);
  for (Eigen::Index i = 0; i < dz; ++i) {
    const Vector& m = vecs[static_cast<std::size_t>(i)];
    for (Eigen::Index row = 0; row < d; ++row) {
      for (Eigen::Index col = 0; col < d; ++col) {
        iso.matrix_(row * dz + i, col) = m[row] * std::conj(m[col]);
      }
    }
    iso.basis_.emplace_back(measured, m);
  }
  check_isometric(iso.matrix_, "measurement");
  return iso;
}

PreparationIsometry PreparationIsometry::build(std::string agent, SubsystemRegistry control, Subsystem output,
                                               std::vector<StateVector> prepared) {
  const std::size_t dc = control.total_dim();
  if (control.contains(output.label)) {
    throw LabelError("output label '" + output.label + "' collides with a control subsystem");
  }
  if (prepared.size() != dc) {
    throw InvariantError("need one prepared state per control basis state");
  }
  const SubsystemRegistry out_registry({output});
  const auto d_out = static_cast<Eigen::Index>(output.dim());
  PreparationIsometry iso;
  iso.matrix_ = Matrix::Zero(static_cast<Eigen::Index>(dc) * d_out, static_cast<Eigen::Index>(dc));
  for (std::size_t c = 0; c < dc; ++c) {
    const auto& phi = prepared[c];
    if (!(phi.registry() == out_registry)) {
      throw LabelError("prepared state must live on the output subsystem '" + output.label + "'");
    }
    if (std::abs(phi.norm_squared() - 1.0) > tol::kConstruction) {
      throw InvariantError("prepared state is not normalized");
    }
    for (Eigen::Index k = 0; k < d_out; ++k) {
      iso.matrix_(static_cast<Eigen::Index>(c) * d_out + k, static_cast<Eigen::Index>(c)) = phi.amplitudes()[k];
    }
  }
  check_isometric(iso.matrix_, "preparation");
  iso.agent_ = std::move(agent);
  iso.control_ = std::move(control);
  iso.output_ = std::move(output);
  iso.prepared_ = std::move(prepared);
  return iso;
}

CollapseModel CollapseModel::parse(const std::string& text) {
  const std::string l = lower(text);
  if (l == "ism" || l == "none" || l == "no-collapse" || l == "nocollapse") return no_collapse();
  if (l == "objective" || l == "obj") return objective();
  for (const char* prefix : {"clps:", "subjective:"}) {
    const std::string p(prefix);
    if (l.rfind(p, 0) == 0 && text.size() > p.size()) return subjective(text.substr(p.size()));
  }
  throw std::invalid_argument("unknown collapse model '" + text + "'");
}

bool CollapseModel::collapses(const std::string& agent) const {
  switch (kind_) {
    case Kind::kNoCollapse:
      return false;
    case Kind::kObjective:
      return true;
    case Kind::kSubjective:
      return agent == agent_;
  }
  return false;
}

std::string CollapseModel::tag() const {
  switch (kind_) {
    case Kind::kNoCollapse:
      return "ism";
    case Kind::kObjective:
      return "objective";
    case Kind::kSubjective:
      return "clps:" + agent_;
  }
  return {};
}

StateVector apply_isometry(const StateVector& state, const MeasurementIsometry& iso) {
  return apply_local_isometry(state, iso.measured(), iso.memory(), iso.matrix());
}

StateVector apply_isometry(const StateVector& state, const PreparationIsometry& iso) {
  return apply_local_isometry(state, iso.control(), iso.output(), iso.matrix());
}

StateVector apply_isometry(const StateVector& state, const Isometry& iso) {
  return std::visit([&](const auto& v) { return apply_isometry(state, v); }, iso);
}

StateVector collapse(const StateVector& state, const MeasurementIsometry& iso, const std::string& outcome) {
  const std::size_t z = iso.outcome_index(outcome);
  const auto after = apply_isometry(state, iso);
  Vector branch = memory_component(after, z);
  const double p = branch.squaredNorm() / state.norm_squared();
  if (!(p > tol::kZeroBranch)) {
    throw ZeroProbabilityError("outcome '" + outcome + "' of " + iso.agent() + " has probability 0");
  }
  branch /= branch.norm();
  return StateVector(after.registry(), std::move(branch));
}

std::vector<Branch> branch_decomposition(const StateVector& state, const MeasurementIsometry& iso) {
  const auto after = apply_isometry(state, iso);
  const double n2 = state.norm_squared();
  std::vector<Branch> out;
  for (std::size_t z = 0; z < iso.outcome_labels().size(); ++z) {
    Vector branch = memory_component(after, z);
    const double p = branch.squaredNorm() / n2;
    Branch b{iso.outcome_labels()[z], 0.0, std::nullopt};
    if (p >= tol::kZeroBranch) {
      b.probability = p;
      branch /= branch.norm();
      b.state.emplace(after.registry(), std::move(branch));
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace wfsim
