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

#include "wfsim/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "wfsim/detail/layout.hpp"

namespace wfsim {

namespace {

std::string format_coefficient(Complex c) {
  char buf[96];
  if (std::abs(c.imag()) < 1e-15) {
    std::snprintf(buf, sizeof(buf), "%.6g", c.real());
  } else if (std::abs(c.real()) < 1e-15) {
    std::snprintf(buf, sizeof(buf), "%.6gi", c.imag());
  } else {
    std::snprintf(buf, sizeof(buf), "(%.6g%+.6gi)", c.real(), c.imag());
  }
  return buf;
}

void check_hermitian(const Matrix& m, const char* what) {
  if (m.size() > 0 && (m - m.adjoint()).cwiseAbs().maxCoeff() > tol::kConstruction) {
    throw InvariantError(std::string(what) + " is not Hermitian");
  }
}

}  // namespace

namespace detail {

LocalLayout::LocalLayout(const SubsystemRegistry& registry, const std::vector<std::string>& targets) {
  const std::size_t n = registry.size();
  std::vector<bool> is_target(n, false);
  std::vector<std::size_t> target_pos;
  for (const auto& label : targets) {
    std::size_t p = registry.position(label);
    if (is_target[p]) {
      throw LabelError("duplicate target label '" + label + "'");
    }
    is_target[p] = true;
    target_pos.push_back(p);
  }
  std::vector<std::size_t> rest_pos;
  for (std::size_t p = 0; p < n; ++p) {
    if (!is_target[p]) rest_pos.push_back(p);
  }
  const auto& subs = registry.subsystems();
  for (auto p : target_pos) local_dim_ *= subs[p].dim();
  for (auto p : rest_pos) rest_dim_ *= subs[p].dim();

  const std::size_t total = registry.total_dim();
  local_of_.resize(total);
  rest_of_.resize(total);
  flat_of_.resize(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    auto multi = registry.multi_index(flat);
    std::size_t local = 0;
    for (auto p : target_pos) local = local * subs[p].dim() + multi[p];
    std::size_t rest = 0;
    for (auto p : rest_pos) rest = rest * subs[p].dim() + multi[p];
    local_of_[flat] = local;
    rest_of_[flat] = rest;
    flat_of_[rest * local_dim_ + local] = flat;
  }
}

}  // namespace detail

std::size_t Subsystem::basis_index(const std::string& basis_label) const {
  auto it = std::find(basis_labels.begin(), basis_labels.end(), basis_label);
  if (it == basis_labels.end()) {
    throw LabelError("subsystem '" + label + "' has no basis label '" + basis_label + "'");
  }
  return static_cast<std::size_t>(it - basis_labels.begin());
}

SubsystemRegistry::SubsystemRegistry(std::vector<Subsystem> subsystems)
    : subsystems_(std::move(subsystems)) {
  std::set<std::string> seen;
  for (const auto& s : subsystems_) {
    if (s.label.empty()) throw LabelError("empty subsystem label");
    if (!seen.insert(s.label).second) {
      throw LabelError("duplicate subsystem label '" + s.label + "'");
    }
    if (s.dim() < 1) throw InvariantError("subsystem '" + s.label + "' has dimension 0");
    std::set<std::string> basis(s.basis_labels.begin(), s.basis_labels.end());
    if (basis.size() != s.basis_labels.size()) {
      throw LabelError("subsystem '" + s.label + "' has duplicate basis labels");
    }
  }
}

std::size_t SubsystemRegistry::total_dim() const {
  std::size_t d = 1;
  for (const auto& s : subsystems_) d *= s.dim();
  return d;
}

bool SubsystemRegistry::contains(const std::string& label) const {
  return std::any_of(subsystems_.begin(), subsystems_.end(),
                     [&](const Subsystem& s) { return s.label == label; });
}

std::size_t SubsystemRegistry::position(const std::string& label) const {
  for (std::size_t i = 0; i < subsystems_.size(); ++i) {
    if (subsystems_[i].label == label) return i;
  }
  throw LabelError("unknown subsystem label '" + label + "'");
}

const Subsystem& SubsystemRegistry::at(const std::string& label) const {
  return subsystems_[position(label)];
}

std::vector<std::string> SubsystemRegistry::labels() const {
  std::vector<std::string> out;
  out.reserve(subsystems_.size());
  for (const auto& s : subsystems_) out.push_back(s.label);
  return out;
}

std::vector<std::size_t> SubsystemRegistry::multi_index(std::size_t flat) const {
  std::vector<std::size_t> multi(subsystems_.size());
  for (std::size_t i = subsystems_.size(); i-- > 0;) {
    multi[i] = flat % subsystems_[i].dim();
    flat /= subsystems_[i].dim();
  }
  return multi;
}

std::size_t SubsystemRegistry::flat_index(std::span<const std::size_t> multi) const {
  if (multi.size() != subsystems_.size()) {
    throw InvariantError("multi-index length does not match registry");
  }
  std::size_t flat = 0;
  for (std::size_t i = 0; i < multi.size(); ++i) {
    if (multi[i] >= subsystems_[i].dim()) throw InvariantError("multi-index out of range");
    flat = flat * subsystems_[i].dim() + multi[i];
  }
  return flat;
}

std::size_t SubsystemRegistry::flat_index_of(const std::vector<std::string>& basis_labels) const {
  if (basis_labels.size() != subsystems_.size()) {
    throw LabelError("expected one basis label per subsystem");
  }
  std::vector<std::size_t> multi(basis_labels.size());
  for (std::size_t i = 0; i < basis_labels.size(); ++i) {
    multi[i] = subsystems_[i].basis_index(basis_labels[i]);
  }
  return flat_index(multi);
}

std::string SubsystemRegistry::basis_name(std::size_t flat) const {
  auto multi = multi_index(flat);
  std::string out;
  for (std::size_t i = 0; i < multi.size(); ++i) {
    if (i) out += ',';
    out += subsystems_[i].basis_labels[multi[i]];
  }
  return out;
}

SubsystemRegistry SubsystemRegistry::appended(Subsystem subsystem) const {
  auto subs = subsystems_;
  subs.push_back(std::move(subsystem));
  return SubsystemRegistry(std::move(subs));
}

SubsystemRegistry SubsystemRegistry::concatenated(const SubsystemRegistry& other) const {
  auto subs = subsystems_;
  subs.insert(subs.end(), other.subsystems_.begin(), other.subsystems_.end());
  return SubsystemRegistry(std::move(subs));
}

SubsystemRegistry SubsystemRegistry::restricted(const std::set<std::string>& keep) const {
  for (const auto& label : keep) position(label);
  std::vector<Subsystem> subs;
  for (const auto& s : subsystems_) {
    if (keep.count(s.label)) subs.push_back(s);
  }
  return SubsystemRegistry(std::move(subs));
}

StateVector::StateVector(SubsystemRegistry registry, Vector amplitudes, Normalization normalization)
    : registry_(std::move(registry)), amplitudes_(std::move(amplitudes)), normalization_(normalization) {
  if (static_cast<std::size_t>(amplitudes_.size()) != registry_.total_dim()) {
    throw InvariantError("amplitude count " + std::to_string(amplitudes_.size()) +
                         " does not match registry dimension " +
                         std::to_string(registry_.total_dim()));
  }
  if (normalization_ == Normalization::kNormalized &&
      std::abs(amplitudes_.squaredNorm() - 1.0) > tol::kConstruction) {
    throw InvariantError("state is not normalized (norm^2 = " +
                         std::to_string(amplitudes_.squaredNorm()) + ")");
  }
}

StateVector StateVector::basis(SubsystemRegistry registry, const std::vector<std::string>& basis_labels) {
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(registry.total_dim()));
  amps[static_cast<Eigen::Index>(registry.flat_index_of(basis_labels))] = 1.0;
  return StateVector(std::move(registry), std::move(amps));
}

StateVector StateVector::from_terms(
    SubsystemRegistry registry,
    const std::vector<std::pair<Complex, std::vector<std::string>>>& terms) {
  Vector amps = Vector::Zero(static_cast<Eigen::Index>(registry.total_dim()));
  for (const auto& [coeff, labels] : terms) {
    amps[static_cast<Eigen::Index>(registry.flat_index_of(labels))] += coeff;
  }
  return StateVector(std::move(registry), std::move(amps), Normalization::kUnnormalizedBranch).normalized();
}

Complex StateVector::amplitude(const std::vector<std::string>& basis_labels) const {
  return amplitudes_[static_cast<Eigen::Index>(registry_.flat_index_of(basis_labels))];
}

StateVector StateVector::normalized() const {
  double n2 = norm_squared();
  if (n2 <= tol::kZeroBranch) {
    throw ZeroProbabilityError("cannot normalize a null state");
  }
  return StateVector(registry_, amplitudes_ / std::sqrt(n2));
}

std::string StateVector::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (Eigen::Index i = 0; i < amplitudes_.size(); ++i) {
    if (std::abs(amplitudes_[i]) <= 1e-12) continue;
    if (!first) out << '\n';
    first = false;
    out << format_coefficient(amplitudes_[i]) << " |"
        << registry_.basis_name(static_cast<std::size_t>(i)) << "⟩";
  }
  return out.str();
}

DensityMatrix::DensityMatrix(SubsystemRegistry registry, Matrix entries, TraceNormalization normalization)
    : registry_(std::move(registry)), entries_(std::move(entries)), normalization_(normalization) {
  const auto d = static_cast<Eigen::Index>(registry_.total_dim());
  if (entries_.rows() != d || entries_.cols() != d) {
    throw InvariantError("density matrix side does not match registry dimension");
  }
  check_hermitian(entries_, "density matrix");
  if (normalization_ == TraceNormalization::kUnitTrace &&
      std::abs(entries_.trace().real() - 1.0) > tol::kConstruction) {
    throw InvariantError("density matrix trace is not 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(entries_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -tol::kNegativeEigenvalue) {
    throw InvariantError("density matrix is not positive semidefinite");
  }
}

DensityMatrix DensityMatrix::from_pure(const StateVector& state) {
  const auto& a = state.amplitudes();
  auto norm = state.normalization() == Normalization::kNormalized ? TraceNormalization::kUnitTrace
                                                                   : TraceNormalization::kSubnormalized;
  return DensityMatrix(state.registry(), a * a.adjoint(), norm);
}

DensityMatrix DensityMatrix::mixture(const std::vector<std::pair<double, StateVector>>& terms) {
  if (terms.empty()) throw InvariantError("empty mixture");
  const auto& registry = terms.front().second.registry();
  const auto d = static_cast<Eigen::Index>(registry.total_dim());
  Matrix rho = Matrix::Zero(d, d);
  double total = 0.0;
  for (const auto& [w, psi] : terms) {
    if (!(psi.registry() == registry)) throw LabelError("mixture terms use different registries");
    if (w < 0.0) throw InvariantError("negative mixture weight");
    rho += w * psi.amplitudes() * psi.amplitudes().adjoint();
    total += w * psi.norm_squared();
  }
  auto norm = std::abs(total - 1.0) <= tol::kConstruction ? TraceNormalization::kUnitTrace
                                                          : TraceNormalization::kSubnormalized;
  return DensityMatrix(registry, std::move(rho), norm);
}

Projector::Projector(SubsystemRegistry registry, std::vector<std::string> targets, Matrix local)
    : registry_(std::move(registry)), targets_(std::move(targets)), local_(std::move(local)) {
  std::size_t d = 1;
  for (const auto& t : targets_) d *= registry_.at(t).dim();
  if (static_cast<std::size_t>(local_.rows()) != d || local_.cols() != local_.rows()) {
    throw InvariantError("projector matrix does not match target dimension");
  }
  check_hermitian(local_, "projector");
  if ((local_ * local_ - local_).cwiseAbs().maxCoeff() > tol::kConstruction) {
    throw InvariantError("projector is not idempotent");
  }
}

Matrix Projector::to_dense() const {
  detail::LocalLayout layout(registry_, targets_);
  const auto d = static_cast<Eigen::Index>(registry_.total_dim());
  Matrix out = Matrix::Zero(d, d);
  for (std::size_t rest = 0; rest < layout.rest_dim(); ++rest) {
    for (std::size_t i = 0; i < layout.local_dim(); ++i) {
      for (std::size_t j = 0; j < layout.local_dim(); ++j) {
        out(static_cast<Eigen::Index>(layout.flat(rest, i)), static_cast<Eigen::Index>(layout.flat(rest, j))) =
            local_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return out;
}

StateVector Projector::apply(const StateVector& state) const {
  if (!(state.registry() == registry_)) throw LabelError("projector and state registries differ");
  detail::LocalLayout layout(registry_, targets_);
  const auto& in = state.amplitudes();
  Vector out = Vector::Zero(in.size());
  for (std::size_t flat = 0; flat < static_cast<std::size_t>(in.size()); ++flat) {
    const Complex a = in[static_cast<Eigen::Index>(flat)];
    if (a == Complex{}) continue;
    const std::size_t rest = layout.rest_of(flat);
    const auto j = static_cast<Eigen::Index>(layout.local_of(flat));
    for (std::size_t i = 0; i < layout.local_dim(); ++i) {
      out[static_cast<Eigen::Index>(layout.flat(rest, i))] += local_(static_cast<Eigen::Index>(i), j) * a;
    }
  }
  return StateVector(registry_, std::move(out), Normalization::kUnnormalizedBranch);
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  for (const auto& label : b.registry().labels()) {
    if (a.registry().contains(label)) {
      throw LabelError("tensor: label '" + label + "' present in both factors");
    }
  }
  auto registry = a.registry().concatenated(b.registry());
  Vector amps(static_cast<Eigen::Index>(registry.total_dim()));
  const auto db = b.amplitudes().size();
  for (Eigen::Index i = 0; i < a.amplitudes().size(); ++i) {
    amps.segment(i * db, db) = a.amplitudes()[i] * b.amplitudes();
  }
  auto norm = (a.normalization() == Normalization::kNormalized && b.normalization() == Normalization::kNormalized)
                  ? Normalization::kNormalized
                  : Normalization::kUnnormalizedBranch;
  return StateVector(std::move(registry), std::move(amps), norm);
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<std::string>& keep) {
  if (keep.empty()) throw LabelError("partial_trace: keep set is empty");
  auto kept = rho.registry().restricted(keep);
  detail::LocalLayout layout(rho.registry(), kept.labels());
  const auto dk = static_cast<Eigen::Index>(layout.local_dim());
  Matrix out = Matrix::Zero(dk, dk);
  const auto& m = rho.entries();
  for (Eigen::Index i = 0; i < dk; ++i) {
    for (Eigen::Index j = 0; j < dk; ++j) {
      Complex sum{};
      for (std::size_t r = 0; r < layout.rest_dim(); ++r) {
        sum += m(static_cast<Eigen::Index>(layout.flat(r, static_cast<std::size_t>(i))),
                 static_cast<Eigen::Index>(layout.flat(r, static_cast<std::size_t>(j))));
      }
      out(i, j) = sum;
    }
  }
  auto norm = std::abs(out.trace().real() - 1.0) <= tol::kConstruction ? TraceNormalization::kUnitTrace
                                                                        : TraceNormalization::kSubnormalized;
  return DensityMatrix(std::move(kept), std::move(out), norm);
}

namespace {

double clamp_probability(double p) {
  if (p < -tol::kNegativeProbability) {
    throw InvariantError("Born probability is negative: " + std::to_string(p));
  }
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double born_probability(const StateVector& state, const Projector& proj) {
  auto projected = proj.apply(state);
  return clamp_probability(state.amplitudes().dot(projected.amplitudes()).real());
}

double born_probability(const DensityMatrix& rho, const Projector& proj) {
  if (!(rho.registry() == proj.registry())) throw LabelError("projector and state registries differ");
  return clamp_probability((rho.entries() * proj.to_dense()).trace().real());
}

Projector projector_from_basis_vector(const StateVector& v, const SubsystemRegistry& registry) {
  if (std::abs(v.norm_squared() - 1.0) > tol::kBasisNormalization) {
    throw InvariantError("projector vector is not normalized");
  }
  auto targets = v.registry().labels();
  for (const auto& s : v.registry().subsystems()) {
    if (!(registry.at(s.label) == s)) {
      throw LabelError("subsystem '" + s.label + "' differs between vector and registry");
    }
  }
  const Vector a = v.amplitudes() / v.amplitudes().norm();
  return Projector(registry, std::move(targets), a * a.adjoint());
}

}  // namespace wfsim
