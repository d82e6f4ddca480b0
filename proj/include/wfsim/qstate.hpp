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

// Dense states over a registry of labeled finite-dimensional subsystems.
//
// Every state, density matrix and projector carries the registry it was
// built against. Subsystems are always addressed by label; the registration
// order is the canonical tensor order (first registered = most significant
// digit of the flat index).

#pragma once

#include <complex>
#include <cstddef>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace wfsim {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

namespace tol {
inline constexpr double kConstruction = 1e-12;
inline constexpr double kProbability = 1e-9;
inline constexpr double kCertainty = 1e-9;
inline constexpr double kNegativeEigenvalue = 1e-10;
inline constexpr double kNegativeProbability = 1e-10;
inline constexpr double kZeroBranch = 1e-12;
inline constexpr double kBasisNormalization = 1e-9;
}  // namespace tol

/// Raised for unknown, duplicated or colliding subsystem/agent/slot labels.
class LabelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a value violates a construction invariant (norm, trace,
/// hermiticity, orthonormality...).
class InvariantError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when conditioning on (or collapsing to) an outcome that cannot occur.
class ZeroProbabilityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Subsystem {
  std::string label;
  std::vector<std::string> basis_labels;

  std::size_t dim() const { return basis_labels.size(); }
  std::size_t basis_index(const std::string& basis_label) const;

  bool operator==(const Subsystem&) const = default;
};

class SubsystemRegistry {
 public:
  SubsystemRegistry() = default;
  explicit SubsystemRegistry(std::vector<Subsystem> subsystems);

  const std::vector<Subsystem>& subsystems() const { return subsystems_; }
  std::size_t size() const { return subsystems_.size(); }
  bool empty() const { return subsystems_.empty(); }
  std::size_t total_dim() const;

  bool contains(const std::string& label) const;
  std::size_t position(const std::string& label) const;
  const Subsystem& at(const std::string& label) const;
  std::vector<std::string> labels() const;

  /// Multi-index in registration order for a flat index.
  std::vector<std::size_t> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::span<const std::size_t> multi) const;
  /// Flat index of the product basis state named by one basis label per
  /// subsystem, e.g. {"h", "H", "down"}.
  std::size_t flat_index_of(const std::vector<std::string>& basis_labels) const;
  /// "h,H,down" for the given flat index.
  std::string basis_name(std::size_t flat) const;

  SubsystemRegistry appended(Subsystem subsystem) const;
  SubsystemRegistry concatenated(const SubsystemRegistry& other) const;
  /// Keeps the named labels, in registration order.
  SubsystemRegistry restricted(const std::set<std::string>& keep) const;

  bool operator==(const SubsystemRegistry&) const = default;

 private:
  std::vector<Subsystem> subsystems_;
};

enum class Normalization { kNormalized, kUnnormalizedBranch };

class StateVector {
 public:
  StateVector(SubsystemRegistry registry, Vector amplitudes,
              Normalization normalization = Normalization::kNormalized);

  /// Product basis state, one basis label per registered subsystem.
  static StateVector basis(SubsystemRegistry registry,
                           const std::vector<std::string>& basis_labels);
  /// Normalized superposition of named product basis states.
  static StateVector from_terms(
      SubsystemRegistry registry,
      const std::vector<std::pair<Complex, std::vector<std::string>>>& terms);

  const SubsystemRegistry& registry() const { return registry_; }
  const Vector& amplitudes() const { return amplitudes_; }
  Normalization normalization() const { return normalization_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
  double norm_squared() const { return amplitudes_.squaredNorm(); }
  Complex amplitude(const std::vector<std::string>& basis_labels) const;

  /// Renormalized copy; throws ZeroProbabilityError for a (numerically) null vector.
  StateVector normalized() const;

  /// Nonzero amplitudes as "coeff |labels>" lines in multi-index order.
  std::string to_string() const;

 private:
  SubsystemRegistry registry_;
  Vector amplitudes_;
  Normalization normalization_;
};

enum class TraceNormalization { kUnitTrace, kSubnormalized };

class DensityMatrix {
 public:
  DensityMatrix(SubsystemRegistry registry, Matrix entries,
                TraceNormalization normalization = TraceNormalization::kUnitTrace);

  static DensityMatrix from_pure(const StateVector& state);
  /// Sum of weight * |psi><psi|. States must share a registry.
  static DensityMatrix mixture(const std::vector<std::pair<double, StateVector>>& terms);

  const SubsystemRegistry& registry() const { return registry_; }
  const Matrix& entries() const { return entries_; }
  double trace() const { return entries_.trace().real(); }

 private:
  SubsystemRegistry registry_;
  Matrix entries_;
  TraceNormalization normalization_;
};

/// Hermitian idempotent operator acting on `targets` (in the given order),
/// identity on all other subsystems of the registry.
class Projector {
 public:
  Projector(SubsystemRegistry registry, std::vector<std::string> targets, Matrix local);

  const SubsystemRegistry& registry() const { return registry_; }
  const std::vector<std::string>& targets() const { return targets_; }
  const Matrix& local() const { return local_; }

  /// Embedded operator on the full registry (local ⊗ identity, reordered).
  Matrix to_dense() const;
  /// P|psi>, flagged as an unnormalized branch.
  StateVector apply(const StateVector& state) const;

 private:
  SubsystemRegistry registry_;
  std::vector<std::string> targets_;
  Matrix local_;
};

StateVector tensor(const StateVector& a, const StateVector& b);
DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<std::string>& keep);
double born_probability(const StateVector& state, const Projector& proj);
double born_probability(const DensityMatrix& rho, const Projector& proj);
/// |v><v| on v's labels, padded with identity on the rest of `registry`.
Projector projector_from_basis_vector(const StateVector& v, const SubsystemRegistry& registry);

}  // namespace wfsim
