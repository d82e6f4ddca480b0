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

#include <cstddef>
#include <string>
#include <vector>

#include "wfsim/qstate.hpp"

namespace wfsim::detail {

// Splits flat indices of a registry into (local, rest) where `local` is the
// mixed-radix index over the target subsystems in the order given and `rest`
// is the index over the remaining subsystems in registration order.
class LocalLayout {
 public:
  LocalLayout(const SubsystemRegistry& registry, const std::vector<std::string>& targets);

  std::size_t local_dim() const { return local_dim_; }
  std::size_t rest_dim() const { return rest_dim_; }
  std::size_t local_of(std::size_t flat) const { return local_of_[flat]; }
  std::size_t rest_of(std::size_t flat) const { return rest_of_[flat]; }
  std::size_t flat(std::size_t rest, std::size_t local) const {
    return flat_of_[rest * local_dim_ + local];
  }

 private:
  std::size_t local_dim_ = 1;
  std::size_t rest_dim_ = 1;
  std::vector<std::size_t> local_of_;
  std::vector<std::size_t> rest_of_;
  std::vector<std::size_t> flat_of_;
};

}  // namespace wfsim::detail
