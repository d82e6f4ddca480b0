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

// Command-line front end.
//
//   wfsim tables --preset fr --model ism --target f2 --given a
//   wfsim check fr --f1-model clps
//   wfsim sample --preset fr --shots 1000 --seed 7
//   wfsim export-preset --preset fr --out fr.json
//
// Exit codes: 0 success or consistent, 1 contradiction, 2 usage or config
// error, 3 conditioning on a zero-probability outcome.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "wfsim/experiment.hpp"

namespace wfsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitContradiction = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitImpossible = 3;

/// Uniform double in [0, 1) from a counter-based generator keyed by `seed`.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

/// Flat joint indices of `shots` draws by inverse CDF over the joint in flat order.
std::vector<std::size_t> sample_indices(const JointDistribution& joint, std::uint64_t seed, std::uint64_t shots);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wfsim::cli
