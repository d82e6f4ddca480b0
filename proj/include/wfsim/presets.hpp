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

// Ready-made experiments.
//
// wigner_friend: source S emits (|up>+|down>)/sqrt2, friend F measures
//   {up, down} into memory {u, d} at t1, Wigner W measures (S, F) at t2 in
//   either the product basis {|up,u>, |down,d>} (outcomes U, D) or the
//   superposition basis {(|up,u> ± |down,d>)/sqrt2} (outcomes +, -).
// deutsch_variant: the superposition setup plus the reported bits x
//   (definite outcome observed) and y (can W obtain "-").
// frauchiger_renner: coin C in sqrt(1/3)|h> + sqrt(2/3)|t>; F1 measures the
//   coin (H, T) and prepares S; F2 measures S (U, D); A measures (C, F1) in
//   {o, f}; W measures (S, F2) in {O, F}; halting on A=o, W=O.

#pragma once

#include <string>
#include <vector>

#include "wfsim/experiment.hpp"

namespace wfsim::presets {

enum class WignerBasis { kProduct, kSuperposition };

ExperimentSpec wigner_friend(WignerBasis basis);
ExperimentSpec deutsch_variant();
ExperimentSpec frauchiger_renner();

/// Canonical preset names.
std::vector<std::string> names();
/// Accepts canonical names and the short aliases wf, wf-product,
/// wf-superposition, deutsch and fr.
ExperimentSpec by_name(const std::string& name);

}  // namespace wfsim::presets
