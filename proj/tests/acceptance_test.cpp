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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fr_oracle.hpp"
#include "wfsim/deduction.hpp"
#include "wfsim/experiment.hpp"
#include "wfsim/presets.hpp"

namespace {

using namespace wfsim;

struct Run {
  int code = -1;
  std::string out;
};

Run run_command(const std::string& cmd) {
  Run r;
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Run cli(const std::string& args) { return run_command(std::string(WFSIM_CLI_PATH) + " " + args); }

// Collects failed expectations for one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    std::ostringstream s;
    s.precision(17);
    s << what << ": got " << got << ", want " << want;
    expect(std::abs(got - want) <= tol, s.str());
  }
  const std::vector<std::string>& failures() const { return failures_; }

 private:
  std::vector<std::string> failures_;
};

const CollapseModel kIsm = CollapseModel::no_collapse();

double cell(const ConditionalTable& t, const std::string& target, const std::string& given) {
  return t.probability(target, given).value_or(std::nan(""));
}

void assistant_table(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  auto spec = presets::frauchiger_renner();
  auto t = conditional(evolve(spec, kIsm, std::vector<std::string>{"A", "F2"}), "F2", "A");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.near(cell(t, "U", "o"), 1.0, 1e-9, "P(U|o)");
  c.near(cell(t, "D", "o"), 0.0, 1e-9, "P(D|o)");
  c.near(cell(t, "U", "f"), 1.0 / 5.0, 1e-9, "P(U|f)");
  c.near(cell(t, "D", "f"), 4.0 / 5.0, 1e-9, "P(D|f)");
  c.expect(secs < 1.0, "runtime " + std::to_string(secs) + " s");
}

void second_friend_table(Check& c) {
  auto spec = presets::frauchiger_renner();
  auto t = conditional(evolve(spec, kIsm, std::vector<std::string>{"F1", "F2"}), "F1", "F2");
  c.near(cell(t, "T", "U"), 1.0, 1e-9, "P(T|U)");
  c.near(cell(t, "H", "U"), 0.0, 1e-9, "P(H|U)");
  c.near(cell(t, "H", "D"), 0.5, 1e-9, "P(H|D)");
  c.near(cell(t, "T", "D"), 0.5, 1e-9, "P(T|D)");
}

void first_friend_collapse_table(Check& c) {
  auto spec = presets::frauchiger_renner();
  const auto model = CollapseModel::subjective("F1");
  auto tails = conditional_via_renormalized_state(spec, model, "W", "F1", "T");
  auto heads = conditional_via_renormalized_state(spec, model, "W", "F1", "H");
  c.near(tails.at("F"), 1.0, 1e-9, "P(F|T)");
  c.near(tails.at("O"), 0.0, 1e-9, "P(O|T)");
  c.near(heads.at("F"), 0.5, 1e-9, "P(F|H)");
  c.near(heads.at("O"), 0.5, 1e-9, "P(O|H)");
}

void first_friend_unitary_table(Check& c) {
  auto spec = presets::frauchiger_renner();
  auto t = conditional(evolve(spec, kIsm, std::vector<std::string>{"F1", "W"}), "W", "F1");
  for (const std::string f1 : {"H", "T"}) {
    c.near(cell(t, "F", f1), 5.0 / 6.0, 1e-9, "P(F|" + f1 + ")");
    c.near(cell(t, "O", f1), 1.0 / 6.0, 1e-9, "P(O|" + f1 + ")");
  }
}

void product_basis_memory(Check& c) {
  auto spec = presets::wigner_friend(presets::WignerBasis::kProduct);
  auto rho = memory_state(spec, kIsm, {"S"});
  const auto& r = rho.registry();
  Matrix expected = Matrix::Zero(rho.entries().rows(), rho.entries().cols());
  expected(r.flat_index_of({"u", "U"}), r.flat_index_of({"u", "U"})) = 0.5;
  expected(r.flat_index_of({"d", "D"}), r.flat_index_of({"d", "D"})) = 0.5;
  c.expect(r.labels() == std::vector<std::string>{"F", "W"}, "memory registry is (F, W)");
  c.near((rho.entries() - expected).cwiseAbs().maxCoeff(), 0.0, 1e-12, "max entry deviation");
}

void superposition_basis_memory(Check& c) {
  auto spec = presets::wigner_friend(presets::WignerBasis::kSuperposition);
  auto rho = memory_state(spec, kIsm, {"S"});
  const auto& r = rho.registry();
  Matrix expected = Matrix::Zero(rho.entries().rows(), rho.entries().cols());
  expected(r.flat_index_of({"u", "+"}), r.flat_index_of({"u", "+"})) = 0.5;
  expected(r.flat_index_of({"d", "+"}), r.flat_index_of({"d", "+"})) = 0.5;
  c.near((rho.entries() - expected).cwiseAbs().maxCoeff(), 0.0, 1e-12, "max entry deviation");
  c.near(marginal(evolve(spec, kIsm), "W").at("-"), 0.0, 1e-12, "P(W=-)");
}

void collapse_discriminator(Check& c) {
  auto spec = presets::wigner_friend(presets::WignerBasis::kSuperposition);
  auto d = conditional_via_renormalized_state(spec, CollapseModel::subjective("F"), "W", "F", "u");
  c.near(d.at("+"), 0.5, 1e-9, "P(+|u)");
  c.near(d.at("-"), 0.5, 1e-9, "P(-|u)");
}

void halting_probability(Check& c) {
  auto spec = presets::frauchiger_renner();
  const double got = evolve(spec, kIsm).event_probability({{"A", "o"}, {"W", "O"}});
  c.near(got, oracle::p_a_w(0, 0), 1e-9, "P(o, O) vs oracle");
  c.near(oracle::p_a_w(0, 0), 1.0 / 12.0, 1e-9, "oracle P(o, O)");
}

bool has_entry(const std::vector<Entry>& entries, Entry::Kind kind, const std::string& value) {
  for (const auto& e : entries) {
    if (e.kind == kind && e.value == value) return true;
  }
  return false;
}

void fr_contradiction(Check& c) {
  auto clps = cli("check fr --f1-model clps --format json");
  c.expect(clps.code == 1, "clps exit code " + std::to_string(clps.code));
  try {
    auto doc = nlohmann::json::parse(clps.out);
    const auto& clash = doc.at("contradiction").at("clash");
    c.expect(clash.at("time") == "t4" && clash.at("slot") == "W", "clash at (t4, W)");
  } catch (const std::exception& e) {
    c.expect(false, std::string("json report: ") + e.what());
  }
  auto ism = cli("check fr --f1-model ism");
  c.expect(ism.code == 0, "ism exit code " + std::to_string(ism.code));

  auto result = run_fr_contradiction(CollapseModel::subjective("F1"));
  c.expect(result.contradiction.has_value(), "in-process contradiction");
  if (result.contradiction) {
    const auto& v = result.contradiction->violation;
    const bool left_deduced = has_entry(v.left, Entry::Kind::kDeduced, "F") && has_entry(v.right, Entry::Kind::kValue, "O");
    const bool right_deduced = has_entry(v.right, Entry::Kind::kDeduced, "F") && has_entry(v.left, Entry::Kind::kValue, "O");
    c.expect(v.time == "t4" && v.slot == "W", "violation at (t4, W)");
    c.expect(left_deduced || right_deduced, "deduced W=F against observed O");
  }
}

void deutsch_contradiction(Check& c) {
  auto r = cli("check deutsch --format json");
  c.expect(r.code == 1, "exit code " + std::to_string(r.code));
  try {
    auto doc = nlohmann::json::parse(r.out);
    c.expect(doc.at("contradiction").at("clash").at("slot") == "y", "clash on slot y");
  } catch (const std::exception& e) {
    c.expect(false, std::string("json report: ") + e.what());
  }
  auto result = run_deutsch_contradiction();
  c.expect(result.contradiction.has_value(), "in-process contradiction");
  if (result.contradiction) {
    const auto& rep = *result.contradiction;
    c.expect(rep.violation.slot == "y", "violation slot y");
    c.expect(rep.constraint.left_owner == "F" && rep.constraint.right_owner == "W", "friend left, Wigner right");
    auto has_value = [](const std::vector<Entry>& es, const std::string& v) {
      for (const auto& e : es) {
        if (e.kind != Entry::Kind::kWildcard && e.value == v) return true;
      }
      return false;
    };
    c.expect(has_value(rep.violation.left, "1") && !has_value(rep.violation.left, "0"), "friend claims y=1");
    c.expect(has_value(rep.violation.right, "0") && !has_value(rep.violation.right, "1"), "Wigner claims y=0");
  }
}

void property_suite(Check& c) {
  auto r = run_command(WFSIM_PROPERTY_TEST_PATH);
  c.expect(r.code == 0, "property_test exit code " + std::to_string(r.code));
  c.expect(r.out.find("[  PASSED  ] 8 tests.") != std::string::npos, "all eight properties passed");
}

void determinism(Check& c) {
  const std::vector<std::string> commands{
      "tables --preset fr --model ism --target f2 --given a",
      "tables --preset fr --model clps:F1 --target w --given f1 --format json",
      "check fr --f1-model clps",
      "check fr --f1-model clps --format json",
      "check deutsch",
      "sample --preset fr --shots 5000 --seed 42",
  };
  for (const auto& cmd : commands) {
    auto a = cli(cmd);
    auto b = cli(cmd);
    c.expect(!a.out.empty(), "non-empty output: " + cmd);
    c.expect(a.code == b.code && a.out == b.out, "byte-identical: " + cmd);
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"assistant conditional table", assistant_table},
      {"second friend conditional table", second_friend_table},
      {"first friend table under its own collapse", first_friend_collapse_table},
      {"first friend table without collapse", first_friend_unitary_table},
      {"product-basis memory state", product_basis_memory},
      {"superposition-basis memory state", superposition_basis_memory},
      {"collapse discriminator", collapse_discriminator},
      {"halting probability", halting_probability},
      {"four-agent contradiction", fr_contradiction},
      {"report-bit contradiction", deutsch_contradiction},
      {"property suite", property_suite},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = c.failures().empty();
    std::cout << (ok ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << "\n";
    for (const auto& f : c.failures()) std::cout << "     " << f << "\n";
    if (!ok) ++failed;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
