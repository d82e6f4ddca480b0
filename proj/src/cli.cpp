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

#include "wfsim/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wfsim/config_io.hpp"
#include "wfsim/deduction.hpp"
#include "wfsim/presets.hpp"

namespace wfsim::cli {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Source {
  std::string preset;
  std::string config;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* p = cmd->add_option("--preset", src.preset, "Preset name (" + [] {
                              std::string s;
                              for (const auto& n : presets::names()) s += (s.empty() ? "" : ", ") + n;
                              return s;
                            }() + ")");
  auto* c = cmd->add_option("--config", src.config, "Experiment JSON file");
  p->excludes(c);
  c->excludes(p);
}

ExperimentSpec load(const Source& src) {
  if (src.preset.empty() == src.config.empty()) throw ConfigError("exactly one of --preset and --config is required");
  if (!src.config.empty()) return load_experiment(src.config);
  try {
    return presets::by_name(src.preset);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// "clps" alone means the subjective collapse of `self`.
CollapseModel parse_model(const std::string& text, const ExperimentSpec* spec, const std::string& self = {}) {
  std::string lowered = text;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if ((lowered == "clps" || lowered == "subjective") && !self.empty()) return CollapseModel::subjective(self);
  CollapseModel m = [&] {
    try {
      return CollapseModel::parse(text);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  if (m.kind() == CollapseModel::Kind::kSubjective && spec) {
    return CollapseModel::subjective(spec->resolve_agent(m.agent()));
  }
  return m;
}

std::string fixed(double x, int digits) {
  if (x < 0.0 && x > -0.5 * std::pow(10.0, -digits)) x = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string render_grid(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  auto cell_width = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
    return n;
  };
  for (const auto& r : rows) {
    width.resize(std::max(width.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], cell_width(r[i]));
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string pad(width[i] - cell_width(r[i]), ' ');
      line += (i ? "  " : "") + (i ? pad + r[i] : r[i] + pad);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  return out.str();
}

std::string render_csv(const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << "\n";
  }
  return out.str();
}

struct TablesArgs {
  Source src;
  std::string model = "ism";
  std::string target;
  std::string given;
  std::string given_outcome;
  bool halt = false;
  std::string format = "text";
  int digits = 5;
};

int cmd_tables(const TablesArgs& a, std::ostream& out) {
  const auto spec = load(a.src);
  const auto model = parse_model(a.model, &spec);
  const auto target = spec.resolve_agent(a.target);
  const auto& target_iso = spec.measurement(target);
  auto hidden_row = [&](std::size_t t, const std::vector<double>& values) {
    return target_iso.is_completion(t) &&
           std::all_of(values.begin(), values.end(), [](double p) { return std::abs(p) <= tol::kZeroBranch; });
  };

  std::vector<std::string> agents{target};
  std::string given;
  if (!a.given.empty()) {
    given = spec.resolve_agent(a.given);
    agents.push_back(given);
  }
  OutcomeAssignment halting;
  if (a.halt) {
    if (spec.halting().empty()) throw ConfigError("experiment '" + spec.name() + "' has no halting condition");
    for (const auto& h : spec.halting()) {
      halting[h.agent] = h.outcome;
      agents.push_back(h.agent);
    }
  }
  const std::string title_given = given.empty() ? "" : " | " + given;
  const std::string title_halt = a.halt ? " ; halt " + [&] {
    std::string s;
    for (const auto& [k, v] : halting) s += (s.empty() ? "" : ",") + k + "=" + v;
    return s;
  }() : "";

  if (!a.given_outcome.empty()) {
    if (given.empty()) throw ConfigError("--given-outcome requires --given");
    if (a.halt) throw ConfigError("--given-outcome cannot be combined with --halt");
    const auto& given_iso = spec.measurement(given);
    given_iso.outcome_index(a.given_outcome);
    const auto dist = conditional_via_renormalized_state(spec, model, target, given, a.given_outcome);
    if (a.format == "json") {
      nlohmann::json doc = {{"model", model.tag()},           {"target", target},
                            {"given", given},                 {"given_outcome", a.given_outcome},
                            {"outcomes", dist.outcomes},      {"probabilities", dist.probabilities},
                            {"route", "renormalized-state"}};
      out << dump_stable(doc) << "\n";
      return kExitOk;
    }
    std::vector<std::vector<std::string>> rows{{"target", given + "=" + a.given_outcome}};
    for (std::size_t t = 0; t < dist.outcomes.size(); ++t) {
      if (hidden_row(t, {dist.probabilities[t]})) continue;
      rows.push_back({dist.outcomes[t], fixed(dist.probabilities[t], a.digits)});
    }
    if (a.format == "csv") {
      out << render_csv(rows);
    } else {
      rows.front().front() = target;
      out << "P_" << model.tag() << "(" << target << " | " << given << "=" << a.given_outcome << ")\n"
          << render_grid(rows);
    }
    return kExitOk;
  }

  auto joint = evolve(spec, model, agents);
  if (a.halt) joint = condition_on(joint, halting);

  if (given.empty()) {
    const auto m = marginal(joint, target);
    if (a.format == "json") {
      nlohmann::json doc = {{"model", model.tag()},
                            {"target", target},
                            {"halt", halting},
                            {"outcomes", m.outcomes},
                            {"probabilities", m.probabilities}};
      out << dump_stable(doc) << "\n";
      return kExitOk;
    }
    std::vector<std::vector<std::string>> rows{{a.format == "csv" ? "target" : target, "P"}};
    for (std::size_t t = 0; t < m.outcomes.size(); ++t) {
      if (hidden_row(t, {m.probabilities[t]})) continue;
      rows.push_back({m.outcomes[t], fixed(m.probabilities[t], a.digits)});
    }
    if (a.format == "csv") {
      out << render_csv(rows);
    } else {
      out << "P_" << model.tag() << "(" << target << title_halt << ")\n" << render_grid(rows);
    }
    return kExitOk;
  }

  const auto table = conditional(joint, target, given);
  if (a.format == "json") {
    nlohmann::json columns = nlohmann::json::object();
    for (std::size_t g = 0; g < table.given_outcomes.size(); ++g) {
      columns[table.given_outcomes[g]] = table.columns[g] ? nlohmann::json(*table.columns[g]) : nlohmann::json(nullptr);
    }
    nlohmann::json doc = {{"model", table.model_tag},
                          {"target", target},
                          {"given", given},
                          {"halt", halting},
                          {"target_outcomes", table.target_outcomes},
                          {"given_outcomes", table.given_outcomes},
                          {"given_marginal", table.given_marginal},
                          {"columns", std::move(columns)}};
    out << dump_stable(doc) << "\n";
    return kExitOk;
  }

  const auto& given_iso = spec.measurement(given);
  std::vector<std::size_t> cols;
  for (std::size_t g = 0; g < table.given_outcomes.size(); ++g) {
    if (given_iso.is_completion(g) && !table.columns[g]) continue;
    cols.push_back(g);
  }
  std::vector<std::vector<std::string>> rows{{a.format == "csv" ? "target" : target}};
  for (auto g : cols) rows.front().push_back(given + "=" + table.given_outcomes[g]);
  for (std::size_t t = 0; t < table.target_outcomes.size(); ++t) {
    std::vector<double> values;
    for (auto g : cols) {
      if (table.columns[g]) values.push_back((*table.columns[g])[t]);
    }
    if (hidden_row(t, values)) continue;
    std::vector<std::string> row{table.target_outcomes[t]};
    for (auto g : cols) row.push_back(table.columns[g] ? fixed((*table.columns[g])[t], a.digits) : "n/a");
    rows.push_back(std::move(row));
  }
  if (a.format == "csv") {
    out << render_csv(rows);
  } else {
    out << "P_" << table.model_tag << "(" << target << title_given << title_halt << ")\n" << render_grid(rows);
  }
  return kExitOk;
}

struct CheckArgs {
  std::string scenario;
  std::string a_model = "ism";
  std::string f2_model = "ism";
  std::string f1_model = "clps";
  std::string w_model = "ism";
  bool no_post_select = false;
  std::string friend_model = "clps";
  std::string wigner_model = "ism";
  std::string wigner_basis = "superposition";
  std::string friend_outcome = "u";
  std::string format = "text";
};

int cmd_check(const CheckArgs& a, std::ostream& out) {
  ScenarioResult result;
  if (a.scenario == "fr") {
    const auto spec = presets::frauchiger_renner();
    FrScenarioOptions o;
    o.model_A = parse_model(a.a_model, &spec, "A");
    o.model_F2 = parse_model(a.f2_model, &spec, "F2");
    o.model_F1 = parse_model(a.f1_model, &spec, "F1");
    o.model_W = parse_model(a.w_model, &spec, "W");
    o.post_select = !a.no_post_select;
    result = run_fr_scenario(o);
  } else if (a.scenario == "deutsch") {
    const auto spec = presets::deutsch_variant();
    DeutschOptions o;
    o.friend_model = parse_model(a.friend_model, &spec, "F");
    o.wigner_model = parse_model(a.wigner_model, &spec, "W");
    if (a.wigner_basis == "product") {
      o.wigner_basis = presets::WignerBasis::kProduct;
    } else if (a.wigner_basis != "superposition") {
      throw ConfigError("unknown Wigner basis '" + a.wigner_basis + "'");
    }
    o.friend_outcome = a.friend_outcome;
    result = run_deutsch_contradiction(o);
  } else {
    throw ConfigError("unknown scenario '" + a.scenario + "' (expected fr or deutsch)");
  }
  if (a.format == "json") {
    out << dump_stable(to_json(result)) << "\n";
  } else {
    out << render_text(result);
  }
  return result.consistent() ? kExitOk : kExitContradiction;
}

struct SampleArgs {
  Source src;
  std::string model = "ism";
  std::uint64_t shots = 0;
  std::optional<std::uint64_t> seed;
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  if (!a.seed) throw ConfigError("--seed is required");
  const auto spec = load(a.src);
  const auto model = parse_model(a.model, &spec);
  const auto joint = evolve(spec, model);
  const auto draws = sample_indices(joint, *a.seed, a.shots);

  std::vector<std::uint64_t> counts(joint.size(), 0);
  for (auto i : draws) ++counts[i];
  OutcomeAssignment halting;
  for (const auto& h : spec.halting()) halting[h.agent] = h.outcome;

  out << "experiment: " << spec.name() << "\n";
  out << "model: " << model.tag() << "\n";
  out << "shots: " << a.shots << "\n";
  out << "seed: " << *a.seed << "\n";
  if (!halting.empty()) {
    std::uint64_t halted = 0;
    for (std::size_t i = 0; i < joint.size(); ++i) {
      const auto assignment = joint.assignment(i);
      bool match = std::all_of(halting.begin(), halting.end(),
                               [&](const auto& kv) { return assignment.at(kv.first) == kv.second; });
      if (match) halted += counts[i];
    }
    std::string cond;
    for (const auto& [k, v] : halting) cond += (cond.empty() ? "" : ",") + k + "=" + v;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", a.shots ? static_cast<double>(halted) / static_cast<double>(a.shots) : 0.0);
    out << "halting " << cond << ": " << halted << "/" << a.shots << " = " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.6f", joint.event_probability(halting));
    out << "halting exact: " << buf << "\n";
  }
  out << "histogram:\n";
  for (std::size_t i = 0; i < joint.size(); ++i) {
    if (!counts[i]) continue;
    std::string label;
    for (const auto& agent : joint.agents()) {
      label += (label.empty() ? "" : ",") + agent + "=" + joint.assignment(i).at(agent);
    }
    out << "  " << label << " " << counts[i] << "\n";
  }
  return kExitOk;
}

struct ExportArgs {
  Source src;
  std::string out_path;
};

int cmd_export(const ExportArgs& a, std::ostream& out) {
  const auto spec = load(a.src);
  const std::string text = dump_stable(experiment_to_json(spec)) + "\n";
  if (a.out_path.empty()) {
    out << text;
    return kExitOk;
  }
  std::ofstream f(a.out_path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + a.out_path + "'");
  f << text;
  return kExitOk;
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t key = splitmix64(seed);
  const std::uint64_t bits = splitmix64(key ^ splitmix64(counter + 0x632be59bd9b4e019ULL));
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> sample_indices(const JointDistribution& joint, std::uint64_t seed, std::uint64_t shots) {
  std::vector<double> cdf(joint.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < joint.size(); ++i) {
    acc += std::max(0.0, joint.probabilities()[i]);
    cdf[i] = acc;
  }
  std::size_t last = 0;
  for (std::size_t i = 0; i < joint.size(); ++i) {
    if (joint.probabilities()[i] > 0.0) last = i;
  }
  std::vector<std::size_t> out;
  out.reserve(shots);
  for (std::uint64_t k = 0; k < shots; ++k) {
    const double u = counter_uniform(seed, k) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = it == cdf.end() ? last : static_cast<std::size_t>(it - cdf.begin());
    out.push_back(std::min(idx, last));
  }
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wigner's-friend style experiments: distribution tables and consistency checks", "wfsim"};
  app.require_subcommand(1);
  const std::vector<std::string> formats{"text", "csv", "json"};

  TablesArgs tables;
  auto* t = app.add_subcommand("tables", "Print marginal or conditional outcome tables");
  add_source(t, tables.src);
  t->add_option("--model", tables.model, "ism | objective | clps:<agent>");
  t->add_option("--target", tables.target, "Agent whose outcome is tabulated")->required();
  t->add_option("--given", tables.given, "Conditioning agent");
  t->add_option("--given-outcome", tables.given_outcome, "Single column via the renormalized-state route");
  t->add_flag("--halt", tables.halt, "Post-select on the halting condition");
  t->add_option("--format", tables.format)->check(CLI::IsMember(formats));
  t->add_option("--digits", tables.digits, "Decimals in text and csv output")->check(CLI::Range(1, 17));

  CheckArgs check;
  auto* c = app.add_subcommand("check", "Run a contradiction scenario");
  c->add_option("scenario", check.scenario, "fr | deutsch")->required();
  c->add_option("--a-model", check.a_model);
  c->add_option("--f2-model", check.f2_model);
  c->add_option("--f1-model", check.f1_model);
  c->add_option("--w-model", check.w_model);
  c->add_flag("--no-post-select", check.no_post_select, "Analyse all rounds instead of the halting round");
  c->add_option("--friend-model", check.friend_model);
  c->add_option("--wigner-model", check.wigner_model);
  c->add_option("--wigner-basis", check.wigner_basis, "superposition | product");
  c->add_option("--friend-outcome", check.friend_outcome);
  c->add_option("--format", check.format)->check(CLI::IsMember(std::vector<std::string>{"text", "json"}));

  SampleArgs sample;
  auto* s = app.add_subcommand("sample", "Sample outcome assignments from the exact joint distribution");
  add_source(s, sample.src);
  s->add_option("--model", sample.model);
  s->add_option("--shots", sample.shots)->required();
  s->add_option("--seed", sample.seed);

  ExportArgs exp;
  auto* e = app.add_subcommand("export-preset", "Write an experiment as JSON");
  add_source(e, exp.src);
  e->add_option("--out", exp.out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*t) return cmd_tables(tables, out);
    if (*c) return cmd_check(check, out);
    if (*s) return cmd_sample(sample, out);
    if (*e) return cmd_export(exp, out);
  } catch (const ZeroProbabilityError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitImpossible;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace wfsim::cli
