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

#include "wfsim/deduction.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

namespace wfsim {

namespace {

using nlohmann::json;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string time_label(int t) { return "t" + std::to_string(t); }

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string render_assignment(const OutcomeAssignment& a) {
  std::vector<std::string> parts;
  for (const auto& [agent, outcome] : a) parts.push_back(agent + "=" + outcome);
  return join(parts, ", ");
}

struct Claim {
  std::string time;
  std::string slot;
  std::string value;
  bool deduced = false;
};

// Same-time claims on different slots share an event; several values for one
// (time, slot) become alternative events.
Plot assemble(const EventSetSchema& schema, const std::vector<Claim>& claims) {
  std::map<std::size_t, std::map<std::string, std::vector<Entry>>> by_time;
  for (const auto& c : claims) {
    auto& entries = by_time[schema.time_index(c.time)][c.slot];
    Entry e = c.deduced ? Entry::deduced(c.value) : Entry::observed(c.value);
    if (std::find(entries.begin(), entries.end(), e) == entries.end()) entries.push_back(std::move(e));
  }
  Plot scaffold(schema, {});
  std::vector<Event> events;
  for (const auto& [ti, slots] : by_time) {
    std::vector<std::map<std::string, Entry>> variants(1);
    for (const auto& [slot, entries] : slots) {
      std::vector<std::map<std::string, Entry>> next;
      for (const auto& base : variants) {
        for (const auto& e : entries) {
          auto v = base;
          v[slot] = e;
          next.push_back(std::move(v));
        }
      }
      variants = std::move(next);
    }
    for (const auto& v : variants) events.push_back(scaffold.make_event(schema.times()[ti], v));
  }
  return Plot(schema, std::move(events));
}

std::vector<std::string> schema_times(const ExperimentSpec& spec) {
  int last = 0;
  for (const auto& s : spec.steps()) last = std::max(last, s.time);
  for (const auto& r : spec.reports()) last = std::max(last, r.time);
  std::vector<std::string> times;
  for (int t = 0; t <= last; ++t) times.push_back(time_label(t));
  return times;
}

std::string describe_table(const ConditionalTable& table) {
  std::vector<std::string> cols;
  for (std::size_t g = 0; g < table.given_outcomes.size(); ++g) {
    const auto& col = table.columns[g];
    if (!col) {
      cols.push_back(table.given + "=" + table.given_outcomes[g] + ": n/a");
      continue;
    }
    std::vector<std::string> cells;
    for (std::size_t t = 0; t < table.target_outcomes.size(); ++t) {
      if ((*col)[t] > tol::kZeroBranch) cells.push_back(table.target_outcomes[t] + " " + num((*col)[t]));
    }
    cols.push_back(table.given + "=" + table.given_outcomes[g] + ": " + join(cells, ", "));
  }
  return table.given + " about " + table.target + " under " + table.model_tag + ": " + join(cols, "; ");
}

const Event& find_event(const Plot& plot, const std::string& time, const std::string& slot, const Entry& entry) {
  const auto pos = plot.schema().slot_index(slot);
  for (const auto& e : plot.events()) {
    if (e.time == time && e.entries[pos] == entry) return e;
  }
  throw InvariantError("no event carries " + entry.render(slot) + " at " + time);
}

// Fills the report for the first violated constraint, if any.
void detect_contradiction(ScenarioResult& r, const OutcomeAssignment& post_selection, double p_post) {
  for (const auto& check : r.checks) {
    if (check.verdict.consistent()) continue;
    const auto& v = check.verdict.violations.front();
    const auto& left = r.plots.at(check.constraint.left_owner);
    const auto& right = r.plots.at(check.constraint.right_owner);
    ContradictionReport rep;
    rep.scenario = r.scenario;
    rep.post_selection = post_selection;
    rep.post_selection_probability = p_post;
    rep.constraint = check.constraint;
    rep.violation = v;
    rep.left_event = find_event(left, v.time, v.slot, v.left.front());
    rep.right_event = find_event(right, v.time, v.slot, v.right.front());
    rep.left_rendered = left.render(rep.left_event);
    rep.right_rendered = right.render(rep.right_event);
    rep.chain = r.chain;
    for (const auto& link : r.chain.links) {
      if (link.reasoner == check.constraint.left_owner && link.target == v.slot) rep.offending_link = link;
    }
    if (rep.offending_link) rep.offending_model = rep.offending_link->model_tag;
    rep.derivations = r.derivations;
    r.contradiction = std::move(rep);
    return;
  }
}

}  // namespace

std::string DeductionRule::render() const {
  return reasoner + ":" + given_outcome + " ⊢ " + target + "=" + deduced + " [" + model_tag + "]";
}

std::vector<DeductionRule> certainty_deductions(const ConditionalTable& table) {
  std::vector<DeductionRule> rules;
  for (std::size_t g = 0; g < table.given_outcomes.size(); ++g) {
    const auto& col = table.columns[g];
    if (!col) continue;
    for (std::size_t t = 0; t < table.target_outcomes.size(); ++t) {
      if ((*col)[t] >= kCertaintyThreshold) {
        rules.push_back({table.given, table.given_outcomes[g], table.target, table.target_outcomes[t], table.model_tag,
                         (*col)[t]});
        break;
      }
    }
  }
  return rules;
}

std::string DeductionChain::render() const {
  std::string out = start.agent + ":" + start.outcome;
  for (const auto& l : links) out += " ⊢ " + l.target + "=" + l.deduced + " [" + l.model_tag + "]";
  return out;
}

DeductionChain chain(const std::vector<DeductionRule>& rules, const AgentOutcome& start) {
  DeductionChain c{start, {}};
  std::set<std::string> visited{start.agent};
  AgentOutcome current = start;
  for (;;) {
    auto it = std::find_if(rules.begin(), rules.end(), [&](const DeductionRule& r) {
      return r.reasoner == current.agent && r.given_outcome == current.outcome;
    });
    if (it == rules.end()) return c;
    if (it->certainty < kCertaintyThreshold) throw InvariantError("rule " + it->render() + " is not a certainty");
    if (!visited.insert(it->target).second) {
      throw InvariantError("deduction cycle: " + c.render() + " ⊢ " + it->target + "=" + it->deduced);
    }
    c.links.push_back(*it);
    current = {it->target, it->deduced};
  }
}

ScenarioResult run_fr_scenario(const FrScenarioOptions& options) {
  const auto spec = presets::frauchiger_renner();
  ScenarioResult r;
  r.scenario = "frauchiger-renner";

  std::vector<Slot> slots;
  for (const auto& a : spec.agents()) slots.push_back({a, spec.measurement(a).outcome_labels()});
  const EventSetSchema schema(schema_times(spec), slots);
  auto t_of = [&](const std::string& agent) { return time_label(spec.time_of(agent)); };

  struct Reasoning {
    std::string reasoner;
    std::string target;
    CollapseModel model;
  };
  const std::vector<Reasoning> reasonings{{"A", "F2", options.model_A},
                                          {"F2", "F1", options.model_F2},
                                          {"F1", "W", options.model_F1},
                                          {"W", "A", options.model_W}};
  std::map<std::string, ConditionalTable> tables;
  for (const auto& q : reasonings) {
    auto table = conditional(evolve(spec, q.model, std::vector<std::string>{q.reasoner, q.target}), q.target,
                             q.reasoner);
    r.derivations.push_back(describe_table(table));
    for (auto& rule : certainty_deductions(table)) r.rules.push_back(std::move(rule));
    tables.emplace(q.reasoner, std::move(table));
  }

  std::map<std::string, std::vector<Claim>> claims;
  OutcomeAssignment post;
  double p_post = 1.0;
  if (options.post_select) {
    for (const auto& h : spec.halting()) post[h.agent] = h.outcome;
    p_post = evolve(spec, CollapseModel::no_collapse()).event_probability(post);
    if (!(p_post > tol::kZeroBranch)) throw ZeroProbabilityError("halting round has probability 0");
    r.derivations.push_back("halting round " + render_assignment(post) + " has probability " + num(p_post) +
                            " under ism");

    const auto& start = spec.halting().front();
    r.chain = chain(r.rules, start);
    OutcomeAssignment seen = post;
    for (const auto& link : r.chain.links) seen.emplace(link.target, link.deduced);
    for (const auto& q : reasonings) {
      auto it = seen.find(q.reasoner);
      if (it != seen.end()) claims[q.reasoner].push_back({t_of(q.reasoner), q.reasoner, it->second, false});
    }
    for (const auto& link : r.chain.links) {
      claims[link.reasoner].push_back({t_of(link.target), link.target, link.deduced, true});
    }
    // A announces the result to W.
    claims["W"].push_back({t_of("A"), "A", post.at("A"), true});
  } else {
    for (const auto& q : reasonings) {
      const auto& table = tables.at(q.reasoner);
      std::set<std::string> deduced;
      for (std::size_t g = 0; g < table.given_outcomes.size(); ++g) {
        if (!(table.given_marginal[g] > tol::kZeroBranch)) continue;
        claims[q.reasoner].push_back({t_of(q.reasoner), q.reasoner, table.given_outcomes[g], false});
        for (std::size_t t = 0; t < table.target_outcomes.size(); ++t) {
          if ((*table.columns[g])[t] > tol::kZeroBranch) deduced.insert(table.target_outcomes[t]);
        }
      }
      for (const auto& d : deduced) claims[q.reasoner].push_back({t_of(q.target), q.target, d, true});
    }
  }

  for (const auto& q : reasonings) r.plots.emplace(q.reasoner, assemble(schema, claims[q.reasoner]));
  for (const auto& q : reasonings) {
    auto c = CompatibilityConstraint::make(q.reasoner + "|" + q.target, q.reasoner, schema, q.target, schema,
                                           {q.target});
    auto verdict = check_compatibility(c, r.plots.at(q.reasoner), r.plots.at(q.target));
    r.checks.push_back({std::move(c), std::move(verdict)});
  }
  detect_contradiction(r, post, p_post);
  return r;
}

ScenarioResult run_fr_contradiction(const CollapseModel& model_for_F1) {
  FrScenarioOptions options;
  options.model_F1 = model_for_F1;
  return run_fr_scenario(options);
}

ScenarioResult run_deutsch_contradiction(const DeutschOptions& options) {
  const bool superposition = options.wigner_basis == presets::WignerBasis::kSuperposition;
  const auto spec = superposition ? presets::deutsch_variant() : presets::wigner_friend(presets::WignerBasis::kProduct);
  ScenarioResult r;
  r.scenario = superposition ? "deutsch" : "deutsch-product-basis";

  const std::string fr = "F";
  const std::string wi = "W";
  const auto& friend_iso = spec.measurement(fr);
  const auto& wigner_iso = spec.measurement(wi);
  const std::string& fo = options.friend_outcome;
  friend_iso.outcome_index(fo);

  std::vector<Slot> slots{{"z", friend_iso.outcome_labels()}, {"w", wigner_iso.outcome_labels()}};
  for (const auto& rep : spec.reports()) slots.push_back({rep.name, rep.alphabet});
  const EventSetSchema schema(schema_times(spec), slots);
  const std::string tf = time_label(spec.time_of(fr));
  const std::string tw = time_label(spec.time_of(wi));
  const std::vector<std::string> both{fr, wi};
  std::map<std::string, std::string> slot_of{{fr, "z"}, {wi, "w"}};

  std::vector<Claim> friend_claims{{tf, "z", fo, false}};
  std::vector<Claim> wigner_claims;

  const auto wigner_joint = evolve(spec, options.wigner_model, both);
  std::optional<std::string> wo;
  for (const auto& w : wigner_iso.outcome_labels()) {
    if (wigner_joint.event_probability({{fr, fo}, {wi, w}}) > tol::kZeroBranch) {
      wo = w;
      break;
    }
  }
  if (!wo) throw ZeroProbabilityError("no outcome of W is compatible with F=" + fo);
  wigner_claims.push_back({tw, "w", *wo, false});
  r.derivations.push_back("W observes " + *wo + " in a round where F obtained " + fo);

  const auto friend_table = conditional(evolve(spec, options.friend_model, both), wi, fr);
  const auto wigner_table = conditional(wigner_joint, fr, wi);
  r.derivations.push_back(describe_table(friend_table));
  r.derivations.push_back(describe_table(wigner_table));
  for (const auto& table : {friend_table, wigner_table}) {
    for (auto& rule : certainty_deductions(table)) r.rules.push_back(std::move(rule));
  }
  for (const auto& rule : r.rules) {
    const bool friend_rule = rule.reasoner == fr && rule.given_outcome == fo;
    const bool wigner_rule = rule.reasoner == wi && rule.given_outcome == *wo;
    if (!friend_rule && !wigner_rule) continue;
    auto& target_claims = friend_rule ? friend_claims : wigner_claims;
    target_claims.push_back({time_label(spec.time_of(rule.target)), slot_of.at(rule.target), rule.deduced, true});
    if (friend_rule) r.chain.links.push_back(rule);
  }
  r.chain.start = {fr, fo};

  std::string offending_model;
  for (const auto& rep : spec.reports()) {
    const std::string t = time_label(rep.time);
    if (rep.name == "x") {
      friend_claims.push_back({t, "x", "0", false});
      wigner_claims.push_back({t, "x", "0", true});
      r.derivations.push_back("F reports x=0: a definite outcome was observed");
    } else if (rep.name == "y") {
      const std::string& minus = wigner_iso.outcome_labels().at(1);
      const double p_friend =
          options.friend_model.collapses(fr)
              ? conditional_via_renormalized_state(spec, options.friend_model, wi, fr, fo).at(minus)
              : marginal(evolve(spec, options.friend_model, std::vector<std::string>{wi}), wi).at(minus);
      const double p_wigner = marginal(evolve(spec, options.wigner_model, std::vector<std::string>{wi}), wi).at(minus);
      const std::string y_friend = p_friend > tol::kZeroBranch ? "1" : "0";
      const std::string y_wigner = p_wigner > tol::kZeroBranch ? "1" : "0";
      friend_claims.push_back({t, "y", y_friend, true});
      wigner_claims.push_back({t, "y", y_wigner, false});
      r.derivations.push_back("F: P_" + options.friend_model.tag() + "(W=" + minus +
                              (options.friend_model.collapses(fr) ? " | F=" + fo : std::string()) +
                              ") = " + num(p_friend) + ", so y=" + y_friend);
      r.derivations.push_back("W: P_" + options.wigner_model.tag() + "(W=" + minus + ") = " + num(p_wigner) +
                              ", so y=" + y_wigner);
      offending_model = options.friend_model.tag();
    }
  }

  r.plots.emplace(fr, assemble(schema, friend_claims));
  r.plots.emplace(wi, assemble(schema, wigner_claims));
  std::vector<std::string> shared;
  for (const auto& s : slots) shared.push_back(s.name);
  auto c = CompatibilityConstraint::make(fr + "|" + wi, fr, schema, wi, schema, shared);
  auto verdict = check_compatibility(c, r.plots.at(fr), r.plots.at(wi));
  r.checks.push_back({std::move(c), std::move(verdict)});
  detect_contradiction(r, {}, 1.0);
  if (r.contradiction && !r.contradiction->offending_link) r.contradiction->offending_model = offending_model;
  return r;
}

json to_json(const DeductionRule& rule) {
  return {{"reasoner", rule.reasoner}, {"given", rule.given_outcome}, {"target", rule.target},
          {"deduced", rule.deduced},   {"model", rule.model_tag},     {"certainty", rule.certainty}};
}

json to_json(const DeductionChain& c) {
  json links = json::array();
  for (const auto& l : c.links) links.push_back(to_json(l));
  return {{"start", {{"agent", c.start.agent}, {"outcome", c.start.outcome}}},
          {"links", std::move(links)},
          {"text", c.render()}};
}

json to_json(const ContradictionReport& rep) {
  json clash = {{"time", rep.violation.time},
                {"slot", rep.violation.slot},
                {"left", {{"owner", rep.constraint.left_owner}, {"event", rep.left_rendered}}},
                {"right", {{"owner", rep.constraint.right_owner}, {"event", rep.right_rendered}}}};
  return {{"scenario", rep.scenario},
          {"post_selection", rep.post_selection},
          {"post_selection_probability", rep.post_selection_probability},
          {"constraint", {{"name", rep.constraint.name}, {"shared_slots", rep.constraint.shared_slots}}},
          {"clash", std::move(clash)},
          {"chain", to_json(rep.chain)},
          {"offending_link", rep.offending_link ? to_json(*rep.offending_link) : json(nullptr)},
          {"offending_model", rep.offending_model},
          {"derivations", rep.derivations}};
}

json to_json(const ScenarioResult& r) {
  json plots = json::object();
  for (const auto& [owner, plot] : r.plots) plots[owner] = to_json(plot);
  json checks = json::array();
  for (const auto& c : r.checks) {
    json verdict = to_json(c.verdict);
    verdict["constraint"] = c.constraint.name;
    checks.push_back(std::move(verdict));
  }
  json rules = json::array();
  for (const auto& rule : r.rules) rules.push_back(to_json(rule));
  return {{"scenario", r.scenario},
          {"consistent", r.consistent()},
          {"rules", std::move(rules)},
          {"chain", to_json(r.chain)},
          {"plots", std::move(plots)},
          {"checks", std::move(checks)},
          {"derivations", r.derivations},
          {"contradiction", r.contradiction ? to_json(*r.contradiction) : json(nullptr)}};
}

std::string render_text(const ContradictionReport& rep) {
  std::ostringstream out;
  out << "CONTRADICTION in " << rep.scenario << "\n";
  if (!rep.post_selection.empty()) {
    out << "post-selection: " << render_assignment(rep.post_selection) << " (p = " << num(rep.post_selection_probability)
        << ")\n";
  }
  if (!rep.chain.empty()) out << "chain: " << rep.chain.render() << "\n";
  out << "constraint " << rep.constraint.name << " on {" << join(rep.constraint.shared_slots, ", ") << "}\n";
  out << "  plot of " << rep.constraint.left_owner << ": " << rep.left_rendered << "\n";
  out << "  plot of " << rep.constraint.right_owner << ": " << rep.right_rendered << "\n";
  std::vector<std::string> lv;
  std::vector<std::string> rv;
  for (const auto& e : rep.violation.left) lv.push_back(e.render(rep.violation.slot));
  for (const auto& e : rep.violation.right) rv.push_back(e.render(rep.violation.slot));
  out << "  clash at (" << rep.violation.time << ", " << rep.violation.slot << "): " << join(lv, " | ") << " vs "
      << join(rv, " | ") << "\n";
  if (rep.offending_link) out << "offending link: " << rep.offending_link->render() << "\n";
  if (!rep.offending_model.empty()) out << "offending model: " << rep.offending_model << "\n";
  out << "derivations:\n";
  for (const auto& d : rep.derivations) out << "  " << d << "\n";
  return out.str();
}

std::string render_text(const ScenarioResult& r) {
  if (r.contradiction) return render_text(*r.contradiction);
  std::ostringstream out;
  out << "CONSISTENT " << r.scenario << "\n";
  if (!r.chain.empty()) out << "chain: " << r.chain.render() << "\n";
  for (const auto& [owner, plot] : r.plots) out << "plot of " << owner << ": " << plot.render() << "\n";
  out << "derivations:\n";
  for (const auto& d : r.derivations) out << "  " << d << "\n";
  return out.str();
}

}  // namespace wfsim
