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

#include "wfsim/storyplot.hpp"

#include <algorithm>
#include <set>

namespace wfsim {

namespace {

using nlohmann::json;

json entry_to_json(const Entry& e) {
  switch (e.kind) {
    case Entry::Kind::kWildcard:
      return "wild";
    case Entry::Kind::kValue:
      return json{{"v", e.value}};
    case Entry::Kind::kDeduced:
      return json{{"deduced", e.value}};
  }
  return "wild";
}

Entry entry_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "wild") return Entry::wildcard();
  if (j.is_object() && j.contains("v")) return Entry::observed(j.at("v").get<std::string>());
  if (j.is_object() && j.contains("deduced")) return Entry::deduced(j.at("deduced").get<std::string>());
  throw std::invalid_argument("malformed plot entry " + j.dump());
}

std::vector<Entry> unique_specified(const std::vector<Entry>& entries) {
  std::vector<Entry> out;
  for (const auto& e : entries) {
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

EventSetSchema::EventSetSchema(std::vector<std::string> times, std::vector<Slot> slots)
    : times_(std::move(times)), slots_(std::move(slots)) {
  std::set<std::string> seen_times(times_.begin(), times_.end());
  if (seen_times.size() != times_.size()) throw LabelError("duplicate time labels in schema");
  std::set<std::string> seen_slots;
  for (const auto& s : slots_) {
    if (!seen_slots.insert(s.name).second) throw LabelError("duplicate slot '" + s.name + "'");
    if (s.alphabet.empty()) throw InvariantError("slot '" + s.name + "' has an empty alphabet");
    std::set<std::string> letters(s.alphabet.begin(), s.alphabet.end());
    if (letters.size() != s.alphabet.size()) throw LabelError("slot '" + s.name + "' repeats a value");
  }
}

std::size_t EventSetSchema::time_index(const std::string& time) const {
  auto it = std::find(times_.begin(), times_.end(), time);
  if (it == times_.end()) throw LabelError("unknown time '" + time + "'");
  return static_cast<std::size_t>(it - times_.begin());
}

std::size_t EventSetSchema::slot_index(const std::string& slot) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i].name == slot) return i;
  }
  throw LabelError("unknown slot '" + slot + "'");
}

bool EventSetSchema::has_slot(const std::string& slot) const {
  return std::any_of(slots_.begin(), slots_.end(), [&](const Slot& s) { return s.name == slot; });
}

EventSetSchema EventSetSchema::restricted(const std::vector<std::string>& keep_slots) const {
  for (const auto& s : keep_slots) slot_index(s);
  std::vector<Slot> kept;
  for (const auto& s : slots_) {
    if (std::find(keep_slots.begin(), keep_slots.end(), s.name) != keep_slots.end()) kept.push_back(s);
  }
  return EventSetSchema(times_, std::move(kept));
}

std::string Entry::render(const std::string& slot) const {
  switch (kind) {
    case Kind::kWildcard:
      return "⋆";
    case Kind::kValue:
      return value;
    case Kind::kDeduced:
      return slot + "=" + value;
  }
  return "⋆";
}

Plot::Plot(EventSetSchema schema, std::vector<Event> events) : schema_(std::move(schema)) {
  for (const auto& e : events) {
    schema_.time_index(e.time);
    if (e.entries.size() != schema_.slots().size()) {
      throw InvariantError("event at " + e.time + " does not have one entry per slot");
    }
    for (std::size_t i = 0; i < e.entries.size(); ++i) {
      const auto& entry = e.entries[i];
      if (!entry.specified()) continue;
      const auto& alphabet = schema_.slots()[i].alphabet;
      if (std::find(alphabet.begin(), alphabet.end(), entry.value) == alphabet.end()) {
        throw LabelError("value '" + entry.value + "' is not in the alphabet of slot '" + schema_.slots()[i].name +
                         "'");
      }
    }
  }
  std::sort(events.begin(), events.end(), [&](const Event& a, const Event& b) {
    const auto ta = schema_.time_index(a.time);
    const auto tb = schema_.time_index(b.time);
    if (ta != tb) return ta < tb;
    return a.entries < b.entries;
  });
  events.erase(std::unique(events.begin(), events.end()), events.end());
  events_ = std::move(events);
}

Event Plot::make_event(const std::string& time, const std::map<std::string, Entry>& entries) const {
  Event e{time, std::vector<Entry>(schema_.slots().size())};
  for (const auto& [slot, entry] : entries) e.entries[schema_.slot_index(slot)] = entry;
  return e;
}

std::string Plot::render(const Event& e) const {
  std::string out = "(" + e.time;
  for (std::size_t i = 0; i < e.entries.size(); ++i) {
    out += ", " + e.entries[i].render(schema_.slots()[i].name);
  }
  return out + ")";
}

std::string Plot::render() const {
  std::string out = "{";
  for (std::size_t i = 0; i < events_.size(); ++i) {
    if (i) out += ", ";
    out += render(events_[i]);
  }
  return out + "}";
}

CompatibilityConstraint CompatibilityConstraint::make(std::string name, std::string left_owner,
                                                      EventSetSchema left_schema, std::string right_owner,
                                                      EventSetSchema right_schema,
                                                      std::vector<std::string> shared_slots) {
  for (const auto& s : shared_slots) {
    if (!(left_schema.slot(s) == right_schema.slot(s))) {
      throw LabelError("shared slot '" + s + "' has different alphabets on the two sides");
    }
  }
  return {std::move(name),        std::move(left_owner),  std::move(right_owner),
          std::move(left_schema), std::move(right_schema), std::move(shared_slots)};
}

Plot project(const Plot& plot, const std::vector<std::string>& keep_slots) {
  const auto& schema = plot.schema();
  auto projected_schema = schema.restricted(keep_slots);
  std::vector<std::size_t> kept_positions;
  for (const auto& s : projected_schema.slots()) kept_positions.push_back(schema.slot_index(s.name));

  std::vector<Event> events;
  for (const auto& e : plot.events()) {
    Event p{e.time, {}};
    for (auto pos : kept_positions) p.entries.push_back(e.entries[pos]);
    const bool had_info = std::any_of(e.entries.begin(), e.entries.end(), [](const Entry& x) { return x.specified(); });
    const bool keeps_info = std::any_of(p.entries.begin(), p.entries.end(), [](const Entry& x) { return x.specified(); });
    if (had_info && !keeps_info) continue;
    events.push_back(std::move(p));
  }
  return Plot(std::move(projected_schema), std::move(events));
}

CompatibilityVerdict check_compatibility(const CompatibilityConstraint& c, const Plot& left, const Plot& right) {
  if (!(left.schema() == c.left_schema) || !(right.schema() == c.right_schema)) {
    throw LabelError("plot schema does not match constraint '" + c.name + "'");
  }
  std::vector<std::string> times = c.left_schema.times();
  for (const auto& t : c.right_schema.times()) {
    if (std::find(times.begin(), times.end(), t) == times.end()) times.push_back(t);
  }

  auto claims = [](const Plot& plot, const std::string& time, const std::string& slot) {
    std::vector<Entry> out;
    if (std::find(plot.schema().times().begin(), plot.schema().times().end(), time) == plot.schema().times().end()) {
      return out;
    }
    const auto pos = plot.schema().slot_index(slot);
    for (const auto& e : plot.events()) {
      if (e.time == time && e.entries[pos].specified()) out.push_back(e.entries[pos]);
    }
    return unique_specified(out);
  };
  auto values = [](const std::vector<Entry>& entries) {
    std::set<std::string> out;
    for (const auto& e : entries) out.insert(e.value);
    return out;
  };

  CompatibilityVerdict verdict;
  for (const auto& t : times) {
    for (const auto& slot : c.shared_slots) {
      auto l = claims(left, t, slot);
      auto r = claims(right, t, slot);
      if (l.empty() || r.empty()) continue;
      if (values(l) != values(r)) verdict.violations.push_back({t, slot, std::move(l), std::move(r)});
    }
  }
  return verdict;
}

Story::Story(Plot plot, std::vector<RelationGroup> groups, std::string account)
    : plot_(std::move(plot)), groups_(std::move(groups)), account_(std::move(account)) {
  const auto& events = plot_.events();
  const std::size_t n = events.size();
  std::vector<std::vector<int>> cover(n, std::vector<int>(n, 0));
  for (const auto& g : groups_) {
    std::set<std::size_t> members(g.events.begin(), g.events.end());
    if (members.size() != g.events.size()) throw InvariantError("relation group lists an event twice");
    for (auto i : g.events) {
      if (i >= n) throw InvariantError("relation group refers to a missing event");
      if (events[i].time != events[g.events.front()].time) {
        throw InvariantError("relation group mixes events of different times");
      }
    }
    for (auto i : g.events) {
      for (auto j : g.events) {
        if (i < j) ++cover[i][j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (events[i].time != events[j].time) continue;
      if (cover[i][j] != 1) {
        throw InvariantError("same-time events " + plot_.render(events[i]) + " and " + plot_.render(events[j]) +
                             " must belong to exactly one relation group");
      }
    }
  }
}

RelationVerdict validate_relations(const Story& story, const MeasurementMap& measurements) {
  const auto& plot = story.plot();
  const auto& slots = plot.schema().slots();
  auto measurement_of = [&](const std::string& time, std::size_t slot) -> const std::string& {
    auto it = measurements.find({time, slots[slot].name});
    if (it == measurements.end()) {
      throw LabelError("no measurement mapped for (" + time + ", " + slots[slot].name + ")");
    }
    return it->second;
  };

  RelationVerdict verdict;
  for (const auto& g : story.groups()) {
    for (auto i : g.events) {
      const auto& e = plot.events()[i];
      for (std::size_t s = 0; s < e.entries.size(); ++s) {
        if (e.entries[s].specified()) measurement_of(e.time, s);
      }
    }
    if (g.relation != Relation::kAnd) continue;
    for (std::size_t a = 0; a < g.events.size(); ++a) {
      for (std::size_t b = a + 1; b < g.events.size(); ++b) {
        const auto& ea = plot.events()[g.events[a]];
        const auto& eb = plot.events()[g.events[b]];
        for (std::size_t sa = 0; sa < ea.entries.size(); ++sa) {
          if (!ea.entries[sa].specified()) continue;
          for (std::size_t sb = 0; sb < eb.entries.size(); ++sb) {
            if (!eb.entries[sb].specified()) continue;
            if (measurement_of(ea.time, sa) != measurement_of(eb.time, sb)) continue;
            if (ea.entries[sa].value == eb.entries[sb].value) continue;
            verdict.problems.push_back("AND joins two outcomes of measurement '" + measurement_of(ea.time, sa) +
                                       "': " + plot.render(ea) + " and " + plot.render(eb));
          }
        }
      }
    }
  }
  return verdict;
}

Plot plot_from_distribution(const EventSetSchema& schema, const JointDistribution& joint, const PlotRequest& request) {
  auto agent_for = [&](const std::string& slot) {
    schema.slot_index(slot);
    auto it = request.slot_agents.find(slot);
    return it == request.slot_agents.end() ? slot : it->second;
  };

  OutcomeAssignment observed;
  for (const auto& o : request.observed) observed[agent_for(o.slot)] = o.value;
  const double p_observed = observed.empty() ? 1.0 : joint.event_probability(observed);
  if (!(p_observed > tol::kZeroBranch)) {
    throw ZeroProbabilityError("observed outcomes have probability 0 under " + joint.model_tag());
  }

  std::map<std::string, std::map<std::string, Entry>> by_time;
  auto put = [&](const SlotValue& sv, Entry entry) {
    schema.time_index(sv.time);
    auto& slot_entry = by_time[sv.time][sv.slot];
    if (slot_entry.specified() && !(slot_entry == entry)) {
      throw InvariantError("conflicting entries for (" + sv.time + ", " + sv.slot + ")");
    }
    slot_entry = std::move(entry);
  };
  for (const auto& o : request.observed) put(o, Entry::observed(o.value));
  for (const auto& d : request.deductions) put(d, Entry::deduced(d.value));

  Plot scaffold(schema, {});
  std::vector<Event> events;
  std::set<std::string> expanded_times;
  std::map<std::string, std::vector<std::pair<std::string, std::vector<std::string>>>> alternatives;
  for (const auto& [time, slot] : request.alternatives) {
    schema.time_index(time);
    const auto agent = agent_for(slot);
    std::vector<std::string> support;
    for (const auto& outcome : joint.outcomes(agent)) {
      auto event = observed;
      event[agent] = outcome;
      if (observed.count(agent) && observed.at(agent) != outcome) continue;
      if (joint.event_probability(event) / p_observed > tol::kZeroBranch) support.push_back(outcome);
    }
    if (support.size() >= 2) alternatives[time].emplace_back(slot, std::move(support));
  }

  std::set<std::string> times;
  for (const auto& [t, _] : by_time) times.insert(t);
  for (const auto& [t, _] : alternatives) times.insert(t);
  for (const auto& t : times) {
    std::vector<std::map<std::string, Entry>> variants{by_time.count(t) ? by_time.at(t)
                                                                        : std::map<std::string, Entry>{}};
    if (alternatives.count(t)) {
      for (const auto& [slot, support] : alternatives.at(t)) {
        std::vector<std::map<std::string, Entry>> next;
        for (const auto& base : variants) {
          for (const auto& v : support) {
            auto e = base;
            e[slot] = Entry::observed(v);
            next.push_back(std::move(e));
          }
        }
        variants = std::move(next);
      }
    }
    for (const auto& v : variants) events.push_back(scaffold.make_event(t, v));
  }
  return Plot(schema, std::move(events));
}

nlohmann::json to_json(const EventSetSchema& schema) {
  json slots = json::array();
  for (const auto& s : schema.slots()) slots.push_back({{"name", s.name}, {"alphabet", s.alphabet}});
  return {{"times", schema.times()}, {"slots", std::move(slots)}};
}

nlohmann::json to_json(const Plot& plot) {
  json events = json::array();
  for (const auto& e : plot.events()) {
    json entries = json::object();
    for (std::size_t i = 0; i < e.entries.size(); ++i) {
      entries[plot.schema().slots()[i].name] = entry_to_json(e.entries[i]);
    }
    events.push_back({{"t", e.time}, {"entries", std::move(entries)}});
  }
  return {{"schema", to_json(plot.schema())}, {"events", std::move(events)}};
}

nlohmann::json to_json(const CompatibilityVerdict& verdict) {
  json violations = json::array();
  for (const auto& v : verdict.violations) {
    json left = json::array();
    json right = json::array();
    for (const auto& e : v.left) left.push_back(entry_to_json(e));
    for (const auto& e : v.right) right.push_back(entry_to_json(e));
    violations.push_back({{"time", v.time}, {"slot", v.slot}, {"left", std::move(left)}, {"right", std::move(right)}});
  }
  return {{"consistent", verdict.consistent()}, {"violations", std::move(violations)}};
}

Plot plot_from_json(const nlohmann::json& doc) {
  const auto& s = doc.at("schema");
  std::vector<Slot> slots;
  for (const auto& slot : s.at("slots")) {
    slots.push_back({slot.at("name").get<std::string>(), slot.at("alphabet").get<std::vector<std::string>>()});
  }
  EventSetSchema schema(s.at("times").get<std::vector<std::string>>(), std::move(slots));
  Plot scaffold(schema, {});
  std::vector<Event> events;
  for (const auto& e : doc.at("events")) {
    std::map<std::string, Entry> entries;
    for (auto it = e.at("entries").begin(); it != e.at("entries").end(); ++it) {
      entries[it.key()] = entry_from_json(it.value());
    }
    events.push_back(scaffold.make_event(e.at("t").get<std::string>(), entries));
  }
  return Plot(std::move(schema), std::move(events));
}

}  // namespace wfsim
