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

// Stories, events and plots.
//
// An event is a time label plus one entry per schema slot. Entries are
// observed values, deduced values ("slot=v") or wildcards. A plot is a set of
// events; the empty plot stands for a story that says nothing meaningful
// about the schema. Same-time events in a plot carry no relation, so a
// Story annotates them with AND/OR groups.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "wfsim/experiment.hpp"

namespace wfsim {

struct Slot {
  std::string name;
  std::vector<std::string> alphabet;

  bool operator==(const Slot&) const = default;
};

class EventSetSchema {
 public:
  EventSetSchema() = default;
  EventSetSchema(std::vector<std::string> times, std::vector<Slot> slots);

  const std::vector<std::string>& times() const { return times_; }
  const std::vector<Slot>& slots() const { return slots_; }
  std::size_t time_index(const std::string& time) const;
  std::size_t slot_index(const std::string& slot) const;
  bool has_slot(const std::string& slot) const;
  const Slot& slot(const std::string& name) const { return slots_[slot_index(name)]; }
  /// Schema over the named slots, in schema order.
  EventSetSchema restricted(const std::vector<std::string>& keep_slots) const;

  bool operator==(const EventSetSchema&) const = default;

 private:
  std::vector<std::string> times_;
  std::vector<Slot> slots_;
};

struct Entry {
  enum class Kind { kWildcard, kValue, kDeduced };
  Kind kind = Kind::kWildcard;
  std::string value;

  static Entry wildcard() { return {}; }
  static Entry observed(std::string v) { return {Kind::kValue, std::move(v)}; }
  static Entry deduced(std::string v) { return {Kind::kDeduced, std::move(v)}; }
  bool specified() const { return kind != Kind::kWildcard; }
  /// "v", "slot=v" or "⋆".
  std::string render(const std::string& slot) const;

  bool operator==(const Entry&) const = default;
  auto operator<=>(const Entry&) const = default;
};

struct Event {
  std::string time;
  std::vector<Entry> entries;  // one per schema slot

  bool operator==(const Event&) const = default;
  auto operator<=>(const Event&) const = default;
};

class Plot {
 public:
  Plot() = default;
  /// Validates events against the schema; events are stored sorted by
  /// (time order, entries) with duplicates removed.
  Plot(EventSetSchema schema, std::vector<Event> events);

  const EventSetSchema& schema() const { return schema_; }
  const std::vector<Event>& events() const { return events_; }
  bool empty() const { return events_.empty(); }
  /// Convenience: event with the given specified entries, wildcards elsewhere.
  Event make_event(const std::string& time, const std::map<std::string, Entry>& entries) const;
  /// "(t4, ⋆, ⋆, ⋆, W=F)".
  std::string render(const Event& e) const;
  std::string render() const;

 private:
  EventSetSchema schema_;
  std::vector<Event> events_;
};

/// Biconditional agreement of two plots on shared slots.
struct CompatibilityConstraint {
  std::string name;
  std::string left_owner;
  std::string right_owner;
  EventSetSchema left_schema;
  EventSetSchema right_schema;
  std::vector<std::string> shared_slots;

  /// Checks that the shared slots exist in both schemas with equal alphabets.
  static CompatibilityConstraint make(std::string name, std::string left_owner, EventSetSchema left_schema,
                                      std::string right_owner, EventSetSchema right_schema,
                                      std::vector<std::string> shared_slots);
};

struct Violation {
  std::string time;
  std::string slot;
  std::vector<Entry> left;
  std::vector<Entry> right;
};

struct CompatibilityVerdict {
  std::vector<Violation> violations;

  bool consistent() const { return violations.empty(); }
};

enum class Relation { kAnd, kOr };

struct RelationGroup {
  Relation relation = Relation::kOr;
  std::vector<std::size_t> events;  // indices into plot.events()
};

class Story {
 public:
  /// Every pair of same-time events must be covered by exactly one group,
  /// and each group only contains events of one time.
  Story(Plot plot, std::vector<RelationGroup> groups, std::string account = {});

  const Plot& plot() const { return plot_; }
  const std::vector<RelationGroup>& groups() const { return groups_; }
  const std::string& account() const { return account_; }

 private:
  Plot plot_;
  std::vector<RelationGroup> groups_;
  std::string account_;
};

struct RelationVerdict {
  std::vector<std::string> problems;

  bool accepted() const { return problems.empty(); }
};

using MeasurementMap = std::map<std::pair<std::string, std::string>, std::string>;

/// Keeps only `keep_slots`; merges duplicates. Events whose specified entries
/// all lived in dropped slots disappear.
Plot project(const Plot& plot, const std::vector<std::string>& keep_slots);

/// For every time and shared slot on which both plots make a claim, the sets
/// of asserted values must coincide (observed and deduced values compare by
/// value). A plot silent about (time, slot) makes no claim there.
CompatibilityVerdict check_compatibility(const CompatibilityConstraint& c, const Plot& left, const Plot& right);

/// Rejects AND groups that give one measurement two different outcomes.
/// `measurements` maps (time, slot) to a measurement identity.
RelationVerdict validate_relations(const Story& story, const MeasurementMap& measurements);

struct SlotValue {
  std::string time;
  std::string slot;
  std::string value;
};

struct PlotRequest {
  std::vector<SlotValue> observed;
  std::vector<SlotValue> deductions;
  /// (time, slot) pairs to expand into OR alternatives when the slot's
  /// conditional distribution (given the observations) is not degenerate.
  std::vector<std::pair<std::string, std::string>> alternatives;
  /// Slot -> agent of the joint distribution; identity when absent.
  std::map<std::string, std::string> slot_agents;
};

Plot plot_from_distribution(const EventSetSchema& schema, const JointDistribution& joint, const PlotRequest& request);

nlohmann::json to_json(const EventSetSchema& schema);
nlohmann::json to_json(const Plot& plot);
nlohmann::json to_json(const CompatibilityVerdict& verdict);
Plot plot_from_json(const nlohmann::json& doc);

}  // namespace wfsim
