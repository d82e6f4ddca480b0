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

#include "wfsim/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace wfsim {

namespace {

using nlohmann::json;

json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError("complex numbers must be [re, im] pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v[i]));
  return out;
}

Vector vector_from_json(const json& j, std::size_t dim) {
  if (!j.is_array() || j.size() != dim) {
    throw ConfigError("expected " + std::to_string(dim) + " coefficients, got " + j.dump());
  }
  Vector v(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) v[static_cast<Eigen::Index>(i)] = complex_from_json(j[i]);
  return v;
}

json subsystem_to_json(const Subsystem& s) {
  return json{{"label", s.label}, {"dim", s.dim()}, {"basis_labels", s.basis_labels}};
}

Subsystem subsystem_from_json(const json& j) {
  Subsystem s{j.at("label").get<std::string>(), j.at("basis_labels").get<std::vector<std::string>>()};
  if (j.contains("dim") && j.at("dim").get<std::size_t>() != s.dim()) {
    throw ConfigError("subsystem '" + s.label + "': dim does not match the number of basis labels");
  }
  return s;
}

SubsystemRegistry targets_registry(const SubsystemRegistry& running, const std::vector<std::string>& targets) {
  std::vector<Subsystem> subs;
  for (const auto& t : targets) {
    if (!running.contains(t)) throw ConfigError("step targets unknown subsystem '" + t + "'");
    subs.push_back(running.at(t));
  }
  return SubsystemRegistry(std::move(subs));
}

void write_number(std::ostream& out, const json& j) {
  if (j.is_number_float()) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
    out << buf;
  } else {
    out << j.dump();
  }
}

bool is_scalar(const json& j) { return !j.is_array() && !j.is_object(); }

bool is_flat(const json& j) {
  if (!j.is_array()) return false;
  for (const auto& e : j) {
    if (!is_scalar(e) && !(e.is_array() && std::all_of(e.begin(), e.end(), is_scalar))) return false;
  }
  return true;
}

void write_stable(std::ostream& out, const json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string inner(static_cast<std::size_t>(indent + 2), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out << "{}";
      return;
    }
    out << "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out << ",\n";
      first = false;
      out << inner << json(it.key()).dump() << ": ";
      write_stable(out, it.value(), indent + 2);
    }
    out << "\n" << pad << "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out << "[]";
      return;
    }
    if (is_flat(j)) {
      out << "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out << ", ";
        write_stable(out, j[i], indent);
      }
      out << "]";
      return;
    }
    out << "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) out << ",\n";
      out << inner;
      write_stable(out, j[i], indent + 2);
    }
    out << "\n" << pad << "]";
  } else if (j.is_number()) {
    write_number(out, j);
  } else {
    out << j.dump();
  }
}

}  // namespace

std::string dump_stable(const json& doc) {
  std::ostringstream out;
  write_stable(out, doc, 0);
  out << '\n';
  return out.str();
}

json experiment_to_json(const ExperimentSpec& spec) {
  json doc;
  doc["name"] = spec.name();
  doc["registry"] = json::array();
  for (const auto& s : spec.registry().subsystems()) doc["registry"].push_back(subsystem_to_json(s));

  json initial = json::object();
  const auto& amps = spec.initial().amplitudes();
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    if (amps[i] == Complex{}) continue;
    initial[spec.registry().basis_name(static_cast<std::size_t>(i))] = complex_to_json(amps[i]);
  }
  doc["initial"] = std::move(initial);

  doc["steps"] = json::array();
  for (const auto& step : spec.steps()) {
    json s{{"time", step.time}, {"agent", step.agent()}};
    if (const auto* m = std::get_if<MeasurementIsometry>(&step.action)) {
      s["type"] = "measure";
      s["targets"] = m->measured_labels();
      s["memory_label"] = m->memory().label;
      json basis = json::array();
      std::vector<std::string> outcomes;
      for (std::size_t i = 0; i < m->given_count(); ++i) {
        basis.push_back(vector_to_json(m->basis()[i].amplitudes()));
        outcomes.push_back(m->outcome_labels()[i]);
      }
      s["basis"] = std::move(basis);
      s["outcome_labels"] = std::move(outcomes);
    } else {
      const auto& p = std::get<PreparationIsometry>(step.action);
      s["type"] = "prepare";
      s["targets"] = p.control_labels();
      s["memory_label"] = p.output().label;
      s["output_basis_labels"] = p.output().basis_labels;
      json basis = json::array();
      for (const auto& phi : p.prepared()) basis.push_back(vector_to_json(phi.amplitudes()));
      s["basis"] = std::move(basis);
    }
    doc["steps"].push_back(std::move(s));
  }

  doc["halting"] = json::array();
  for (const auto& h : spec.halting()) doc["halting"].push_back({{"agent", h.agent}, {"outcome", h.outcome}});
  if (!spec.reports().empty()) {
    doc["reports"] = json::array();
    for (const auto& r : spec.reports()) {
      doc["reports"].push_back(
          {{"name", r.name}, {"from", r.from}, {"to", r.to}, {"time", r.time}, {"alphabet", r.alphabet}});
    }
  }
  return doc;
}

ExperimentSpec experiment_from_json(const json& doc) {
  try {
    std::vector<Subsystem> subs;
    for (const auto& s : doc.at("registry")) subs.push_back(subsystem_from_json(s));
    SubsystemRegistry registry(std::move(subs));

    Vector amps = Vector::Zero(static_cast<Eigen::Index>(registry.total_dim()));
    for (auto it = doc.at("initial").begin(); it != doc.at("initial").end(); ++it) {
      std::vector<std::string> labels;
      std::stringstream ss(it.key());
      for (std::string part; std::getline(ss, part, ',');) labels.push_back(part);
      amps[static_cast<Eigen::Index>(registry.flat_index_of(labels))] = complex_from_json(it.value());
    }
    StateVector initial(registry, std::move(amps));

    std::vector<ExperimentStep> steps;
    SubsystemRegistry running = registry;
    for (const auto& s : doc.at("steps")) {
      const int time = s.at("time").get<int>();
      const auto agent = s.at("agent").get<std::string>();
      const auto type = s.at("type").get<std::string>();
      const auto targets = s.at("targets").get<std::vector<std::string>>();
      const auto target_reg = targets_registry(running, targets);
      const auto memory_label = s.at("memory_label").get<std::string>();
      if (type == "measure") {
        std::vector<StateVector> basis;
        for (const auto& b : s.at("basis")) {
          basis.emplace_back(target_reg, vector_from_json(b, target_reg.total_dim()),
                             Normalization::kUnnormalizedBranch);
        }
        auto iso = MeasurementIsometry::build(agent, std::move(basis),
                                              s.at("outcome_labels").get<std::vector<std::string>>(), memory_label);
        running = running.appended(iso.memory());
        steps.push_back({time, std::move(iso)});
      } else if (type == "prepare") {
        Subsystem output{memory_label, s.at("output_basis_labels").get<std::vector<std::string>>()};
        const SubsystemRegistry out_reg({output});
        std::vector<StateVector> prepared;
        for (const auto& b : s.at("basis")) prepared.emplace_back(out_reg, vector_from_json(b, output.dim()));
        auto iso = PreparationIsometry::build(agent, target_reg, output, std::move(prepared));
        running = running.appended(output);
        steps.push_back({time, std::move(iso)});
      } else {
        throw ConfigError("unknown step type '" + type + "'");
      }
    }

    std::vector<AgentOutcome> halting;
    if (doc.contains("halting")) {
      for (const auto& h : doc.at("halting")) {
        halting.push_back({h.at("agent").get<std::string>(), h.at("outcome").get<std::string>()});
      }
    }
    std::vector<ReportChannel> reports;
    if (doc.contains("reports")) {
      for (const auto& r : doc.at("reports")) {
        reports.push_back({r.at("name").get<std::string>(), r.at("from").get<std::string>(),
                           r.at("to").get<std::string>(), r.at("time").get<int>(),
                           r.at("alphabet").get<std::vector<std::string>>()});
      }
    }
    return ExperimentSpec(doc.value("name", std::string("experiment")), std::move(initial), std::move(steps),
                          std::move(halting), std::move(reports));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse '" + path + "': " + e.what());
  }
  return experiment_from_json(doc);
}

}  // namespace wfsim
