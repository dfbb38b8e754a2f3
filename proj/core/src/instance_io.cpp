#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dtap/model.hpp"

namespace dtap {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw InstanceError("instance parse error at '" + path + "': " + what);
}

const json& require(const json& node, const char* key, const std::string& path) {
  if (!node.is_object()) field_error(path, "expected an object");
  const auto it = node.find(key);
  if (it == node.end()) field_error(path.empty() ? key : path + "." + key, "missing mandatory field");
  return *it;
}

std::string child(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

std::string item(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

double number(const json& node, const std::string& path) {
  if (!node.is_number()) field_error(path, "expected a number");
  return node.get<double>();
}

int integer(const json& node, const std::string& path) {
  if (!node.is_number_integer()) field_error(path, "expected an integer");
  return node.get<int>();
}

std::string text(const json& node, const std::string& path) {
  if (!node.is_string()) field_error(path, "expected a string");
  return node.get<std::string>();
}

const json& array(const json& node, const std::string& path) {
  if (!node.is_array()) field_error(path, "expected an array");
  return node;
}

void renormalize_rows(DtapInstance& instance) {
  for (std::size_t from = 0; from < instance.transitions.rows.size(); ++from) {
    if (from < instance.labels.size() && instance.labels[from].kind == LabelKind::end) continue;
    auto& row = instance.transitions.rows[from];
    double sum = 0.0;
    for (double p : row) sum += p;
    if (sum > 0.0 && std::abs(sum - 1.0) <= kRenormalizeTolerance) {
      for (double& p : row) p /= sum;
    }
  }
}

std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

}  // namespace

DtapInstance instance_from_json_text(std::string_view text_view) {
  json doc;
  try {
    doc = json::parse(text_view.begin(), text_view.end());
  } catch (const json::parse_error& e) {
    throw InstanceError("instance parse error at line " +
                        std::to_string(line_of_offset(text_view, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) field_error("", "top level must be an object");

  DtapInstance instance;

  const auto& labels = array(require(doc, "labels", ""), "labels");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto path = item("labels", i);
    ActivityLabel label;
    label.id = integer(require(labels[i], "id", path), child(path, "id"));
    label.name = text(require(labels[i], "name", path), child(path, "name"));
    const auto kind_text = text(require(labels[i], "kind", path), child(path, "kind"));
    const auto kind = parse_label_kind(kind_text);
    if (!kind) field_error(child(path, "kind"), "unknown kind '" + kind_text + "'");
    label.kind = *kind;
    instance.labels.push_back(std::move(label));
  }

  const auto& resources = array(require(doc, "resources", ""), "resources");
  for (std::size_t i = 0; i < resources.size(); ++i) {
    const auto path = item("resources", i);
    Resource resource;
    resource.id = integer(require(resources[i], "id", path), child(path, "id"));
    resource.name = text(require(resources[i], "name", path), child(path, "name"));
    resource.weight = integer(require(resources[i], "weight", path), child(path, "weight"));
    instance.resources.push_back(std::move(resource));
  }

  const auto& pools = array(require(doc, "pools", ""), "pools");
  for (std::size_t i = 0; i < pools.size(); ++i) {
    const auto path = item("pools", i);
    if (!pools[i].is_array() || pools[i].size() != 2) field_error(path, "expected [label_id, resource_id]");
    instance.pools.push_back({integer(pools[i][0], item(path, 0)), integer(pools[i][1], item(path, 1))});
  }

  // Completion entries are keyed by pair and may appear in any order; they are
  // stored parallel to the pool list.
  const auto& completion = array(require(doc, "completion", ""), "completion");
  instance.completion.assign(instance.pools.size(), CompletionModel{});
  std::vector<bool> filled(instance.pools.size(), false);
  for (std::size_t i = 0; i < completion.size(); ++i) {
    const auto path = item("completion", i);
    const PoolPair pair{integer(require(completion[i], "label_id", path), child(path, "label_id")),
                        integer(require(completion[i], "resource_id", path), child(path, "resource_id"))};
    const CompletionModel model{number(require(completion[i], "mean", path), child(path, "mean")),
                                number(require(completion[i], "std_dev", path), child(path, "std_dev"))};
    const auto index = instance.pool_index(pair);
    if (!index) field_error(path, "pair is not listed in pools");
    if (filled[*index]) field_error(path, "duplicate completion model for pair");
    instance.completion[*index] = model;
    filled[*index] = true;
  }
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i]) field_error(item("pools", i), "pool pair has no completion model");
  }

  const auto n = instance.labels.size();
  instance.transitions.rows.assign(n, std::vector<double>(n, 0.0));
  const auto& transitions = array(require(doc, "transitions", ""), "transitions");
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto path = item("transitions", i);
    const int from = integer(require(transitions[i], "from_id", path), child(path, "from_id"));
    if (from < 0 || static_cast<std::size_t>(from) >= n) field_error(child(path, "from_id"), "unknown label");
    const auto probs_path = child(path, "probs");
    const auto& probs = array(require(transitions[i], "probs", path), probs_path);
    for (std::size_t j = 0; j < probs.size(); ++j) {
      const auto entry_path = item(probs_path, j);
      const int to = integer(require(probs[j], "to_id", entry_path), child(entry_path, "to_id"));
      if (to < 0 || static_cast<std::size_t>(to) >= n) field_error(child(entry_path, "to_id"), "unknown label");
      instance.transitions.rows[from][to] += number(require(probs[j], "p", entry_path), child(entry_path, "p"));
    }
  }

  const auto& calendar = require(doc, "calendar", "");
  const int period = integer(require(calendar, "period_hours", "calendar"), "calendar.period_hours");
  const auto& expected = array(require(calendar, "expected_active", "calendar"), "calendar.expected_active");
  for (std::size_t k = 0; k < expected.size(); ++k) {
    instance.calendar.expected_active.push_back(integer(expected[k], item("calendar.expected_active", k)));
  }
  if (period != instance.calendar.period_hours()) {
    field_error("calendar.period_hours", "period " + std::to_string(period) + " does not match " +
                                             std::to_string(expected.size()) + " calendar entries");
  }

  instance.arrival_rate = number(require(doc, "arrival_rate", ""), "arrival_rate");
  instance.horizon_hours = number(require(doc, "horizon_hours", ""), "horizon_hours");

  renormalize_rows(instance);
  auto report = validate_instance(instance);
  if (!report.empty()) throw InvalidInstanceError(std::move(report));
  return instance;
}

std::string instance_to_json_text(const DtapInstance& instance) {
  json doc;
  doc["labels"] = json::array();
  for (const auto& label : instance.labels) {
    doc["labels"].push_back({{"id", label.id}, {"name", label.name}, {"kind", to_string(label.kind)}});
  }
  doc["resources"] = json::array();
  for (const auto& resource : instance.resources) {
    doc["resources"].push_back({{"id", resource.id}, {"name", resource.name}, {"weight", resource.weight}});
  }
  doc["pools"] = json::array();
  doc["completion"] = json::array();
  for (std::size_t i = 0; i < instance.pools.size(); ++i) {
    const auto& pair = instance.pools[i];
    doc["pools"].push_back({pair.label, pair.resource});
    const auto& model = instance.completion.at(i);
    doc["completion"].push_back({{"label_id", pair.label},
                                 {"resource_id", pair.resource},
                                 {"mean", model.mean},
                                 {"std_dev", model.std_dev}});
  }
  doc["transitions"] = json::array();
  for (std::size_t from = 0; from < instance.transitions.rows.size(); ++from) {
    json probs = json::array();
    const auto& row = instance.transitions.rows[from];
    for (std::size_t to = 0; to < row.size(); ++to) {
      if (row[to] != 0.0) probs.push_back({{"to_id", to}, {"p", row[to]}});
    }
    if (!probs.empty()) doc["transitions"].push_back({{"from_id", from}, {"probs", std::move(probs)}});
  }
  doc["calendar"] = {{"period_hours", instance.calendar.period_hours()},
                     {"expected_active", instance.calendar.expected_active}};
  doc["arrival_rate"] = instance.arrival_rate;
  doc["horizon_hours"] = instance.horizon_hours;
  return doc.dump(2) + "\n";
}

DtapInstance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InstanceError("cannot open instance file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return instance_from_json_text(buffer.str());
}

void save_instance(const DtapInstance& instance, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InstanceError("cannot write instance file '" + path.string() + "'");
  out << instance_to_json_text(instance);
  if (!out) throw InstanceError("failed writing instance file '" + path.string() + "'");
}

}  // namespace dtap
