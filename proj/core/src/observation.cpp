#include "dtap/observation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

namespace dtap {

std::size_t AssignmentGraph::selectable_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

AssignmentGraph build_observation(const SimState& state, const DtapInstance& instance) {
  AssignmentGraph graph;
  graph.step = state.decision_step;
  graph.clock = state.clock;

  graph.resource_feat.reserve(instance.resources.size());
  for (const auto& resource : instance.resources) {
    graph.resource_feat.push_back(state.active_resources.contains(resource.id) ? 0.0 : 1.0);
  }

  const auto active = static_cast<double>(state.active_cases.size());
  graph.activity_feat.reserve(instance.labels.size());
  for (const auto& label : instance.labels) {
    const auto count = static_cast<double>(state.queues.at(label.id).size());
    graph.activity_feat.push_back(active > 0.0 ? count / active : 0.0);
  }

  const auto n = instance.pools.size();
  graph.assign_feat.reserve(n);
  graph.assign_pairs = instance.pools;
  graph.mask.assign(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& pair = instance.pools[j];
    graph.assign_feat.push_back(instance.completion[j].mean);
    if (graph.resource_feat[pair.resource] == 0.0 && graph.activity_feat[pair.label] > 0.0) {
      graph.edges_res.emplace_back(pair.resource, static_cast<int>(j));
      graph.edges_act.emplace_back(pair.label, static_cast<int>(j));
      graph.mask[j] = 1;
    }
  }
  return graph;
}

void standardize_in_place(std::vector<double>& values) {
  if (values.empty()) return;
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);
  for (double& v : values) v = sd < 1e-9 ? 0.0 : (v - mean) / sd;
}

AssignmentGraph standardize_features(AssignmentGraph graph) {
  standardize_in_place(graph.resource_feat);
  standardize_in_place(graph.activity_feat);
  standardize_in_place(graph.assign_feat);
  return graph;
}

BlockedActionError::BlockedActionError(std::int64_t index, bool out_of_range)
    : std::runtime_error(out_of_range ? "assignment node " + std::to_string(index) + " is out of range"
                                      : "assignment node " + std::to_string(index) + " is blocked by the mask"),
      index_(index),
      out_of_range_(out_of_range) {}

PoolPair decode_action(const AssignmentGraph& graph, std::int64_t node_index) {
  if (node_index < 0 || node_index >= static_cast<std::int64_t>(graph.assign_pairs.size())) {
    throw BlockedActionError(node_index, true);
  }
  if (graph.mask[static_cast<std::size_t>(node_index)] == 0) throw BlockedActionError(node_index, false);
  return graph.assign_pairs[static_cast<std::size_t>(node_index)];
}

nlohmann::json observation_to_json(const AssignmentGraph& graph) {
  using nlohmann::json;
  json pairs = json::array();
  for (const auto& p : graph.assign_pairs) pairs.push_back({p.label, p.resource});
  json edges_res = json::array();
  for (const auto& [r, j] : graph.edges_res) edges_res.push_back({r, j});
  json edges_act = json::array();
  for (const auto& [a, j] : graph.edges_act) edges_act.push_back({a, j});
  json mask = json::array();
  for (auto m : graph.mask) mask.push_back(static_cast<int>(m));
  return json{{"resource_feat", graph.resource_feat},
              {"activity_feat", graph.activity_feat},
              {"assign_feat", graph.assign_feat},
              {"assign_pairs", std::move(pairs)},
              {"edges_res", std::move(edges_res)},
              {"edges_act", std::move(edges_act)},
              {"mask", std::move(mask)},
              {"step", graph.step},
              {"clock", graph.clock}};
}

AssignmentGraph observation_from_json(const nlohmann::json& payload) {
  AssignmentGraph graph;
  graph.resource_feat = payload.at("resource_feat").get<std::vector<double>>();
  graph.activity_feat = payload.at("activity_feat").get<std::vector<double>>();
  graph.assign_feat = payload.at("assign_feat").get<std::vector<double>>();
  for (const auto& p : payload.at("assign_pairs")) graph.assign_pairs.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
  for (const auto& e : payload.at("edges_res")) graph.edges_res.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  for (const auto& e : payload.at("edges_act")) graph.edges_act.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  for (const auto& m : payload.at("mask")) graph.mask.push_back(static_cast<std::uint8_t>(m.get<int>() != 0));
  graph.step = payload.at("step").get<std::int64_t>();
  graph.clock = payload.at("clock").get<double>();
  return graph;
}

}  // namespace dtap
