#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dtap/model.hpp"
#include "dtap/state.hpp"

namespace dtap {

/// Heterogeneous assignment-graph observation: one node per resource, per
/// activity label and per pool pair. Assignment node j has a self edge plus one
/// incoming edge from its resource and one from its label when selectable.
struct AssignmentGraph {
  std::vector<double> resource_feat;  // 0 = active, 1 = busy or off
  std::vector<double> activity_feat;  // share of active cases per label
  std::vector<double> assign_feat;    // mean completion time per pool pair
  std::vector<PoolPair> assign_pairs;
  std::vector<std::pair<int, int>> edges_res;  // (resource node, assignment node)
  std::vector<std::pair<int, int>> edges_act;  // (activity node, assignment node)
  std::vector<std::uint8_t> mask;              // 1 = selectable
  std::int64_t step = 0;
  double clock = 0.0;

  std::size_t self_edge_count() const { return assign_feat.size(); }
  std::size_t selectable_count() const;
};

AssignmentGraph build_observation(const SimState& state, const DtapInstance& instance);

/// Per node type, (x - mean) / population std; all zeros when std < 1e-9.
AssignmentGraph standardize_features(AssignmentGraph graph);
void standardize_in_place(std::vector<double>& values);

class BlockedActionError : public std::runtime_error {
 public:
  BlockedActionError(std::int64_t index, bool out_of_range);
  std::int64_t index() const { return index_; }
  bool out_of_range() const { return out_of_range_; }

 private:
  std::int64_t index_;
  bool out_of_range_;
};

PoolPair decode_action(const AssignmentGraph& graph, std::int64_t node_index);

nlohmann::json observation_to_json(const AssignmentGraph& graph);
AssignmentGraph observation_from_json(const nlohmann::json& payload);

}  // namespace dtap
