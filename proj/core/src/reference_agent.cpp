#include "dtap/reference_agent.hpp"

namespace dtap {

using nlohmann::json;

std::int64_t spt_mimic_choice(const AssignmentGraph& graph) {
  std::int64_t best = -1;
  for (std::size_t i = 0; i < graph.mask.size(); ++i) {
    if (!graph.mask[i]) continue;
    if (best < 0) {
      best = static_cast<std::int64_t>(i);
      continue;
    }
    const auto b = static_cast<std::size_t>(best);
    if (graph.assign_feat[i] < graph.assign_feat[b] ||
        (graph.assign_feat[i] == graph.assign_feat[b] && graph.assign_pairs[i] < graph.assign_pairs[b])) {
      best = static_cast<std::int64_t>(i);
    }
  }
  return best;
}

MimicReport run_spt_mimic(LineChannel& channel, const MimicOptions& options) {
  MimicReport report;
  double episode_reward = 0.0;
  try {
    while (true) {
      const auto line = channel.receive_line(options.timeout);
      if (!line) {
        report.timed_out = true;
        return report;
      }
      const json message = json::parse(*line);
      const auto type = message.at("type").get<std::string>();
      if (type == "obs") {
        episode_reward += message.at("reward").get<double>();
        const auto graph = observation_from_json(message.at("obs"));
        std::int64_t index = spt_mimic_choice(graph);
        if (options.blocked_at && *options.blocked_at == report.decisions) {
          index = static_cast<std::int64_t>(graph.mask.size());  // past the last node
          for (std::size_t i = 0; i < graph.mask.size(); ++i) {
            if (!graph.mask[i]) {
              index = static_cast<std::int64_t>(i);
              break;
            }
          }
        }
        ++report.decisions;
        channel.send_line(json{{"type", "act"}, {"index", index}}.dump());
      } else if (type == "end") {
        episode_reward += message.at("reward").get<double>();
        report.episode_rewards.push_back(episode_reward);
        report.summaries.push_back(message.at("summary"));
        episode_reward = 0.0;
        ++report.episodes;
        if (options.episodes > 0 && report.episodes >= options.episodes) {
          channel.send_line(json{{"type", "stop"}}.dump());
          return report;
        }
        channel.send_line(json{{"type", "reset"}, {"seed", options.reset_seed + report.episodes - 1}}.dump());
      } else if (type == "error") {
        report.error_code = message.value("code", std::string("UNKNOWN"));
        return report;
      }
    }
  } catch (const ChannelClosed&) {
    report.closed_by_server = true;
  }
  return report;
}

}  // namespace dtap
