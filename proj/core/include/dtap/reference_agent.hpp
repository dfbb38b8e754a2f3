#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtap/channel.hpp"
#include "dtap/observation.hpp"

namespace dtap {

/// Scripted agent for conformance checks: picks the selectable node with the
/// smallest assignment feature, ties by (label, resource). Standardization is
/// monotone, so this reproduces SPT from the wire observation alone.
std::int64_t spt_mimic_choice(const AssignmentGraph& graph);

struct MimicOptions {
  /// Episodes to play before sending stop; 0 = until the server closes.
  std::size_t episodes = 1;
  /// Seed of the first reset; later resets count up from it.
  std::uint64_t reset_seed = 1;
  std::chrono::milliseconds timeout{30000};
  /// Fault injection: answer this decision (0-based) with a masked index.
  std::optional<std::size_t> blocked_at;
};

struct MimicReport {
  std::size_t decisions = 0;
  std::size_t episodes = 0;
  std::vector<double> episode_rewards;  // sum of all rewards received per finished episode
  std::vector<nlohmann::json> summaries;
  std::optional<std::string> error_code;  // from a server error message
  bool closed_by_server = false;
  bool timed_out = false;
};

/// Plays the agent side of the protocol on `channel` until stop, error or close.
MimicReport run_spt_mimic(LineChannel& channel, const MimicOptions& options = {});

}  // namespace dtap
