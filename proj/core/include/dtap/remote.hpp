#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtap/channel.hpp"
#include "dtap/policies.hpp"

namespace dtap {

// Wire protocol (one JSON object per line):
//   server -> agent  {"type":"obs","obs":{...},"reward":r,"done":false}
//                    {"type":"end","summary":{...},"reward":r,"done":true}
//                    {"type":"error","code":"PROTOCOL_...","message":"..."}
//   agent -> server  {"type":"act","index":i} | {"type":"reset","seed":s} | {"type":"stop"}
// "reward" carries everything booked since the previous message, so the
// rewards an agent sees over an episode sum to the episode's total reward.

enum class ProtocolErrorCode {
  PROTOCOL_MALFORMED,
  PROTOCOL_BLOCKED_ACTION,
  PROTOCOL_TIMEOUT,
  PROTOCOL_CLOSED,
  PROTOCOL_UNEXPECTED,
  PROTOCOL_AGENT_STOPPED,
};

std::string_view to_string(ProtocolErrorCode code);

class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(ProtocolErrorCode code, const std::string& detail);
  ProtocolErrorCode code() const { return code_; }

 private:
  ProtocolErrorCode code_;
};

inline constexpr std::chrono::milliseconds kDefaultAgentTimeout{30000};

nlohmann::json summary_to_json(const EpisodeSummary& summary);

/// Server side of one connection: observation/action exchange and episode
/// boundaries. Validates every agent message before touching the engine.
class AgentLink {
 public:
  explicit AgentLink(LineChannel& channel, std::chrono::milliseconds timeout = kDefaultAgentTimeout);

  struct Reply {
    enum class Kind { act, reset, stop } kind = Kind::act;
    PolicyDecision decision;
    std::uint64_t seed = 0;
  };

  void begin_episode() { delivered_reward_ = 0.0; }
  /// Sends the standardized observation and waits for the agent's reply. An
  /// "act" reply is decoded against the mask; a blocked index throws.
  Reply exchange(const Simulation& sim);
  void send_end(const EpisodeSummary& summary);
  /// Best effort; never throws.
  void send_error(ProtocolErrorCode code, const std::string& message) noexcept;
  /// Next agent message parsed as a JSON object with a string "type".
  nlohmann::json receive_message();

 private:
  LineChannel& channel_;
  std::chrono::milliseconds timeout_;
  double delivered_reward_ = 0.0;
};

/// Policy backed by an external agent over an established channel. The
/// harness owns episode seeds; the agent's reset seed is not used.
class RemotePolicy final : public Policy {
 public:
  explicit RemotePolicy(LineChannel channel, std::chrono::milliseconds timeout = kDefaultAgentTimeout);
  RemotePolicy(const RemotePolicy&) = delete;
  RemotePolicy& operator=(const RemotePolicy&) = delete;
  std::string name() const override { return "remote"; }
  PolicyDecision decide(const DecisionPoint& decision, const Simulation& sim) override;
  void begin_episode(std::uint64_t seed) override;
  void end_episode(const EpisodeSummary& summary) override;

 private:
  LineChannel channel_;
  AgentLink link_;
};

struct SessionOptions {
  EngineConfig engine;
  std::uint64_t seed = 0;
  std::chrono::milliseconds timeout = kDefaultAgentTimeout;
  /// Stop after this many finished episodes; 0 = until the agent stops.
  std::size_t max_episodes = 0;
};

struct SessionReport {
  std::vector<EpisodeSummary> episodes;
  bool stopped_by_agent = false;
  std::optional<ProtocolErrorCode> error;
  std::string diagnostic;
};

/// Runs episodes for an agent connected on `channel`: the first episode uses
/// `options.seed`, later ones the seed of each reset command.
SessionReport serve_session(std::shared_ptr<const DtapInstance> instance, LineChannel& channel,
                            const SessionOptions& options);

}  // namespace dtap
