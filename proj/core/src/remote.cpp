#include "dtap/remote.hpp"

#include "dtap/observation.hpp"

namespace dtap {

using nlohmann::json;

std::string_view to_string(ProtocolErrorCode code) {
  switch (code) {
    case ProtocolErrorCode::PROTOCOL_MALFORMED: return "PROTOCOL_MALFORMED";
    case ProtocolErrorCode::PROTOCOL_BLOCKED_ACTION: return "PROTOCOL_BLOCKED_ACTION";
    case ProtocolErrorCode::PROTOCOL_TIMEOUT: return "PROTOCOL_TIMEOUT";
    case ProtocolErrorCode::PROTOCOL_CLOSED: return "PROTOCOL_CLOSED";
    case ProtocolErrorCode::PROTOCOL_UNEXPECTED: return "PROTOCOL_UNEXPECTED";
    case ProtocolErrorCode::PROTOCOL_AGENT_STOPPED: return "PROTOCOL_AGENT_STOPPED";
  }
  return "PROTOCOL_UNKNOWN";
}

ProtocolError::ProtocolError(ProtocolErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

json summary_to_json(const EpisodeSummary& summary) {
  const auto audit = audit_theorem1(summary);
  return json{{"seed", summary.seed},
              {"end_time", summary.end_time},
              {"total_reward", summary.total_reward},
              {"truncation_reward", summary.truncation_reward},
              {"cases", summary.case_count},
              {"completed", summary.completed},
              {"decisions", summary.decisions},
              {"mean_cycle_h", summary.mean_cycle},
              {"mean_cycle_defined", summary.mean_cycle_defined},
              {"sum_cycles", summary.sum_cycles},
              {"audit_residual", audit.residual},
              {"audit_passed", audit.passed}};
}

AgentLink::AgentLink(LineChannel& channel, std::chrono::milliseconds timeout)
    : channel_(channel), timeout_(timeout) {}

json AgentLink::receive_message() {
  std::optional<std::string> line;
  try {
    line = channel_.receive_line(timeout_);
  } catch (const ChannelClosed&) {
    throw ProtocolError(ProtocolErrorCode::PROTOCOL_CLOSED, "agent disconnected");
  } catch (const ChannelError& e) {
    throw ProtocolError(ProtocolErrorCode::PROTOCOL_CLOSED, e.what());
  }
  if (!line) {
    throw ProtocolError(ProtocolErrorCode::PROTOCOL_TIMEOUT,
                        "no agent message within " + std::to_string(timeout_.count()) + " ms");
  }
  json message = json::parse(*line, nullptr, false);
  if (message.is_discarded() || !message.is_object()) {
    throw ProtocolError(ProtocolErrorCode::PROTOCOL_MALFORMED, "not a JSON object: " + line->substr(0, 200));
  }
  const auto type = message.find("type");
  if (type == message.end() || !type->is_string()) {
    throw ProtocolError(ProtocolErrorCode::PROTOCOL_MALFORMED, "message without a string \"type\"");
  }
  return message;
}

AgentLink::Reply AgentLink::exchange(const Simulation& sim) {
  const auto graph = standardize_features(build_observation(sim.state(), sim.instance()));
  const double reward = sim.ledger().total_reward() - delivered_reward_;
  const json message{{"type", "obs"}, {"obs", observation_to_json(graph)}, {"reward", reward}, {"done", false}};
  try {
    channel_.send_line(message.dump());
  } catch (const ChannelError& e) {
    throw ProtocolError(ProtocolErrorCode::PROTOCOL_CLOSED, e.what());
  }
  delivered_reward_ += reward;

  const json reply = receive_message();
  const auto type = reply.at("type").get<std::string>();
  Reply out;
  if (type == "act") {
    const auto index = reply.find("index");
    if (index == reply.end() || !index->is_number_integer()) {
      throw ProtocolError(ProtocolErrorCode::PROTOCOL_MALFORMED, "act without an integer \"index\"");
    }
    const auto node = index->get<std::int64_t>();
    try {
      const auto pair = decode_action(graph, node);
      out.decision = PolicyDecision{pair, static_cast<std::size_t>(node), "remote"};
    } catch (const BlockedActionError& e) {
      throw ProtocolError(ProtocolErrorCode::PROTOCOL_BLOCKED_ACTION, e.what());
    }
    return out;
  }
  if (type == "reset") {
    const auto seed = reply.find("seed");
    if (seed == reply.end() || !seed->is_number_integer()) {
      throw ProtocolError(ProtocolErrorCode::PROTOCOL_MALFORMED, "reset without an integer \"seed\"");
    }
    out.kind = Reply::Kind::reset;
    out.seed = seed->get<std::uint64_t>();
    return out;
  }
  if (type == "stop") {
    out.kind = Reply::Kind::stop;
    return out;
  }
  throw ProtocolError(ProtocolErrorCode::PROTOCOL_UNEXPECTED, "unexpected message type '" + type + "'");
}

void AgentLink::send_end(const EpisodeSummary& summary) {
  const double reward = summary.total_reward - delivered_reward_;
  const json message{{"type", "end"}, {"summary", summary_to_json(summary)}, {"reward", reward}, {"done", true}};
  try {
    channel_.send_line(message.dump());
  } catch (const ChannelError& e) {
    throw ProtocolError(ProtocolErrorCode::PROTOCOL_CLOSED, e.what());
  }
  delivered_reward_ += reward;
}

void AgentLink::send_error(ProtocolErrorCode code, const std::string& message) noexcept {
  try {
    channel_.send_line(json{{"type", "error"}, {"code", to_string(code)}, {"message", message}}.dump());
  } catch (...) {
  }
}

// --- RemotePolicy -----------------------------------------------------------

RemotePolicy::RemotePolicy(LineChannel channel, std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), link_(channel_, timeout) {}

void RemotePolicy::begin_episode(std::uint64_t) { link_.begin_episode(); }

PolicyDecision RemotePolicy::decide(const DecisionPoint&, const Simulation& sim) {
  try {
    const auto reply = link_.exchange(sim);
    switch (reply.kind) {
      case AgentLink::Reply::Kind::act: return reply.decision;
      case AgentLink::Reply::Kind::reset:
        throw ProtocolError(ProtocolErrorCode::PROTOCOL_UNEXPECTED, "reset in the middle of a harness episode");
      case AgentLink::Reply::Kind::stop:
        throw ProtocolError(ProtocolErrorCode::PROTOCOL_AGENT_STOPPED, "agent stopped mid-episode");
    }
  } catch (const ProtocolError& e) {
    link_.send_error(e.code(), e.what());
    throw;
  }
  throw ProtocolError(ProtocolErrorCode::PROTOCOL_UNEXPECTED, "unreachable");
}

void RemotePolicy::end_episode(const EpisodeSummary& summary) {
  try {
    link_.send_end(summary);
    const auto reply = link_.receive_message();
    const auto type = reply.at("type").get<std::string>();
    if (type == "stop") throw ProtocolError(ProtocolErrorCode::PROTOCOL_AGENT_STOPPED, "agent sent stop");
    if (type != "reset") {
      throw ProtocolError(ProtocolErrorCode::PROTOCOL_UNEXPECTED, "expected reset or stop, got '" + type + "'");
    }
  } catch (const ProtocolError& e) {
    link_.send_error(e.code(), e.what());
    throw;
  }
}

// --- server session ---------------------------------------------------------

SessionReport serve_session(std::shared_ptr<const DtapInstance> instance, LineChannel& channel,
                            const SessionOptions& options) {
  SessionReport report;
  AgentLink link(channel, options.timeout);
  std::uint64_t seed = options.seed;

  try {
    while (true) {
      Simulation sim(instance, seed, options.engine);
      link.begin_episode();
      std::optional<AgentLink::Reply> command;  // reset/stop received mid-episode

      while (!command) {
        auto step = sim.step_until_decision();
        if (std::holds_alternative<EpisodeEnd>(step)) break;
        auto reply = link.exchange(sim);
        if (reply.kind == AgentLink::Reply::Kind::act) {
          sim.apply_assignment(reply.decision.chosen);
        } else {
          command = reply;
        }
      }

      if (!command) {
        const auto summary = sim.finalize();
        link.send_end(summary);
        report.episodes.push_back(summary);
        if (options.max_episodes > 0 && report.episodes.size() >= options.max_episodes) return report;

        const auto message = link.receive_message();
        const auto type = message.at("type").get<std::string>();
        if (type == "reset") {
          const auto s = message.find("seed");
          if (s == message.end() || !s->is_number_integer()) {
            throw ProtocolError(ProtocolErrorCode::PROTOCOL_MALFORMED, "reset without an integer \"seed\"");
          }
          command = AgentLink::Reply{AgentLink::Reply::Kind::reset, {}, s->get<std::uint64_t>()};
        } else if (type == "stop") {
          command = AgentLink::Reply{AgentLink::Reply::Kind::stop, {}, 0};
        } else {
          throw ProtocolError(ProtocolErrorCode::PROTOCOL_UNEXPECTED,
                              "expected reset or stop after episode end, got '" + type + "'");
        }
      }

      if (command->kind == AgentLink::Reply::Kind::stop) {
        report.stopped_by_agent = true;
        return report;
      }
      seed = command->seed;
    }
  } catch (const ProtocolError& e) {
    report.error = e.code();
    report.diagnostic = e.what();
    link.send_error(e.code(), e.what());
  }
  return report;
}

}  // namespace dtap
