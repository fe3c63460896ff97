#pragma once

// Live attack feed lines and post-run effectiveness reports computed from
// the JSONL event log.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "jamrange/frames.hpp"
#include "jamrange/simcore.hpp"

namespace jamrange {

struct FeedDisconnect {
  MacAddress victim;
  MacAddress from;
  int channel = 0;
  bool operator==(const FeedDisconnect&) const = default;
};

struct FeedStats {
  std::uint64_t packets_sent = 0;
  std::uint64_t speed = 0;
  bool operator==(const FeedStats&) const = default;
};

struct FeedPursuit {
  int old_channel = 0;
  int new_channel = 0;
  bool operator==(const FeedPursuit&) const = default;
};

struct FeedWarning {
  std::string text;
  bool operator==(const FeedWarning&) const = default;
};

struct FeedEvent {
  using Body = std::variant<FeedDisconnect, FeedStats, FeedPursuit, FeedWarning>;
  SimTime t = 0;
  Body body;
  bool operator==(const FeedEvent&) const = default;
};

using FeedSink = std::function<void(const FeedEvent&)>;

// Disconnect: "Disconnecting {VICTIM} from {FROM} on channel {N}"
// Stats:      "Packets sent: {P} - Speed: {S} packets/sec"
std::string render_feed_line(const FeedEvent& event);
std::string_view feed_event_type(const FeedEvent& event);  // "disconnect", "stats", ...

// An association attempt counts as denied when it has not reached the
// associated phase this long after it started.
inline constexpr SimTime kAssociationDeadline = 500;

struct StationReport {
  MacAddress station;
  SimTime associated_ms = 0;
  double downtime_fraction = 0.0;
  // Associated spans clipped to the window, [begin, end).
  std::vector<std::pair<SimTime, SimTime>> associated_intervals;
};

struct Report {
  SimTime window_start = 0;
  SimTime window_end = 0;
  std::vector<StationReport> stations;
  // Measured from window_start; empty when never reached inside the window.
  std::optional<SimTime> time_to_full_disconnect;
  std::uint64_t association_attempts = 0;
  std::uint64_t denied_attempts = 0;
  double denial_rate = 0.0;
  std::vector<SimTime> reacquisition_latencies;
  std::uint64_t packets_sent = 0;
  std::uint64_t peak_speed = 0;
};

// Throws ContractError when t0 >= t1.
Report compute_report(std::span<const LogEntry> log, SimTime t0, SimTime t1);

LogData report_to_json(const Report& report);
std::string report_to_text(const Report& report);

}  // namespace jamrange
