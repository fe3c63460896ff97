#pragma once

// Deterministic discrete-event engine and the simulated RF medium.
//
// Time is integer milliseconds. Events at equal times run in insertion
// order. All randomness comes from one mt19937_64 seeded by the caller, so a
// run is a pure function of (population, seed).

#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "jamrange/frames.hpp"

namespace jamrange {

using SimTime = std::int64_t;
using IfaceId = std::uint32_t;
using ListenerId = std::uint64_t;
using EventId = std::uint64_t;

enum class Mode { Managed, Monitor };

std::string_view mode_name(Mode mode);  // "managed" / "monitor"

inline constexpr int kDefaultLinkPwr = 50;

struct InterfaceSpec {
  std::string name;
  std::vector<Band> bands{Band::Band24, Band::Band5};
  MacAddress mac;
  Mode mode = Mode::Managed;
  Channel channel{Band::Band24, 1};
  std::size_t inbox_capacity = 65536;
};

class RadioInterface {
 public:
  IfaceId id() const noexcept { return id_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<Band>& bands() const noexcept { return bands_; }
  bool supports(Band band) const noexcept;
  std::vector<Channel> supported_channels() const { return channels_for_bands(bands_); }
  Mode mode() const noexcept { return mode_; }
  const Channel& tuned() const noexcept { return tuned_; }
  const MacAddress& own_mac() const noexcept { return mac_; }

  // Most recent captures, oldest first, bounded by inbox_capacity.
  const std::deque<CapturedFrame>& inbox() const noexcept { return inbox_; }
  // Total frames ever captured by this interface.
  std::uint64_t captured_count() const noexcept { return captured_; }

 private:
  friend class Simulation;

  IfaceId id_ = 0;
  std::string name_;
  std::vector<Band> bands_;
  MacAddress mac_;
  Mode mode_ = Mode::Managed;
  Channel tuned_;
  std::deque<CapturedFrame> inbox_;
  std::size_t inbox_capacity_ = 0;
  std::uint64_t captured_ = 0;
  std::uint16_t next_seq_ = 0;
};

using LogData = nlohmann::ordered_json;

struct LogEntry {
  SimTime t = 0;
  std::string kind;
  LogData data;

  // {"t":..,"kind":..,"data":{..}} with keys in that order.
  std::string to_json_line() const;
  static LogEntry from_json_line(std::string_view line);
};

// Append-only record of everything observable in a run.
class EventLog {
 public:
  void append(SimTime t, std::string kind, LogData data);
  const std::vector<LogEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  void write_jsonl(std::ostream& out) const;
  std::string to_jsonl() const;
  static std::vector<LogEntry> read_jsonl(std::istream& in);

 private:
  std::vector<LogEntry> entries_;
};

struct MediumConfig {
  SimTime propagation_delay = 1;
  double loss_rate = 0.0;
};

class Simulation {
 public:
  using Listener = std::function<void(const CapturedFrame&)>;

  explicit Simulation(std::uint64_t seed, MediumConfig medium = {});
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  SimTime now() const noexcept { return clock_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const MediumConfig& medium() const noexcept { return medium_; }

  std::mt19937_64& rng() noexcept { return rng_; }
  // Uniform integer in [lo, hi]; consumes exactly one draw.
  std::int64_t uniform(std::int64_t lo, std::int64_t hi);

  EventId schedule_at(SimTime t, std::function<void()> fn);
  EventId schedule_in(SimTime delay, std::function<void()> fn);
  // Returns false if the event already ran or was never scheduled.
  bool cancel(EventId id);
  // Runs every event with time <= t, then sets the clock to t. Returns the
  // number of events executed. Throws ContractError if t < now().
  std::size_t advance_until(SimTime t);
  std::size_t pending_events() const noexcept { return live_.size(); }

  IfaceId add_interface(InterfaceSpec spec);
  const RadioInterface& iface(IfaceId id) const;
  std::optional<IfaceId> find_interface(std::string_view name) const;
  std::size_t interface_count() const noexcept { return ifaces_.size(); }

  // Capture filtering follows the new mode from now on; inbox is kept.
  void set_mode(IfaceId id, Mode mode);
  // Throws DomainError if the interface does not support the channel's band.
  void tune(IfaceId id, const Channel& channel);

  // Schedules delivery on the injector's current channel after the
  // propagation delay. Spoofed frames (logical source differs from the
  // interface MAC) require monitor mode; ModeError otherwise. Returns the
  // injection id used in the log.
  std::uint64_t inject(IfaceId id, ManagementFrame frame, std::string_view origin = {});

  ListenerId add_listener(IfaceId id, Listener fn);
  void remove_listener(ListenerId id);

  // Power (percent) at which `observer` hears transmissions from the node
  // owning `source`. Unconfigured links report kDefaultLinkPwr.
  void set_link_pwr(IfaceId observer, const MacAddress& source, int pwr);
  int link_pwr(IfaceId observer, const MacAddress& source) const;

  EventLog& log() noexcept { return log_; }
  const EventLog& log() const noexcept { return log_; }
  void record(std::string kind, LogData data) { log_.append(clock_, std::move(kind), std::move(data)); }

  // Every frame handed to inject(), in injection order, with its seq stamped.
  const std::vector<ManagementFrame>& injected_frames() const noexcept { return injected_; }

 private:
  using QueueKey = std::pair<SimTime, EventId>;
  struct ListenerSlot {
    IfaceId iface;
    Listener fn;
  };

  RadioInterface& mutable_iface(IfaceId id);
  void deliver(std::uint64_t injection, IfaceId from, const ManagementFrame& frame, Channel channel);

  std::uint64_t seed_;
  MediumConfig medium_;
  std::mt19937_64 rng_;
  SimTime clock_ = 0;
  EventId next_event_ = 1;
  std::priority_queue<QueueKey, std::vector<QueueKey>, std::greater<>> queue_;
  std::unordered_map<EventId, std::function<void()>> live_;
  std::vector<RadioInterface> ifaces_;
  std::map<ListenerId, ListenerSlot> listeners_;
  ListenerId next_listener_ = 1;
  std::map<std::pair<IfaceId, MacAddress>, int> links_;
  std::uint64_t next_injection_ = 1;
  std::vector<ManagementFrame> injected_;
  EventLog log_;
};

// Log helpers shared by the modules that write frame-level entries.
LogData frame_log_fields(const ManagementFrame& frame);

}  // namespace jamrange
