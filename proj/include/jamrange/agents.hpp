#pragma once

// Victim-side agents: access points (beaconing, auth/association tables,
// channel-hop defense) and stations (scan, join, reconnect with backoff).

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "jamrange/frames.hpp"
#include "jamrange/simcore.hpp"

namespace jamrange {

struct ApConfig {
  MacAddress bssid;
  std::string essid;
  Channel channel{Band::Band5, 36};
  EncryptionType enc = EncryptionType::Wpa2;
  SimTime beacon_interval = 100;
  // Bands the AP radio can use; empty means the band of `channel`.
  std::vector<Band> bands;
  bool hop_enabled = false;
  std::vector<Channel> hop_channels;
  int hop_threshold = 30;
  SimTime hop_window = 2000;
  SimTime hop_delay = 500;
  int auth_table_capacity = 64;
  // Authenticated clients that never associate are forgotten after this.
  SimTime auth_timeout = 5000;
};

struct StationConfig {
  MacAddress mac;
  std::string target_essid;
  SimTime reconnect_backoff_initial = 1000;
  int backoff_factor = 2;
  SimTime backoff_cap = 8000;
  SimTime scan_dwell = 250;
  // Channels searched for the target network, in canonical order. Empty
  // means every channel of `bands`.
  std::vector<Channel> channels;
  std::vector<Band> bands{Band::Band24, Band::Band5};
  // While associated the station exchanges a probe with its AP this often.
  SimTime activity_interval = 200;
  // Association is considered lost after this long without a beacon.
  SimTime beacon_loss_timeout = 1000;
  // An unanswered auth/assoc request is abandoned after this long.
  SimTime handshake_timeout = 100;
};

// Throws ConfigError when an ApConfig/StationConfig breaks its invariants.
void validate(const ApConfig& cfg);
void validate(const StationConfig& cfg);

class AccessPoint {
 public:
  AccessPoint(Simulation& sim, ApConfig cfg);
  AccessPoint(const AccessPoint&) = delete;
  AccessPoint& operator=(const AccessPoint&) = delete;
  ~AccessPoint();

  const ApConfig& config() const noexcept { return cfg_; }
  const MacAddress& bssid() const noexcept { return cfg_.bssid; }
  const Channel& channel() const noexcept { return channel_; }
  IfaceId iface() const noexcept { return iface_; }

  // Snapshot of associated clients, ascending.
  std::vector<MacAddress> association_table() const;
  std::size_t auth_table_size() const noexcept { return auth_.size(); }
  int hop_count() const noexcept { return hops_; }
  bool hop_pending() const noexcept { return hop_event_.has_value(); }
  // Spoofed frames counted inside the current window.
  std::size_t spoof_window_count() const noexcept { return spoof_times_.size(); }

  void handle_frame(const CapturedFrame& cap);

 private:
  void beacon();
  void send(ManagementFrame frame);
  void expire_auth();
  void note_spoof();
  void hop();

  Simulation& sim_;
  ApConfig cfg_;
  IfaceId iface_;
  ListenerId listener_;
  Channel channel_;
  std::map<MacAddress, SimTime> auth_;  // client -> time authenticated
  std::set<MacAddress> assoc_;
  std::deque<SimTime> spoof_times_;
  std::optional<EventId> hop_event_;
  std::optional<EventId> beacon_event_;
  int hops_ = 0;
};

enum class StationPhase { Disconnected, Scanning, Authenticating, Associating, Associated };

std::string_view phase_name(StationPhase phase);

class Station {
 public:
  Station(Simulation& sim, StationConfig cfg);
  Station(const Station&) = delete;
  Station& operator=(const Station&) = delete;
  ~Station();

  const StationConfig& config() const noexcept { return cfg_; }
  const MacAddress& mac() const noexcept { return cfg_.mac; }
  IfaceId iface() const noexcept { return iface_; }
  StationPhase phase() const noexcept { return phase_; }
  std::optional<MacAddress> ap() const noexcept { return ap_; }
  // Associated time up to now.
  SimTime connected_time() const noexcept;
  int disconnect_count() const noexcept { return disconnects_; }
  SimTime current_backoff() const noexcept { return backoff_; }
  // Delays used for every reconnect scheduled so far, in order.
  const std::vector<SimTime>& backoff_history() const noexcept { return backoff_history_; }

  void handle_frame(const CapturedFrame& cap);

 private:
  void start_scan();
  void dwell_next();
  void join(const MacAddress& bssid, const Channel& channel);
  void associated();
  void drop(std::string_view cause, bool use_backoff);
  void attempt_failed(std::string_view cause);
  void schedule_activity();
  void check_beacon_loss();
  void cancel_timers();
  void send(ManagementFrame frame);

  Simulation& sim_;
  StationConfig cfg_;
  IfaceId iface_;
  ListenerId listener_;
  StationPhase phase_ = StationPhase::Disconnected;
  std::optional<MacAddress> ap_;  // target during handshake, AP when associated
  std::optional<Channel> cached_channel_;
  std::vector<Channel> scan_order_;
  std::size_t scan_pos_ = 0;
  SimTime backoff_;
  std::vector<SimTime> backoff_history_;
  SimTime associated_since_ = 0;
  SimTime connected_accum_ = 0;
  SimTime last_beacon_ = 0;
  int disconnects_ = 0;
  std::optional<EventId> timer_;     // dwell, handshake timeout or reconnect
  std::optional<EventId> activity_;  // associated keepalive probe
  std::optional<EventId> loss_check_;
};

}  // namespace jamrange
