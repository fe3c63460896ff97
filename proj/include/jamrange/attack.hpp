#pragma once

// The attacker side: passive target scanner, the flood engine for each
// attack kind, filter lists and the pursuit controller that follows a
// channel-hopping target.

#include <deque>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "jamrange/frames.hpp"
#include "jamrange/metrics.hpp"
#include "jamrange/simcore.hpp"

namespace jamrange {

struct ScanRecord {
  int index = 0;
  MacAddress bssid;
  Channel channel;
  int pwr = 0;
  EncryptionType enc = EncryptionType::Open;
  std::string essid;
  bool has_clients = false;
  bool operator==(const ScanRecord&) const = default;
};

// Sweeps every channel the interface supports, ascending and wrapping, one
// dwell at a time until `duration` has elapsed. Requires monitor mode.
class Scanner {
 public:
  using Done = std::function<void(const std::vector<ScanRecord>&)>;

  Scanner(Simulation& sim, IfaceId iface, SimTime dwell, SimTime duration, Done on_done = {});
  Scanner(const Scanner&) = delete;
  Scanner& operator=(const Scanner&) = delete;
  ~Scanner();

  bool done() const noexcept { return done_; }
  SimTime ends_at() const noexcept { return ends_at_; }
  // Sorted by pwr descending then bssid ascending; indices from 1.
  std::vector<ScanRecord> records() const;

 private:
  void dwell();
  void finish();
  void observe(const CapturedFrame& cap);

  Simulation& sim_;
  IfaceId iface_;
  SimTime dwell_;
  SimTime ends_at_;
  std::vector<Channel> channels_;
  std::size_t pos_ = 0;
  ListenerId listener_ = 0;
  std::optional<EventId> dwell_event_;
  std::optional<EventId> end_event_;
  bool done_ = false;
  Done on_done_;
  std::vector<ScanRecord> seen_;  // insertion order, unsorted
  std::set<std::pair<MacAddress, MacAddress>> exchanges_;
};

// Runs a scan to completion by advancing the simulation `duration` ms.
std::vector<ScanRecord> scan(Simulation& sim, IfaceId iface, SimTime dwell, SimTime duration);

std::string render_scan_table(std::span<const ScanRecord> records);

enum class AttackKind { DisassocAmok, TargetedDeauth, BeaconFlood, AuthDoS };
std::string_view attack_kind_name(AttackKind kind);  // CLI spelling, e.g. "disassoc-amok"
AttackKind parse_attack_kind(std::string_view text);  // throws DomainError

enum class FilterMode { None, Whitelist, Blacklist };
std::string_view filter_mode_name(FilterMode mode);

enum class SessionState { Locked, Sweeping, Stopped };
std::string_view session_state_name(SessionState state);

struct AttackConfig {
  AttackKind kind = AttackKind::DisassocAmok;
  std::optional<ScanRecord> target;
  // Victim of TargetedDeauth.
  std::optional<MacAddress> client;
  bool pursuit = false;
  SimTime cycle_interval = 250;
  int broadcast_every = 4;
  FilterMode filter_mode = FilterMode::None;
  std::filesystem::path filter_path;
  ReasonCode reason;
  SimTime loss_timeout = 2000;
  SimTime sweep_dwell = 250;
  SimTime filter_reload_interval = 3000;
  // Frames per cycle for AuthDoS and BeaconFlood.
  int burst = 16;
};

struct AttackStats {
  std::uint64_t packets_sent = 0;
  std::uint64_t peak_speed = 0;
  int channel_switches = 0;
  SimTime duration = 0;
  bool operator==(const AttackStats&) const = default;
};

enum class PursuitOutcome { Locked, Lost, Reacquired };

struct PursuitStatus {
  PursuitOutcome outcome = PursuitOutcome::Locked;
  std::optional<Channel> channel;  // set for Reacquired
};

inline constexpr SimTime kSpeedWindow = 1000;

// Filter-list file: one MAC per line, '#' starts a comment, blank lines
// ignored. Malformed lines are reported through `bad_lines` (1-based).
std::set<MacAddress> parse_filter_list(std::string_view text, std::vector<std::size_t>* bad_lines = nullptr);

class AttackSession {
 public:
  // Validates the configuration, tunes the interface to the target channel
  // and schedules the first cycle at the current time.
  AttackSession(Simulation& sim, IfaceId iface, AttackConfig cfg, FeedSink feed = {},
                std::string id = "attack-1");
  AttackSession(const AttackSession&) = delete;
  AttackSession& operator=(const AttackSession&) = delete;
  ~AttackSession();

  const std::string& id() const noexcept { return id_; }
  const AttackConfig& config() const noexcept { return cfg_; }
  IfaceId iface() const noexcept { return iface_; }
  SessionState state() const noexcept { return state_; }
  const Channel& locked_channel() const noexcept { return locked_; }
  SimTime started_at() const noexcept { return started_; }
  std::uint64_t packets_sent() const noexcept { return packets_; }
  // Frames injected in the trailing kSpeedWindow ms.
  std::uint64_t speed() const;
  std::uint64_t peak_speed() const noexcept { return peak_speed_; }
  int channel_switches() const noexcept { return switches_; }
  const std::vector<MacAddress>& victims() const noexcept { return victims_; }
  const std::set<MacAddress>& filter_list() const noexcept { return filter_; }
  const std::vector<SimTime>& reacquisition_latencies() const noexcept { return latencies_; }

  // One DisassocAmok round; returns the frames injected. Exposed for tests.
  std::vector<ManagementFrame> amok_cycle();
  // Re-reads the filter file; returns the number of MACs now loaded.
  std::size_t reload_filter_lists();
  PursuitStatus pursuit_check();

  // Idempotent; a second call returns the same stats.
  AttackStats stop();

 private:
  bool targeted() const noexcept;
  bool is_target_allowed(const MacAddress& mac) const;
  void run_cycle();
  void schedule_reload();
  void inject(ManagementFrame frame, std::vector<ManagementFrame>& out);
  void emit(FeedEvent::Body body);
  void emit_stats(std::size_t injected);
  void observe(const CapturedFrame& cap);
  void add_victim(const MacAddress& mac);
  void react(const MacAddress& victim);
  void start_sweep();
  void sweep_dwell();
  void reacquire(const Channel& channel);
  void lose_target();
  void teardown();
  std::vector<ManagementFrame> targeted_deauth_cycle();
  std::vector<ManagementFrame> auth_dos_cycle();
  std::vector<ManagementFrame> beacon_flood_cycle();
  MacAddress random_mac();

  Simulation& sim_;
  IfaceId iface_;
  AttackConfig cfg_;
  FeedSink feed_;
  std::string id_;
  SessionState state_ = SessionState::Locked;
  Channel locked_;
  SimTime started_ = 0;
  std::optional<SimTime> stopped_at_;
  std::optional<AttackStats> final_stats_;
  std::uint64_t packets_ = 0;
  std::uint64_t peak_speed_ = 0;
  mutable std::deque<SimTime> recent_;
  std::uint64_t cycles_ = 0;
  int switches_ = 0;
  std::vector<MacAddress> victims_;
  std::set<MacAddress> victim_set_;
  std::vector<MacAddress> pending_victims_;
  std::set<MacAddress> filter_;
  SimTime last_seen_ = 0;
  SimTime loss_detected_last_seen_ = 0;
  std::vector<Channel> sweep_channels_;
  std::size_t sweep_pos_ = 0;
  std::optional<Channel> reacquired_;
  bool lost_ = false;
  std::vector<SimTime> latencies_;
  ListenerId listener_ = 0;
  std::optional<EventId> cycle_event_;
  std::optional<EventId> reload_event_;
  std::optional<EventId> sweep_event_;
};

}  // namespace jamrange
