#include <algorithm>
#include <fstream>
#include <sstream>

#include "jamrange/attack.hpp"
#include "jamrange/errors.hpp"

namespace jamrange {

std::string_view attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::DisassocAmok: return "disassoc-amok";
    case AttackKind::TargetedDeauth: return "deauth";
    case AttackKind::BeaconFlood: return "beacon-flood";
    case AttackKind::AuthDoS: return "auth-dos";
  }
  return "?";
}

AttackKind parse_attack_kind(std::string_view text) {
  for (auto k : {AttackKind::DisassocAmok, AttackKind::TargetedDeauth, AttackKind::BeaconFlood, AttackKind::AuthDoS}) {
    if (attack_kind_name(k) == text) return k;
  }
  throw DomainError("unknown attack kind '" + std::string(text) +
                    "' (expected disassoc-amok, deauth, beacon-flood or auth-dos)");
}

std::string_view filter_mode_name(FilterMode mode) {
  switch (mode) {
    case FilterMode::None: return "none";
    case FilterMode::Whitelist: return "whitelist";
    case FilterMode::Blacklist: return "blacklist";
  }
  return "?";
}

std::string_view session_state_name(SessionState state) {
  switch (state) {
    case SessionState::Locked: return "locked";
    case SessionState::Sweeping: return "sweeping";
    case SessionState::Stopped: return "stopped";
  }
  return "?";
}

std::set<MacAddress> parse_filter_list(std::string_view text, std::vector<std::size_t>* bad_lines) {
  std::set<MacAddress> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    try {
      out.insert(MacAddress::parse(line));
    } catch (const ParseError&) {
      if (bad_lines) bad_lines->push_back(lineno);
    }
  }
  return out;
}

AttackSession::AttackSession(Simulation& sim, IfaceId iface, AttackConfig cfg, FeedSink feed, std::string id)
    : sim_(sim), iface_(iface), cfg_(std::move(cfg)), feed_(std::move(feed)), id_(std::move(id)) {
  const auto& radio = sim_.iface(iface_);
  if (radio.mode() != Mode::Monitor) {
    throw ModeError("attacks require monitor mode; " + radio.name() + " is in managed mode");
  }
  if (cfg_.cycle_interval <= 0) throw ConfigError("cycle_interval must be positive");
  if (cfg_.broadcast_every <= 0) throw ConfigError("broadcast_every must be positive");
  if (cfg_.loss_timeout <= 0 || cfg_.sweep_dwell <= 0) throw ConfigError("pursuit timings must be positive");
  if (cfg_.burst <= 0) throw ConfigError("burst must be positive");
  if (targeted() && !cfg_.target) {
    throw ConfigError(std::string(attack_kind_name(cfg_.kind)) + " attack needs a target");
  }
  if (cfg_.pursuit && !cfg_.target) throw ConfigError("pursuit mode needs a target");
  if (cfg_.kind == AttackKind::TargetedDeauth && !cfg_.client) throw ConfigError("deauth attack needs a client");
  if (cfg_.filter_mode != FilterMode::None && cfg_.filter_path.empty()) {
    throw ConfigError("filter mode " + std::string(filter_mode_name(cfg_.filter_mode)) + " needs a filter file");
  }

  if (cfg_.target) {
    if (!radio.supports(cfg_.target->channel.band)) {
      throw DomainError(radio.name() + " does not support " + std::string(band_label(cfg_.target->channel.band)) +
                        " (target channel " + std::to_string(cfg_.target->channel.number) + ")");
    }
    sim_.tune(iface_, cfg_.target->channel);
  }
  locked_ = sim_.iface(iface_).tuned();
  started_ = sim_.now();
  last_seen_ = started_;

  LogData d = LogData::object();
  d["id"] = id_;
  d["kind"] = std::string(attack_kind_name(cfg_.kind));
  if (cfg_.target) d["bssid"] = cfg_.target->bssid.str();
  d["channel"] = locked_.number;
  d["pursuit"] = cfg_.pursuit;
  d["filter"] = std::string(filter_mode_name(cfg_.filter_mode));
  sim_.record("attack_start", std::move(d));

  // Clients already overheard on the target channel are known victims.
  for (const auto& cap : sim_.iface(iface_).inbox()) {
    if (cap.channel == locked_) observe(cap);
  }
  listener_ = sim_.add_listener(iface_, [this](const CapturedFrame& cap) { observe(cap); });

  if (cfg_.filter_mode != FilterMode::None) {
    const auto secs = cfg_.filter_reload_interval / 1000;
    emit(FeedWarning{"Periodically re-reading blacklist/whitelist every " + std::to_string(secs) + " seconds"});
    reload_filter_lists();
    schedule_reload();
  }
  cycle_event_ = sim_.schedule_at(sim_.now(), [this] {
    cycle_event_.reset();
    run_cycle();
  });
}

AttackSession::~AttackSession() { teardown(); }

void AttackSession::schedule_reload() {
  reload_event_ = sim_.schedule_in(cfg_.filter_reload_interval, [this] {
    reload_event_.reset();
    reload_filter_lists();
    schedule_reload();
  });
}

bool AttackSession::targeted() const noexcept { return cfg_.kind != AttackKind::BeaconFlood; }

bool AttackSession::is_target_allowed(const MacAddress& mac) const {
  switch (cfg_.filter_mode) {
    case FilterMode::None: return true;
    case FilterMode::Whitelist: return !filter_.contains(mac);
    case FilterMode::Blacklist: return filter_.contains(mac);
  }
  return true;
}

std::uint64_t AttackSession::speed() const {
  while (!recent_.empty() && recent_.front() <= sim_.now() - kSpeedWindow) recent_.pop_front();
  return recent_.size();
}

void AttackSession::emit(FeedEvent::Body body) {
  if (feed_) feed_(FeedEvent{sim_.now(), std::move(body)});
}

void AttackSession::emit_stats(std::size_t injected) {
  if (injected == 0) return;
  const auto s = speed();
  peak_speed_ = std::max(peak_speed_, s);
  emit(FeedStats{packets_, s});
}

void AttackSession::inject(ManagementFrame frame, std::vector<ManagementFrame>& out) {
  sim_.inject(iface_, frame, id_);
  out.push_back(sim_.injected_frames().back());
  ++packets_;
  recent_.push_back(sim_.now());
}

void AttackSession::add_victim(const MacAddress& mac) {
  if (mac.is_broadcast() || mac.is_zero()) return;
  if (cfg_.target && mac == cfg_.target->bssid) return;
  if (victim_set_.contains(mac)) return;
  if (std::find(pending_victims_.begin(), pending_victims_.end(), mac) != pending_victims_.end()) return;
  pending_victims_.push_back(mac);
}

void AttackSession::observe(const CapturedFrame& cap) {
  if (state_ == SessionState::Stopped || !cfg_.target) return;
  const auto& f = cap.frame;
  const MacAddress& bssid = cfg_.target->bssid;

  std::optional<MacAddress> announced;
  if (auto* b = f.as<Beacon>()) announced = b->bssid;
  if (auto* p = f.as<ProbeResponse>()) announced = p->bssid;
  if (announced == bssid) {
    if (state_ == SessionState::Sweeping) {
      reacquire(cap.channel);
    } else if (cap.channel == locked_) {
      last_seen_ = sim_.now();
    }
  }
  if (state_ != SessionState::Locked || cap.channel != locked_) return;

  const MacAddress src = frame_src(f);
  const MacAddress dst = frame_dst(f);
  const auto fb = frame_bssid(f);
  if (src == bssid || dst == bssid || fb == bssid) {
    add_victim(src);
    add_victim(dst);
  }
  // Amok answers every join attempt on the spot instead of waiting for the
  // next cycle.
  const bool joining = (f.as<Authentication>() || f.as<AssociationRequest>()) && dst == bssid && src != bssid;
  if (joining && cfg_.kind == AttackKind::DisassocAmok) react(src);
}

void AttackSession::react(const MacAddress& victim) {
  if (victim.is_broadcast() || victim.is_zero() || !is_target_allowed(victim)) return;
  const MacAddress& bssid = cfg_.target->bssid;
  std::vector<ManagementFrame> out;
  inject(forge(ForgeKind::Disassoc, bssid, victim, bssid, cfg_.reason), out);
  inject(forge(ForgeKind::Disassoc, victim, bssid, bssid, cfg_.reason), out);
  emit(FeedDisconnect{victim, bssid, locked_.number});
}

std::vector<ManagementFrame> AttackSession::amok_cycle() {
  std::vector<ManagementFrame> out;
  if (state_ != SessionState::Locked || !cfg_.target) return out;
  for (const auto& mac : pending_victims_) {
    if (victim_set_.insert(mac).second) victims_.push_back(mac);
  }
  pending_victims_.clear();

  const MacAddress& bssid = cfg_.target->bssid;
  std::vector<MacAddress> targets;
  for (const auto& v : victims_) {
    if (is_target_allowed(v)) targets.push_back(v);
  }
  for (const auto& v : targets) {
    inject(forge(ForgeKind::Disassoc, bssid, v, bssid, cfg_.reason), out);
    inject(forge(ForgeKind::Disassoc, v, bssid, bssid, cfg_.reason), out);
    emit(FeedDisconnect{v, bssid, locked_.number});
  }
  ++cycles_;
  if (cycles_ % static_cast<std::uint64_t>(cfg_.broadcast_every) == 0 && !targets.empty() &&
      cfg_.filter_mode == FilterMode::None) {
    inject(forge(ForgeKind::Deauth, bssid, MacAddress::broadcast(), bssid, cfg_.reason), out);
    for (const auto& v : targets) emit(FeedDisconnect{v, MacAddress::broadcast(), locked_.number});
  }
  return out;
}

std::vector<ManagementFrame> AttackSession::targeted_deauth_cycle() {
  std::vector<ManagementFrame> out;
  const MacAddress& bssid = cfg_.target->bssid;
  const MacAddress& client = *cfg_.client;
  if (!is_target_allowed(client)) return out;
  inject(forge(ForgeKind::Deauth, bssid, client, bssid, cfg_.reason), out);
  inject(forge(ForgeKind::Deauth, client, bssid, bssid, cfg_.reason), out);
  emit(FeedDisconnect{client, bssid, locked_.number});
  return out;
}

MacAddress AttackSession::random_mac() {
  MacAddress::Octets o{};
  const std::uint64_t draw = sim_.rng()();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = static_cast<std::uint8_t>(draw >> (8 * i));
  o[0] = static_cast<std::uint8_t>((o[0] & 0xFC) | 0x02);
  return MacAddress(o);
}

std::vector<ManagementFrame> AttackSession::auth_dos_cycle() {
  std::vector<ManagementFrame> out;
  for (int i = 0; i < cfg_.burst; ++i) {
    inject(ManagementFrame{Authentication{random_mac(), cfg_.target->bssid, true}}, out);
  }
  return out;
}

std::vector<ManagementFrame> AttackSession::beacon_flood_cycle() {
  static constexpr std::string_view kAlnum = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  std::vector<ManagementFrame> out;
  for (int i = 0; i < cfg_.burst; ++i) {
    const MacAddress bssid = random_mac();
    std::string essid(8, ' ');
    for (auto& c : essid) c = kAlnum[sim_.uniform(0, static_cast<std::int64_t>(kAlnum.size()) - 1)];
    inject(ManagementFrame{Beacon{bssid, std::move(essid), locked_, EncryptionType::Open}}, out);
  }
  return out;
}

void AttackSession::run_cycle() {
  if (state_ == SessionState::Stopped) return;
  if (cfg_.target) pursuit_check();
  if (state_ == SessionState::Stopped) return;
  if (state_ == SessionState::Locked) {
    std::vector<ManagementFrame> sent;
    switch (cfg_.kind) {
      case AttackKind::DisassocAmok: sent = amok_cycle(); break;
      case AttackKind::TargetedDeauth: sent = targeted_deauth_cycle(); break;
      case AttackKind::AuthDoS: sent = auth_dos_cycle(); break;
      case AttackKind::BeaconFlood: sent = beacon_flood_cycle(); break;
    }
    emit_stats(sent.size());
  }
  cycle_event_ = sim_.schedule_in(cfg_.cycle_interval, [this] {
    cycle_event_.reset();
    run_cycle();
  });
}

PursuitStatus AttackSession::pursuit_check() {
  if (reacquired_) {
    PursuitStatus s{PursuitOutcome::Reacquired, reacquired_};
    reacquired_.reset();
    return s;
  }
  if (state_ == SessionState::Stopped || state_ == SessionState::Sweeping) return {PursuitOutcome::Lost, {}};
  if (!cfg_.target || sim_.now() - last_seen_ < cfg_.loss_timeout) return {PursuitOutcome::Locked, {}};
  if (cfg_.pursuit) {
    start_sweep();
  } else {
    lose_target();
  }
  return {PursuitOutcome::Lost, {}};
}

void AttackSession::start_sweep() {
  state_ = SessionState::Sweeping;
  lost_ = true;
  loss_detected_last_seen_ = last_seen_;
  pending_victims_.clear();
  sweep_channels_ = sim_.iface(iface_).supported_channels();
  auto it = std::upper_bound(sweep_channels_.begin(), sweep_channels_.end(), locked_);
  sweep_pos_ = static_cast<std::size_t>(it - sweep_channels_.begin());

  LogData d = LogData::object();
  d["id"] = id_;
  d["event"] = "lost";
  d["channel"] = locked_.number;
  d["last_seen"] = last_seen_;
  sim_.record("pursuit", std::move(d));
  sweep_dwell();
}

void AttackSession::sweep_dwell() {
  if (state_ != SessionState::Sweeping) return;
  const Channel ch = sweep_channels_[sweep_pos_ % sweep_channels_.size()];
  ++sweep_pos_;
  sim_.tune(iface_, ch);
  sweep_event_ = sim_.schedule_in(cfg_.sweep_dwell, [this] {
    sweep_event_.reset();
    sweep_dwell();
  });
}

void AttackSession::reacquire(const Channel& channel) {
  if (sweep_event_) sim_.cancel(*sweep_event_);
  sweep_event_.reset();
  const Channel old = locked_;
  const SimTime latency = sim_.now() - loss_detected_last_seen_;
  locked_ = channel;
  state_ = SessionState::Locked;
  lost_ = false;
  last_seen_ = sim_.now();
  ++switches_;
  latencies_.push_back(latency);
  reacquired_ = channel;

  LogData d = LogData::object();
  d["id"] = id_;
  d["event"] = "reacquired";
  d["old_channel"] = old.number;
  d["new_channel"] = channel.number;
  d["latency"] = latency;
  sim_.record("pursuit", std::move(d));
  emit(FeedPursuit{old.number, channel.number});

  // Resume the flood at once on the new channel.
  if (cycle_event_) sim_.cancel(*cycle_event_);
  cycle_event_ = sim_.schedule_at(sim_.now(), [this] {
    cycle_event_.reset();
    run_cycle();
  });
}

void AttackSession::lose_target() {
  LogData d = LogData::object();
  d["id"] = id_;
  d["event"] = "lost";
  d["channel"] = locked_.number;
  d["last_seen"] = last_seen_;
  sim_.record("pursuit", std::move(d));
  lost_ = true;
  stop();
}

std::size_t AttackSession::reload_filter_lists() {
  if (cfg_.filter_mode == FilterMode::None) return filter_.size();
  auto warn = [this](std::string text) {
    LogData d = LogData::object();
    d["id"] = id_;
    d["text"] = text;
    sim_.record("warning", std::move(d));
    emit(FeedWarning{std::move(text)});
  };
  std::ifstream in(cfg_.filter_path, std::ios::binary);
  if (!in) {
    warn("cannot read filter list " + cfg_.filter_path.string() + "; keeping " + std::to_string(filter_.size()) +
         " entries");
    return filter_.size();
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::vector<std::size_t> bad;
  filter_ = parse_filter_list(buf.str(), &bad);
  for (auto line : bad) {
    warn("skipping malformed line " + std::to_string(line) + " in " + cfg_.filter_path.string());
  }
  LogData d = LogData::object();
  d["id"] = id_;
  d["mode"] = std::string(filter_mode_name(cfg_.filter_mode));
  d["count"] = filter_.size();
  sim_.record("filter_reload", std::move(d));
  return filter_.size();
}

void AttackSession::teardown() {
  if (cycle_event_) sim_.cancel(*cycle_event_);
  if (reload_event_) sim_.cancel(*reload_event_);
  if (sweep_event_) sim_.cancel(*sweep_event_);
  cycle_event_.reset();
  reload_event_.reset();
  sweep_event_.reset();
  if (listener_) sim_.remove_listener(listener_);
  listener_ = 0;
}

AttackStats AttackSession::stop() {
  if (final_stats_) return *final_stats_;
  teardown();
  state_ = SessionState::Stopped;
  stopped_at_ = sim_.now();
  final_stats_ = AttackStats{packets_, peak_speed_, switches_, *stopped_at_ - started_};

  LogData d = LogData::object();
  d["id"] = id_;
  d["packets_sent"] = packets_;
  d["peak_speed"] = peak_speed_;
  d["channel_switches"] = switches_;
  d["duration"] = final_stats_->duration;
  sim_.record("attack_stop", std::move(d));
  return *final_stats_;
}

}  // namespace jamrange
