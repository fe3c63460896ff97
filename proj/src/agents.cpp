#include "jamrange/agents.hpp"

#include <algorithm>

#include "jamrange/errors.hpp"

namespace jamrange {

namespace {

std::vector<Band> ap_bands(const ApConfig& cfg) {
  if (!cfg.bands.empty()) return cfg.bands;
  return {cfg.channel.band};
}

bool has_band(const std::vector<Band>& bands, Band b) {
  return std::find(bands.begin(), bands.end(), b) != bands.end();
}

}  // namespace

void validate(const ApConfig& cfg) {
  const std::string who = "AP " + cfg.bssid.str();
  if (cfg.bssid.is_broadcast() || cfg.bssid.is_zero()) throw ConfigError(who + ": bssid must be unicast");
  if (cfg.essid.size() > kMaxEssidLength) throw ConfigError(who + ": essid longer than 32 bytes");
  if (!cfg.channel.valid()) throw ConfigError(who + ": invalid channel " + std::to_string(cfg.channel.number));
  const auto bands = ap_bands(cfg);
  if (!has_band(bands, cfg.channel.band)) throw ConfigError(who + ": band mismatch for channel " + std::to_string(cfg.channel.number));
  if (cfg.beacon_interval <= 0) throw ConfigError(who + ": beacon_interval must be positive");
  if (cfg.hop_enabled && cfg.hop_channels.empty()) throw ConfigError(who + ": hop_enabled requires hop_channels");
  for (const auto& c : cfg.hop_channels) {
    if (!c.valid()) throw ConfigError(who + ": invalid hop channel " + std::to_string(c.number));
    if (!has_band(bands, c.band)) {
      throw ConfigError(who + ": band mismatch for hop channel " + std::to_string(c.number) + " (" +
                        std::string(band_label(c.band)) + " not supported)");
    }
  }
  if (cfg.hop_threshold <= 0 || cfg.hop_window <= 0 || cfg.hop_delay < 0) {
    throw ConfigError(who + ": hop parameters must be positive");
  }
  if (cfg.auth_table_capacity <= 0) throw ConfigError(who + ": auth_table_capacity must be positive");
  if (cfg.auth_timeout <= 0) throw ConfigError(who + ": auth_timeout must be positive");
}

void validate(const StationConfig& cfg) {
  const std::string who = "station " + cfg.mac.str();
  if (cfg.mac.is_broadcast() || cfg.mac.is_zero()) throw ConfigError(who + ": mac must be unicast");
  if (cfg.reconnect_backoff_initial <= 0 || cfg.backoff_cap <= 0 || cfg.backoff_factor < 1) {
    throw ConfigError(who + ": backoff values must be positive");
  }
  if (cfg.scan_dwell <= 0 || cfg.activity_interval <= 0 || cfg.beacon_loss_timeout <= 0 ||
      cfg.handshake_timeout <= 0) {
    throw ConfigError(who + ": timing values must be positive");
  }
  if (cfg.bands.empty()) throw ConfigError(who + ": no bands");
  for (const auto& c : cfg.channels) {
    if (!c.valid()) throw ConfigError(who + ": invalid channel " + std::to_string(c.number));
    if (!has_band(cfg.bands, c.band)) {
      throw ConfigError(who + ": band mismatch for channel " + std::to_string(c.number));
    }
  }
}

// ---------------------------------------------------------------------------
// AccessPoint

AccessPoint::AccessPoint(Simulation& sim, ApConfig cfg) : sim_(sim), cfg_(std::move(cfg)), channel_(cfg_.channel) {
  validate(cfg_);
  InterfaceSpec spec;
  spec.name = "ap:" + cfg_.bssid.str();
  spec.bands = ap_bands(cfg_);
  spec.mac = cfg_.bssid;
  // APs watch the whole channel so they can notice frames forged in their name.
  spec.mode = Mode::Monitor;
  spec.channel = channel_;
  spec.inbox_capacity = 0;
  iface_ = sim_.add_interface(std::move(spec));
  listener_ = sim_.add_listener(iface_, [this](const CapturedFrame& cap) { handle_frame(cap); });

  LogData d = LogData::object();
  d["bssid"] = cfg_.bssid.str();
  d["essid"] = display_essid(cfg_.essid);
  d["channel"] = channel_.number;
  d["enc"] = std::string(encryption_name(cfg_.enc));
  d["hop_enabled"] = cfg_.hop_enabled;
  sim_.record("spawn_ap", std::move(d));

  beacon_event_ = sim_.schedule_in(sim_.uniform(1, cfg_.beacon_interval), [this] { beacon(); });
}

AccessPoint::~AccessPoint() {
  sim_.remove_listener(listener_);
  if (beacon_event_) sim_.cancel(*beacon_event_);
  if (hop_event_) sim_.cancel(*hop_event_);
}

std::vector<MacAddress> AccessPoint::association_table() const { return {assoc_.begin(), assoc_.end()}; }

void AccessPoint::send(ManagementFrame frame) { sim_.inject(iface_, std::move(frame), "ap"); }

void AccessPoint::beacon() {
  send(ManagementFrame{Beacon{cfg_.bssid, cfg_.essid, channel_, cfg_.enc}});
  beacon_event_ = sim_.schedule_in(cfg_.beacon_interval, [this] { beacon(); });
}

void AccessPoint::expire_auth() {
  const SimTime now = sim_.now();
  for (auto it = auth_.begin(); it != auth_.end();) {
    if (!assoc_.contains(it->first) && now - it->second >= cfg_.auth_timeout) {
      it = auth_.erase(it);
    } else {
      ++it;
    }
  }
}

void AccessPoint::handle_frame(const CapturedFrame& cap) {
  const auto& f = cap.frame;
  const MacAddress& me = cfg_.bssid;

  if (auto* p = f.as<ProbeRequest>()) {
    if (p->src != me) send(ManagementFrame{ProbeResponse{me, cfg_.essid, channel_, cfg_.enc, p->src}});
    return;
  }
  if (auto* a = f.as<Authentication>()) {
    if (a->dst != me || a->src == me) return;
    expire_auth();
    bool ok = true;
    if (auto it = auth_.find(a->src); it != auth_.end()) {
      it->second = sim_.now();
    } else if (auth_.size() < static_cast<std::size_t>(cfg_.auth_table_capacity)) {
      auth_.emplace(a->src, sim_.now());
    } else {
      ok = false;
    }
    if (!ok) {
      LogData d = LogData::object();
      d["bssid"] = me.str();
      d["client"] = a->src.str();
      d["table"] = auth_.size();
      sim_.record("auth_rejected", std::move(d));
    }
    send(ManagementFrame{Authentication{me, a->src, ok}});
    return;
  }
  if (auto* r = f.as<AssociationRequest>()) {
    if (r->bssid != me || r->src == me) return;
    const bool ok = auth_.contains(r->src);
    if (ok) assoc_.insert(r->src);
    send(ManagementFrame{AssociationResponse{me, r->src, ok}});
    return;
  }

  const Deauthentication* deauth = f.as<Deauthentication>();
  const Disassociation* disassoc = f.as<Disassociation>();
  if (!deauth && !disassoc) return;
  const MacAddress src = deauth ? deauth->src : disassoc->src;
  const MacAddress dst = deauth ? deauth->dst : disassoc->dst;
  const MacAddress bssid = deauth ? deauth->bssid : disassoc->bssid;

  if (src == me) {
    // This AP never transmits deauth/disassoc, so any frame claiming to be
    // from it is forged.
    note_spoof();
    return;
  }
  if (dst == me && bssid == me && assoc_.contains(src)) {
    assoc_.erase(src);
    if (deauth) auth_.erase(src);
    LogData d = LogData::object();
    d["bssid"] = me.str();
    d["client"] = src.str();
    d["type"] = std::string(subtype_name(f));
    sim_.record("client_removed", std::move(d));
  }
}

void AccessPoint::note_spoof() {
  const SimTime now = sim_.now();
  spoof_times_.push_back(now);
  while (!spoof_times_.empty() && spoof_times_.front() <= now - cfg_.hop_window) spoof_times_.pop_front();
  if (!cfg_.hop_enabled || hop_event_) return;
  if (spoof_times_.size() < static_cast<std::size_t>(cfg_.hop_threshold)) return;

  LogData d = LogData::object();
  d["bssid"] = cfg_.bssid.str();
  d["spoofs"] = spoof_times_.size();
  d["hop_at"] = now + cfg_.hop_delay;
  sim_.record("hop_scheduled", std::move(d));
  spoof_times_.clear();
  hop_event_ = sim_.schedule_in(cfg_.hop_delay, [this] { hop(); });
}

void AccessPoint::hop() {
  hop_event_.reset();
  const auto& list = cfg_.hop_channels;
  auto it = std::find(list.begin(), list.end(), channel_);
  Channel next = it == list.end() ? list.front() : list[(static_cast<std::size_t>(it - list.begin()) + 1) % list.size()];
  const Channel old = channel_;
  channel_ = next;
  sim_.tune(iface_, channel_);
  // Clients are left behind on the old channel.
  assoc_.clear();
  auth_.clear();
  spoof_times_.clear();
  ++hops_;
  LogData d = LogData::object();
  d["bssid"] = cfg_.bssid.str();
  d["from"] = old.number;
  d["to"] = next.number;
  sim_.record("hop", std::move(d));
}

// ---------------------------------------------------------------------------
// Station

std::string_view phase_name(StationPhase phase) {
  switch (phase) {
    case StationPhase::Disconnected: return "disconnected";
    case StationPhase::Scanning: return "scanning";
    case StationPhase::Authenticating: return "authenticating";
    case StationPhase::Associating: return "associating";
    case StationPhase::Associated: return "associated";
  }
  return "disconnected";
}

Station::Station(Simulation& sim, StationConfig cfg)
    : sim_(sim), cfg_(std::move(cfg)), backoff_(cfg_.reconnect_backoff_initial) {
  validate(cfg_);
  if (cfg_.channels.empty()) cfg_.channels = channels_for_bands(cfg_.bands);
  InterfaceSpec spec;
  spec.name = "sta:" + cfg_.mac.str();
  spec.bands = cfg_.bands;
  spec.mac = cfg_.mac;
  spec.mode = Mode::Managed;
  spec.channel = cfg_.channels.front();
  spec.inbox_capacity = 0;
  iface_ = sim_.add_interface(std::move(spec));
  listener_ = sim_.add_listener(iface_, [this](const CapturedFrame& cap) { handle_frame(cap); });

  LogData d = LogData::object();
  d["station"] = cfg_.mac.str();
  d["target_essid"] = display_essid(cfg_.target_essid);
  sim_.record("spawn_station", std::move(d));

  timer_ = sim_.schedule_in(sim_.uniform(1, cfg_.scan_dwell), [this] {
    timer_.reset();
    start_scan();
  });
}

Station::~Station() {
  sim_.remove_listener(listener_);
  cancel_timers();
}

SimTime Station::connected_time() const noexcept {
  return connected_accum_ + (phase_ == StationPhase::Associated ? sim_.now() - associated_since_ : 0);
}

void Station::cancel_timers() {
  for (auto* t : {&timer_, &activity_, &loss_check_}) {
    if (*t) sim_.cancel(**t);
    t->reset();
  }
}

void Station::send(ManagementFrame frame) { sim_.inject(iface_, std::move(frame), "station"); }

void Station::start_scan() {
  phase_ = StationPhase::Scanning;
  ap_.reset();
  scan_order_ = cfg_.channels;
  if (cached_channel_) {
    auto it = std::find(scan_order_.begin(), scan_order_.end(), *cached_channel_);
    if (it != scan_order_.end()) std::rotate(scan_order_.begin(), it, scan_order_.end());
  }
  scan_pos_ = 0;
  dwell_next();
}

void Station::dwell_next() {
  const Channel ch = scan_order_[scan_pos_ % scan_order_.size()];
  ++scan_pos_;
  sim_.tune(iface_, ch);
  timer_ = sim_.schedule_in(cfg_.scan_dwell, [this] {
    timer_.reset();
    dwell_next();
  });
}

void Station::join(const MacAddress& bssid, const Channel& channel) {
  cancel_timers();
  phase_ = StationPhase::Authenticating;
  ap_ = bssid;
  cached_channel_ = channel;
  LogData d = LogData::object();
  d["station"] = cfg_.mac.str();
  d["bssid"] = bssid.str();
  d["channel"] = channel.number;
  sim_.record("assoc_attempt", std::move(d));
  send(ManagementFrame{Authentication{cfg_.mac, bssid, true}});
  timer_ = sim_.schedule_in(cfg_.handshake_timeout, [this] {
    timer_.reset();
    attempt_failed("timeout");
  });
}

void Station::associated() {
  cancel_timers();
  phase_ = StationPhase::Associated;
  associated_since_ = sim_.now();
  last_beacon_ = sim_.now();
  backoff_ = cfg_.reconnect_backoff_initial;
  LogData d = LogData::object();
  d["station"] = cfg_.mac.str();
  d["bssid"] = ap_->str();
  d["channel"] = sim_.iface(iface_).tuned().number;
  sim_.record("assoc", std::move(d));
  schedule_activity();
  check_beacon_loss();
}

void Station::schedule_activity() {
  const SimTime jitter = cfg_.activity_interval / 10;
  const SimTime delay = cfg_.activity_interval + sim_.uniform(-jitter, jitter);
  activity_ = sim_.schedule_in(std::max<SimTime>(delay, 1), [this] {
    activity_.reset();
    if (phase_ != StationPhase::Associated) return;
    send(ManagementFrame{ProbeRequest{cfg_.mac}});
    schedule_activity();
  });
}

void Station::check_beacon_loss() {
  const SimTime deadline = last_beacon_ + cfg_.beacon_loss_timeout;
  if (sim_.now() >= deadline) {
    drop("beacon_loss", false);
    return;
  }
  loss_check_ = sim_.schedule_at(deadline, [this] {
    loss_check_.reset();
    check_beacon_loss();
  });
}

void Station::drop(std::string_view cause, bool use_backoff) {
  const StationPhase was = phase_;
  if (was == StationPhase::Associated) connected_accum_ += sim_.now() - associated_since_;
  cancel_timers();
  phase_ = StationPhase::Disconnected;
  if (use_backoff) ++disconnects_;

  LogData d = LogData::object();
  d["station"] = cfg_.mac.str();
  d["bssid"] = ap_ ? ap_->str() : std::string();
  d["cause"] = std::string(cause);
  d["was"] = std::string(phase_name(was));
  sim_.record("disassoc_observed", std::move(d));
  ap_.reset();

  if (!use_backoff) {
    timer_ = sim_.schedule_in(0, [this] {
      timer_.reset();
      start_scan();
    });
    return;
  }
  const SimTime delay = backoff_;
  backoff_history_.push_back(delay);
  backoff_ = std::min(backoff_ * cfg_.backoff_factor, cfg_.backoff_cap);
  LogData r = LogData::object();
  r["station"] = cfg_.mac.str();
  r["delay"] = delay;
  sim_.record("reconnect_scheduled", std::move(r));
  timer_ = sim_.schedule_in(delay, [this] {
    timer_.reset();
    start_scan();
  });
}

void Station::attempt_failed(std::string_view cause) {
  cancel_timers();
  LogData d = LogData::object();
  d["station"] = cfg_.mac.str();
  d["bssid"] = ap_ ? ap_->str() : std::string();
  d["cause"] = std::string(cause);
  sim_.record("assoc_failed", std::move(d));
  ap_.reset();
  phase_ = StationPhase::Disconnected;

  const SimTime delay = backoff_;
  backoff_history_.push_back(delay);
  backoff_ = std::min(backoff_ * cfg_.backoff_factor, cfg_.backoff_cap);
  LogData r = LogData::object();
  r["station"] = cfg_.mac.str();
  r["delay"] = delay;
  sim_.record("reconnect_scheduled", std::move(r));
  timer_ = sim_.schedule_in(delay, [this] {
    timer_.reset();
    start_scan();
  });
}

void Station::handle_frame(const CapturedFrame& cap) {
  const auto& f = cap.frame;
  const MacAddress& me = cfg_.mac;

  auto on_network = [&](const MacAddress& bssid, const std::string& essid, const Channel& channel) {
    if (phase_ == StationPhase::Scanning && essid == cfg_.target_essid) {
      join(bssid, channel);
    } else if (phase_ == StationPhase::Associated && ap_ == bssid) {
      last_beacon_ = sim_.now();
    }
  };
  if (auto* b = f.as<Beacon>()) return on_network(b->bssid, b->essid, cap.channel);
  if (auto* p = f.as<ProbeResponse>()) {
    if (p->dst == me) on_network(p->bssid, p->essid, cap.channel);
    return;
  }
  if (auto* a = f.as<Authentication>()) {
    if (phase_ != StationPhase::Authenticating || a->dst != me || a->src != ap_) return;
    if (!a->success) return attempt_failed("auth_rejected");
    cancel_timers();
    phase_ = StationPhase::Associating;
    send(ManagementFrame{AssociationRequest{me, *ap_}});
    timer_ = sim_.schedule_in(cfg_.handshake_timeout, [this] {
      timer_.reset();
      attempt_failed("timeout");
    });
    return;
  }
  if (auto* r = f.as<AssociationResponse>()) {
    if (phase_ != StationPhase::Associating || r->dst != me || r->bssid != ap_) return;
    if (!r->success) return attempt_failed("assoc_rejected");
    associated();
    return;
  }

  const Deauthentication* deauth = f.as<Deauthentication>();
  const Disassociation* disassoc = f.as<Disassociation>();
  if (!deauth && !disassoc) return;
  const MacAddress dst = deauth ? deauth->dst : disassoc->dst;
  const MacAddress bssid = deauth ? deauth->bssid : disassoc->bssid;
  if (dst != me && !dst.is_broadcast()) return;
  if (!ap_ || bssid != *ap_) return;
  if (phase_ == StationPhase::Disconnected || phase_ == StationPhase::Scanning) return;
  drop(subtype_name(f), true);
}

}  // namespace jamrange
