#include "jamrange/simcore.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "jamrange/errors.hpp"

namespace jamrange {

std::string_view mode_name(Mode mode) { return mode == Mode::Monitor ? "monitor" : "managed"; }

bool RadioInterface::supports(Band band) const noexcept {
  return std::find(bands_.begin(), bands_.end(), band) != bands_.end();
}

std::string LogEntry::to_json_line() const {
  LogData line = LogData::object();
  line["t"] = t;
  line["kind"] = kind;
  line["data"] = data.is_null() ? LogData::object() : data;
  return line.dump();
}

LogEntry LogEntry::from_json_line(std::string_view line) {
  auto j = LogData::parse(line);
  LogEntry e;
  e.t = j.at("t").get<SimTime>();
  e.kind = j.at("kind").get<std::string>();
  e.data = j.contains("data") ? j.at("data") : LogData::object();
  return e;
}

void EventLog::append(SimTime t, std::string kind, LogData data) {
  entries_.push_back(LogEntry{t, std::move(kind), std::move(data)});
}

void EventLog::write_jsonl(std::ostream& out) const {
  for (const auto& e : entries_) out << e.to_json_line() << '\n';
}

std::string EventLog::to_jsonl() const {
  std::ostringstream out;
  write_jsonl(out);
  return out.str();
}

std::vector<LogEntry> EventLog::read_jsonl(std::istream& in) {
  std::vector<LogEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(LogEntry::from_json_line(line));
    } catch (const std::exception& e) {
      throw ParseError("log line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
  }
  return out;
}

LogData frame_log_fields(const ManagementFrame& frame) {
  LogData d = LogData::object();
  d["type"] = std::string(subtype_name(frame));
  d["src"] = frame_src(frame).str();
  d["dst"] = frame_dst(frame).str();
  if (auto bssid = frame_bssid(frame)) d["bssid"] = bssid->str();
  d["seq"] = frame.seq;
  if (auto* f = frame.as<Deauthentication>()) d["reason"] = f->reason.value();
  if (auto* f = frame.as<Disassociation>()) d["reason"] = f->reason.value();
  if (auto* f = frame.as<Authentication>()) d["success"] = f->success;
  if (auto* f = frame.as<AssociationResponse>()) d["success"] = f->success;
  if (auto* f = frame.as<Beacon>()) d["essid"] = display_essid(f->essid);
  if (auto* f = frame.as<ProbeResponse>()) d["essid"] = display_essid(f->essid);
  return d;
}

Simulation::Simulation(std::uint64_t seed, MediumConfig medium)
    : seed_(seed), medium_(medium), rng_(seed) {
  if (medium_.propagation_delay < 0) throw ConfigError("propagation delay must be >= 0");
  if (medium_.loss_rate < 0.0 || medium_.loss_rate > 1.0) throw ConfigError("loss rate must be in [0,1]");
}

std::int64_t Simulation::uniform(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ContractError("uniform: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng_() % span);
}

EventId Simulation::schedule_at(SimTime t, std::function<void()> fn) {
  if (t < clock_) {
    throw ContractError("cannot schedule at " + std::to_string(t) + " before clock " + std::to_string(clock_));
  }
  const EventId id = next_event_++;
  queue_.emplace(t, id);
  live_.emplace(id, std::move(fn));
  return id;
}

EventId Simulation::schedule_in(SimTime delay, std::function<void()> fn) {
  return schedule_at(clock_ + delay, std::move(fn));
}

bool Simulation::cancel(EventId id) { return live_.erase(id) > 0; }

std::size_t Simulation::advance_until(SimTime t) {
  if (t < clock_) {
    throw ContractError("advance_until(" + std::to_string(t) + ") is before clock " + std::to_string(clock_));
  }
  std::size_t processed = 0;
  while (!queue_.empty() && queue_.top().first <= t) {
    const auto [when, id] = queue_.top();
    queue_.pop();
    auto it = live_.find(id);
    if (it == live_.end()) continue;  // cancelled
    auto fn = std::move(it->second);
    live_.erase(it);
    clock_ = when;
    fn();
    ++processed;
  }
  clock_ = t;
  return processed;
}

IfaceId Simulation::add_interface(InterfaceSpec spec) {
  if (spec.bands.empty()) throw ConfigError("interface " + spec.name + " has no bands");
  for (const auto& existing : ifaces_) {
    if (existing.name_ == spec.name) throw ConfigError("duplicate interface name " + spec.name);
  }
  RadioInterface iface;
  iface.id_ = static_cast<IfaceId>(ifaces_.size());
  iface.name_ = std::move(spec.name);
  iface.bands_ = std::move(spec.bands);
  iface.mac_ = spec.mac;
  iface.mode_ = spec.mode;
  iface.inbox_capacity_ = spec.inbox_capacity;
  if (!spec.channel.valid()) throw DomainError("invalid channel " + std::to_string(spec.channel.number));
  if (!iface.supports(spec.channel.band)) {
    throw DomainError("interface " + iface.name_ + " does not support band " +
                      std::string(band_label(spec.channel.band)));
  }
  iface.tuned_ = spec.channel;
  ifaces_.push_back(std::move(iface));
  return ifaces_.back().id_;
}

RadioInterface& Simulation::mutable_iface(IfaceId id) {
  if (id >= ifaces_.size()) throw ContractError("unknown interface id " + std::to_string(id));
  return ifaces_[id];
}

const RadioInterface& Simulation::iface(IfaceId id) const {
  if (id >= ifaces_.size()) throw ContractError("unknown interface id " + std::to_string(id));
  return ifaces_[id];
}

std::optional<IfaceId> Simulation::find_interface(std::string_view name) const {
  for (const auto& i : ifaces_) {
    if (i.name_ == name) return i.id_;
  }
  return std::nullopt;
}

void Simulation::set_mode(IfaceId id, Mode mode) { mutable_iface(id).mode_ = mode; }

void Simulation::tune(IfaceId id, const Channel& channel) {
  auto& i = mutable_iface(id);
  if (!channel.valid()) throw DomainError("invalid channel " + std::to_string(channel.number));
  if (!i.supports(channel.band)) {
    throw DomainError("interface " + i.name_ + " does not support band " + std::string(band_label(channel.band)));
  }
  i.tuned_ = channel;
}

std::uint64_t Simulation::inject(IfaceId id, ManagementFrame frame, std::string_view origin) {
  auto& i = mutable_iface(id);
  validate_frame(frame);
  if (frame_src(frame) != i.mac_ && i.mode_ != Mode::Monitor) {
    throw ModeError("interface " + i.name_ + " is in managed mode; spoofed " +
                    std::string(subtype_name(frame)) + " from " + frame_src(frame).str() +
                    " requires monitor mode");
  }
  frame.seq = i.next_seq_++;
  const std::uint64_t injection = next_injection_++;
  const Channel channel = i.tuned_;

  LogData d = LogData::object();
  d["id"] = injection;
  d["iface"] = i.name_;
  if (!origin.empty()) d["origin"] = std::string(origin);
  d["channel"] = channel.number;
  d.update(frame_log_fields(frame));
  record("inject", std::move(d));

  injected_.push_back(frame);
  schedule_in(medium_.propagation_delay,
              [this, injection, id, frame = std::move(frame), channel] { deliver(injection, id, frame, channel); });
  return injection;
}

void Simulation::deliver(std::uint64_t injection, IfaceId from, const ManagementFrame& frame, Channel channel) {
  const MacAddress dst = frame_dst(frame);
  const MacAddress transmitter = ifaces_[from].mac_;
  std::vector<IfaceId> receivers;
  LogData lost = LogData::array();
  for (auto& i : ifaces_) {
    if (i.id_ == from || i.tuned_ != channel) continue;
    if (i.mode_ == Mode::Managed && dst != i.mac_ && !dst.is_broadcast()) continue;
    if (medium_.loss_rate > 0.0) {
      const double draw = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
      if (draw < medium_.loss_rate) {
        lost.push_back(i.name_);
        continue;
      }
    }
    receivers.push_back(i.id_);
  }

  LogData d = LogData::object();
  d["id"] = injection;
  d["channel"] = channel.number;
  LogData names = LogData::array();
  for (auto r : receivers) names.push_back(ifaces_[r].name_);
  d["receivers"] = std::move(names);
  if (!lost.empty()) d["lost"] = std::move(lost);
  record("deliver", std::move(d));

  // Receiver set is fixed before any listener runs; listeners may retune.
  for (auto r : receivers) {
    auto& i = ifaces_[r];
    CapturedFrame cap{frame, channel, link_pwr(r, transmitter), clock_};
    ++i.captured_;
    if (i.inbox_capacity_ > 0) {
      if (i.inbox_.size() >= i.inbox_capacity_) i.inbox_.pop_front();
      i.inbox_.push_back(cap);
    }
    std::vector<ListenerId> ids;
    for (const auto& [lid, slot] : listeners_) {
      if (slot.iface == r) ids.push_back(lid);
    }
    for (auto lid : ids) {
      auto it = listeners_.find(lid);
      if (it == listeners_.end()) continue;
      auto fn = it->second.fn;
      fn(cap);
    }
  }
}

ListenerId Simulation::add_listener(IfaceId id, Listener fn) {
  mutable_iface(id);
  const ListenerId lid = next_listener_++;
  listeners_.emplace(lid, ListenerSlot{id, std::move(fn)});
  return lid;
}

void Simulation::remove_listener(ListenerId id) { listeners_.erase(id); }

void Simulation::set_link_pwr(IfaceId observer, const MacAddress& source, int pwr) {
  mutable_iface(observer);
  if (pwr < 0 || pwr > 100) throw DomainError("link power must be within 0..100");
  links_[{observer, source}] = pwr;
}

int Simulation::link_pwr(IfaceId observer, const MacAddress& source) const {
  auto it = links_.find({observer, source});
  return it == links_.end() ? kDefaultLinkPwr : it->second;
}

}  // namespace jamrange
