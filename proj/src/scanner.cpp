#include <algorithm>
#include <sstream>

#include "jamrange/attack.hpp"
#include "jamrange/errors.hpp"

namespace jamrange {

Scanner::Scanner(Simulation& sim, IfaceId iface, SimTime dwell_ms, SimTime duration, Done on_done)
    : sim_(sim), iface_(iface), dwell_(dwell_ms), ends_at_(sim.now() + std::max<SimTime>(duration, 0)),
      on_done_(std::move(on_done)) {
  const auto& radio = sim_.iface(iface_);
  if (radio.mode() != Mode::Monitor) {
    throw ModeError("scanning requires monitor mode; " + radio.name() + " is in managed mode");
  }
  if (dwell_ <= 0) throw ContractError("scan dwell must be positive");
  channels_ = radio.supported_channels();
  listener_ = sim_.add_listener(iface_, [this](const CapturedFrame& cap) { observe(cap); });
  end_event_ = sim_.schedule_at(ends_at_, [this] {
    end_event_.reset();
    finish();
  });
  if (duration > 0) dwell();
}

Scanner::~Scanner() {
  sim_.remove_listener(listener_);
  if (dwell_event_) sim_.cancel(*dwell_event_);
  if (end_event_) sim_.cancel(*end_event_);
}

void Scanner::dwell() {
  if (done_) return;
  const Channel ch = channels_[pos_ % channels_.size()];
  ++pos_;
  sim_.tune(iface_, ch);
  LogData d = LogData::object();
  d["iface"] = sim_.iface(iface_).name();
  d["channel"] = ch.number;
  sim_.record("scan_dwell", std::move(d));
  dwell_event_ = sim_.schedule_in(dwell_, [this] {
    dwell_event_.reset();
    dwell();
  });
}

void Scanner::finish() {
  if (done_) return;
  done_ = true;
  if (dwell_event_) sim_.cancel(*dwell_event_);
  dwell_event_.reset();
  sim_.remove_listener(listener_);
  if (on_done_) on_done_(records());
}

void Scanner::observe(const CapturedFrame& cap) {
  if (done_) return;
  const auto& f = cap.frame;
  auto upsert = [&](const MacAddress& bssid, const std::string& essid, const Channel& channel, EncryptionType enc) {
    auto it = std::find_if(seen_.begin(), seen_.end(), [&](const ScanRecord& r) { return r.bssid == bssid; });
    if (it == seen_.end()) {
      seen_.push_back(ScanRecord{0, bssid, channel, cap.pwr, enc, essid, false});
    } else {
      it->channel = channel;
      it->pwr = cap.pwr;
      it->enc = enc;
      it->essid = essid;
    }
  };
  if (auto* b = f.as<Beacon>()) return upsert(b->bssid, b->essid, b->channel, b->enc);
  if (auto* p = f.as<ProbeResponse>()) {
    upsert(p->bssid, p->essid, p->channel, p->enc);
    if (!p->dst.is_broadcast()) exchanges_.emplace(p->bssid, p->dst);
    return;
  }
  if (auto* a = f.as<Authentication>()) {
    exchanges_.emplace(a->src, a->dst);
    exchanges_.emplace(a->dst, a->src);
    return;
  }
  if (auto* r = f.as<AssociationRequest>()) return void(exchanges_.emplace(r->bssid, r->src));
  if (auto* r = f.as<AssociationResponse>()) return void(exchanges_.emplace(r->bssid, r->dst));
}

std::vector<ScanRecord> Scanner::records() const {
  std::vector<ScanRecord> out = seen_;
  std::set<MacAddress> aps;
  for (const auto& r : out) aps.insert(r.bssid);
  for (auto& r : out) {
    r.has_clients = std::any_of(exchanges_.begin(), exchanges_.end(), [&](const auto& pair) {
      const auto& [ap, peer] = pair;
      return ap == r.bssid && !aps.contains(peer) && !peer.is_broadcast() && !peer.is_zero();
    });
  }
  std::sort(out.begin(), out.end(), [](const ScanRecord& a, const ScanRecord& b) {
    if (a.pwr != b.pwr) return a.pwr > b.pwr;
    return a.bssid < b.bssid;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].index = static_cast<int>(i + 1);
  return out;
}

std::vector<ScanRecord> scan(Simulation& sim, IfaceId iface, SimTime dwell, SimTime duration) {
  Scanner scanner(sim, iface, dwell, duration);
  sim.advance_until(scanner.ends_at());
  return scanner.records();
}

std::string render_scan_table(std::span<const ScanRecord> records) {
  if (records.empty()) return {};
  std::ostringstream out;
  for (const auto& r : records) {
    out << r.index << ") " << (r.has_clients ? '*' : ' ') << ' ' << r.bssid.str() << ' ' << r.channel.number
        << ' ' << r.pwr << "% " << encryption_name(r.enc) << ' ' << display_essid(r.essid) << '\n';
  }
  out << "(*) Network with clients\n";
  return out.str();
}

}  // namespace jamrange
