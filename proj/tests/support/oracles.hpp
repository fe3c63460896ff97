#pragma once

// Test-side reference implementations and random generators. Nothing here
// calls into the library's codec or report code, so the suites can compare
// the two.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jamrange/frames.hpp"
#include "jamrange/metrics.hpp"
#include "jamrange/scenario.hpp"
#include "jamrange/simcore.hpp"

namespace oracle {

using namespace jamrange;

// ---------------------------------------------------------------- paths

inline std::filesystem::path scenario_path(const std::string& name) {
  return std::filesystem::path(JAMRANGE_SCENARIO_DIR) / name;
}

inline std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "jamrange-tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

// Runs a shell command, capturing stdout (stderr is folded in when asked).
inline CommandResult run_command(const std::string& cmd, bool with_stderr = false) {
  const std::string full = with_stderr ? cmd + " 2>&1" : cmd + " 2>/dev/null";
  CommandResult r;
  FILE* p = popen(full.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// ---------------------------------------------------------------- codec

// Channel tables as published for the two bands, kept separate from the
// library's copy.
inline const std::vector<int>& ref_band_channels(bool five) {
  static const std::vector<int> b24{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14};
  static const std::vector<int> b5{36,  40,  44,  48,  52,  56,  60,  64,  100, 104, 108,
                                   112, 116, 132, 136, 140, 149, 153, 157, 161, 165};
  return five ? b5 : b24;
}

inline int ref_center_mhz(bool five, int n) {
  if (five) return 5000 + 5 * n;
  return n == 14 ? 2484 : 2407 + 5 * n;
}

struct RefFields {
  std::uint8_t subtype = 0;
  MacAddress a1, a2, a3;
  std::vector<std::uint8_t> payload;
};

inline std::uint8_t ref_channel_byte(const Channel& c) {
  const bool five = c.band == Band::Band5;
  const auto& table = ref_band_channels(five);
  const auto idx = std::find(table.begin(), table.end(), c.number) - table.begin();
  return static_cast<std::uint8_t>((five ? 0x80 : 0x00) | idx);
}

inline void ref_push_essid(std::vector<std::uint8_t>& p, const Channel& ch, EncryptionType enc,
                           const std::string& essid) {
  p.push_back(ref_channel_byte(ch));
  p.push_back(static_cast<std::uint8_t>(enc));
  p.push_back(static_cast<std::uint8_t>(essid.size()));
  p.insert(p.end(), essid.begin(), essid.end());
}

inline RefFields ref_fields(const ManagementFrame& f) {
  RefFields r;
  if (auto* b = f.as<Beacon>()) {
    r.subtype = 0x08;
    r.a3 = b->bssid;
    ref_push_essid(r.payload, b->channel, b->enc, b->essid);
  } else if (auto* b = f.as<ProbeRequest>()) {
    r.subtype = 0x04;
    r.a2 = b->src;
  } else if (auto* b = f.as<ProbeResponse>()) {
    r.subtype = 0x05;
    r.a1 = b->dst;
    r.a3 = b->bssid;
    ref_push_essid(r.payload, b->channel, b->enc, b->essid);
  } else if (auto* b = f.as<Authentication>()) {
    r.subtype = 0x0B;
    r.a1 = b->dst;
    r.a2 = b->src;
    r.payload.push_back(b->success ? 1 : 0);
  } else if (auto* b = f.as<AssociationRequest>()) {
    r.subtype = 0x00;
    r.a2 = b->src;
    r.a3 = b->bssid;
  } else if (auto* b = f.as<AssociationResponse>()) {
    r.subtype = 0x01;
    r.a1 = b->dst;
    r.a3 = b->bssid;
    r.payload.push_back(b->success ? 1 : 0);
  } else if (auto* b = f.as<Deauthentication>()) {
    r.subtype = 0x0C;
    r.a1 = b->dst;
    r.a2 = b->src;
    r.a3 = b->bssid;
    r.payload = {static_cast<std::uint8_t>(b->reason.value() >> 8), static_cast<std::uint8_t>(b->reason.value())};
  } else if (auto* b = f.as<Disassociation>()) {
    r.subtype = 0x0A;
    r.a1 = b->dst;
    r.a2 = b->src;
    r.a3 = b->bssid;
    r.payload = {static_cast<std::uint8_t>(b->reason.value() >> 8), static_cast<std::uint8_t>(b->reason.value())};
  }
  return r;
}

// Hand assembly of a record: each variant fills only the address slots it
// carries (dst -> addr1, src -> addr2, bssid -> addr3), the rest stay zero.
inline std::vector<std::uint8_t> ref_encode(const ManagementFrame& f) {
  const RefFields r = ref_fields(f);
  std::vector<std::uint8_t> out;
  out.push_back(r.subtype);
  out.push_back(static_cast<std::uint8_t>(f.seq >> 8));
  out.push_back(static_cast<std::uint8_t>(f.seq & 0xFF));
  for (const auto* m : {&r.a1, &r.a2, &r.a3}) out.insert(out.end(), m->octets().begin(), m->octets().end());
  out.insert(out.end(), r.payload.begin(), r.payload.end());
  return out;
}

// Size by variant: 21 header bytes plus the payload.
inline std::size_t ref_size(const ManagementFrame& f) {
  if (auto* b = f.as<Beacon>()) return 24 + b->essid.size();
  if (auto* b = f.as<ProbeResponse>()) return 24 + b->essid.size();
  if (f.as<Deauthentication>() || f.as<Disassociation>()) return 23;
  if (f.as<Authentication>() || f.as<AssociationResponse>()) return 22;
  return 21;
}

// ---------------------------------------------------------------- generators

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t next() { return rng_(); }
  int range(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin(int percent_true = 50) { return range(1, 100) <= percent_true; }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(range(0, static_cast<int>(v.size()) - 1))];
  }

  MacAddress mac() {
    MacAddress::Octets o{};
    for (auto& b : o) b = static_cast<std::uint8_t>(rng_());
    return MacAddress(o);
  }
  // Unicast, locally administered, never broadcast.
  MacAddress node_mac() {
    MacAddress::Octets o{};
    for (auto& b : o) b = static_cast<std::uint8_t>(rng_());
    o[0] = static_cast<std::uint8_t>((o[0] & 0xFC) | 0x02);
    return MacAddress(o);
  }

  Channel channel() {
    const bool five = coin();
    return Channel{five ? Band::Band5 : Band::Band24, pick(ref_band_channels(five))};
  }

  std::string essid(std::size_t max = kMaxEssidLength) {
    std::string s(static_cast<std::size_t>(range(0, static_cast<int>(max))), '\0');
    for (auto& c : s) c = static_cast<char>(rng_() & 0xFF);
    return s;
  }

  EncryptionType enc() { return static_cast<EncryptionType>(range(0, 4)); }
  ReasonCode reason() { return ReasonCode(range(1, 66)); }

  ManagementFrame frame() {
    ManagementFrame f;
    f.seq = static_cast<std::uint16_t>(rng_());
    switch (range(0, 7)) {
      case 0: f.body = Beacon{mac(), essid(), channel(), enc()}; break;
      case 1: f.body = ProbeRequest{mac()}; break;
      case 2: f.body = ProbeResponse{mac(), essid(), channel(), enc(), mac()}; break;
      case 3: f.body = Authentication{mac(), mac(), coin()}; break;
      case 4: f.body = AssociationRequest{mac(), mac()}; break;
      case 5: f.body = AssociationResponse{mac(), mac(), coin()}; break;
      case 6: f.body = Deauthentication{mac(), mac(), mac(), reason()}; break;
      default: f.body = Disassociation{mac(), mac(), mac(), reason()}; break;
    }
    return f;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// A small population on a handful of channels so that stations, APs and the
// attacker actually meet.
inline Scenario small_scenario(Gen& g, int max_aps = 3, int max_stations = 5) {
  static const std::vector<Channel> pool{{Band::Band24, 1}, {Band::Band24, 6}, {Band::Band5, 36}, {Band::Band5, 40}};
  Scenario sc;
  sc.seed = g.next();
  sc.horizon = g.range(5000, 20000);
  sc.attacker.mac = g.node_mac();
  const int n_aps = g.range(1, max_aps);
  std::vector<std::string> essids;
  for (int i = 0; i < n_aps; ++i) {
    ApConfig ap;
    ap.bssid = g.node_mac();
    ap.essid = "net" + std::to_string(i);
    ap.channel = g.pick(pool);
    ap.enc = g.enc();
    ap.beacon_interval = g.pick(std::vector<SimTime>{100, 100, 200});
    if (g.coin(30)) {
      ap.hop_enabled = true;
      ap.hop_threshold = g.range(5, 20);
      for (const auto& c : pool) {
        if (c.band == ap.channel.band) ap.hop_channels.push_back(c);
      }
    }
    essids.push_back(ap.essid);
    sc.attacker.links[ap.bssid] = g.range(10, 99);
    sc.aps.push_back(std::move(ap));
  }
  const int n_sta = g.range(1, max_stations);
  for (int i = 0; i < n_sta; ++i) {
    StationConfig st;
    st.mac = g.node_mac();
    st.target_essid = g.pick(essids);
    sc.stations.push_back(std::move(st));
  }
  finalize_scenario(sc);
  return sc;
}

// ---------------------------------------------------------------- report replay

inline std::string sfield(const LogEntry& e, const char* key) {
  auto it = e.data.find(key);
  return it != e.data.end() && it->is_string() ? it->get<std::string>() : std::string();
}

struct ReplayStation {
  std::string mac;
  std::vector<std::pair<SimTime, SimTime>> down;  // maximal runs, [begin, end)
  SimTime up_ms = 0;
};

struct Replay {
  std::vector<ReplayStation> stations;
  std::optional<SimTime> full_disconnect;
  std::uint64_t attempts = 0;
  std::uint64_t denied = 0;
  std::uint64_t packets = 0;
  std::uint64_t peak = 0;
  std::vector<SimTime> latencies;
};

// Walks the window one millisecond at a time, applying every log entry
// stamped at or before that millisecond, and samples each station's phase.
inline Replay replay_report(const std::vector<LogEntry>& log, SimTime t0, SimTime t1) {
  Replay r;
  std::vector<std::pair<std::string, std::string>> stations;
  std::map<std::string, std::string> essid_of;
  std::string attack_bssid;
  for (const auto& e : log) {
    if (e.kind == "spawn_station") stations.emplace_back(sfield(e, "station"), sfield(e, "target_essid"));
    if (e.kind == "spawn_ap") essid_of[sfield(e, "bssid")] = sfield(e, "essid");
    if (e.kind == "attack_start" && attack_bssid.empty()) attack_bssid = sfield(e, "bssid");
  }
  std::vector<bool> is_target;
  for (const auto& [mac, essid] : stations) {
    is_target.push_back(attack_bssid.empty() || !essid_of.count(attack_bssid) || essid == essid_of[attack_bssid]);
  }

  std::map<std::string, bool> up;
  std::vector<std::vector<bool>> samples(stations.size());
  std::size_t next = 0;
  for (SimTime ms = 0; ms < t1; ++ms) {
    while (next < log.size() && log[next].t <= ms) {
      const auto& e = log[next++];
      if (e.kind == "assoc") up[sfield(e, "station")] = true;
      if (e.kind == "disassoc_observed" && sfield(e, "was") == "associated") up[sfield(e, "station")] = false;
    }
    if (ms < t0) continue;
    bool all_down = true;
    for (std::size_t i = 0; i < stations.size(); ++i) {
      const bool u = up[stations[i].first];
      samples[i].push_back(u);
      if (u && is_target[i]) all_down = false;
    }
    if (all_down && !r.full_disconnect) r.full_disconnect = ms - t0;
  }

  for (std::size_t i = 0; i < stations.size(); ++i) {
    ReplayStation s;
    s.mac = stations[i].first;
    for (std::size_t k = 0; k < samples[i].size(); ++k) {
      const SimTime ms = t0 + static_cast<SimTime>(k);
      if (samples[i][k]) {
        ++s.up_ms;
      } else if (!s.down.empty() && s.down.back().second == ms) {
        s.down.back().second = ms + 1;
      } else {
        s.down.emplace_back(ms, ms + 1);
      }
    }
    r.stations.push_back(std::move(s));
  }

  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& e = log[i];
    if (e.kind == "assoc_attempt" && e.t >= t0 && e.t < t1) {
      ++r.attempts;
      const auto sta = sfield(e, "station");
      bool reached = false;
      for (std::size_t j = i + 1; j < log.size() && log[j].t <= e.t + 500; ++j) {
        if (log[j].kind == "assoc" && log[j].t > e.t && sfield(log[j], "station") == sta) reached = true;
      }
      if (!reached) ++r.denied;
    }
    if (e.kind == "pursuit" && sfield(e, "event") == "reacquired" && e.t >= t0 && e.t < t1) {
      r.latencies.push_back(e.data.at("latency").get<SimTime>());
    }
  }

  std::vector<SimTime> shots;
  for (const auto& e : log) {
    if (e.kind == "inject" && e.t >= t0 && e.t < t1 && sfield(e, "origin").rfind("attack", 0) == 0) {
      shots.push_back(e.t);
    }
  }
  r.packets = shots.size();
  for (SimTime end : shots) {
    std::uint64_t n = 0;
    for (SimTime s : shots) n += (s > end - 1000 && s <= end) ? 1 : 0;
    r.peak = std::max(r.peak, n);
  }
  return r;
}

// Complement of the report's associated intervals inside the window.
inline std::vector<std::pair<SimTime, SimTime>> down_intervals(const StationReport& s, SimTime t0, SimTime t1) {
  std::vector<std::pair<SimTime, SimTime>> out;
  SimTime cursor = t0;
  for (const auto& [a, b] : s.associated_intervals) {
    if (a > cursor) out.emplace_back(cursor, a);
    cursor = std::max(cursor, b);
  }
  if (cursor < t1) out.emplace_back(cursor, t1);
  return out;
}

// Empty string when the report and the replay agree; otherwise the first
// difference.
inline std::string compare_report(const Report& rep, const Replay& ref) {
  const SimTime t0 = rep.window_start, t1 = rep.window_end;
  if (rep.stations.size() != ref.stations.size()) return "station count";
  for (std::size_t i = 0; i < rep.stations.size(); ++i) {
    const auto& s = rep.stations[i];
    if (s.station.str() != ref.stations[i].mac) return "station order";
    if (down_intervals(s, t0, t1) != ref.stations[i].down) return "down intervals of " + s.station.str();
    if (s.associated_ms != ref.stations[i].up_ms) return "associated ms of " + s.station.str();
  }
  if (rep.time_to_full_disconnect != ref.full_disconnect) return "time to full disconnect";
  if (rep.association_attempts != ref.attempts) return "attempts";
  if (rep.denied_attempts != ref.denied) return "denied";
  if (rep.packets_sent != ref.packets) return "packets";
  if (rep.peak_speed != ref.peak) return "peak speed";
  if (rep.reacquisition_latencies != ref.latencies) return "latencies";
  return {};
}

}  // namespace oracle
