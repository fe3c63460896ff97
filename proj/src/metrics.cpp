#include "jamrange/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

#include "jamrange/errors.hpp"

namespace jamrange {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string field(const LogEntry& e, const char* key) {
  auto it = e.data.find(key);
  if (it == e.data.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

}  // namespace

std::string render_feed_line(const FeedEvent& event) {
  return std::visit(
      overloaded{
          [](const FeedDisconnect& d) {
            return "Disconnecting " + d.victim.str() + " from " + d.from.str() + " on channel " +
                   std::to_string(d.channel);
          },
          [](const FeedStats& s) {
            return "Packets sent: " + std::to_string(s.packets_sent) + " - Speed: " + std::to_string(s.speed) +
                   " packets/sec";
          },
          [](const FeedPursuit& p) {
            return "Target moved from channel " + std::to_string(p.old_channel) + " to channel " +
                   std::to_string(p.new_channel);
          },
          [](const FeedWarning& w) { return w.text; },
      },
      event.body);
}

std::string_view feed_event_type(const FeedEvent& event) {
  static constexpr std::string_view names[] = {"disconnect", "stats", "pursuit", "warning"};
  return names[event.body.index()];
}

Report compute_report(std::span<const LogEntry> log, SimTime t0, SimTime t1) {
  if (t0 >= t1) {
    throw ContractError("report window is empty: [" + std::to_string(t0) + ", " + std::to_string(t1) + ")");
  }
  Report r;
  r.window_start = t0;
  r.window_end = t1;

  std::map<std::string, std::string> ap_essid;
  std::vector<std::pair<std::string, std::string>> stations;  // mac, target essid
  std::map<std::string, std::vector<std::pair<SimTime, SimTime>>> spans;
  std::map<std::string, SimTime> open;
  std::optional<std::string> target_bssid;
  std::map<std::string, std::vector<SimTime>> assoc_times;
  std::vector<std::pair<SimTime, std::string>> attempts;
  std::vector<SimTime> attack_injections;

  for (const auto& e : log) {
    if (e.kind == "spawn_ap") {
      ap_essid[field(e, "bssid")] = field(e, "essid");
    } else if (e.kind == "spawn_station") {
      stations.emplace_back(field(e, "station"), field(e, "target_essid"));
    } else if (e.kind == "assoc") {
      const auto sta = field(e, "station");
      open.try_emplace(sta, e.t);
      assoc_times[sta].push_back(e.t);
    } else if (e.kind == "disassoc_observed") {
      if (field(e, "was") != "associated") continue;
      const auto sta = field(e, "station");
      if (auto it = open.find(sta); it != open.end()) {
        spans[sta].emplace_back(it->second, e.t);
        open.erase(it);
      }
    } else if (e.kind == "assoc_attempt") {
      if (e.t >= t0 && e.t < t1) attempts.emplace_back(e.t, field(e, "station"));
    } else if (e.kind == "attack_start") {
      if (!target_bssid && e.data.contains("bssid")) target_bssid = field(e, "bssid");
    } else if (e.kind == "pursuit") {
      if (field(e, "event") == "reacquired" && e.t >= t0 && e.t < t1) {
        r.reacquisition_latencies.push_back(e.data.at("latency").get<SimTime>());
      }
    } else if (e.kind == "inject") {
      if (field(e, "origin").starts_with("attack") && e.t >= t0 && e.t < t1) attack_injections.push_back(e.t);
    }
  }
  for (const auto& [sta, since] : open) spans[sta].emplace_back(since, t1);

  const SimTime len = t1 - t0;
  std::vector<const StationReport*> targets;
  for (const auto& [mac, essid] : stations) {
    StationReport s;
    s.station = MacAddress::parse(mac);
    for (auto [a, b] : spans[mac]) {
      a = std::max(a, t0);
      b = std::min(b, t1);
      if (a < b) {
        s.associated_intervals.emplace_back(a, b);
        s.associated_ms += b - a;
      }
    }
    s.downtime_fraction = static_cast<double>(len - s.associated_ms) / static_cast<double>(len);
    r.stations.push_back(std::move(s));
  }
  std::optional<std::string> target_essid;
  if (target_bssid) {
    if (auto it = ap_essid.find(*target_bssid); it != ap_essid.end()) target_essid = it->second;
  }
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (!target_essid || stations[i].second == *target_essid) targets.push_back(&r.stations[i]);
  }

  // The all-down instant is either t0 or the end of some associated span.
  std::vector<SimTime> candidates{t0};
  for (const auto* s : targets) {
    for (const auto& iv : s->associated_intervals) candidates.push_back(iv.second);
  }
  std::sort(candidates.begin(), candidates.end());
  for (SimTime c : candidates) {
    if (c >= t1) break;
    const bool all_down = std::all_of(targets.begin(), targets.end(), [c](const StationReport* s) {
      return std::none_of(s->associated_intervals.begin(), s->associated_intervals.end(),
                          [c](const auto& iv) { return iv.first <= c && c < iv.second; });
    });
    if (all_down) {
      r.time_to_full_disconnect = c - t0;
      break;
    }
  }

  for (const auto& [t, sta] : attempts) {
    ++r.association_attempts;
    const auto& times = assoc_times[sta];
    const bool ok = std::any_of(times.begin(), times.end(),
                                [t = t](SimTime a) { return a > t && a <= t + kAssociationDeadline; });
    if (!ok) ++r.denied_attempts;
  }
  if (r.association_attempts > 0) {
    r.denial_rate = static_cast<double>(r.denied_attempts) / static_cast<double>(r.association_attempts);
  }

  r.packets_sent = attack_injections.size();
  std::size_t lo = 0;
  for (std::size_t hi = 0; hi < attack_injections.size(); ++hi) {
    while (attack_injections[lo] <= attack_injections[hi] - 1000) ++lo;
    r.peak_speed = std::max<std::uint64_t>(r.peak_speed, hi - lo + 1);
  }
  return r;
}

LogData report_to_json(const Report& report) {
  LogData j = LogData::object();
  j["window"] = {{"start", report.window_start}, {"end", report.window_end}};
  LogData stations = LogData::array();
  for (const auto& s : report.stations) {
    LogData st = LogData::object();
    st["station"] = s.station.str();
    st["associated_ms"] = s.associated_ms;
    st["downtime_fraction"] = s.downtime_fraction;
    LogData ivs = LogData::array();
    for (const auto& [a, b] : s.associated_intervals) ivs.push_back({a, b});
    st["associated_intervals"] = std::move(ivs);
    stations.push_back(std::move(st));
  }
  j["stations"] = std::move(stations);
  j["time_to_full_disconnect"] =
      report.time_to_full_disconnect ? LogData(*report.time_to_full_disconnect) : LogData(nullptr);
  j["association_attempts"] = report.association_attempts;
  j["denied_attempts"] = report.denied_attempts;
  j["denial_rate"] = report.denial_rate;
  j["reacquisition_latencies"] = report.reacquisition_latencies;
  j["packets_sent"] = report.packets_sent;
  j["peak_speed"] = report.peak_speed;
  return j;
}

std::string report_to_text(const Report& report) {
  std::ostringstream out;
  out << "window            " << report.window_start << " .. " << report.window_end << " ms\n";
  out << "full disconnect   ";
  if (report.time_to_full_disconnect) {
    out << *report.time_to_full_disconnect << " ms\n";
  } else {
    out << "not reached\n";
  }
  out << "attempts          " << report.association_attempts << " (" << report.denied_attempts << " denied, "
      << std::fixed << std::setprecision(3) << report.denial_rate << ")\n";
  out << "packets sent      " << report.packets_sent << " (peak " << report.peak_speed << " packets/sec)\n";
  out << "reacquisitions    " << report.reacquisition_latencies.size();
  if (!report.reacquisition_latencies.empty()) {
    out << " (";
    for (std::size_t i = 0; i < report.reacquisition_latencies.size(); ++i) {
      out << (i ? ", " : "") << report.reacquisition_latencies[i];
    }
    out << " ms)";
  }
  out << "\n\n";
  out << "STATION            ASSOCIATED_MS  DOWNTIME\n";
  for (const auto& s : report.stations) {
    out << s.station.str() << "  " << std::setw(13) << s.associated_ms << "  " << std::setprecision(4)
        << s.downtime_fraction << '\n';
  }
  return out.str();
}

}  // namespace jamrange
