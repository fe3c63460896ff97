#include "jamrange/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "jamrange/errors.hpp"

namespace jamrange {

namespace {

class Reader {
 public:
  explicit Reader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& what) const {
    std::string where = origin_;
    if (node.IsDefined() && node.Mark().line >= 0) where += ":" + std::to_string(node.Mark().line + 1);
    throw ConfigError(where + ": " + what);
  }

  void allow_keys(const YAML::Node& map, std::initializer_list<std::string_view> keys, const std::string& ctx) const {
    if (!map.IsMap()) fail(map, ctx + ": expected a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(kv.first, ctx + ": unknown field '" + key + "'");
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field + ": expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, field + ": cannot read '" + node.Scalar() + "'");
    }
  }

  template <class T>
  void opt(const YAML::Node& map, const char* key, T& out, const std::string& ctx) const {
    if (auto n = map[key]) out = scalar<T>(n, ctx + "." + key);
  }

  MacAddress mac(const YAML::Node& node, const std::string& field) const {
    const auto text = scalar<std::string>(node, field);
    try {
      return MacAddress::parse(text);
    } catch (const ParseError& e) {
      fail(node, field + ": " + e.what());
    }
  }

  Channel channel(const YAML::Node& node, const std::string& field) const {
    const int n = scalar<int>(node, field);
    try {
      return Channel::from_number(n);
    } catch (const DomainError& e) {
      fail(node, field + ": " + e.what());
    }
  }

  std::vector<Channel> channels(const YAML::Node& node, const std::string& field) const {
    if (!node.IsSequence()) fail(node, field + ": expected a list of channel numbers");
    std::vector<Channel> out;
    for (const auto& c : node) out.push_back(channel(c, field));
    return out;
  }

  std::vector<Band> bands(const YAML::Node& node, const std::string& field) const {
    if (!node.IsSequence()) fail(node, field + ": expected a list of bands");
    std::vector<Band> out;
    for (const auto& b : node) {
      try {
        const Band band = parse_band(scalar<std::string>(b, field));
        if (std::find(out.begin(), out.end(), band) == out.end()) out.push_back(band);
      } catch (const DomainError& e) {
        fail(b, field + ": " + e.what());
      }
    }
    if (out.empty()) fail(node, field + ": at least one band is required");
    std::sort(out.begin(), out.end());
    return out;
  }

  ApConfig ap(const YAML::Node& node, std::size_t index) const {
    const std::string ctx = "aps[" + std::to_string(index) + "]";
    allow_keys(node,
               {"bssid", "essid", "channel", "enc", "beacon_interval", "bands", "hop", "auth_table_capacity",
                "auth_timeout"},
               ctx);
    ApConfig cfg;
    if (!node["bssid"]) fail(node, ctx + ": missing bssid");
    cfg.bssid = mac(node["bssid"], ctx + ".bssid");
    cfg.essid = node["essid"] ? scalar<std::string>(node["essid"], ctx + ".essid") : std::string();
    if (!node["channel"]) fail(node, ctx + ": missing channel");
    cfg.channel = channel(node["channel"], ctx + ".channel");
    if (auto e = node["enc"]) {
      try {
        cfg.enc = parse_encryption(scalar<std::string>(e, ctx + ".enc"));
      } catch (const DomainError& ex) {
        fail(e, ctx + ".enc: " + ex.what());
      }
    }
    opt(node, "beacon_interval", cfg.beacon_interval, ctx);
    opt(node, "auth_table_capacity", cfg.auth_table_capacity, ctx);
    opt(node, "auth_timeout", cfg.auth_timeout, ctx);
    if (auto b = node["bands"]) cfg.bands = bands(b, ctx + ".bands");
    if (auto hop = node["hop"]) {
      allow_keys(hop, {"enabled", "channels", "threshold", "window", "delay"}, ctx + ".hop");
      cfg.hop_enabled = true;
      opt(hop, "enabled", cfg.hop_enabled, ctx + ".hop");
      if (auto c = hop["channels"]) cfg.hop_channels = channels(c, ctx + ".hop.channels");
      opt(hop, "threshold", cfg.hop_threshold, ctx + ".hop");
      opt(hop, "window", cfg.hop_window, ctx + ".hop");
      opt(hop, "delay", cfg.hop_delay, ctx + ".hop");
    }
    try {
      validate(cfg);
    } catch (const ConfigError& e) {
      fail(node, e.what());
    }
    return cfg;
  }

  StationConfig station(const YAML::Node& node, std::size_t index) const {
    const std::string ctx = "stations[" + std::to_string(index) + "]";
    allow_keys(node,
               {"mac", "target_essid", "reconnect_backoff_initial", "backoff_factor", "backoff_cap", "scan_dwell",
                "channels", "bands", "activity_interval", "beacon_loss_timeout", "handshake_timeout"},
               ctx);
    StationConfig cfg;
    if (!node["mac"]) fail(node, ctx + ": missing mac");
    cfg.mac = mac(node["mac"], ctx + ".mac");
    if (!node["target_essid"]) fail(node, ctx + ": missing target_essid");
    cfg.target_essid = scalar<std::string>(node["target_essid"], ctx + ".target_essid");
    opt(node, "reconnect_backoff_initial", cfg.reconnect_backoff_initial, ctx);
    opt(node, "backoff_factor", cfg.backoff_factor, ctx);
    opt(node, "backoff_cap", cfg.backoff_cap, ctx);
    opt(node, "scan_dwell", cfg.scan_dwell, ctx);
    opt(node, "activity_interval", cfg.activity_interval, ctx);
    opt(node, "beacon_loss_timeout", cfg.beacon_loss_timeout, ctx);
    opt(node, "handshake_timeout", cfg.handshake_timeout, ctx);
    if (auto b = node["bands"]) cfg.bands = bands(b, ctx + ".bands");
    if (auto c = node["channels"]) cfg.channels = channels(c, ctx + ".channels");
    try {
      validate(cfg);
    } catch (const ConfigError& e) {
      fail(node, e.what());
    }
    return cfg;
  }

  AttackerConfig attacker(const YAML::Node& node) const {
    allow_keys(node, {"name", "mac", "bands", "links"}, "attacker");
    AttackerConfig cfg;
    opt(node, "name", cfg.name, "attacker");
    if (cfg.name.empty()) fail(node, "attacker.name: must not be empty");
    if (auto m = node["mac"]) cfg.mac = mac(m, "attacker.mac");
    if (auto b = node["bands"]) cfg.bands = bands(b, "attacker.bands");
    if (auto links = node["links"]) {
      if (!links.IsMap()) fail(links, "attacker.links: expected a mapping of MAC to pwr");
      for (const auto& kv : links) {
        const auto key = mac(kv.first, "attacker.links");
        const int pwr = scalar<int>(kv.second, "attacker.links." + key.str());
        if (pwr < 0 || pwr > 100) fail(kv.second, "attacker.links." + key.str() + ": pwr must be within 0..100");
        cfg.links[key] = pwr;
      }
    }
    return cfg;
  }

  Scenario scenario(const YAML::Node& root) const {
    Scenario s;
    if (root.IsNull()) return s;
    allow_keys(root, {"seed", "horizon", "medium", "attacker", "aps", "stations"}, "scenario");
    opt(root, "seed", s.seed, "scenario");
    opt(root, "horizon", s.horizon, "scenario");
    if (s.horizon < 0) fail(root["horizon"], "horizon: must not be negative");
    if (auto m = root["medium"]) {
      allow_keys(m, {"propagation_delay", "loss_rate"}, "medium");
      opt(m, "propagation_delay", s.medium.propagation_delay, "medium");
      opt(m, "loss_rate", s.medium.loss_rate, "medium");
      if (s.medium.propagation_delay < 0) fail(m["propagation_delay"], "medium.propagation_delay: must not be negative");
      if (s.medium.loss_rate < 0.0 || s.medium.loss_rate > 1.0) fail(m["loss_rate"], "medium.loss_rate: must be within 0..1");
    }
    if (auto a = root["attacker"]) s.attacker = attacker(a);
    if (auto aps = root["aps"]) {
      if (!aps.IsSequence()) fail(aps, "aps: expected a list");
      for (std::size_t i = 0; i < aps.size(); ++i) s.aps.push_back(ap(aps[i], i));
    }
    if (auto stations = root["stations"]) {
      if (!stations.IsSequence()) fail(stations, "stations: expected a list");
      for (std::size_t i = 0; i < stations.size(); ++i) s.stations.push_back(station(stations[i], i));
    }
    try {
      finalize_scenario(s);
    } catch (const ConfigError& e) {
      throw ConfigError(origin_ + ": " + e.what());
    }
    return s;
  }

 private:
  std::string origin_;
};

}  // namespace

Band parse_band(std::string_view text) {
  std::string t;
  for (char c : text) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t == "2.4" || t == "2.4ghz" || t == "bg") return Band::Band24;
  if (t == "5" || t == "5ghz" || t == "a") return Band::Band5;
  throw DomainError("unknown band '" + std::string(text) + "' (expected 2.4 or 5)");
}

void finalize_scenario(Scenario& s) {
  s.warnings.clear();
  std::set<MacAddress> seen;
  auto claim = [&](const MacAddress& mac, const std::string& who) {
    if (!seen.insert(mac).second) throw ConfigError("duplicate MAC " + mac.str() + " (" + who + ")");
  };
  for (const auto& ap : s.aps) claim(ap.bssid, "AP " + display_essid(ap.essid));
  for (const auto& st : s.stations) claim(st.mac, "station");
  claim(s.attacker.mac, "attacker " + s.attacker.name);

  for (auto& st : s.stations) {
    std::set<Channel> reachable;
    for (const auto& ap : s.aps) {
      if (ap.essid != st.target_essid) continue;
      reachable.insert(ap.channel);
      reachable.insert(ap.hop_channels.begin(), ap.hop_channels.end());
    }
    if (reachable.empty()) {
      s.warnings.push_back("station " + st.mac.str() + ": no AP carries ESSID '" + display_essid(st.target_essid) + "'");
    }
    if (!st.channels.empty()) continue;
    for (const auto& c : reachable) {
      if (std::find(st.bands.begin(), st.bands.end(), c.band) != st.bands.end()) st.channels.push_back(c);
    }
    if (st.channels.empty() && !reachable.empty()) {
      throw ConfigError("station " + st.mac.str() + ": band mismatch, no band in common with ESSID '" +
                        display_essid(st.target_essid) + "'");
    }
  }
}

Scenario parse_scenario(std::string_view text, std::string_view origin) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError(std::string(origin) + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return Reader(std::string(origin)).scenario(root);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.string());
}

}  // namespace jamrange
