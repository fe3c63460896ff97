#pragma once

// Scenario documents (YAML) and the world they populate: access points,
// stations and the attacker's adapter on one simulated medium.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jamrange/agents.hpp"
#include "jamrange/frames.hpp"
#include "jamrange/simcore.hpp"

namespace jamrange {

struct AttackerConfig {
  std::string name = "wlan0";
  MacAddress mac = MacAddress(MacAddress::Octets{0x00, 0xC0, 0xCA, 0x00, 0x00, 0x01});
  std::vector<Band> bands{Band::Band24, Band::Band5};
  // Power at which the adapter hears each node, keyed by the node's MAC.
  std::map<MacAddress, int> links;
};

struct Scenario {
  std::vector<ApConfig> aps;
  std::vector<StationConfig> stations;
  AttackerConfig attacker;
  MediumConfig medium;
  std::uint64_t seed = 1;
  SimTime horizon = 60000;
  // Non-fatal findings, e.g. a station whose target network does not exist.
  std::vector<std::string> warnings;
};

// Throws ConfigError; messages start with "{origin}:{line}:" when the
// offending node has a position.
Scenario parse_scenario(std::string_view text, std::string_view origin = "<scenario>");
Scenario load_scenario(const std::filesystem::path& path);

// Cross-entity checks (MAC uniqueness, bands); fills station scan lists.
// parse_scenario already calls this.
void finalize_scenario(Scenario& scenario);

Band parse_band(std::string_view text);

class World {
 public:
  World(const Scenario& scenario, std::uint64_t seed);
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  Simulation& sim() noexcept { return sim_; }
  const Simulation& sim() const noexcept { return sim_; }
  const Scenario& scenario() const noexcept { return scenario_; }
  IfaceId attacker() const noexcept { return attacker_; }

  const std::vector<std::unique_ptr<AccessPoint>>& aps() const noexcept { return aps_; }
  const std::vector<std::unique_ptr<Station>>& stations() const noexcept { return stations_; }
  AccessPoint* find_ap(const MacAddress& bssid) const;
  Station* find_station(const MacAddress& mac) const;

 private:
  Scenario scenario_;
  Simulation sim_;
  std::vector<std::unique_ptr<AccessPoint>> aps_;
  std::vector<std::unique_ptr<Station>> stations_;
  IfaceId attacker_ = 0;
};

std::unique_ptr<World> new_simulation(const Scenario& scenario, std::uint64_t seed);

}  // namespace jamrange
