#include "jamrange/scenario.hpp"

#include "jamrange/errors.hpp"

namespace jamrange {

World::World(const Scenario& scenario, std::uint64_t seed) : scenario_(scenario), sim_(seed, scenario.medium) {
  finalize_scenario(scenario_);
  for (const auto& cfg : scenario_.aps) aps_.push_back(std::make_unique<AccessPoint>(sim_, cfg));
  for (const auto& cfg : scenario_.stations) stations_.push_back(std::make_unique<Station>(sim_, cfg));

  const auto& a = scenario_.attacker;
  InterfaceSpec spec;
  spec.name = a.name;
  spec.bands = a.bands;
  spec.mac = a.mac;
  spec.mode = Mode::Managed;
  spec.channel = channels_for_bands(a.bands).front();
  attacker_ = sim_.add_interface(std::move(spec));
  for (const auto& [mac, pwr] : a.links) sim_.set_link_pwr(attacker_, mac, pwr);
}

AccessPoint* World::find_ap(const MacAddress& bssid) const {
  for (const auto& ap : aps_) {
    if (ap->bssid() == bssid) return ap.get();
  }
  return nullptr;
}

Station* World::find_station(const MacAddress& mac) const {
  for (const auto& st : stations_) {
    if (st->mac() == mac) return st.get();
  }
  return nullptr;
}

std::unique_ptr<World> new_simulation(const Scenario& scenario, std::uint64_t seed) {
  return std::make_unique<World>(scenario, seed);
}

}  // namespace jamrange
