#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jamrange/errors.hpp"
#include "jamrange/scenario.hpp"
#include "support/oracles.hpp"

using namespace jamrange;

namespace {

const MacAddress kAp = MacAddress::parse("F8:C4:F3:0E:08:B9");
const MacAddress kSta1 = MacAddress::parse("70:BB:E9:3E:0A:64");
const MacAddress kSta2 = MacAddress::parse("CE:A2:48:68:42:BD");

std::string error_of(std::string_view text) {
  try {
    parse_scenario(text, "t.scenario");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("bundled paper scenario") {
  const auto sc = load_scenario(oracle::scenario_path("paper.scenario"));
  CHECK(sc.seed == 42);
  CHECK(sc.horizon == 60000);
  REQUIRE(sc.aps.size() == 1);
  CHECK(sc.aps[0].bssid == kAp);
  CHECK(sc.aps[0].essid == "Ayush_Home_5G");
  CHECK(sc.aps[0].channel == Channel{Band::Band5, 36});
  CHECK(sc.aps[0].enc == EncryptionType::Wpa2);
  CHECK(sc.aps[0].beacon_interval == 100);
  CHECK_FALSE(sc.aps[0].hop_enabled);
  REQUIRE(sc.stations.size() == 2);
  CHECK(sc.stations[0].mac == kSta1);
  CHECK(sc.stations[1].mac == kSta2);
  CHECK(sc.stations[0].channels == std::vector<Channel>{{Band::Band5, 36}});
  CHECK(sc.attacker.links.at(kAp) == 64);
  CHECK(sc.warnings.empty());

  const auto w = new_simulation(sc, 42);
  CHECK(w->sim().now() == 0);
  CHECK(w->aps().size() == 1);
  CHECK(w->stations().size() == 2);
  CHECK(w->sim().interface_count() == 4);
  CHECK(w->sim().iface(w->attacker()).name() == "wlan0");
  CHECK(w->sim().iface(w->attacker()).mode() == Mode::Managed);
  CHECK(w->sim().link_pwr(w->attacker(), kAp) == 64);
}

TEST_CASE("bundled hopping scenario") {
  const auto sc = load_scenario(oracle::scenario_path("hopping.scenario"));
  REQUIRE(sc.aps.size() == 1);
  CHECK(sc.aps[0].hop_enabled);
  CHECK(sc.aps[0].hop_channels.size() == 21);
  CHECK(sc.aps[0].hop_threshold == 10);
  CHECK(sc.stations[0].channels.size() == 21);
}

TEST_CASE("defaults are filled") {
  const auto sc = parse_scenario(R"(
aps:
  - bssid: 02:00:00:00:00:01
    essid: home
    channel: 6
stations:
  - mac: 02:00:00:00:00:02
    target_essid: home
)");
  CHECK(sc.seed == 1);
  CHECK(sc.horizon == 60000);
  CHECK(sc.aps[0].beacon_interval == 100);
  CHECK(sc.aps[0].enc == EncryptionType::Wpa2);
  CHECK(sc.aps[0].channel == Channel{Band::Band24, 6});
  CHECK(sc.stations[0].reconnect_backoff_initial == 1000);
  CHECK(sc.stations[0].backoff_cap == 8000);
  CHECK(sc.stations[0].channels == std::vector<Channel>{{Band::Band24, 6}});
  CHECK(sc.attacker.name == "wlan0");
  CHECK(sc.medium.propagation_delay == 1);
  CHECK(sc.medium.loss_rate == 0.0);
}

TEST_CASE("empty document is an empty scenario") {
  const auto sc = parse_scenario("");
  CHECK(sc.aps.empty());
  CHECK(sc.stations.empty());
}

TEST_CASE("duplicate MACs are rejected") {
  const auto msg = error_of(R"(
aps:
  - bssid: 02:00:00:00:00:01
    essid: a
    channel: 1
  - bssid: 02:00:00:00:00:01
    essid: b
    channel: 6
)");
  CHECK(msg.find("duplicate MAC 02:00:00:00:00:01") != std::string::npos);

  const auto attacker = error_of(R"(
attacker:
  mac: 02:00:00:00:00:01
aps:
  - bssid: 02:00:00:00:00:01
    essid: a
    channel: 1
)");
  CHECK(attacker.find("duplicate MAC") != std::string::npos);
  CHECK(attacker.find("attacker") != std::string::npos);
}

TEST_CASE("errors carry the origin and line") {
  CHECK(error_of("aps:\n  - bssid: 02:00:00:00:00:01\n    essid: a\n    channel: 37\n")
            .rfind("t.scenario:4: aps[0].channel", 0) == 0);
  CHECK(error_of("seed: 1\nbogus: 2\n").rfind("t.scenario:2: ", 0) == 0);
  CHECK(error_of("seed: 1\nbogus: 2\n").find("unknown field 'bogus'") != std::string::npos);
  CHECK(error_of("aps:\n  - bssid: 02:00:00:00:00:0G\n    channel: 1\n").rfind("t.scenario:2: aps[0].bssid", 0) == 0);
  CHECK(error_of("aps: [\n").rfind("t.scenario:", 0) == 0);
  CHECK(error_of("stations:\n  - mac: 02:00:00:00:00:02\n").find("missing target_essid") != std::string::npos);
  CHECK(error_of("attacker:\n  links:\n    02:00:00:00:00:02: 101\n").find("pwr must be within 0..100") !=
        std::string::npos);
  CHECK(error_of("medium:\n  loss_rate: 2\n").find("medium.loss_rate") != std::string::npos);
}

TEST_CASE("band mismatch names the station") {
  const auto msg = error_of(R"(
aps:
  - bssid: 02:00:00:00:00:01
    essid: five
    channel: 36
stations:
  - mac: 02:00:00:00:00:02
    target_essid: five
    bands: [2.4]
)");
  CHECK(msg.find("station 02:00:00:00:00:02") != std::string::npos);
  CHECK(msg.find("band mismatch") != std::string::npos);

  const auto ap = error_of(R"(
aps:
  - bssid: 02:00:00:00:00:01
    essid: five
    channel: 36
    hop:
      channels: [36, 6]
)");
  CHECK(ap.find("AP 02:00:00:00:00:01") != std::string::npos);
  CHECK(ap.find("band mismatch") != std::string::npos);
}

TEST_CASE("unmatched ESSID is a warning") {
  const auto sc = parse_scenario(R"(
stations:
  - mac: 02:00:00:00:00:02
    target_essid: nowhere
)");
  REQUIRE(sc.warnings.size() == 1);
  CHECK(sc.warnings[0].find("nowhere") != std::string::npos);
}

TEST_CASE("band spellings") {
  CHECK(parse_band("2.4") == Band::Band24);
  CHECK(parse_band("2.4GHz") == Band::Band24);
  CHECK(parse_band("5") == Band::Band5);
  CHECK(parse_band("a") == Band::Band5);
  CHECK_THROWS_AS(parse_band("6"), DomainError);
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_scenario(oracle::temp_path("does-not-exist.scenario")), ConfigError);
}

TEST_CASE("duplicate MACs in a programmatic population") {
  Scenario sc;
  StationConfig s;
  s.mac = kSta1;
  s.target_essid = "x";
  sc.stations = {s, s};
  CHECK_THROWS_AS(finalize_scenario(sc), ConfigError);
}
