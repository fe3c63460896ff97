#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jamrange/attack.hpp"
#include "jamrange/errors.hpp"
#include "jamrange/scenario.hpp"
#include "support/oracles.hpp"

using namespace jamrange;
using oracle::sfield;

namespace {

const MacAddress kAp = MacAddress::parse("F8:C4:F3:0E:08:B9");
const MacAddress kSta1 = MacAddress::parse("70:BB:E9:3E:0A:64");
const MacAddress kSta2 = MacAddress::parse("CE:A2:48:68:42:BD");
const Channel kCh36{Band::Band5, 36};
constexpr SimTime kSweep = 35 * 250;

struct Range {
  std::unique_ptr<World> world;
  ScanRecord target;
  Simulation& sim() { return world->sim(); }
  IfaceId att() { return world->attacker(); }
};

// Paper population, attacker in monitor mode with one full scan behind it.
Range paper_range(const std::string& file = "paper.scenario", std::optional<std::uint64_t> seed = {}) {
  const auto sc = load_scenario(oracle::scenario_path(file));
  Range r{new_simulation(sc, seed.value_or(sc.seed)), {}};
  r.sim().set_mode(r.att(), Mode::Monitor);
  const auto records = scan(r.sim(), r.att(), 250, kSweep);
  REQUIRE(records.size() == 1);
  r.target = records.front();
  return r;
}

// Lets the adapter overhear a second of traffic on the target channel.
void listen_on_target(Range& r) {
  r.sim().tune(r.att(), r.target.channel);
  r.sim().advance_until(r.sim().now() + 1000);
}

AttackConfig amok(const ScanRecord& target) {
  AttackConfig cfg;
  cfg.kind = AttackKind::DisassocAmok;
  cfg.target = target;
  return cfg;
}

std::vector<const LogEntry*> attack_injects(const Simulation& sim, const std::string& id = "attack-1") {
  std::vector<const LogEntry*> out;
  for (const auto& e : sim.log().entries()) {
    if (e.kind == "inject" && sfield(e, "origin") == id) out.push_back(&e);
  }
  return out;
}

}  // namespace

TEST_CASE("scan finds the paper network with clients") {
  auto r = paper_range();
  CHECK(r.target == ScanRecord{1, kAp, kCh36, 64, EncryptionType::Wpa2, "Ayush_Home_5G", true});
  const std::vector<ScanRecord> rows{r.target};
  CHECK(render_scan_table(rows) == "1) * F8:C4:F3:0E:08:B9 36 64% WPA2 Ayush_Home_5G\n(*) Network with clients\n");
}

TEST_CASE("scan requires monitor mode and handles an empty medium") {
  Scenario sc;
  finalize_scenario(sc);
  World w(sc, 1);
  CHECK_THROWS_AS(scan(w.sim(), w.attacker(), 250, 1000), ModeError);
  w.sim().set_mode(w.attacker(), Mode::Monitor);
  CHECK(scan(w.sim(), w.attacker(), 250, kSweep).empty());
  CHECK(render_scan_table({}).empty());
}

TEST_CASE("scan covers both bands, sorts by power and marks clientless networks") {
  Scenario sc;
  ApConfig a;
  a.bssid = MacAddress::parse("02:00:00:00:00:01");
  a.essid = "low";
  a.channel = {Band::Band24, 1};
  ApConfig b = a;
  b.bssid = MacAddress::parse("02:00:00:00:00:02");
  b.essid = "high";
  b.channel = kCh36;
  ApConfig c = a;
  c.bssid = MacAddress::parse("02:00:00:00:00:00");
  c.essid = "tie";
  c.channel = {Band::Band24, 11};
  sc.aps = {a, b, c};
  sc.attacker.links[a.bssid] = 30;
  sc.attacker.links[b.bssid] = 80;
  sc.attacker.links[c.bssid] = 30;
  StationConfig s;
  s.mac = kSta1;
  s.target_essid = "high";
  sc.stations = {s};
  finalize_scenario(sc);
  World w(sc, 5);
  w.sim().set_mode(w.attacker(), Mode::Monitor);
  w.sim().advance_until(3000);
  const auto recs = scan(w.sim(), w.attacker(), 250, 2 * kSweep);
  REQUIRE(recs.size() == 3);
  CHECK(recs[0].bssid == b.bssid);
  CHECK(recs[0].has_clients);
  CHECK(recs[1].bssid == c.bssid);
  CHECK(recs[2].bssid == a.bssid);
  for (int i = 0; i < 3; ++i) CHECK(recs[static_cast<std::size_t>(i)].index == i + 1);
  CHECK_FALSE(recs[1].has_clients);
  const auto table = render_scan_table(recs);
  CHECK(table.find("2)   02:00:00:00:00:00 11 30% WPA2 tie\n") != std::string::npos);

  // Every record is backed by a captured announcement.
  std::set<MacAddress> announced;
  for (const auto& cap : w.sim().iface(w.attacker()).inbox()) {
    if (auto* bc = cap.frame.as<Beacon>()) announced.insert(bc->bssid);
    if (auto* pr = cap.frame.as<ProbeResponse>()) announced.insert(pr->bssid);
  }
  for (const auto& rec : recs) CHECK(announced.contains(rec.bssid));
}

TEST_CASE("session preconditions") {
  auto r = paper_range();
  SUBCASE("managed mode") {
    r.sim().set_mode(r.att(), Mode::Managed);
    CHECK_THROWS_AS(AttackSession(r.sim(), r.att(), amok(r.target)), ModeError);
  }
  SUBCASE("missing target") {
    AttackConfig cfg;
    CHECK_THROWS_AS(AttackSession(r.sim(), r.att(), cfg), ConfigError);
  }
  SUBCASE("deauth without a client") {
    auto cfg = amok(r.target);
    cfg.kind = AttackKind::TargetedDeauth;
    CHECK_THROWS_AS(AttackSession(r.sim(), r.att(), cfg), ConfigError);
  }
  SUBCASE("filter without a file") {
    auto cfg = amok(r.target);
    cfg.filter_mode = FilterMode::Whitelist;
    CHECK_THROWS_AS(AttackSession(r.sim(), r.att(), cfg), ConfigError);
  }
  SUBCASE("beacon flood needs no target") {
    AttackConfig cfg;
    cfg.kind = AttackKind::BeaconFlood;
    AttackSession s(r.sim(), r.att(), cfg);
    CHECK(s.state() == SessionState::Locked);
  }
}

TEST_CASE("unsupported band is a domain error") {
  auto sc = load_scenario(oracle::scenario_path("paper.scenario"));
  sc.attacker.bands = {Band::Band24};
  World w(sc, 42);
  w.sim().set_mode(w.attacker(), Mode::Monitor);
  ScanRecord target{1, kAp, kCh36, 64, EncryptionType::Wpa2, "Ayush_Home_5G", true};
  CHECK_THROWS_AS(AttackSession(w.sim(), w.attacker(), amok(target)), DomainError);
}

TEST_CASE("amok locks on the target channel and hits both clients in both directions") {
  auto r = paper_range();
  listen_on_target(r);
  std::vector<FeedEvent> feed;
  AttackSession s(r.sim(), r.att(), amok(r.target), [&](const FeedEvent& e) { feed.push_back(e); });
  CHECK(s.state() == SessionState::Locked);
  CHECK(s.locked_channel() == kCh36);
  CHECK(r.sim().iface(r.att()).tuned() == kCh36);

  const auto frames = s.amok_cycle();
  REQUIRE(frames.size() == 4);
  std::set<std::pair<MacAddress, MacAddress>> pairs;
  for (const auto& f : frames) {
    REQUIRE(f.as<Disassociation>());
    CHECK(f.as<Disassociation>()->bssid == kAp);
    CHECK(f.as<Disassociation>()->reason.value() == 7);
    pairs.insert({frame_src(f), frame_dst(f)});
  }
  CHECK(pairs == std::set<std::pair<MacAddress, MacAddress>>{{kAp, kSta1}, {kSta1, kAp}, {kAp, kSta2}, {kSta2, kAp}});
  const std::set<MacAddress> victims(s.victims().begin(), s.victims().end());
  CHECK(victims == std::set<MacAddress>{kSta1, kSta2});
  std::set<std::string> lines;
  for (const auto& e : feed) lines.insert(render_feed_line(e));
  CHECK(lines.contains("Disconnecting 70:BB:E9:3E:0A:64 from F8:C4:F3:0E:08:B9 on channel 36"));
  CHECK(lines.contains("Disconnecting CE:A2:48:68:42:BD from F8:C4:F3:0E:08:B9 on channel 36"));
}

TEST_CASE("every fourth cycle adds a broadcast deauth") {
  auto r = paper_range();
  listen_on_target(r);
  std::vector<FeedEvent> feed;
  AttackSession s(r.sim(), r.att(), amok(r.target), [&](const FeedEvent& e) { feed.push_back(e); });
  std::vector<std::size_t> sizes;
  for (int i = 0; i < 8; ++i) sizes.push_back(s.amok_cycle().size());
  CHECK(sizes == std::vector<std::size_t>{4, 4, 4, 5, 4, 4, 4, 5});
  int broadcast_lines = 0;
  for (const auto& e : feed) {
    if (render_feed_line(e).find("from FF:FF:FF:FF:FF:FF on channel 36") != std::string::npos) ++broadcast_lines;
  }
  CHECK(broadcast_lines == 4);
}

TEST_CASE("packets_sent matches the session's inject records") {
  auto r = paper_range();
  AttackSession s(r.sim(), r.att(), amok(r.target));
  r.sim().advance_until(r.sim().now() + 20000);
  const auto stats = s.stop();
  CHECK(stats.packets_sent == attack_injects(r.sim()).size());
  CHECK(stats.packets_sent >= 129);
  CHECK(stats.peak_speed > 0);
}

TEST_CASE("stop is idempotent and immediate stop sends nothing") {
  auto r = paper_range();
  AttackSession s(r.sim(), r.att(), amok(r.target));
  const auto first = s.stop();
  CHECK(first.packets_sent == 0);
  CHECK(first.duration == 0);
  r.sim().advance_until(r.sim().now() + 5000);
  CHECK(s.stop() == first);
  CHECK(s.state() == SessionState::Stopped);
  CHECK(attack_injects(r.sim()).empty());
  int stops = 0;
  for (const auto& e : r.sim().log().entries()) stops += e.kind == "attack_stop";
  CHECK(stops == 1);
}

TEST_CASE("stats duration is stop time minus start time") {
  auto r = paper_range();
  AttackSession s(r.sim(), r.att(), amok(r.target));
  const auto start = r.sim().now();
  r.sim().advance_until(start + 1234);
  CHECK(s.stop().duration == 1234);
}

TEST_CASE("one frame per 250 ms cycle settles at speed 4") {
  auto r = paper_range();
  auto cfg = amok(r.target);
  cfg.kind = AttackKind::AuthDoS;
  cfg.burst = 1;
  std::vector<FeedStats> stats;
  const auto start = r.sim().now();
  AttackSession s(r.sim(), r.att(), cfg, [&](const FeedEvent& e) {
    if (auto* st = std::get_if<FeedStats>(&e.body); st && e.t >= start + 1000) stats.push_back(*st);
  });
  r.sim().advance_until(start + 10000);
  REQUIRE(!stats.empty());
  for (const auto& st : stats) CHECK(st.speed == 4);
  CHECK(render_feed_line(FeedEvent{0, stats.back()}).ends_with(" - Speed: 4 packets/sec"));
}

TEST_CASE("auth flood fills the AP table from random addresses") {
  auto r = paper_range();
  auto cfg = amok(r.target);
  cfg.kind = AttackKind::AuthDoS;
  AttackSession s(r.sim(), r.att(), cfg);
  r.sim().advance_until(r.sim().now() + 2000);
  const auto* ap = r.world->find_ap(kAp);
  CHECK(ap->auth_table_size() == 64);
  int rejected = 0;
  for (const auto& e : r.sim().log().entries()) rejected += e.kind == "auth_rejected";
  CHECK(rejected > 0);
  std::set<std::string> sources;
  for (const auto* e : attack_injects(r.sim())) {
    CHECK(sfield(*e, "type") == "auth");
    sources.insert(sfield(*e, "src"));
  }
  CHECK(sources.size() > 64);
}

TEST_CASE("beacon flood announces random networks on the current channel") {
  auto r = paper_range();
  AttackConfig cfg;
  cfg.kind = AttackKind::BeaconFlood;
  cfg.burst = 5;
  r.sim().tune(r.att(), Channel{Band::Band24, 6});
  AttackSession s(r.sim(), r.att(), cfg);
  r.sim().advance_until(r.sim().now() + 1000);
  const auto injects = attack_injects(r.sim());
  // Cycles at +0, +250, ..., +1000 inclusive.
  CHECK(injects.size() == 25);
  for (const auto* e : injects) {
    CHECK(sfield(*e, "type") == "beacon");
    CHECK(e->data.at("channel").get<int>() == 6);
    CHECK(sfield(*e, "essid").size() == 8);
  }
}

TEST_CASE("targeted deauth only touches the chosen client") {
  auto r = paper_range();
  auto cfg = amok(r.target);
  cfg.kind = AttackKind::TargetedDeauth;
  cfg.client = kSta2;
  AttackSession s(r.sim(), r.att(), cfg);
  r.sim().advance_until(r.sim().now() + 5000);
  for (const auto* e : attack_injects(r.sim())) {
    CHECK(sfield(*e, "type") == "deauth");
    const bool ok = (sfield(*e, "src") == kAp.str() && sfield(*e, "dst") == kSta2.str()) ||
                    (sfield(*e, "src") == kSta2.str() && sfield(*e, "dst") == kAp.str());
    CHECK(ok);
  }
  CHECK(r.world->find_station(kSta1)->disconnect_count() == 0);
  CHECK(r.world->find_station(kSta2)->disconnect_count() > 0);
}

TEST_CASE("filter list parsing") {
  std::vector<std::size_t> bad;
  const auto set = parse_filter_list(
      "# victims\n70:BB:E9:3E:0A:64\n\n  ce:a2:48:68:42:bd  # trailing\nnot-a-mac\n70:BB:E9:3E:0A:64\n", &bad);
  CHECK(set == std::set<MacAddress>{kSta1, kSta2});
  CHECK(bad == std::vector<std::size_t>{5});
  CHECK(parse_filter_list("").empty());
}

TEST_CASE("whitelisted clients are never targeted") {
  const auto path = oracle::temp_path("whitelist.txt");
  oracle::write_file(path, "70:BB:E9:3E:0A:64\n");
  auto r = paper_range();
  auto cfg = amok(r.target);
  cfg.filter_mode = FilterMode::Whitelist;
  cfg.filter_path = path;
  std::vector<std::string> lines;
  AttackSession s(r.sim(), r.att(), cfg, [&](const FeedEvent& e) { lines.push_back(render_feed_line(e)); });
  r.sim().advance_until(r.sim().now() + 20000);
  s.stop();
  REQUIRE(!lines.empty());
  CHECK(lines.front() == "Periodically re-reading blacklist/whitelist every 3 seconds");
  CHECK(s.filter_list().size() == 1);
  int hits = 0;
  for (const auto* e : attack_injects(r.sim())) {
    CHECK(sfield(*e, "src") != kSta1.str());
    CHECK(sfield(*e, "dst") != kSta1.str());
    CHECK(sfield(*e, "dst") != MacAddress::broadcast().str());
    hits += sfield(*e, "dst") == kSta2.str();
  }
  CHECK(hits > 0);
}

TEST_CASE("blacklist restricts targeting to listed clients") {
  const auto path = oracle::temp_path("blacklist.txt");
  oracle::write_file(path, "CE:A2:48:68:42:BD\n");
  auto r = paper_range();
  auto cfg = amok(r.target);
  cfg.filter_mode = FilterMode::Blacklist;
  cfg.filter_path = path;
  AttackSession s(r.sim(), r.att(), cfg);
  r.sim().advance_until(r.sim().now() + 10000);
  const auto injects = attack_injects(r.sim());
  REQUIRE(!injects.empty());
  for (const auto* e : injects) {
    const bool touches = sfield(*e, "src") == kSta2.str() || sfield(*e, "dst") == kSta2.str();
    CHECK(touches);
  }
}

TEST_CASE("filter lists reload every 3000 ms of simulated time") {
  const auto path = oracle::temp_path("cadence.txt");
  oracle::write_file(path, "# nothing yet\n");
  auto r = paper_range();
  auto cfg = amok(r.target);
  cfg.filter_mode = FilterMode::Whitelist;
  cfg.filter_path = path;
  const auto start = r.sim().now();
  AttackSession s(r.sim(), r.att(), cfg);
  r.sim().advance_until(start + 10000);
  std::vector<SimTime> reloads;
  for (const auto& e : r.sim().log().entries()) {
    if (e.kind == "filter_reload") reloads.push_back(e.t - start);
  }
  CHECK(reloads == std::vector<SimTime>{0, 3000, 6000, 9000});
}

TEST_CASE("no filter mode never schedules reloads") {
  auto r = paper_range();
  AttackSession s(r.sim(), r.att(), amok(r.target));
  r.sim().advance_until(r.sim().now() + 10000);
  for (const auto& e : r.sim().log().entries()) CHECK(e.kind != "filter_reload");
}

TEST_CASE("bad filter files warn and keep the previous list") {
  const auto path = oracle::temp_path("flaky.txt");
  oracle::write_file(path, "70:BB:E9:3E:0A:64\nbogus\n");
  auto r = paper_range();
  auto cfg = amok(r.target);
  cfg.filter_mode = FilterMode::Whitelist;
  cfg.filter_path = path;
  std::vector<std::string> warnings;
  AttackSession s(r.sim(), r.att(), cfg, [&](const FeedEvent& e) {
    if (auto* w = std::get_if<FeedWarning>(&e.body)) warnings.push_back(w->text);
  });
  CHECK(s.filter_list().size() == 1);
  REQUIRE(warnings.size() == 2);
  CHECK(warnings[1].find("malformed line 2") != std::string::npos);
  std::filesystem::remove(path);
  r.sim().advance_until(r.sim().now() + 3000);
  CHECK(s.filter_list().size() == 1);
  REQUIRE(warnings.size() == 3);
  CHECK(warnings[2].find("cannot read") != std::string::npos);
}

TEST_CASE("clients associated at a cycle are hit within one cycle interval") {
  auto r = paper_range();
  const auto start = r.sim().now();
  AttackSession s(r.sim(), r.att(), amok(r.target));
  r.sim().advance_until(start + 30000);
  s.stop();
  const auto injects = attack_injects(r.sim());
  for (const auto& e : r.sim().log().entries()) {
    if (e.kind != "assoc" || e.t < start) continue;
    const auto sta = sfield(e, "station");
    const bool hit = std::any_of(injects.begin(), injects.end(), [&](const LogEntry* i) {
      return i->t >= e.t && i->t <= e.t + 250 && sfield(*i, "type") == "disassoc" && sfield(*i, "dst") == sta;
    });
    CHECK(hit);
  }
}

TEST_CASE("pursuit follows a hopping AP within the bound") {
  auto r = paper_range("hopping.scenario");
  auto cfg = amok(r.target);
  cfg.pursuit = true;
  std::vector<std::string> moves;
  AttackSession s(r.sim(), r.att(), cfg, [&](const FeedEvent& e) {
    if (std::holds_alternative<FeedPursuit>(e.body)) moves.push_back(render_feed_line(e));
  });
  r.sim().advance_until(r.sim().now() + 60000);
  const auto stats = s.stop();
  const SimTime bound = cfg.loss_timeout + cfg.sweep_dwell * 35 + cfg.cycle_interval;
  REQUIRE(!s.reacquisition_latencies().empty());
  for (auto l : s.reacquisition_latencies()) CHECK(l <= bound);
  CHECK(stats.channel_switches == static_cast<int>(s.reacquisition_latencies().size()));
  CHECK(moves.size() == s.reacquisition_latencies().size());
  CHECK(moves.front() == "Target moved from channel 36 to channel 40");
  CHECK(s.locked_channel() == r.world->find_ap(kAp)->channel());
}

TEST_CASE("without pursuit a hop loses the target and stops the session") {
  auto r = paper_range("hopping.scenario");
  AttackSession s(r.sim(), r.att(), amok(r.target));
  const auto start = r.sim().now();
  r.sim().advance_until(start + 20000);
  CHECK(s.state() == SessionState::Stopped);
  CHECK(s.pursuit_check().outcome == PursuitOutcome::Lost);
  const auto* ap = r.world->find_ap(kAp);
  CHECK(ap->hop_count() == 1);
  for (const auto& st : r.world->stations()) CHECK(st->phase() == StationPhase::Associated);
}

TEST_CASE("a stationary AP keeps the session locked") {
  auto r = paper_range();
  auto cfg = amok(r.target);
  cfg.pursuit = true;
  AttackSession s(r.sim(), r.att(), cfg);
  for (int i = 0; i < 40; ++i) {
    r.sim().advance_until(r.sim().now() + 250);
    CHECK(s.pursuit_check().outcome == PursuitOutcome::Locked);
  }
  CHECK(s.channel_switches() == 0);
}

TEST_CASE("attack kind names") {
  for (auto k : {AttackKind::DisassocAmok, AttackKind::TargetedDeauth, AttackKind::BeaconFlood, AttackKind::AuthDoS}) {
    CHECK(parse_attack_kind(attack_kind_name(k)) == k);
  }
  CHECK(attack_kind_name(AttackKind::DisassocAmok) == "disassoc-amok");
  CHECK_THROWS_AS(parse_attack_kind("disassoc-anok"), DomainError);
}
