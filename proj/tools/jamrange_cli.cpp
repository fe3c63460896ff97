#include <csignal>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <regex>
#include <string>

#include <CLI11.hpp>

#include "jamrange/jamrange.h"

namespace {

int exit_code(jr_status status) {
  switch (status) {
    case JR_OK: return 0;
    case JR_ERR_ARGUMENT: return 1;
    case JR_ERR_SCENARIO:
    case JR_ERR_NOT_FOUND:
    case JR_ERR_IO:
    case JR_ERR_PARSE:
    case JR_ERR_DECODE: return 2;
    default: return 3;
  }
}

int fail(jr_status status) {
  std::cout.flush();
  std::cerr << "error: " << jr_status_name(status) << ": " << jr_last_error() << "\n";
  return exit_code(status);
}

struct WorldHandle {
  jr_world* w = nullptr;
  ~WorldHandle() { jr_world_close(w); }
};

std::string take(char* s) {
  std::string out = s ? s : "";
  jr_free(s);
  return out;
}

const CLI::Validator kMac = CLI::Validator(
    [](std::string& v) -> std::string {
      static const std::regex re("^([0-9A-Fa-f]{2}:){5}[0-9A-Fa-f]{2}$");
      return std::regex_match(v, re) ? std::string() : "not a MAC address (expected XX:XX:XX:XX:XX:XX): " + v;
    },
    "MAC");

jr_status open_world(const std::string& path, const std::optional<std::uint64_t>& seed, WorldHandle& h) {
  const jr_status st = jr_world_open(path.c_str(), seed ? 1 : 0, seed.value_or(0), &h.w);
  if (st != JR_OK) return st;
  char* warnings = nullptr;
  if (jr_world_warnings(h.w, &warnings) == JR_OK) std::cerr << take(warnings);
  return JR_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated 802.11 jamming range"};
  app.require_subcommand(1);
  app.set_version_flag("--version", jr_version());

  std::string scenario;
  std::optional<std::uint64_t> seed;

  auto* scan_cmd = app.add_subcommand("scan", "List access points seen from the attacker adapter");
  std::int64_t scan_duration = 0;
  scan_cmd->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  scan_cmd->add_option("--duration", scan_duration, "Scan length in ms (default: one sweep of every channel)")
      ->check(CLI::NonNegativeNumber);
  scan_cmd->add_option("--seed", seed, "Override the scenario seed");

  auto* attack_cmd = app.add_subcommand("attack", "Scan for a target and flood it");
  std::string target, kind = "disassoc-amok", log_path, dump_path, client, whitelist, blacklist;
  bool pursuit = false, feed = false;
  std::int64_t duration = 60000;
  int reason = 0;
  attack_cmd->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  attack_cmd->add_option("--target", target, "Target BSSID")->check(kMac);
  attack_cmd->add_option("--kind", kind, "Attack kind")
      ->check(CLI::IsMember({"disassoc-amok", "deauth", "beacon-flood", "auth-dos"}));
  attack_cmd->add_flag("--pursuit", pursuit, "Follow the target if it changes channel");
  attack_cmd->add_option("--duration", duration, "Attack length in ms of simulated time")->check(CLI::NonNegativeNumber);
  attack_cmd->add_option("--seed", seed, "Override the scenario seed");
  attack_cmd->add_option("--log", log_path, "Write the JSONL event log here");
  attack_cmd->add_option("--dump", dump_path, "Write injected frames as a .wjf dump");
  attack_cmd->add_flag("--feed", feed, "Print the live attack feed");
  attack_cmd->add_option("--client", client, "Victim for the deauth kind")->check(kMac);
  auto* wl = attack_cmd->add_option("--whitelist", whitelist, "MACs never to target, re-read every 3 s");
  auto* bl = attack_cmd->add_option("--blacklist", blacklist, "Only target these MACs, re-read every 3 s");
  wl->excludes(bl);
  attack_cmd->add_option("--reason", reason, "Reason code of forged frames")->check(CLI::Range(1, 66));

  auto* report_cmd = app.add_subcommand("report", "Effectiveness report over a window of an event log");
  std::string report_log, window, format = "json";
  report_cmd->add_option("log", report_log, "JSONL event log")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--window", window, "T0:T1 in ms")->required();
  report_cmd->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

  auto* serve_cmd = app.add_subcommand("serve", "Run the session service on localhost");
  int port = 8080;
  std::string host = "127.0.0.1";
  serve_cmd->add_option("--port", port, "TCP port (0 picks one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--scenario", scenario, "Scenario file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--seed", seed, "Override the scenario seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 1;
  }

  if (*scan_cmd) {
    WorldHandle h;
    if (auto st = open_world(scenario, seed, h); st != JR_OK) return fail(st);
    if (auto st = jr_world_set_monitor(h.w, 1); st != JR_OK) return fail(st);
    char* table = nullptr;
    if (auto st = jr_scan(h.w, scan_duration, &table); st != JR_OK) return fail(st);
    std::cout << take(table);
    return 0;
  }

  if (*attack_cmd) {
    if (target.empty() && kind != "beacon-flood") {
      std::cerr << "error: usage: --target is required for " << kind << "\n";
      return 1;
    }
    if (kind == "deauth" && client.empty()) {
      std::cerr << "error: usage: --client is required for deauth\n";
      return 1;
    }
    WorldHandle h;
    if (auto st = open_world(scenario, seed, h); st != JR_OK) return fail(st);
    if (auto st = jr_world_set_monitor(h.w, 1); st != JR_OK) return fail(st);

    jr_attack_options opts{};
    opts.target = target.empty() ? nullptr : target.c_str();
    opts.kind = kind.c_str();
    opts.pursuit = pursuit ? 1 : 0;
    opts.duration_ms = duration;
    opts.client = client.empty() ? nullptr : client.c_str();
    opts.filter_mode = !whitelist.empty() ? JR_FILTER_WHITELIST : !blacklist.empty() ? JR_FILTER_BLACKLIST : JR_FILTER_NONE;
    const std::string filter = !whitelist.empty() ? whitelist : blacklist;
    opts.filter_path = filter.empty() ? nullptr : filter.c_str();
    opts.reason = reason;

    auto print = [](const char* line, void*) { std::cout << line << '\n'; };
    jr_attack_stats stats{};
    const jr_status st = jr_attack_run(h.w, &opts, feed ? +print : nullptr, nullptr, &stats);
    // The log is written even when the attack failed so the run can be inspected.
    if (!log_path.empty()) {
      if (auto ls = jr_world_write_log(h.w, log_path.c_str()); ls != JR_OK && st == JR_OK) return fail(ls);
    }
    if (st != JR_OK) return fail(st);
    if (!dump_path.empty()) {
      if (auto ds = jr_world_write_dump(h.w, dump_path.c_str()); ds != JR_OK) return fail(ds);
    }
    std::cerr << "attack window " << stats.started_at << ":" << stats.stopped_at << " ms, packets sent "
              << stats.packets_sent << ", peak " << stats.peak_speed << " packets/sec, channel switches "
              << stats.channel_switches << "\n";
    return 0;
  }

  if (*report_cmd) {
    const auto colon = window.find(':');
    long long t0 = 0, t1 = 0;
    try {
      if (colon == std::string::npos) throw std::invalid_argument(window);
      std::size_t used0 = 0, used1 = 0;
      t0 = std::stoll(window.substr(0, colon), &used0);
      t1 = std::stoll(window.substr(colon + 1), &used1);
      if (used0 != colon || used1 != window.size() - colon - 1) throw std::invalid_argument(window);
    } catch (const std::exception&) {
      std::cerr << "error: usage: --window expects T0:T1 in ms, got '" << window << "'\n";
      return 1;
    }
    char* text = nullptr;
    if (auto st = jr_report(report_log.c_str(), t0, t1, format == "text", &text); st != JR_OK) return fail(st);
    std::cout << take(text);
    return 0;
  }

  // serve: block SIGINT/SIGTERM everywhere so the main thread can wait for them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  jr_server* server = nullptr;
  int bound = 0;
  const jr_status st = jr_server_start(scenario.empty() ? nullptr : scenario.c_str(), seed ? 1 : 0, seed.value_or(0),
                                       host.c_str(), port, &server, &bound);
  if (st != JR_OK) return fail(st);
  std::cout << "listening on http://" << host << ":" << bound << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  jr_server_stop(server);
  return 0;
}
