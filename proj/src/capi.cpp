#include "jamrange/jamrange.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "jamrange/attack.hpp"
#include "jamrange/errors.hpp"
#include "jamrange/metrics.hpp"
#include "jamrange/scenario.hpp"
#include "jamrange/service.hpp"

using namespace jamrange;

struct jr_world {
  std::unique_ptr<World> world;
};

struct jr_server {
  std::unique_ptr<Service> service;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
jr_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return JR_OK;
  } catch (const ConfigError& e) {
    g_last_error = e.what();
    return JR_ERR_SCENARIO;
  } catch (const NotFoundError& e) {
    g_last_error = e.what();
    return JR_ERR_NOT_FOUND;
  } catch (const IoError& e) {
    g_last_error = e.what();
    return JR_ERR_IO;
  } catch (const ModeError& e) {
    g_last_error = e.what();
    return JR_ERR_MODE;
  } catch (const DomainError& e) {
    g_last_error = e.what();
    return JR_ERR_DOMAIN;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return JR_ERR_ARGUMENT;
  } catch (const ContractError& e) {
    g_last_error = e.what();
    return JR_ERR_CONTRACT;
  } catch (const ParseError& e) {
    g_last_error = e.what();
    return JR_ERR_PARSE;
  } catch (const DecodeError& e) {
    g_last_error = e.what();
    return JR_ERR_DECODE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return JR_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw std::invalid_argument(std::string(what) + " must not be null");
}

jr_status argument_error(const char* what) {
  g_last_error = std::string(what) + " must not be null";
  return JR_ERR_ARGUMENT;
}

SimTime full_sweep(const World& w) {
  const auto& iface = w.sim().iface(w.attacker());
  return static_cast<SimTime>(iface.supported_channels().size()) * 250;
}

}  // namespace

extern "C" {

const char* jr_version(void) { return "0.1.0"; }

const char* jr_last_error(void) { return g_last_error.c_str(); }

const char* jr_status_name(jr_status status) {
  switch (status) {
    case JR_OK: return "ok";
    case JR_ERR_ARGUMENT: return "argument";
    case JR_ERR_SCENARIO: return "scenario";
    case JR_ERR_NOT_FOUND: return "not_found";
    case JR_ERR_IO: return "io";
    case JR_ERR_MODE: return "mode";
    case JR_ERR_DOMAIN: return "domain";
    case JR_ERR_CONTRACT: return "contract";
    case JR_ERR_PARSE: return "parse";
    case JR_ERR_DECODE: return "decode";
    case JR_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void jr_free(void* p) { std::free(p); }

jr_status jr_world_open(const char* scenario_path, int has_seed, uint64_t seed, jr_world** out) {
  if (!scenario_path) return argument_error("scenario_path");
  if (!out) return argument_error("out");
  return guarded([&] {
    const auto sc = load_scenario(scenario_path);
    *out = new jr_world{new_simulation(sc, has_seed ? seed : sc.seed)};
  });
}

jr_status jr_world_open_text(const char* scenario_text, int has_seed, uint64_t seed, jr_world** out) {
  if (!scenario_text) return argument_error("scenario_text");
  if (!out) return argument_error("out");
  return guarded([&] {
    const auto sc = parse_scenario(scenario_text);
    *out = new jr_world{new_simulation(sc, has_seed ? seed : sc.seed)};
  });
}

void jr_world_close(jr_world* world) { delete world; }

jr_status jr_world_warnings(jr_world* world, char** out) {
  if (!world) return argument_error("world");
  if (!out) return argument_error("out");
  return guarded([&] {
    std::string text;
    for (const auto& w : world->world->scenario().warnings) text += w + "\n";
    *out = dup_string(text);
  });
}

jr_status jr_world_now(jr_world* world, int64_t* out) {
  if (!world) return argument_error("world");
  if (!out) return argument_error("out");
  *out = world->world->sim().now();
  return JR_OK;
}

jr_status jr_world_advance(jr_world* world, int64_t until_ms) {
  if (!world) return argument_error("world");
  return guarded([&] { world->world->sim().advance_until(until_ms); });
}

jr_status jr_world_set_monitor(jr_world* world, int monitor) {
  if (!world) return argument_error("world");
  return guarded([&] {
    auto& w = *world->world;
    w.sim().set_mode(w.attacker(), monitor ? Mode::Monitor : Mode::Managed);
  });
}

jr_status jr_scan(jr_world* world, int64_t duration_ms, char** table_out) {
  if (!world) return argument_error("world");
  if (!table_out) return argument_error("table_out");
  return guarded([&] {
    auto& w = *world->world;
    if (duration_ms < 0) throw DomainError("scan duration must not be negative");
    const SimTime duration = duration_ms == 0 ? full_sweep(w) : duration_ms;
    const auto records = scan(w.sim(), w.attacker(), 250, duration);
    *table_out = dup_string(render_scan_table(records));
  });
}

jr_status jr_attack_run(jr_world* world, const jr_attack_options* options, jr_feed_fn feed, void* user,
                        jr_attack_stats* stats_out) {
  if (!world) return argument_error("world");
  if (!options) return argument_error("options");
  return guarded([&] {
    auto& w = *world->world;
    AttackConfig cfg;
    cfg.kind = options->kind ? parse_attack_kind(options->kind) : AttackKind::DisassocAmok;
    cfg.pursuit = options->pursuit != 0;
    if (options->client) cfg.client = MacAddress::parse(options->client);
    cfg.filter_mode = static_cast<FilterMode>(options->filter_mode);
    if (options->filter_path) cfg.filter_path = options->filter_path;
    if (options->reason != 0) cfg.reason = ReasonCode(options->reason);
    if (options->duration_ms < 0) throw DomainError("attack duration must not be negative");

    if (options->target) {
      const auto bssid = MacAddress::parse(options->target);
      const auto records = scan(w.sim(), w.attacker(), 250, full_sweep(w));
      auto it = std::find_if(records.begin(), records.end(), [&](const ScanRecord& r) { return r.bssid == bssid; });
      if (it == records.end()) {
        std::string seen;
        for (const auto& r : records) seen += (seen.empty() ? "" : ", ") + r.bssid.str();
        throw NotFoundError("target " + bssid.str() + " not found; scanned BSSIDs: " +
                            (seen.empty() ? std::string("none") : seen));
      }
      cfg.target = *it;
    }

    FeedSink sink;
    if (feed) {
      sink = [feed, user](const FeedEvent& e) { feed(render_feed_line(e).c_str(), user); };
    }
    AttackSession session(w.sim(), w.attacker(), cfg, sink);
    const SimTime start = w.sim().now();
    w.sim().advance_until(start + options->duration_ms);
    const auto stats = session.stop();
    if (stats_out) {
      *stats_out = jr_attack_stats{stats.packets_sent, stats.peak_speed, stats.channel_switches, stats.duration,
                                   start, w.sim().now()};
    }
  });
}

jr_status jr_world_log_jsonl(jr_world* world, char** out) {
  if (!world) return argument_error("world");
  if (!out) return argument_error("out");
  return guarded([&] { *out = dup_string(world->world->sim().log().to_jsonl()); });
}

jr_status jr_world_write_log(jr_world* world, const char* path) {
  if (!world) return argument_error("world");
  if (!path) return argument_error("path");
  return guarded([&] {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(std::string("cannot write ") + path);
    world->world->sim().log().write_jsonl(out);
    if (!out) throw IoError(std::string("write failed for ") + path);
  });
}

jr_status jr_world_write_dump(jr_world* world, const char* path) {
  if (!world) return argument_error("world");
  if (!path) return argument_error("path");
  return guarded([&] {
    try {
      write_frame_dump(path, world->world->sim().injected_frames());
    } catch (const std::ios_base::failure& e) {
      throw IoError(e.what());
    }
  });
}

jr_status jr_report(const char* log_path, int64_t t0, int64_t t1, int text_format, char** out) {
  if (!log_path) return argument_error("log_path");
  if (!out) return argument_error("out");
  return guarded([&] {
    std::ifstream in(log_path, std::ios::binary);
    if (!in) throw IoError(std::string("cannot read log ") + log_path);
    const auto entries = EventLog::read_jsonl(in);
    const auto report = compute_report(entries, t0, t1);
    *out = dup_string(text_format ? report_to_text(report) : report_to_json(report).dump(2) + "\n");
  });
}

jr_status jr_server_start(const char* scenario_path, int has_seed, uint64_t seed, const char* host, int port,
                          jr_server** out, int* bound_port) {
  if (!out) return argument_error("out");
  return guarded([&] {
    require(host, "host");
    if (port < 0 || port > 65535) throw DomainError("port must be within 0..65535");
    Scenario sc;
    if (scenario_path) sc = load_scenario(scenario_path);
    auto server = std::make_unique<jr_server>();
    server->service = std::make_unique<Service>(sc, has_seed ? seed : sc.seed);
    const int p = server->service->listen(host, port);
    if (bound_port) *bound_port = p;
    *out = server.release();
  });
}

void jr_server_stop(jr_server* server) {
  if (!server) return;
  server->service->stop();
  delete server;
}

}  // extern "C"
