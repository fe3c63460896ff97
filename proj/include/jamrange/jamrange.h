#ifndef JAMRANGE_JAMRANGE_H
#define JAMRANGE_JAMRANGE_H

/* C interface to the jamming range: scenario worlds, scans, attacks,
 * reports and the session service. Every call returns a jr_status; on
 * failure jr_last_error() describes the problem for the calling thread.
 * Strings returned through char** are owned by the caller (jr_free). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define JR_API __declspec(dllexport)
#elif defined(JAMRANGE_BUILDING)
#define JR_API __attribute__((visibility("default")))
#else
#define JR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum jr_status {
  JR_OK = 0,
  JR_ERR_ARGUMENT = 1, /* null pointer, bad flag value */
  JR_ERR_SCENARIO = 2, /* scenario file unreadable or invalid */
  JR_ERR_NOT_FOUND = 3,
  JR_ERR_IO = 4,
  JR_ERR_MODE = 5,     /* interface in the wrong mode */
  JR_ERR_DOMAIN = 6,   /* value outside its domain */
  JR_ERR_CONTRACT = 7, /* operation precondition broken */
  JR_ERR_PARSE = 8,
  JR_ERR_DECODE = 9,
  JR_ERR_INTERNAL = 10
} jr_status;

typedef struct jr_world jr_world;
typedef struct jr_server jr_server;

typedef enum jr_filter_mode { JR_FILTER_NONE = 0, JR_FILTER_WHITELIST = 1, JR_FILTER_BLACKLIST = 2 } jr_filter_mode;

typedef struct jr_attack_options {
  const char* target;      /* BSSID; may be NULL for beacon-flood */
  const char* kind;        /* "disassoc-amok", "deauth", "beacon-flood", "auth-dos"; NULL = disassoc-amok */
  int pursuit;
  int64_t duration_ms;     /* attack length after the target scan */
  const char* client;      /* deauth victim, may be NULL */
  jr_filter_mode filter_mode;
  const char* filter_path;
  int reason;              /* 0 = default */
} jr_attack_options;

typedef struct jr_attack_stats {
  uint64_t packets_sent;
  uint64_t peak_speed;
  int channel_switches;
  int64_t duration;
  int64_t started_at;
  int64_t stopped_at;
} jr_attack_stats;

typedef void (*jr_feed_fn)(const char* line, void* user);

JR_API const char* jr_version(void);
JR_API const char* jr_last_error(void);
JR_API const char* jr_status_name(jr_status status);
JR_API void jr_free(void* p);

/* Loads a scenario and builds its world. has_seed = 0 uses the scenario's seed. */
JR_API jr_status jr_world_open(const char* scenario_path, int has_seed, uint64_t seed, jr_world** out);
JR_API jr_status jr_world_open_text(const char* scenario_text, int has_seed, uint64_t seed, jr_world** out);
JR_API void jr_world_close(jr_world* world);

/* Scenario warnings, one per line (empty string when none). */
JR_API jr_status jr_world_warnings(jr_world* world, char** out);
JR_API jr_status jr_world_now(jr_world* world, int64_t* out);
JR_API jr_status jr_world_advance(jr_world* world, int64_t until_ms);
/* monitor != 0 selects monitor mode on the attacker interface. */
JR_API jr_status jr_world_set_monitor(jr_world* world, int monitor);

/* Scans from the attacker interface for duration_ms (0 = one sweep over
 * every supported channel) and renders the table. */
JR_API jr_status jr_scan(jr_world* world, int64_t duration_ms, char** table_out);

/* Scans one full sweep, locks onto the target and attacks for
 * duration_ms. Feed lines are passed to `feed` as they happen. */
JR_API jr_status jr_attack_run(jr_world* world, const jr_attack_options* options, jr_feed_fn feed, void* user,
                               jr_attack_stats* stats_out);

JR_API jr_status jr_world_log_jsonl(jr_world* world, char** out);
JR_API jr_status jr_world_write_log(jr_world* world, const char* path);
/* Writes every injected frame as a .wjf dump. */
JR_API jr_status jr_world_write_dump(jr_world* world, const char* path);

/* Report over [t0, t1) of a JSONL log file; text_format = 0 gives JSON. */
JR_API jr_status jr_report(const char* log_path, int64_t t0, int64_t t1, int text_format, char** out);

/* Starts the session service in real-time pacing. scenario_path may be
 * NULL for an empty world. port 0 picks a free port. */
JR_API jr_status jr_server_start(const char* scenario_path, int has_seed, uint64_t seed, const char* host, int port,
                                 jr_server** out, int* bound_port);
JR_API void jr_server_stop(jr_server* server);

#ifdef __cplusplus
}
#endif

#endif
