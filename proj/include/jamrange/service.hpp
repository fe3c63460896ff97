#pragma once

// Local HTTP+JSON session service. One owner thread holds the simulation and
// applies commands in arrival order; feed readers consume an append-only
// sequence without touching the simulation.

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "jamrange/attack.hpp"
#include "jamrange/metrics.hpp"
#include "jamrange/scenario.hpp"

namespace httplib {
class Server;
}

namespace jamrange {

struct FeedRecord {
  std::uint64_t seq = 0;
  std::string attack_id;
  FeedEvent event;
};

// Gapless, append-only; seq starts at 1.
class FeedLog {
 public:
  std::uint64_t append(std::string attack_id, FeedEvent event);
  // Records with seq > since, waiting up to `wait_ms` wall time for the first.
  std::vector<FeedRecord> since(std::uint64_t since, std::int64_t wait_ms = 0, std::size_t limit = 1000) const;
  std::uint64_t last_seq() const;
  void close();

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<FeedRecord> records_;
  bool closed_ = false;
};

LogData feed_record_to_json(const FeedRecord& record);

enum class PaceMode { Realtime, Paused, Step };

struct ServiceResponse {
  int status = 200;
  LogData body;
};

class Service {
 public:
  struct Options {
    PaceMode pace = PaceMode::Realtime;
    double ratio = 1.0;
    SimTime scan_dwell = 250;
  };

  Service(const Scenario& scenario, std::uint64_t seed, Options options);
  explicit Service(const Scenario& scenario, std::uint64_t seed) : Service(scenario, seed, Options{}) {}
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;
  ~Service();

  // Routes one request exactly as the HTTP layer would. `query` carries the
  // raw value of `since` and `wait_ms` for the events endpoint.
  ServiceResponse handle(const std::string& method, const std::string& path, const std::string& body,
                         const std::map<std::string, std::string>& query = {});

  // Binds to host:port (0 picks a free port) and serves on a background
  // thread. Returns the bound port; throws ConfigError if binding fails.
  int listen(const std::string& host, int port);
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

  const FeedLog& feed() const noexcept { return feed_; }

 private:
  struct Scan;
  struct Attack;
  using Command = std::function<ServiceResponse()>;

  ServiceResponse submit(Command cmd);
  void owner_loop();
  void advance_realtime();

  ServiceResponse get_interfaces();
  ServiceResponse set_mode(IfaceId id, const LogData& body);
  ServiceResponse start_scan(const LogData& body);
  ServiceResponse get_scan(const std::string& id);
  ServiceResponse start_attack(const LogData& body);
  ServiceResponse stop_attack(const std::string& id);
  ServiceResponse set_pace(const LogData& body);
  ServiceResponse sim_status();
  LogData interface_json(IfaceId id) const;

  std::unique_ptr<World> world_;
  Options options_;
  FeedLog feed_;

  // Owned by the owner thread.
  std::map<std::string, std::unique_ptr<Scan>> scans_;
  std::map<std::string, std::unique_ptr<Attack>> attacks_;
  std::vector<ScanRecord> last_records_;
  int next_scan_ = 1;
  int next_attack_ = 1;
  PaceMode pace_;
  double ratio_;
  std::chrono::steady_clock::time_point wall_base_;
  SimTime sim_base_ = 0;

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::pair<Command, std::promise<ServiceResponse>>> queue_;
  bool stopping_ = false;
  std::thread owner_;

  std::unique_ptr<httplib::Server> http_;
  std::thread http_thread_;
};

}  // namespace jamrange
