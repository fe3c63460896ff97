#include "jamrange/service.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>

#include <httplib.h>

#include "jamrange/errors.hpp"

namespace jamrange {

namespace {

constexpr std::int64_t kMaxWaitMs = 30000;

ServiceResponse error(int status, std::string_view code, const std::string& message) {
  LogData body = LogData::object();
  body["code"] = std::string(code);
  body["message"] = message;
  return {status, std::move(body)};
}

// Digits only; anything else (signs, blanks, overflow) is rejected.
template <class T>
T parse_count(const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || text[0] == '-' || ec != std::errc() || ptr != end) {
    throw std::invalid_argument("not a non-negative integer: " + text);
  }
  return value;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < path.size()) {
    auto next = path.find('/', pos);
    if (next == std::string::npos) next = path.size();
    if (next > pos) out.push_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

LogData record_json(const ScanRecord& r) {
  LogData j = LogData::object();
  j["index"] = r.index;
  j["bssid"] = r.bssid.str();
  j["channel"] = r.channel.number;
  j["pwr"] = r.pwr;
  j["enc"] = std::string(encryption_name(r.enc));
  j["essid"] = display_essid(r.essid);
  j["has_clients"] = r.has_clients;
  return j;
}

LogData stats_json(const AttackStats& s) {
  LogData j = LogData::object();
  j["packets_sent"] = s.packets_sent;
  j["peak_speed"] = s.peak_speed;
  j["channel_switches"] = s.channel_switches;
  j["duration"] = s.duration;
  return j;
}

std::string_view pace_name(PaceMode mode) {
  switch (mode) {
    case PaceMode::Realtime: return "realtime";
    case PaceMode::Paused: return "paused";
    case PaceMode::Step: return "step";
  }
  return "?";
}

template <class T>
T body_field(const LogData& body, const char* key, T fallback) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DomainError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

std::uint64_t FeedLog::append(std::string attack_id, FeedEvent event) {
  std::uint64_t seq;
  {
    std::lock_guard lk(mu_);
    seq = records_.size() + 1;
    records_.push_back(FeedRecord{seq, std::move(attack_id), std::move(event)});
  }
  cv_.notify_all();
  return seq;
}

std::vector<FeedRecord> FeedLog::since(std::uint64_t since, std::int64_t wait_ms, std::size_t limit) const {
  std::unique_lock lk(mu_);
  if (wait_ms > 0) {
    cv_.wait_for(lk, std::chrono::milliseconds(wait_ms), [&] { return closed_ || records_.size() > since; });
  }
  std::vector<FeedRecord> out;
  for (std::size_t i = since; i < records_.size() && out.size() < limit; ++i) out.push_back(records_[i]);
  return out;
}

std::uint64_t FeedLog::last_seq() const {
  std::lock_guard lk(mu_);
  return records_.size();
}

void FeedLog::close() {
  {
    std::lock_guard lk(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

LogData feed_record_to_json(const FeedRecord& record) {
  LogData j = LogData::object();
  j["seq"] = record.seq;
  j["t"] = record.event.t;
  j["attack_id"] = record.attack_id;
  j["type"] = std::string(feed_event_type(record.event));
  j["text"] = render_feed_line(record.event);
  if (auto* d = std::get_if<FeedDisconnect>(&record.event.body)) {
    j["victim"] = d->victim.str();
    j["from"] = d->from.str();
    j["channel"] = d->channel;
  } else if (auto* s = std::get_if<FeedStats>(&record.event.body)) {
    j["packets_sent"] = s->packets_sent;
    j["speed"] = s->speed;
  } else if (auto* p = std::get_if<FeedPursuit>(&record.event.body)) {
    j["old_channel"] = p->old_channel;
    j["new_channel"] = p->new_channel;
  }
  return j;
}

struct Service::Scan {
  IfaceId iface = 0;
  std::unique_ptr<Scanner> scanner;
  std::vector<ScanRecord> records;
  bool done = false;
};

struct Service::Attack {
  std::unique_ptr<AttackSession> session;
  std::optional<AttackStats> stats;
  bool active() const { return !stats && session->state() != SessionState::Stopped; }
};

Service::Service(const Scenario& scenario, std::uint64_t seed, Options options)
    : world_(new_simulation(scenario, seed)), options_(options), pace_(options.pace), ratio_(options.ratio) {
  if (ratio_ <= 0.0) throw ConfigError("pacing ratio must be positive");
  wall_base_ = std::chrono::steady_clock::now();
  owner_ = std::thread([this] { owner_loop(); });
}

Service::~Service() {
  stop();
  if (http_thread_.joinable()) http_thread_.join();
  if (owner_.joinable()) owner_.join();
}

void Service::stop() {
  {
    std::lock_guard lk(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  feed_.close();
  if (http_) http_->stop();
}

void Service::wait() {
  if (http_thread_.joinable()) http_thread_.join();
  if (owner_.joinable()) owner_.join();
}

ServiceResponse Service::submit(Command cmd) {
  std::future<ServiceResponse> fut;
  {
    std::lock_guard lk(mu_);
    if (stopping_) return error(503, "conflict", "service is shutting down");
    std::promise<ServiceResponse> p;
    fut = p.get_future();
    queue_.emplace_back(std::move(cmd), std::move(p));
  }
  cv_.notify_all();
  return fut.get();
}

void Service::owner_loop() {
  for (;;) {
    std::deque<std::pair<Command, std::promise<ServiceResponse>>> batch;
    {
      std::unique_lock lk(mu_);
      cv_.wait_for(lk, std::chrono::milliseconds(2), [&] { return stopping_ || !queue_.empty(); });
      batch.swap(queue_);
      if (stopping_ && batch.empty()) break;
    }
    for (auto& [cmd, promise] : batch) {
      ServiceResponse r;
      try {
        r = cmd();
      } catch (const ModeError& e) {
        r = error(409, "mode_required", e.what());
      } catch (const NotFoundError& e) {
        r = error(404, "not_found", e.what());
      } catch (const ContractError& e) {
        r = error(409, "conflict", e.what());
      } catch (const std::exception& e) {
        r = error(400, "bad_request", e.what());
      }
      promise.set_value(std::move(r));
    }
    if (pace_ == PaceMode::Realtime) advance_realtime();
  }
}

void Service::advance_realtime() {
  using namespace std::chrono;
  const auto elapsed = duration_cast<milliseconds>(steady_clock::now() - wall_base_).count();
  const SimTime target = sim_base_ + static_cast<SimTime>(static_cast<double>(elapsed) * ratio_);
  if (target > world_->sim().now()) world_->sim().advance_until(target);
}

ServiceResponse Service::handle(const std::string& method, const std::string& path, const std::string& body_text,
                                const std::map<std::string, std::string>& query) {
  LogData body = LogData::object();
  if (!body_text.empty()) {
    try {
      body = LogData::parse(body_text);
    } catch (const nlohmann::json::exception&) {
      return error(400, "bad_request", "request body is not valid JSON");
    }
    if (!body.is_object()) return error(400, "bad_request", "request body must be a JSON object");
  }

  const auto seg = split_path(path);
  if (seg.size() < 2 || seg[0] != "api") return error(404, "not_found", "no route for " + method + " " + path);
  const auto& res = seg[1];

  try {
    if (res == "events" && seg.size() == 2 && method == "GET") {
      std::uint64_t since = 0;
      std::int64_t wait_ms = 0;
      if (auto it = query.find("since"); it != query.end()) since = parse_count<std::uint64_t>(it->second);
      if (auto it = query.find("wait_ms"); it != query.end()) {
        wait_ms = std::min(parse_count<std::int64_t>(it->second), kMaxWaitMs);
      }
      LogData events = LogData::array();
      for (const auto& r : feed_.since(since, wait_ms)) events.push_back(feed_record_to_json(r));
      LogData out = LogData::object();
      out["events"] = std::move(events);
      out["last_seq"] = feed_.last_seq();
      return {200, std::move(out)};
    }
  } catch (const std::logic_error&) {
    return error(400, "bad_request", "since and wait_ms must be non-negative integers");
  }

  if (res == "interfaces") {
    if (seg.size() == 2 && method == "GET") return submit([this] { return get_interfaces(); });
    if (seg.size() == 4 && seg[3] == "mode" && method == "POST") {
      IfaceId id;
      try {
        id = static_cast<IfaceId>(std::stoul(seg[2]));
      } catch (const std::logic_error&) {
        return error(404, "not_found", "unknown interface " + seg[2]);
      }
      return submit([this, id, body] { return set_mode(id, body); });
    }
  }
  if (res == "scans") {
    if (seg.size() == 2 && method == "POST") return submit([this, body] { return start_scan(body); });
    if (seg.size() == 3 && method == "GET") return submit([this, id = seg[2]] { return get_scan(id); });
  }
  if (res == "attacks") {
    if (seg.size() == 2 && method == "POST") return submit([this, body] { return start_attack(body); });
    if (seg.size() == 3 && method == "DELETE") return submit([this, id = seg[2]] { return stop_attack(id); });
  }
  if (res == "sim") {
    if (seg.size() == 3 && seg[2] == "pace" && method == "POST") return submit([this, body] { return set_pace(body); });
    if (seg.size() == 2 && method == "GET") return submit([this] { return sim_status(); });
  }
  return error(404, "not_found", "no route for " + method + " " + path);
}

LogData Service::interface_json(IfaceId id) const {
  const auto& i = world_->sim().iface(id);
  LogData j = LogData::object();
  j["id"] = id;
  j["name"] = i.name();
  LogData bands = LogData::array();
  for (auto b : i.bands()) bands.push_back(std::string(band_label(b)));
  j["bands"] = std::move(bands);
  j["mode"] = std::string(mode_name(i.mode()));
  j["channel"] = i.tuned().number;
  return j;
}

ServiceResponse Service::get_interfaces() {
  LogData list = LogData::array();
  list.push_back(interface_json(world_->attacker()));
  return {200, std::move(list)};
}

ServiceResponse Service::set_mode(IfaceId id, const LogData& body) {
  if (id != world_->attacker()) throw NotFoundError("unknown interface " + std::to_string(id));
  const auto text = body_field<std::string>(body, "mode", "");
  Mode mode;
  if (text == "monitor") {
    mode = Mode::Monitor;
  } else if (text == "managed") {
    mode = Mode::Managed;
  } else {
    throw DomainError("mode must be \"monitor\" or \"managed\"");
  }
  if (mode == Mode::Managed) {
    for (const auto& [aid, a] : attacks_) {
      if (a->active() && a->session->iface() == id) {
        throw ContractError("attack " + aid + " is running on this interface; stop it first");
      }
    }
  }
  world_->sim().set_mode(id, mode);
  return {200, interface_json(id)};
}

ServiceResponse Service::start_scan(const LogData& body) {
  const IfaceId iface = body_field<IfaceId>(body, "interface", world_->attacker());
  if (iface != world_->attacker()) throw NotFoundError("unknown interface " + std::to_string(iface));
  const auto duration = body_field<SimTime>(body, "duration_ms", 0);
  if (duration <= 0) throw DomainError("duration_ms must be a positive integer");
  if (world_->sim().iface(iface).mode() != Mode::Monitor) {
    throw ModeError("exploring targets needs monitor mode; put " + world_->sim().iface(iface).name() +
                    " in monitor mode first");
  }
  for (const auto& [sid, s] : scans_) {
    if (!s->done) throw ContractError("scan " + sid + " is still running");
  }
  for (const auto& [aid, a] : attacks_) {
    if (a->active()) throw ContractError("attack " + aid + " is running; stop it before scanning");
  }
  const std::string id = "scan-" + std::to_string(next_scan_++);
  auto scan = std::make_unique<Scan>();
  scan->iface = iface;
  Scan* raw = scan.get();
  scan->scanner = std::make_unique<Scanner>(world_->sim(), iface, options_.scan_dwell, duration,
                                            [this, raw](const std::vector<ScanRecord>& records) {
                                              raw->records = records;
                                              raw->done = true;
                                              last_records_ = records;
                                            });
  scans_.emplace(id, std::move(scan));
  LogData out = LogData::object();
  out["scan_id"] = id;
  return {202, std::move(out)};
}

ServiceResponse Service::get_scan(const std::string& id) {
  auto it = scans_.find(id);
  if (it == scans_.end()) throw NotFoundError("unknown scan " + id);
  const auto& s = *it->second;
  LogData out = LogData::object();
  out["scan_id"] = id;
  out["status"] = s.done ? "done" : "running";
  LogData records = LogData::array();
  for (const auto& r : s.done ? s.records : s.scanner->records()) records.push_back(record_json(r));
  out["records"] = std::move(records);
  return {200, std::move(out)};
}

ServiceResponse Service::start_attack(const LogData& body) {
  const IfaceId iface = body_field<IfaceId>(body, "interface", world_->attacker());
  if (iface != world_->attacker()) throw NotFoundError("unknown interface " + std::to_string(iface));
  AttackConfig cfg;
  cfg.kind = parse_attack_kind(body_field<std::string>(body, "kind", "disassoc-amok"));
  cfg.pursuit = body_field<bool>(body, "pursuit", false);
  cfg.reason = ReasonCode(body_field<int>(body, "reason", ReasonCode::kForgedDefault));
  if (auto client = body_field<std::string>(body, "client", ""); !client.empty()) cfg.client = MacAddress::parse(client);
  const auto filter = body_field<std::string>(body, "filter_mode", "none");
  if (filter == "whitelist") {
    cfg.filter_mode = FilterMode::Whitelist;
  } else if (filter == "blacklist") {
    cfg.filter_mode = FilterMode::Blacklist;
  } else if (filter != "none") {
    throw DomainError("filter_mode must be none, whitelist or blacklist");
  }
  cfg.filter_path = body_field<std::string>(body, "filter_path", "");

  if (world_->sim().iface(iface).mode() != Mode::Monitor) {
    throw ModeError("attacks need monitor mode; put " + world_->sim().iface(iface).name() + " in monitor mode first");
  }
  const auto target = body_field<std::string>(body, "target_bssid", "");
  if (!target.empty()) {
    const auto bssid = MacAddress::parse(target);
    auto it = std::find_if(last_records_.begin(), last_records_.end(),
                           [&](const ScanRecord& r) { return r.bssid == bssid; });
    if (it == last_records_.end()) throw NotFoundError("bssid " + bssid.str() + " was not found by the last scan");
    cfg.target = *it;
  } else if (cfg.kind != AttackKind::BeaconFlood) {
    throw DomainError("target_bssid is required for " + std::string(attack_kind_name(cfg.kind)));
  }
  for (const auto& [aid, a] : attacks_) {
    if (a->active() && a->session->iface() == iface) throw ContractError("attack " + aid + " is already running");
  }
  for (const auto& [sid, s] : scans_) {
    if (!s->done) throw ContractError("scan " + sid + " is still running");
  }

  const std::string id = "attack-" + std::to_string(next_attack_++);
  auto attack = std::make_unique<Attack>();
  attack->session = std::make_unique<AttackSession>(
      world_->sim(), iface, cfg, [this, id](const FeedEvent& e) { feed_.append(id, e); }, id);
  attacks_.emplace(id, std::move(attack));
  LogData out = LogData::object();
  out["attack_id"] = id;
  return {201, std::move(out)};
}

ServiceResponse Service::stop_attack(const std::string& id) {
  auto it = attacks_.find(id);
  if (it == attacks_.end()) throw NotFoundError("unknown attack " + id);
  auto& a = *it->second;
  if (!a.stats) a.stats = a.session->stop();
  LogData out = stats_json(*a.stats);
  out["attack_id"] = id;
  return {200, std::move(out)};
}

ServiceResponse Service::set_pace(const LogData& body) {
  const auto mode = body_field<std::string>(body, "mode", "");
  if (mode == "realtime") {
    const double ratio = body_field<double>(body, "ratio", 1.0);
    if (!(ratio > 0.0)) throw DomainError("ratio must be positive");
    pace_ = PaceMode::Realtime;
    ratio_ = ratio;
    wall_base_ = std::chrono::steady_clock::now();
    sim_base_ = world_->sim().now();
  } else if (mode == "paused") {
    pace_ = PaceMode::Paused;
  } else if (mode == "step") {
    const auto ms = body_field<SimTime>(body, "ms", -1);
    if (ms < 0) throw DomainError("step needs a non-negative ms");
    pace_ = PaceMode::Step;
    world_->sim().advance_until(world_->sim().now() + ms);
  } else {
    throw DomainError("mode must be realtime, paused or step");
  }
  return sim_status();
}

ServiceResponse Service::sim_status() {
  LogData out = LogData::object();
  out["mode"] = std::string(pace_name(pace_));
  out["ratio"] = ratio_;
  out["now"] = world_->sim().now();
  return {200, std::move(out)};
}

int Service::listen(const std::string& host, int port) {
  http_ = std::make_unique<httplib::Server>();
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query.emplace(k, v);
    auto r = handle(req.method, req.path, req.body, query);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  http_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"}});
  http_->Get(R"(/api/.*)", route);
  http_->Post(R"(/api/.*)", route);
  http_->Delete(R"(/api/.*)", route);
  http_->Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  const int bound = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw ConfigError("cannot listen on " + host + ":" + std::to_string(port));
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return bound;
}

}  // namespace jamrange
